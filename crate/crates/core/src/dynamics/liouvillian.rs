use alloc::format;

use nalgebra::{SMatrix, SVector};

use super::{Matrix4c, RelaxationParams, C64};
use crate::error::{Error, Result};

/// Index of ρᵢⱼ in the column-stacked vectorization.
#[inline]
pub(crate) const fn vec_index(i: usize, j: usize) -> usize {
    i + 4 * j
}

/// Generator of dρ/dt acting on the column-stacked vec(ρ), rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    pub matrix: SMatrix<C64, 16, 16>,
}

impl Liouvillian {
    /// dρ/dt for a given ρ.
    pub fn apply(&self, rho: &Matrix4c) -> Matrix4c {
        let v = SVector::<C64, 16>::from_iterator(rho.iter().copied());
        let out = self.matrix * v;
        Matrix4c::from_iterator(out.iter().copied())
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.matrix.iter().map(|c| c.norm_sqr()).sum::<f64>())
    }

    /// Largest |Σᵢ L[(i,i), k]| over all columns k: zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        (0..16)
            .map(|k| {
                (0..4)
                    .map(|i| self.matrix[(vec_index(i, i), k)])
                    .sum::<C64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    /// Real 16×16 matrix of the generator in the orthonormal Hermitian basis.
    ///
    /// The generator maps Hermitian matrices to Hermitian matrices, so in this
    /// basis its matrix is real and unitarily equivalent to `self.matrix`.
    pub fn to_real(&self) -> SMatrix<f64, 16, 16> {
        let mut out = SMatrix::<f64, 16, 16>::zeros();
        for b in 0..16 {
            let image = self.apply(&HermitianBasis::element(b));
            out.set_column(b, &HermitianBasis::coordinates(&image));
        }
        out
    }
}

/// Orthonormal basis of 4×4 Hermitian matrices: the four diagonal projectors,
/// then for each pair i<j the symmetric (Eᵢⱼ+Eⱼᵢ)/√2 and antisymmetric
/// i(Eᵢⱼ−Eⱼᵢ)/√2 elements.
pub struct HermitianBasis;

const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

impl HermitianBasis {
    pub fn element(a: usize) -> Matrix4c {
        let mut m = Matrix4c::zeros();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        if a < 4 {
            m[(a, a)] = C64::new(1.0, 0.0);
        } else {
            let (i, j) = PAIRS[(a - 4) / 2];
            if (a - 4).is_multiple_of(2) {
                m[(i, j)] = C64::new(s, 0.0);
                m[(j, i)] = C64::new(s, 0.0);
            } else {
                m[(i, j)] = C64::new(0.0, s);
                m[(j, i)] = C64::new(0.0, -s);
            }
        }
        m
    }

    /// Real coordinates of the Hermitian part of `m`.
    pub fn coordinates(m: &Matrix4c) -> SVector<f64, 16> {
        let mut x = SVector::<f64, 16>::zeros();
        for i in 0..4 {
            x[i] = m[(i, i)].re;
        }
        let r2 = core::f64::consts::SQRT_2;
        for (p, &(i, j)) in PAIRS.iter().enumerate() {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            x[4 + 2 * p] = r2 * z.re;
            x[5 + 2 * p] = r2 * z.im;
        }
        x
    }

    pub fn matrix(x: &SVector<f64, 16>) -> Matrix4c {
        let mut m = Matrix4c::zeros();
        for i in 0..4 {
            m[(i, i)] = C64::new(x[i], 0.0);
        }
        let s = core::f64::consts::FRAC_1_SQRT_2;
        for (p, &(i, j)) in PAIRS.iter().enumerate() {
            let z = C64::new(s * x[4 + 2 * p], s * x[5 + 2 * p]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
        m
    }
}

/// Builds L with L·vec(ρ) = vec(−i[h,ρ] + R[ρ]).
///
/// R[ρ]: ρ₄₄ decays at Γ and feeds ρᵢᵢ at Γᵢ; every off-diagonal ρᵢⱼ decays at γᵢⱼ.
/// There is no relaxation among the ground-state populations.
pub fn build_liouvillian(h: &Matrix4c, relax: &RelaxationParams) -> Result<Liouvillian> {
    relax.validate()?;
    let scale = h.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let mut herm: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            herm = herm.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    if herm > 1e-10 * scale || !herm.is_finite() {
        return Err(Error::invalid("hamiltonian", format!("not Hermitian (deviation {herm:e})")));
    }

    let mut l = SMatrix::<C64, 16, 16>::zeros();
    let minus_i = C64::new(0.0, -1.0);
    let plus_i = C64::new(0.0, 1.0);
    for i in 0..4 {
        for j in 0..4 {
            let row = vec_index(i, j);
            // −i H ρ
            for k in 0..4 {
                l[(row, vec_index(k, j))] += minus_i * h[(i, k)];
            }
            // +i ρ H
            for k in 0..4 {
                l[(row, vec_index(i, k))] += plus_i * h[(k, j)];
            }
            if i != j {
                l[(row, row)] -= C64::new(relax.coherence_rate(i, j), 0.0);
            }
        }
    }
    let excited = vec_index(3, 3);
    l[(excited, excited)] -= C64::new(relax.gamma_total(), 0.0);
    for (i, &g) in relax.gamma_pop.iter().enumerate() {
        l[(vec_index(i, i), excited)] += C64::new(g, 0.0);
    }
    Ok(Liouvillian { matrix: l })
}
