//! Dark-state and resonance analysis.

use alloc::format;
use alloc::vec::Vec;

use crate::dynamics::{DensityMatrix, DriveParams, C64};
use crate::error::{Error, Result};

/// Ground-state zero-field splitting of the NV⁻ centre, Hz.
pub const NV_ZERO_FIELD_SPLITTING_HZ: f64 = 2.88e9;
/// Electron spin Zeeman shift per m_s = ±1 sublevel, Hz/gauss.
pub const NV_GYROMAGNETIC_HZ_PER_GAUSS: f64 = 2.80e6;

/// How the zero-field splitting of |2⟩,|3⟩ combines with the Zeeman splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeemanCombination {
    /// Δ = √(Δ₀² + (2γₑB)²): level repulsion between strain and field.
    #[default]
    Quadrature,
    /// Δ = Δ₀ + 2γₑB: appropriate once the field dominates.
    Linear,
}

/// Ground-manifold structure, all frequencies in Hz relative to |1⟩ (m_s = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelStructure {
    pub d_gs: f64,
    pub delta_pm: f64,
    /// Magnetic field magnitude, gauss.
    pub b_field: f64,
    /// Hz per gauss.
    pub gyromag: f64,
    pub combination: ZeemanCombination,
}

impl LevelStructure {
    /// NV ground state with the default gyromagnetic coefficient.
    pub fn nv(delta_pm: f64, b_field: f64) -> Self {
        LevelStructure {
            d_gs: NV_ZERO_FIELD_SPLITTING_HZ,
            delta_pm,
            b_field,
            gyromag: NV_GYROMAGNETIC_HZ_PER_GAUSS,
            combination: ZeemanCombination::Quadrature,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("d_gs", self.d_gs, self.d_gs > 0.0),
            ("delta_pm", self.delta_pm, self.delta_pm >= 0.0),
            ("b_field", self.b_field, self.b_field >= 0.0),
            ("gyromag", self.gyromag, self.gyromag > 0.0),
        ];
        for (name, v, ok) in checks {
            if !ok || !v.is_finite() {
                return Err(Error::invalid(name, format!("out of range: {v}")));
            }
        }
        Ok(())
    }

    /// Splitting Δ between |2⟩ and |3⟩, Hz.
    pub fn splitting(&self) -> f64 {
        let zeeman = 2.0 * self.gyromag * self.b_field;
        match self.combination {
            ZeemanCombination::Quadrature => libm::hypot(self.delta_pm, zeeman),
            ZeemanCombination::Linear => self.delta_pm + zeeman,
        }
    }

    /// (E₂, E₃) = d_gs ∓ Δ/2, Hz.
    pub fn energies(&self) -> (f64, f64) {
        let half = 0.5 * self.splitting();
        (self.d_gs - half, self.d_gs + half)
    }
}

/// Modulation frequencies (Hz) of the two CPT dips: f_mod = E₂ and f_mod = E₃.
pub fn predict_dip_frequencies(levels: &LevelStructure) -> Result<(f64, f64)> {
    levels.validate()?;
    Ok(levels.energies())
}

/// Dark subspace of the ground manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct DarkReport {
    pub dimension: usize,
    /// Orthonormal amplitude vectors over (|1⟩, |2⟩, |3⟩).
    pub basis: Vec<[C64; 3]>,
    /// Largest |⟨4|H|v⟩| = |Σᵢ Ωᵢvᵢ|/2 over the basis, rad/s.
    pub residual: f64,
}

pub const DEFAULT_DARK_TOLERANCE: f64 = 1e-9;

fn dot(a: &[C64; 3], b: &[C64; 3]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64; 3]) -> f64 {
    libm::sqrt(a.iter().map(|c| c.norm_sqr()).sum::<f64>())
}

/// Ground superpositions that are stationary under the ground block of H and
/// have zero coupling amplitude into |4⟩.
///
/// Levels whose detunings agree to within `tol · scale` (scale = largest |Ω| or
/// |δ|) are treated as degenerate. Inside each degenerate group the dark space is
/// the complement of the coupling vector; an undriven level is dark on its own.
pub fn dark_subspace(p: &DriveParams, tol: f64) -> Result<DarkReport> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid("tol", format!("must be positive, got {tol}")));
    }
    if !p.is_finite() {
        return Err(Error::invalid("drive", "non-finite drive parameters"));
    }
    let omega_max = p.omega.iter().map(|w| w.norm()).fold(0.0, f64::max);
    if omega_max == 0.0 {
        return Err(Error::invalid("omega", "all Rabi frequencies are zero; the whole ground manifold is dark"));
    }
    let det = p.ground_detunings();
    let scale = det.iter().map(|d| d.abs()).fold(omega_max, f64::max);
    let same = |a: usize, b: usize| (det[a] - det[b]).abs() <= tol * scale;

    // Degenerate groups (at most three levels, so transitive closure by hand).
    let mut group = [0usize, 1, 2];
    for a in 0..3 {
        for b in (a + 1)..3 {
            if same(a, b) {
                let (ga, gb) = (group[a], group[b]);
                for g in group.iter_mut() {
                    if *g == gb {
                        *g = ga;
                    }
                }
            }
        }
    }

    let zero = C64::new(0.0, 0.0);
    let mut basis: Vec<[C64; 3]> = Vec::new();
    for label in 0..3 {
        let members: Vec<usize> = (0..3).filter(|&i| group[i] == label).collect();
        if members.is_empty() {
            continue;
        }
        let driven: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&i| p.omega[i].norm() > tol * omega_max)
            .collect();
        if driven.is_empty() {
            for &i in &members {
                let mut v = [zero; 3];
                v[i] = C64::new(1.0, 0.0);
                basis.push(v);
            }
            continue;
        }
        // Coupling vector w with ⟨w, c⟩ = Σ Ωᵢcᵢ.
        let mut w = [zero; 3];
        for &i in &members {
            w[i] = p.omega[i].conj();
        }
        let wn = norm(&w);
        let w_hat = w.map(|c| c / wn);
        let mut found: Vec<[C64; 3]> = Vec::new();
        let mut candidates: Vec<[C64; 3]> = Vec::new();
        if members.len() == 2 {
            let (a, b) = (members[0], members[1]);
            let mut v = [zero; 3];
            v[a] = p.omega[b];
            v[b] = -p.omega[a];
            candidates.push(v);
        }
        for &i in &members {
            let mut v = [zero; 3];
            v[i] = C64::new(1.0, 0.0);
            candidates.push(v);
        }
        for mut v in candidates {
            if found.len() == members.len() - 1 {
                break;
            }
            for _ in 0..2 {
                for u in core::iter::once(&w_hat).chain(found.iter()) {
                    let proj = dot(u, &v);
                    for k in 0..3 {
                        v[k] -= u[k] * proj;
                    }
                }
            }
            let n = norm(&v);
            if n > 1e-3 {
                found.push(v.map(|c| c / n));
            }
        }
        basis.extend(found);
    }

    let residual = basis
        .iter()
        .map(|v| (0..3).map(|i| p.omega[i] * v[i]).sum::<C64>().norm() * 0.5)
        .fold(0.0, f64::max);
    Ok(DarkReport {
        dimension: basis.len(),
        basis,
        residual,
    })
}

/// |ρᵢⱼ| / √(ρᵢᵢρⱼⱼ) clamped to [0, 1].
pub fn coherence_fraction(rho: &DensityMatrix, i: usize, j: usize) -> Result<f64> {
    for level in [i, j] {
        let p = rho.population(level);
        if !(p >= 1e-14) {
            return Err(Error::UndefinedFraction { level, population: p });
        }
    }
    let bound = libm::sqrt(rho.population(i) * rho.population(j));
    Ok((rho.coherence(i, j).norm() / bound).clamp(0.0, 1.0))
}

/// Ground coherences ρ₁₂ and ρ₁₃ as fractions of their Cauchy–Schwarz maxima.
pub fn coherence_quality(rho: &DensityMatrix) -> (Result<f64>, Result<f64>) {
    (coherence_fraction(rho, 0, 1), coherence_fraction(rho, 0, 2))
}

/// Ground coherences ρ₁ⱼ (j = 2, 3) relative to a mixture of the Λ dark states.
///
/// A dark state (Ωⱼ|1⟩ − Ω₁|j⟩)/N has |ρ₁ⱼ|/ρⱼⱼ = |Ωⱼ/Ω₁|, and so does any
/// statistical mixture that populates |j⟩ only through it. The returned values
/// are |ρ₁ⱼ|·|Ω₁| / (ρⱼⱼ·|Ωⱼ|), equal to 1 for such a mixture.
pub fn dark_mixture_coherence(rho: &DensityMatrix, drive: &DriveParams) -> (Result<f64>, Result<f64>) {
    let fraction = |j: usize| -> Result<f64> {
        let p = rho.population(j);
        if !(p >= 1e-14) {
            return Err(Error::UndefinedFraction { level: j, population: p });
        }
        let (w1, wj) = (drive.omega[0].norm(), drive.omega[j].norm());
        if !(w1 > 0.0 && wj > 0.0) {
            return Err(Error::invalid("omega", "mixture coherence needs Ω₁ and Ωⱼ non-zero"));
        }
        Ok(rho.coherence(0, j).norm() * w1 / (p * wj))
    };
    (fraction(1), fraction(2))
}
