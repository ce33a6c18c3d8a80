use alloc::format;

use nalgebra::SymmetricEigen;

use super::{Matrix4c, C64};
use crate::error::{Error, Result};

/// Inputs of the rotating-frame Hamiltonian: three complex Rabi frequencies
/// and the detunings δ₁, δ₂ and the 2–3 splitting δ₂₃, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    pub omega: [C64; 3],
    pub delta1: f64,
    pub delta2: f64,
    pub delta23: f64,
}

impl DriveParams {
    /// Drive with real, non-negative Rabi frequencies.
    pub fn real(omega: [f64; 3], delta1: f64, delta2: f64, delta23: f64) -> Self {
        DriveParams {
            omega: omega.map(|w| C64::new(w, 0.0)),
            delta1,
            delta2,
            delta23,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.omega.iter().all(|w| w.re.is_finite() && w.im.is_finite())
            && self.delta1.is_finite()
            && self.delta2.is_finite()
            && self.delta23.is_finite()
    }

    /// Diagonal of the ground block: (δ₁, δ₂, δ₂+δ₂₃).
    pub fn ground_detunings(&self) -> [f64; 3] {
        [self.delta1, self.delta2, self.delta2 + self.delta23]
    }
}

/// Relaxation rates in rad/s.
///
/// `gamma_pop = [Γ₁, Γ₂, Γ₃]` are decay rates from |4⟩ into |1⟩,|2⟩,|3⟩.
/// `gamma_coh = [γ₁₂, γ₁₃, γ₂₃, γ₁₄, γ₂₄, γ₃₄]` damp the off-diagonal elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationParams {
    pub gamma_pop: [f64; 3],
    pub gamma_coh: [f64; 6],
}

impl RelaxationParams {
    pub fn new(gamma_pop: [f64; 3], gamma_coh: [f64; 6]) -> Result<Self> {
        let r = RelaxationParams {
            gamma_pop,
            gamma_coh,
        };
        r.validate()?;
        Ok(r)
    }

    /// Symmetric form used throughout the fits: every optical coherence decays
    /// at Γ/2 + γ₄ and every ground coherence at γ₁.
    pub fn symmetric(gamma_pop: [f64; 3], gamma4: f64, gamma1: f64) -> Result<Self> {
        if !(gamma4 >= 0.0 && gamma4.is_finite()) {
            return Err(Error::invalid("gamma4", format!("must be finite and >= 0, got {gamma4}")));
        }
        if !(gamma1 >= 0.0 && gamma1.is_finite()) {
            return Err(Error::invalid("gamma1", format!("must be finite and >= 0, got {gamma1}")));
        }
        let optical = 0.5 * (gamma_pop[0] + gamma_pop[1] + gamma_pop[2]) + gamma4;
        Self::new(
            gamma_pop,
            [gamma1, gamma1, gamma1, optical, optical, optical],
        )
    }

    pub fn validate(&self) -> Result<()> {
        const POP: [&str; 3] = ["Gamma1", "Gamma2", "Gamma3"];
        const COH: [&str; 6] = ["gamma12", "gamma13", "gamma23", "gamma14", "gamma24", "gamma34"];
        for (name, &v) in POP.iter().zip(&self.gamma_pop) {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(*name, format!("rate must be finite and >= 0, got {v}")));
            }
        }
        for (name, &v) in COH.iter().zip(&self.gamma_coh) {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(*name, format!("rate must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Γ = Γ₁ + Γ₂ + Γ₃.
    pub fn gamma_total(&self) -> f64 {
        self.gamma_pop.iter().sum()
    }

    /// Decay rate of ρᵢⱼ (zero-based, i ≠ j, symmetric in i and j).
    pub fn coherence_rate(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        match (a, b) {
            (0, 1) => self.gamma_coh[0],
            (0, 2) => self.gamma_coh[1],
            (1, 2) => self.gamma_coh[2],
            (0, 3) => self.gamma_coh[3],
            (1, 3) => self.gamma_coh[4],
            (2, 3) => self.gamma_coh[5],
            _ => panic!("no coherence rate for ({i}, {j})"),
        }
    }
}

/// 4×4 density matrix ρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Matrix4c);

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-10;

    /// Validates hermiticity, unit trace and positivity.
    pub fn new(m: Matrix4c) -> Result<Self> {
        let rho = DensityMatrix(m);
        let herm = rho.hermiticity_error();
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::invalid("rho", format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > Self::TRACE_TOL {
            return Err(Error::invalid("rho", format!("trace is {tr}, expected 1")));
        }
        let min = rho.min_eigenvalue();
        if min < -Self::POSITIVITY_TOL {
            return Err(Error::invalid("rho", format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    pub fn from_matrix_unchecked(m: Matrix4c) -> Self {
        DensityMatrix(m)
    }

    pub fn diagonal(populations: [f64; 4]) -> Result<Self> {
        let mut m = Matrix4c::zeros();
        for (i, p) in populations.into_iter().enumerate() {
            m[(i, i)] = C64::new(p, 0.0);
        }
        Self::new(m)
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) state vector.
    pub fn pure(state: [C64; 4]) -> Result<Self> {
        let norm2: f64 = state.iter().map(|c| c.norm_sqr()).sum();
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(Error::invalid("state", "zero or non-finite norm"));
        }
        let m = Matrix4c::from_fn(|i, j| state[i] * state[j].conj() / norm2);
        Ok(DensityMatrix(m))
    }

    pub fn matrix(&self) -> &Matrix4c {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix4c {
        self.0
    }

    /// ρᵢᵢ (zero-based).
    pub fn population(&self, i: usize) -> f64 {
        self.0[(i, i)].re
    }

    /// ρᵢⱼ (zero-based).
    pub fn coherence(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.0[(i, i)].re).sum()
    }

    /// max |ρ − ρ†|.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest absolute elementwise difference to another state.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (self.0 - other.0).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_rates() {
        assert!(RelaxationParams::new([1.0, -1.0, 0.0], [0.0; 6]).is_err());
        assert!(RelaxationParams::new([1.0, 0.0, 0.0], [0.0, 0.0, f64::NAN, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn symmetric_rates_follow_constraint() {
        let r = RelaxationParams::symmetric([8.0, 1.0, 1.0], 3.0, 0.5).unwrap();
        assert_eq!(r.gamma_total(), 10.0);
        for (i, j) in [(0, 3), (1, 3), (2, 3)] {
            assert_eq!(r.coherence_rate(i, j), 8.0);
        }
        for (i, j) in [(0, 1), (0, 2), (2, 1)] {
            assert_eq!(r.coherence_rate(i, j), 0.5);
        }
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::diagonal([0.5, 0.5, 0.0, 0.0]).is_ok());
        assert!(DensityMatrix::diagonal([0.5, 0.6, 0.0, 0.0]).is_err());
        assert!(DensityMatrix::diagonal([1.5, -0.5, 0.0, 0.0]).is_err());
        let mut m = Matrix4c::zeros();
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(0, 1)] = C64::new(0.0, 1e-6);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn pure_state_is_normalized_projector() {
        let rho = DensityMatrix::pure([C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        assert!((rho.coherence(0, 1) - C64::new(0.0, -0.5)).norm() < 1e-15);
        assert!(DensityMatrix::new(*rho.matrix()).is_ok());
    }
}
