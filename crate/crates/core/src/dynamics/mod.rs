//! Four-level Λ model: rotating-frame Hamiltonian, relaxation, Liouvillian,
//! steady states and time evolution.
//!
//! Level indices are zero-based in code: `0,1,2` are the ground states
//! |1⟩,|2⟩,|3⟩ and `3` is the excited state |4⟩. All rates, detunings and
//! Rabi frequencies are angular frequencies in rad/s.

mod evolve;
mod hamiltonian;
mod liouvillian;
mod steady;
mod types;

pub use evolve::{evolve, expm16};
pub use hamiltonian::build_hamiltonian;
pub use liouvillian::{build_liouvillian, HermitianBasis, Liouvillian};
pub use steady::{null_space_dimension, steady_state, NULL_SPACE_TOLERANCE};
pub use types::{DensityMatrix, DriveParams, RelaxationParams};

use nalgebra::SMatrix;
use num_complex::Complex;

pub type C64 = Complex<f64>;
/// 4×4 complex operator on the model's Hilbert space.
pub type Matrix4c = SMatrix<C64, 4, 4>;

/// Detected fluorescence rate, Γ·ρ₄₄, in photons/s up to collection efficiency.
///
/// Negative excited populations below the eigenvalue noise floor are clamped to zero.
pub fn fluorescence_rate(rho: &DensityMatrix, relax: &RelaxationParams) -> f64 {
    let p = rho.population(3);
    relax.gamma_total() * if p > 0.0 { p } else { 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::NV_GAMMA_TOTAL;

    fn relax_total(gamma: f64) -> RelaxationParams {
        RelaxationParams::new([gamma, 0.0, 0.0], [0.0; 6]).unwrap()
    }

    #[test]
    fn fluorescence_of_empty_excited_state_is_zero() {
        let rho = DensityMatrix::diagonal([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(fluorescence_rate(&rho, &relax_total(NV_GAMMA_TOTAL)), 0.0);
    }

    #[test]
    fn fluorescence_of_full_excited_state_is_gamma() {
        let rho = DensityMatrix::diagonal([0.0, 0.0, 0.0, 1.0]).unwrap();
        let rate = fluorescence_rate(&rho, &relax_total(NV_GAMMA_TOTAL));
        assert!((rate - 2.0 * core::f64::consts::PI * 13.4e6).abs() < 1e-6);
    }

    #[test]
    fn fluorescence_is_linear_in_population() {
        let rho = DensityMatrix::diagonal([0.75, 0.0, 0.0, 0.25]).unwrap();
        let relax = RelaxationParams::new([1.0, 2.0, 1.0], [0.0; 6]).unwrap();
        assert_eq!(fluorescence_rate(&rho, &relax), 1.0);
    }

    #[test]
    fn fluorescence_clamps_noise_below_zero() {
        let mut m = Matrix4c::zeros();
        m[(0, 0)] = C64::new(1.0 + 1e-12, 0.0);
        m[(3, 3)] = C64::new(-1e-12, 0.0);
        let rho = DensityMatrix::from_matrix_unchecked(m);
        assert_eq!(fluorescence_rate(&rho, &relax_total(1.0)), 0.0);
    }
}
