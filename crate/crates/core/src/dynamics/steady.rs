use alloc::format;

use nalgebra::{SMatrix, SVector};

use super::liouvillian::HermitianBasis;
use super::{DensityMatrix, Liouvillian};
use crate::error::{Error, Result};

/// Relative singular-value cutoff below which a direction counts as null.
pub const NULL_SPACE_TOLERANCE: f64 = 1e-9;

fn sorted_singular_values(m: &SMatrix<f64, 16, 16>) -> [f64; 16] {
    let mut s: [f64; 16] = m.singular_values().into();
    s.sort_by(|a, b| a.total_cmp(b));
    s
}

/// Number of singular values of L at or below `tol · σ_max`.
pub fn null_space_dimension(l: &Liouvillian, tol: f64) -> usize {
    let s = sorted_singular_values(&l.to_real());
    let cutoff = tol * s[15];
    s.iter().take_while(|&&v| v <= cutoff).count()
}

/// Unique stationary state of L.
///
/// The null space is measured with an SVD; the state itself comes from an LU
/// solve of L with the ρ₁₁ row replaced by the trace condition (that row is
/// redundant because the diagonal rows of a trace-preserving L sum to zero).
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let norm = l.norm();
    if !norm.is_finite() {
        return Err(Error::invalid("liouvillian", "non-finite entries"));
    }
    let defect = l.trace_defect();
    if defect > 1e-9 * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::invalid(
            "liouvillian",
            format!("not trace preserving (column trace defect {defect:e})"),
        ));
    }

    let m = l.to_real();
    let s = sorted_singular_values(&m);
    let cutoff = NULL_SPACE_TOLERANCE * s[15];
    let dimension = s.iter().take_while(|&&v| v <= cutoff).count();
    match dimension {
        0 => {
            return Err(Error::NumericalFailure(format!(
                "no null space at tolerance: smallest singular value ratio {:e}",
                s[0] / s[15]
            )))
        }
        1 => {}
        d => return Err(Error::DegenerateSteadyState { dimension: d }),
    }

    let mut a = m;
    for k in 0..16 {
        a[(0, k)] = if k < 4 { 1.0 } else { 0.0 };
    }
    let mut rhs = SVector::<f64, 16>::zeros();
    rhs[0] = 1.0;
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NumericalFailure("singular augmented system".into()))?;
    Ok(DensityMatrix::from_matrix_unchecked(HermitianBasis::matrix(&x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_hamiltonian, build_liouvillian, DriveParams, RelaxationParams, C64};
    use crate::units::two_pi_mhz;

    fn nv_relax(gamma1: f64) -> RelaxationParams {
        let g = two_pi_mhz(13.4);
        RelaxationParams::symmetric([0.8 * g, 0.1474 * g, 0.0526 * g], two_pi_mhz(23.0), gamma1).unwrap()
    }

    #[test]
    fn single_drive_with_decay_to_undriven_levels_is_degenerate() {
        let g = two_pi_mhz(13.4);
        let relax = RelaxationParams::symmetric([0.6 * g, 0.2 * g, 0.2 * g], 0.0, 0.0).unwrap();
        let h = build_hamiltonian(&DriveParams::real([two_pi_mhz(10.0), 0.0, 0.0], 0.0, 0.0, two_pi_mhz(5.0))).unwrap();
        let l = build_liouvillian(&h, &relax).unwrap();
        match steady_state(&l) {
            Err(Error::DegenerateSteadyState { dimension }) => assert_eq!(dimension, 2),
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn generic_drive_has_valid_unique_state() {
        let p = DriveParams::real([two_pi_mhz(15.0), two_pi_mhz(6.0), two_pi_mhz(4.0)], two_pi_mhz(3.0), two_pi_mhz(-2.0), two_pi_mhz(5.0));
        let l = build_liouvillian(&build_hamiltonian(&p).unwrap(), &nv_relax(two_pi_mhz(1.2))).unwrap();
        let rho = steady_state(&l).unwrap();
        DensityMatrix::new(*rho.matrix()).unwrap();
        let residual = l.apply(rho.matrix()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(residual <= 1e-10 * l.norm(), "residual {residual:e}");
        assert!(rho.population(3) > 1e-3);
    }

    #[test]
    fn lambda_resonance_without_ground_dephasing_traps_in_dark_state() {
        let (w1, w2, w3) = (two_pi_mhz(12.0), two_pi_mhz(5.0), two_pi_mhz(3.0));
        let d = two_pi_mhz(4.0);
        let p = DriveParams::real([w1, w2, w3], d, d, two_pi_mhz(5.0));
        let g = two_pi_mhz(13.4);
        let relax = RelaxationParams::new(
            [0.8 * g, 0.1 * g, 0.1 * g],
            [0.0, two_pi_mhz(1.0), two_pi_mhz(1.0), g, g, g],
        )
        .unwrap();
        let l = build_liouvillian(&build_hamiltonian(&p).unwrap(), &relax).unwrap();
        let rho = steady_state(&l).unwrap();
        assert!(rho.population(3).abs() <= 1e-10);
        let dark = DensityMatrix::pure([C64::new(w2, 0.0), C64::new(-w1, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert!(rho.max_abs_diff(&dark) < 1e-9, "diff {}", rho.max_abs_diff(&dark));
    }

    #[test]
    fn non_trace_preserving_generator_is_rejected() {
        let mut l = build_liouvillian(&nalgebra::Matrix4::zeros(), &nv_relax(1.0)).unwrap();
        l.matrix[(0, 0)] = C64::new(-1.0, 0.0);
        assert!(matches!(steady_state(&l), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn undriven_dephased_system_is_degenerate() {
        // No drive: every ground population is stationary.
        let l = build_liouvillian(&nalgebra::Matrix4::zeros(), &nv_relax(1.0)).unwrap();
        assert!(matches!(steady_state(&l), Err(Error::DegenerateSteadyState { dimension: 3 })));
        assert_eq!(null_space_dimension(&l, NULL_SPACE_TOLERANCE), 3);
    }
}
