use alloc::format;

use super::params::ModelParams;
use crate::dynamics::RelaxationParams;
use crate::error::{Error, Result};
use crate::spectrum::{ExperimentConfig, GroundLevels, LaserOn};

/// Fully determined model shared by all traces of a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstrainedModel {
    pub gamma_total: f64,
    pub relax: RelaxationParams,
    /// (1, s₂, s₃).
    pub strengths: [f64; 3],
    pub levels: GroundLevels,
}

/// Per-trace experimental settings that are not fitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSetup {
    pub laser_on: LaserOn,
    pub power: f64,
    pub sideband_rel: f64,
    /// Index of the linked power group whose rabi_scale this trace uses.
    pub group: usize,
}

impl ConstrainedModel {
    pub fn config(&self, setup: &TraceSetup, rabi_scale: f64, carrier_detune: f64) -> ExperimentConfig {
        ExperimentConfig {
            levels: self.levels,
            laser_on: setup.laser_on,
            carrier_detune,
            power: setup.power,
            sideband_rel: setup.sideband_rel,
            strengths: self.strengths,
            rabi_scale,
            relax: self.relax,
        }
    }

    /// Largest relative violation of the constraint identities.
    pub fn closure_defect(&self) -> f64 {
        let g = self.gamma_total;
        let [g1, g2, g3] = self.relax.gamma_pop;
        let [c12, c13, c23, c14, c24, c34] = self.relax.gamma_coh;
        let sum = ((g1 + g2 + g3) - g).abs() / g;
        // Γ₃/Γ₂ = s₃/s₂ written without division.
        let ratio = (g3 * self.strengths[1] - g2 * self.strengths[2]).abs() / (g * (self.strengths[1] + self.strengths[2]));
        let optical = (c14 - c24).abs().max((c14 - c34).abs()) / g;
        let ground = (c12 - c13).abs().max((c12 - c23).abs()) / g.max(c12);
        sum.max(ratio).max(optical).max(ground)
    }
}

/// Builds the relaxation model from the free parameters:
/// ΣΓᵢ = Γ, Γ₁ = branching·Γ, Γ₃/Γ₂ = s₃/s₂, γᵢ₄ = Γ/2 + γ₄, γ₁₂ = γ₁₃ = γ₂₃ = γ₁.
pub fn apply_constraints(p: &ModelParams, gamma_total: f64) -> Result<ConstrainedModel> {
    if !(gamma_total > 0.0 && gamma_total.is_finite()) {
        return Err(Error::invalid("gamma_total", format!("must be positive, got {gamma_total}")));
    }
    p.check_bounds()?;
    if p.s2 + p.s3 <= 0.0 {
        return Err(Error::invalid("s2", "s2 + s3 must be positive to split the decay into |2>,|3>"));
    }
    let g1 = p.branching * gamma_total;
    let rest = gamma_total - g1;
    let g2 = rest * p.s2 / (p.s2 + p.s3);
    let g3 = rest - g2;
    let relax = RelaxationParams::symmetric([g1, g2, g3], p.gamma4, p.gamma1)?;
    Ok(ConstrainedModel {
        gamma_total,
        relax,
        strengths: [1.0, p.s2, p.s3],
        levels: GroundLevels { e2: p.e2, e3: p.e3 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{two_pi_mhz, NV_GAMMA_TOTAL};
    use alloc::vec;
    use proptest::prelude::*;

    fn params(branching: f64, s2: f64, s3: f64, gamma4: f64) -> ModelParams {
        ModelParams {
            s2,
            s3,
            branching,
            gamma4,
            gamma1: two_pi_mhz(1.2),
            e2: 2.8775e9,
            e3: 2.8825e9,
            rabi_scale: vec![1e10],
            traces: vec![],
        }
    }

    #[test]
    fn fitted_branching_split() {
        let g = NV_GAMMA_TOTAL;
        let m = apply_constraints(&params(0.8, 0.14, 0.05, two_pi_mhz(23.0)), g).unwrap();
        let [g1, g2, g3] = m.relax.gamma_pop;
        assert!((g1 / g - 0.8).abs() < 1e-12);
        assert!((g2 / g - 0.2 / (1.0 + 5.0 / 14.0)).abs() < 1e-12);
        assert!((g2 / g - 0.1474).abs() < 1e-4);
        assert!((g3 / g - 0.0526).abs() < 1e-4);
        assert!(((g1 + g2 + g3) - g).abs() <= 1e-12 * g);
    }

    #[test]
    fn full_branching_into_level_one() {
        let m = apply_constraints(&params(1.0, 0.14, 0.05, 0.0), NV_GAMMA_TOTAL).unwrap();
        assert_eq!(m.relax.gamma_pop[1], 0.0);
        assert_eq!(m.relax.gamma_pop[2], 0.0);
    }

    #[test]
    fn radiative_limit() {
        let g = NV_GAMMA_TOTAL;
        let m = apply_constraints(&params(0.8, 0.14, 0.05, 0.0), g).unwrap();
        for k in 3..6 {
            assert!((m.relax.gamma_coh[k] - g / 2.0).abs() <= 1e-12 * g);
        }
    }

    #[test]
    fn bound_violation_names_parameter() {
        match apply_constraints(&params(1.2, 0.14, 0.05, 0.0), NV_GAMMA_TOTAL) {
            Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "branching"),
            other => panic!("{other:?}"),
        }
        match apply_constraints(&params(0.8, -0.1, 0.05, 0.0), NV_GAMMA_TOTAL) {
            Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "s2"),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn closure_identities_hold(
            branching in 0.0f64..=1.0,
            s2 in 1e-4f64..2.0,
            s3 in 0.0f64..2.0,
            gamma4 in 0.0f64..1e9,
        ) {
            let m = apply_constraints(&params(branching, s2, s3, gamma4), NV_GAMMA_TOTAL).unwrap();
            prop_assert!(m.closure_defect() <= 1e-12);
            prop_assert!(m.relax.gamma_pop.iter().all(|&v| v >= 0.0));
        }
    }
}
