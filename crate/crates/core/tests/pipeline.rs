//! Properties that cross module boundaries: dark states found by the analysis
//! are the states the dynamics relaxes into, and the configuration mapping
//! places dips where the level structure predicts.

use cptsim_core::analysis::{dark_subspace, predict_dip_frequencies, LevelStructure, DEFAULT_DARK_TOLERANCE};
use cptsim_core::dynamics::{build_hamiltonian, build_liouvillian, steady_state, DriveParams, RelaxationParams};
use cptsim_core::exec::Sequential;
use cptsim_core::spectrum::{
    detunings_from_config, linspace, sweep, ExperimentConfig, GroundLevels, LaserOn, Readout,
};
use cptsim_core::units::{hz_to_rad, two_pi_mhz, NV_GAMMA_TOTAL};
use proptest::prelude::*;

fn relax(branching: f64, split: f64, gamma4: f64, gamma1: f64) -> RelaxationParams {
    let rest = (1.0 - branching) * NV_GAMMA_TOTAL;
    RelaxationParams::symmetric([branching * NV_GAMMA_TOTAL, split * rest, (1.0 - split) * rest], gamma4, gamma1)
        .unwrap()
}

fn config(levels: GroundLevels, laser_on: LaserOn, gamma1: f64) -> ExperimentConfig {
    ExperimentConfig {
        levels,
        laser_on,
        carrier_detune: 0.0,
        power: 1.5e-6,
        sideband_rel: 0.5,
        strengths: [1.0, 0.5, 0.5],
        rabi_scale: two_pi_mhz(5.0) / 1.5e-6f64.sqrt(),
        relax: relax(0.8, 0.5, two_pi_mhz(23.0), gamma1),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reported_dark_states_trap_all_population(
        omega in prop::array::uniform3(0.3f64..3.0),
        branching in 0.1f64..0.9,
        split in 0.1f64..0.9,
        gamma4 in 0.0f64..2.0,
        delta1 in -1.0f64..1.0,
        delta23 in 0.5f64..3.0,
        upper in any::<bool>(),
    ) {
        let g = NV_GAMMA_TOTAL;
        let delta23 = delta23 * g;
        let delta1 = delta1 * g;
        let delta2 = if upper { delta1 - delta23 } else { delta1 };
        let drive = DriveParams::real(omega.map(|w| w * g), delta1, delta2, delta23);
        let report = dark_subspace(&drive, DEFAULT_DARK_TOLERANCE).unwrap();
        prop_assert!(report.dimension >= 1);
        let l = build_liouvillian(&build_hamiltonian(&drive).unwrap(), &relax(branching, split, gamma4 * g, 0.0)).unwrap();
        let rho = steady_state(&l).unwrap();
        prop_assert!(rho.population(3) <= 1e-10, "rho44 = {}", rho.population(3));
    }

    #[test]
    fn two_photon_detuning_is_fixed_by_the_modulation(
        f_mod in 2.7e9f64..3.0e9,
        detune in -50e6f64..50e6,
        ms1 in any::<bool>(),
    ) {
        let mut cfg = config(GroundLevels { e2: 2.8775e9, e3: 2.8825e9 }, if ms1 { LaserOn::Ms1 } else { LaserOn::Ms0 }, 0.0);
        cfg.carrier_detune = detune;
        let d = detunings_from_config(&cfg, f_mod).unwrap();
        let tol = 1e-6 * hz_to_rad(f_mod);
        prop_assert!((d.delta1 - d.delta2 - hz_to_rad(f_mod - 2.8775e9)).abs() <= tol);
        prop_assert!((d.delta1 - d.delta2 - d.delta23 - hz_to_rad(f_mod - 2.8825e9)).abs() <= tol);
    }
}

#[test]
fn sweep_minima_sit_on_predicted_dips() {
    let step = 0.25e6;
    for b in [0.0, 4.0, 10.0, 17.0] {
        let structure = LevelStructure::nv(5e6, b);
        let (lo, hi) = predict_dip_frequencies(&structure).unwrap();
        for laser_on in [LaserOn::Ms0, LaserOn::Ms1] {
            let cfg = config(GroundLevels::from(&structure), laser_on, 0.0);
            for target in [lo, hi] {
                let grid = linspace(target - 2e6, target + 2e6, 17);
                let s = sweep(&cfg, &grid, &Readout::model_only(1.0), &Sequential).unwrap();
                let found = grid[s.argmin()];
                assert!((found - target).abs() <= step / 2.0, "b = {b}, {laser_on:?}: {found} vs {target}");
                assert!(s.intensity[s.argmin()] <= 1e-10 * s.intensity.iter().copied().fold(0.0, f64::max));
            }
        }
    }
}

#[test]
fn ground_dephasing_fills_the_dip() {
    let levels = GroundLevels { e2: 2.8775e9, e3: 2.8825e9 };
    let floor = |gamma1: f64| {
        let cfg = config(levels, LaserOn::Ms0, gamma1);
        let s = sweep(&cfg, &[2.8775e9, 2.8800e9], &Readout::model_only(1.0), &Sequential).unwrap();
        s.intensity[0] / s.intensity[1]
    };
    let floors: Vec<f64> = [0.0, 0.3, 1.2, 5.0].iter().map(|&g| floor(two_pi_mhz(g))).collect();
    assert!(floors.windows(2).all(|w| w[1] > w[0]), "{floors:?}");
}
