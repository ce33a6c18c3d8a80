//! Statistical behaviour of the scan simulator and the threshold procedure.

use cptsim::par::Rayon;
use cptsim::scans::{simulate_scans, NoiseModel};
use cptsim_core::dynamics::RelaxationParams;
use cptsim_core::exec::Sequential;
use cptsim_core::spectrum::{linspace, sweep, threshold_sum, ExperimentConfig, GroundLevels, LaserOn, Readout};
use cptsim_core::units::{two_pi_mhz, NV_GAMMA_TOTAL};
use cptsim_core::Error;

const E2: f64 = 2.8775e9;
const E3: f64 = 2.8825e9;

fn config() -> ExperimentConfig {
    let g1 = 0.8 * NV_GAMMA_TOTAL;
    let g2 = (NV_GAMMA_TOTAL - g1) * 0.14 / 0.19;
    ExperimentConfig {
        levels: GroundLevels { e2: E2, e3: E3 },
        laser_on: LaserOn::Ms0,
        carrier_detune: 0.0,
        power: 1.5e-6,
        sideband_rel: 0.02,
        strengths: [1.0, 0.14, 0.05],
        rabi_scale: two_pi_mhz(10.0) / 1.5e-6f64.sqrt(),
        relax: RelaxationParams::symmetric([g1, g2, NV_GAMMA_TOTAL - g1 - g2], two_pi_mhz(23.0), two_pi_mhz(1.2))
            .unwrap(),
    }
}

fn readout(peak: f64, grid: &[f64]) -> Readout {
    let model = sweep(&config(), grid, &Readout::model_only(1.0), &Sequential).unwrap();
    let max = model.intensity.iter().copied().fold(0.0, f64::max);
    Readout {
        scale: peak / max,
        offset: 0.1 * peak,
        slope: 0.0,
    }
}

#[test]
fn large_counts_converge_to_the_sweep() {
    let grid = linspace(E2 - 15e6, E3 + 15e6, 41);
    let ro = readout(1.0, &grid);
    let expected = sweep(&config(), &grid, &ro, &Sequential).unwrap();
    let min = expected.intensity.iter().copied().fold(f64::INFINITY, f64::min);
    let noise = NoiseModel {
        active_prob: 1.0,
        dwell: 1e6 / min,
        spectral_diffusion: 0.0,
    };
    let series = simulate_scans(&config(), &grid, &ro, 1, &noise, 5, &Sequential).unwrap();
    for (i, &c) in series.counts[0].iter().enumerate() {
        let mean = noise.dwell * expected.intensity[i];
        assert!(mean >= 1e6);
        let rel = (c as f64 - mean).abs() / mean;
        assert!(rel <= 0.01, "bin {i}: {c} vs {mean}");
    }
}

#[test]
fn blinking_fraction_matches_active_probability() {
    let grid = linspace(E2 - 15e6, E3 + 15e6, 21);
    let ro = Readout {
        offset: 20.0,
        ..readout(80.0, &grid)
    };
    let noise = NoiseModel {
        active_prob: 0.5,
        dwell: 1.0,
        spectral_diffusion: 0.0,
    };
    let n = 2000;
    let series = simulate_scans(&config(), &grid, &ro, n, &noise, 17, &Rayon).unwrap();
    let kept = threshold_sum(&series, series.midpoint_threshold()).unwrap();
    let active = series.active.iter().filter(|&&a| a).count();
    let binomial = (n as f64 * 0.25).sqrt();
    assert!((kept.kept as f64 - 0.5 * n as f64).abs() <= 3.0 * binomial, "kept {}", kept.kept);
    // The threshold recovers the hidden flags almost exactly at these count levels.
    let agree = kept.selected.iter().zip(&series.active).filter(|(s, a)| s == a).count();
    assert!(agree as f64 >= 0.99 * n as f64, "{agree} of {n}, {active} active");
}

#[test]
fn spectral_diffusion_washes_out_the_dip() {
    let grid = linspace(E2 - 30e6, E3 + 30e6, 61);
    let ro = readout(200.0, &grid);
    let contrast = |rms: f64| {
        let noise = NoiseModel {
            active_prob: 0.5,
            dwell: 1.0,
            spectral_diffusion: rms,
        };
        let series = simulate_scans(&config(), &grid, &ro, 200, &noise, 23, &Rayon).unwrap();
        threshold_sum(&series, series.midpoint_threshold()).unwrap().spectrum.contrast()
    };
    let (still, jittered) = (contrast(0.0), contrast(100e6));
    assert!(jittered < still, "contrast {jittered} with jitter vs {still} without");
}

#[test]
fn threshold_extremes() {
    let grid = linspace(E2 - 10e6, E2 + 10e6, 11);
    let noise = NoiseModel {
        active_prob: 0.3,
        dwell: 1.0,
        spectral_diffusion: 0.0,
    };
    let series = simulate_scans(&config(), &grid, &readout(50.0, &grid), 40, &noise, 3, &Sequential).unwrap();
    let all = threshold_sum(&series, -1.0).unwrap();
    assert_eq!(all.kept, 40);
    for (i, &y) in all.spectrum.intensity.iter().enumerate() {
        assert_eq!(y, series.counts.iter().map(|c| c[i]).sum::<u64>() as f64);
    }
    assert!(matches!(threshold_sum(&series, f64::INFINITY), Err(Error::EmptySelection { .. })));
}

#[test]
fn seeded_scans_are_reproducible_under_any_executor() {
    let grid = linspace(E2 - 10e6, E2 + 10e6, 11);
    let ro = readout(50.0, &grid);
    let noise = NoiseModel {
        active_prob: 0.5,
        dwell: 1.0,
        spectral_diffusion: 5e6,
    };
    let a = simulate_scans(&config(), &grid, &ro, 16, &noise, 41, &Sequential).unwrap();
    let b = simulate_scans(&config(), &grid, &ro, 16, &noise, 41, &Rayon).unwrap();
    assert_eq!(a, b);
    let c = simulate_scans(&config(), &grid, &ro, 16, &noise, 42, &Sequential).unwrap();
    assert_ne!(a.counts, c.counts);
}

#[test]
fn invalid_noise_models_are_rejected() {
    let grid = linspace(E2 - 10e6, E2 + 10e6, 11);
    let ro = readout(50.0, &grid);
    let bad = [(1.5, 1.0, 0.0), (0.5, 0.0, 0.0), (0.5, 1.0, -1.0)];
    for (active_prob, dwell, spectral_diffusion) in bad {
        let noise = NoiseModel {
            active_prob,
            dwell,
            spectral_diffusion,
        };
        let r = simulate_scans(&config(), &grid, &ro, 2, &noise, 1, &Sequential);
        assert!(matches!(r, Err(Error::InvalidParameter { .. })), "{noise:?}");
    }
    let ok = NoiseModel {
        active_prob: 0.5,
        dwell: 1.0,
        spectral_diffusion: 0.0,
    };
    assert!(simulate_scans(&config(), &grid, &ro, 0, &ok, 1, &Sequential).is_err());
}
