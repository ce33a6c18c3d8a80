//! Repeated noisy scans: Bernoulli blinking, per-scan carrier jitter and
//! Poisson shot noise.

use cptsim_core::exec::{Executor, Sequential};
use cptsim_core::spectrum::{grid_center, sweep, validate_grid, ExperimentConfig, Readout, ScanSeries};
use cptsim_core::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Probability that the emitter is optically active for a whole scan.
    pub active_prob: f64,
    /// Integration time per bin, s. Expected counts are dwell × intensity.
    pub dwell: f64,
    /// RMS of the per-scan Gaussian carrier jitter, Hz.
    #[serde(default)]
    pub spectral_diffusion: f64,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.active_prob) {
            return Err(invalid("active_prob", format!("must lie in [0, 1], got {}", self.active_prob)));
        }
        if !(self.dwell > 0.0 && self.dwell.is_finite()) {
            return Err(invalid("dwell", format!("must be positive, got {}", self.dwell)));
        }
        if !(self.spectral_diffusion >= 0.0 && self.spectral_diffusion.is_finite()) {
            return Err(invalid(
                "spectral_diffusion",
                format!("must be finite and >= 0, got {}", self.spectral_diffusion),
            ));
        }
        Ok(())
    }
}

fn invalid(name: &str, reason: String) -> Error {
    Error::InvalidParameter {
        name: name.into(),
        reason,
    }
}

/// Random stream of one scan. Streams are independent of evaluation order.
pub fn scan_rng(seed: u64, scan: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(scan as u64);
    rng
}

fn poisson<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

/// Simulates `n_scans` scans over `grid`. Inactive scans see only the readout
/// background. Bit-reproducible for a fixed `seed`, whatever the executor.
pub fn simulate_scans<E: Executor>(
    cfg: &ExperimentConfig,
    grid: &[f64],
    readout: &Readout,
    n_scans: usize,
    noise: &NoiseModel,
    seed: u64,
    exec: &E,
) -> Result<ScanSeries> {
    if n_scans == 0 {
        return Err(invalid("n_scans", "must be at least 1".into()));
    }
    noise.validate()?;
    validate_grid(grid)?;
    let center = grid_center(grid);
    let background: Vec<f64> = grid.iter().map(|&f| readout.background(f, center).max(0.0)).collect();
    let steady = if noise.spectral_diffusion == 0.0 {
        Some(sweep(cfg, grid, readout, exec)?.intensity)
    } else {
        None
    };

    let scans = exec.map(n_scans, |k| -> Result<(bool, Vec<u64>)> {
        let mut rng = scan_rng(seed, k);
        let active = rng.random_bool(noise.active_prob);
        let jitter = if noise.spectral_diffusion > 0.0 {
            Normal::new(0.0, noise.spectral_diffusion).expect("finite rms").sample(&mut rng)
        } else {
            0.0
        };
        let expected = match (&steady, active) {
            (_, false) => background.clone(),
            (Some(i), true) => i.clone(),
            (None, true) => {
                let mut shifted = *cfg;
                shifted.carrier_detune += jitter;
                sweep(&shifted, grid, readout, &Sequential)?.intensity
            }
        };
        let counts = expected.iter().map(|&i| poisson(&mut rng, noise.dwell * i)).collect();
        Ok((active, counts))
    });

    let mut counts = Vec::with_capacity(n_scans);
    let mut active = Vec::with_capacity(n_scans);
    for scan in scans {
        let (a, c) = scan?;
        active.push(a);
        counts.push(c);
    }
    Ok(ScanSeries {
        grid: grid.to_vec(),
        counts,
        active,
        seed,
    })
}
