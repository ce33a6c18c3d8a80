//! Experiment configuration → drive parameters, modulation-frequency sweeps,
//! and scan-series reduction.
//!
//! Frequencies crossing this module's surface (modulation frequency, level
//! energies, carrier detuning) are in Hz; they are converted to rad/s when the
//! drive is built.

use alloc::format;
use alloc::vec::Vec;

use crate::analysis::LevelStructure;
use crate::dynamics::{
    build_hamiltonian, build_liouvillian, fluorescence_rate, steady_state, DensityMatrix, DriveParams,
    RelaxationParams,
};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::units::hz_to_rad;

/// Which transition the laser carrier sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaserOn {
    /// Carrier on the m_s = 0 (1–4) transition, lower sideband on 2–4 and 3–4.
    Ms0,
    /// Carrier on the m_s = ±1 (2–4, 3–4) transitions, upper sideband on 1–4.
    Ms1,
}

/// Energies of |2⟩ and |3⟩ above |1⟩, Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundLevels {
    pub e2: f64,
    pub e3: f64,
}

impl From<&LevelStructure> for GroundLevels {
    fn from(levels: &LevelStructure) -> Self {
        let (e2, e3) = levels.energies();
        GroundLevels { e2, e3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub levels: GroundLevels,
    pub laser_on: LaserOn,
    /// Carrier detuning from its target transition, Hz. For [`LaserOn::Ms1`] it
    /// is measured from the midpoint of the 2–4 and 3–4 transitions.
    pub carrier_detune: f64,
    /// Excitation power, W.
    pub power: f64,
    /// Sideband power relative to the carrier.
    pub sideband_rel: f64,
    /// Relative transition strengths (s₁, s₂, s₃); s₁ is the reference.
    pub strengths: [f64; 3],
    /// Ω per √W of (power × strength), rad/s/√W.
    pub rabi_scale: f64,
    pub relax: RelaxationParams,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("power", self.power),
            ("sideband_rel", self.sideband_rel),
            ("s1", self.strengths[0]),
            ("s2", self.strengths[1]),
            ("s3", self.strengths[2]),
            ("rabi_scale", self.rabi_scale),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [
            ("e2", self.levels.e2),
            ("e3", self.levels.e3),
            ("carrier_detune", self.carrier_detune),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        self.relax.validate()
    }

    /// Rabi frequencies (Ω₁, Ω₂, Ω₃), rad/s.
    pub fn rabi_frequencies(&self) -> [f64; 3] {
        let carrier = self.power;
        let sideband = self.power * self.sideband_rel;
        let field = match self.laser_on {
            LaserOn::Ms0 => [carrier, sideband, sideband],
            LaserOn::Ms1 => [sideband, carrier, carrier],
        };
        core::array::from_fn(|i| self.rabi_scale * libm::sqrt(field[i] * self.strengths[i]))
    }
}

/// Drive parameters at modulation frequency `f_mod` (Hz).
///
/// In both laser placements the two-photon detunings are δ₁ − δ₂ = f_mod − E₂
/// and δ₁ − (δ₂+δ₂₃) = f_mod − E₃, and the carrier-driven transition is
/// detuned by `carrier_detune`.
pub fn detunings_from_config(cfg: &ExperimentConfig, f_mod: f64) -> Result<DriveParams> {
    cfg.validate()?;
    if !(f_mod > 0.0 && f_mod.is_finite()) {
        return Err(Error::invalid("f_mod", format!("must be positive, got {f_mod}")));
    }
    let GroundLevels { e2, e3 } = cfg.levels;
    let cd = cfg.carrier_detune;
    let (d1, d2) = match cfg.laser_on {
        LaserOn::Ms0 => (cd, cd + (e2 - f_mod)),
        LaserOn::Ms1 => (cd + f_mod - 0.5 * (e2 + e3), cd - 0.5 * (e3 - e2)),
    };
    Ok(DriveParams::real(
        cfg.rabi_frequencies(),
        hz_to_rad(d1),
        hz_to_rad(d2),
        hz_to_rad(e3 - e2),
    ))
}

/// Steady state of the model at one modulation frequency.
pub fn steady_state_at(cfg: &ExperimentConfig, f_mod: f64) -> Result<DensityMatrix> {
    let drive = detunings_from_config(cfg, f_mod)?;
    let h = build_hamiltonian(&drive)?;
    let l = build_liouvillian(&h, &cfg.relax)?;
    steady_state(&l).map_err(|e| e.at_frequency(f_mod))
}

/// Γ·ρ₄₄ at one modulation frequency, photons/s.
pub fn model_rate(cfg: &ExperimentConfig, f_mod: f64) -> Result<f64> {
    let rho = steady_state_at(cfg, f_mod)?;
    Ok(fluorescence_rate(&rho, &cfg.relax))
}

/// Maps the model rate to detected intensity: `scale·rate + offset + slope·(f − f_center)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Readout {
    pub scale: f64,
    pub offset: f64,
    /// Background slope per Hz of modulation frequency.
    pub slope: f64,
}

impl Readout {
    pub fn model_only(scale: f64) -> Self {
        Readout {
            scale,
            offset: 0.0,
            slope: 0.0,
        }
    }

    #[inline]
    pub fn background(&self, f_mod: f64, f_center: f64) -> f64 {
        self.offset + self.slope * (f_mod - f_center)
    }

    #[inline]
    pub fn apply(&self, rate: f64, f_mod: f64, f_center: f64) -> f64 {
        self.scale * rate + self.background(f_mod, f_center)
    }
}

/// Reference frequency for background slopes: midpoint of the grid ends.
pub fn grid_center(grid: &[f64]) -> f64 {
    match (grid.first(), grid.last()) {
        (Some(a), Some(b)) => 0.5 * (a + b),
        _ => 0.0,
    }
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "empty frequency grid"));
    }
    if let Some(bad) = grid.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
        return Err(Error::invalid("grid", format!("frequency {bad} is not positive and finite")));
    }
    if let Some(k) = grid.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid", format!("not strictly increasing at index {}", k + 1)));
    }
    Ok(())
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|k| if k == n - 1 { stop } else { start + step * k as f64 })
                .collect()
        }
    }
}

/// Fluorescence intensity sampled over modulation frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub f_mod: Vec<f64>,
    pub intensity: Vec<f64>,
    pub config: Option<ExperimentConfig>,
}

impl Spectrum {
    /// Checks the grid and that every intensity is finite and non-negative.
    pub fn new(f_mod: Vec<f64>, intensity: Vec<f64>) -> Result<Self> {
        validate_grid(&f_mod)?;
        if f_mod.len() != intensity.len() {
            return Err(Error::invalid("intensity", "length differs from frequency grid"));
        }
        if let Some(k) = intensity.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid(
                "intensity",
                format!("value {} at index {k} is negative or non-finite", intensity[k]),
            ));
        }
        Ok(Spectrum {
            f_mod,
            intensity,
            config: None,
        })
    }

    pub fn len(&self) -> usize {
        self.f_mod.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f_mod.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.f_mod.iter().copied().zip(self.intensity.iter().copied())
    }

    /// Index of the smallest intensity.
    pub fn argmin(&self) -> usize {
        argmin(&self.intensity)
    }

    /// Indices of strict-ish local minima: lower than every neighbour within
    /// `half_window` points on both sides (edges excluded).
    pub fn local_minima(&self, half_window: usize) -> Vec<usize> {
        let y = &self.intensity;
        let n = y.len();
        let w = half_window.max(1);
        (w..n.saturating_sub(w))
            .filter(|&k| {
                (k - w..=k + w).all(|j| j == k || y[k] < y[j] || (y[k] == y[j] && j > k))
            })
            .collect()
    }

    /// (max − min) / max, a background-inclusive dip contrast.
    pub fn contrast(&self) -> f64 {
        let max = self.intensity.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.intensity.iter().copied().fold(f64::INFINITY, f64::min);
        if max > 0.0 {
            (max - min) / max
        } else {
            0.0
        }
    }
}

fn argmin(y: &[f64]) -> usize {
    y.iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (k, &v)| if v < best.1 { (k, v) } else { best })
        .0
}

/// Model spectrum over `grid`; grid points are independent and may be evaluated concurrently.
pub fn sweep<E: Executor>(cfg: &ExperimentConfig, grid: &[f64], readout: &Readout, exec: &E) -> Result<Spectrum> {
    validate_grid(grid)?;
    cfg.validate()?;
    let center = grid_center(grid);
    let values = exec.map(grid.len(), |k| {
        let f = grid[k];
        model_rate(cfg, f).map(|rate| readout.apply(rate, f, center))
    });
    let intensity = values.into_iter().collect::<Result<Vec<f64>>>()?;
    let mut spectrum = Spectrum::new(grid.to_vec(), intensity)?;
    spectrum.config = Some(*cfg);
    Ok(spectrum)
}

/// Repeated scans over a common grid with integer photon counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSeries {
    pub grid: Vec<f64>,
    /// `counts[scan][bin]`.
    pub counts: Vec<Vec<u64>>,
    /// Whether the emitter was optically active during each scan (hidden in experiments).
    pub active: Vec<bool>,
    pub seed: u64,
}

impl ScanSeries {
    pub fn totals(&self) -> Vec<u64> {
        self.counts.iter().map(|c| c.iter().sum()).collect()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Halfway between the smallest and largest scan totals: the valley of a bimodal histogram.
    pub fn midpoint_threshold(&self) -> f64 {
        let totals = self.totals();
        let min = totals.iter().copied().min().unwrap_or(0) as f64;
        let max = totals.iter().copied().max().unwrap_or(0) as f64;
        0.5 * (min + max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSum {
    pub spectrum: Spectrum,
    pub kept: usize,
    pub total: usize,
    pub threshold: f64,
    /// Per-scan selection.
    pub selected: Vec<bool>,
}

/// Bin-wise sum of every scan whose total counts exceed `threshold`.
pub fn threshold_sum(series: &ScanSeries, threshold: f64) -> Result<ThresholdSum> {
    if series.is_empty() {
        return Err(Error::invalid("series", "no scans"));
    }
    validate_grid(&series.grid)?;
    let n = series.grid.len();
    if let Some(k) = series.counts.iter().position(|c| c.len() != n) {
        return Err(Error::invalid("series", format!("scan {k} does not match the frequency grid")));
    }
    let selected: Vec<bool> = series.totals().iter().map(|&t| t as f64 > threshold).collect();
    let kept = selected.iter().filter(|&&s| s).count();
    if kept == 0 {
        return Err(Error::EmptySelection { threshold });
    }
    let mut sum = alloc::vec![0u64; n];
    for (scan, _) in series.counts.iter().zip(&selected).filter(|(_, &s)| s) {
        for (acc, &c) in sum.iter_mut().zip(scan) {
            *acc += c;
        }
    }
    let spectrum = Spectrum::new(series.grid.clone(), sum.into_iter().map(|c| c as f64).collect())?;
    Ok(ThresholdSum {
        spectrum,
        kept,
        total: series.len(),
        threshold,
        selected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::units::{two_pi_mhz, NV_GAMMA_TOTAL};
    use proptest::prelude::*;

    fn nv_config(laser_on: LaserOn, gamma1: f64) -> ExperimentConfig {
        let g = NV_GAMMA_TOTAL;
        let rest = 0.2 * g;
        ExperimentConfig {
            levels: GroundLevels::from(&LevelStructure::nv(5e6, 0.0)),
            laser_on,
            carrier_detune: 0.0,
            power: 1.5e-6,
            sideband_rel: 0.02,
            strengths: [1.0, 0.14, 0.05],
            rabi_scale: two_pi_mhz(40.0) / libm::sqrt(1.5e-6),
            relax: RelaxationParams::symmetric([0.8 * g, rest * 0.14 / 0.19, rest * 0.05 / 0.19], two_pi_mhz(23.0), gamma1)
                .unwrap(),
        }
    }

    #[test]
    fn carrier_on_ms0_at_first_resonance() {
        let cfg = nv_config(LaserOn::Ms0, 0.0);
        let d = detunings_from_config(&cfg, cfg.levels.e2).unwrap();
        assert_eq!(d.delta1, 0.0);
        assert_eq!(d.delta2, 0.0);
        assert!((d.delta23 - two_pi_mhz(5.0)).abs() < 1e-3);
    }

    #[test]
    fn off_resonant_sideband_two_photon_detuning() {
        let cfg = nv_config(LaserOn::Ms0, 0.0);
        let d = detunings_from_config(&cfg, 2.90e9).unwrap();
        assert!((d.delta1 - d.delta2 - two_pi_mhz(22.5)).abs() < 1e-3);
    }

    #[test]
    fn rabi_frequency_scales_with_root_power() {
        let mut cfg = nv_config(LaserOn::Ms0, 0.0);
        let high = detunings_from_config(&cfg, 2.88e9).unwrap();
        cfg.power = 0.5e-6;
        let low = detunings_from_config(&cfg, 2.88e9).unwrap();
        assert!((high.omega[0].re / low.omega[0].re - libm::sqrt(3.0)).abs() < 1e-12);
    }

    #[test]
    fn sideband_strengths_follow_transition_ratios() {
        let cfg = nv_config(LaserOn::Ms0, 0.0);
        let w = cfg.rabi_frequencies();
        assert!(((w[1] / w[0]).powi(2) - 0.14 * 0.02).abs() < 1e-12);
        assert!(((w[2] / w[1]).powi(2) - 0.05 / 0.14).abs() < 1e-12);
        let cfg = nv_config(LaserOn::Ms1, 0.0);
        let w = cfg.rabi_frequencies();
        assert!(((w[1] / w[0]).powi(2) - 0.14 / 0.02).abs() < 1e-9);
    }

    #[test]
    fn zero_ground_dephasing_dips_to_background() {
        let cfg = nv_config(LaserOn::Ms0, 0.0);
        let e2 = cfg.levels.e2;
        let grid = [e2 - 20e6, e2 - 1e6, e2, e2 + 1e6, e2 + 20e6];
        let readout = Readout { scale: 1.0, offset: 250.0, slope: 1e-6 };
        let s = sweep(&cfg, &grid, &readout, &Sequential).unwrap();
        let center = grid_center(&grid);
        let peak = s.intensity.iter().copied().fold(0.0, f64::max);
        assert!((s.intensity[2] - readout.background(e2, center)).abs() <= 1e-10 * peak);
        assert!(s.intensity[1] > readout.background(grid[1], center) + 1e-3 * peak);
    }

    #[test]
    fn ms1_spectrum_resolves_both_dips() {
        let mut cfg = nv_config(LaserOn::Ms1, two_pi_mhz(1.2));
        cfg.rabi_scale = two_pi_mhz(20.0) / libm::sqrt(1.5e-6);
        let grid = linspace(2.855e9, 2.905e9, 401);
        let s = sweep(&cfg, &grid, &Readout::model_only(1.0), &Sequential).unwrap();
        let minima = s.local_minima(4);
        assert_eq!(minima.len(), 2, "minima at {:?}", minima.iter().map(|&k| s.f_mod[k]).collect::<Vec<_>>());
        let (f2, f3) = (s.f_mod[minima[0]], s.f_mod[minima[1]]);
        assert!((f2 - cfg.levels.e2).abs() < 1e6 && (f3 - cfg.levels.e3).abs() < 1e6);
        assert!((f3 - f2 - 5e6).abs() < 1e6);
    }

    #[test]
    fn undriven_sweep_reports_degeneracy_with_frequency() {
        let mut cfg = nv_config(LaserOn::Ms0, two_pi_mhz(1.2));
        cfg.power = 0.0;
        match sweep(&cfg, &[2.87e9, 2.88e9], &Readout::model_only(1.0), &Sequential) {
            Err(Error::AtFrequency { f_mod_hz, source }) => {
                assert_eq!(f_mod_hz, 2.87e9);
                assert!(matches!(*source, Error::DegenerateSteadyState { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn grid_validation() {
        assert!(validate_grid(&[]).is_err());
        assert!(validate_grid(&[1.0, 1.0]).is_err());
        assert!(validate_grid(&[2.0, 1.0]).is_err());
        assert!(validate_grid(&[-1.0, 1.0]).is_err());
        assert!(validate_grid(&[1.0, 2.0]).is_ok());
        assert_eq!(linspace(0.0, 1.0, 5), [0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    fn toy_series() -> ScanSeries {
        ScanSeries {
            grid: alloc::vec![1.0, 2.0, 3.0],
            counts: alloc::vec![alloc::vec![10, 2, 10], alloc::vec![1, 1, 1], alloc::vec![12, 3, 11]],
            active: alloc::vec![true, false, true],
            seed: 7,
        }
    }

    #[test]
    fn threshold_below_everything_sums_all_scans() {
        let t = threshold_sum(&toy_series(), -1.0).unwrap();
        assert_eq!(t.kept, 3);
        assert_eq!(t.spectrum.intensity, [23.0, 6.0, 22.0]);
    }

    #[test]
    fn infinite_threshold_selects_nothing() {
        assert!(matches!(
            threshold_sum(&toy_series(), f64::INFINITY),
            Err(Error::EmptySelection { .. })
        ));
    }

    #[test]
    fn midpoint_threshold_separates_classes() {
        let s = toy_series();
        let t = threshold_sum(&s, s.midpoint_threshold()).unwrap();
        assert_eq!(t.kept, 2);
        assert_eq!(t.selected, s.active);
        assert_eq!(t.spectrum.intensity, [22.0, 5.0, 21.0]);
    }

    #[test]
    fn local_minima_and_contrast() {
        let s = Spectrum::new(alloc::vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0], alloc::vec![5.0, 4.0, 1.0, 4.0, 5.0, 2.0, 5.0]).unwrap();
        assert_eq!(s.local_minima(1), [2, 5]);
        assert_eq!(s.argmin(), 2);
        assert!((s.contrast() - 0.8).abs() < 1e-15);
        assert!(Spectrum::new(alloc::vec![1.0], alloc::vec![-1.0]).is_err());
    }

    proptest! {
        #[test]
        fn two_photon_relation_holds_in_both_placements(
            f in 2.7e9f64..3.0e9,
            cd in -5e7f64..5e7,
            split in 0.0f64..1e8,
            ms1 in any::<bool>(),
        ) {
            let mut cfg = nv_config(if ms1 { LaserOn::Ms1 } else { LaserOn::Ms0 }, 0.0);
            cfg.levels = GroundLevels::from(&LevelStructure::nv(split, 0.0));
            cfg.carrier_detune = cd;
            let d = detunings_from_config(&cfg, f).unwrap();
            let tol = 1e-6 * two_pi_mhz(1.0);
            prop_assert!((d.delta1 - d.delta2 - hz_to_rad(f - cfg.levels.e2)).abs() < tol);
            prop_assert!((d.delta1 - d.delta2 - d.delta23 - hz_to_rad(f - cfg.levels.e3)).abs() < tol);
            let carrier = if ms1 { d.delta2 + 0.5 * d.delta23 } else { d.delta1 };
            prop_assert!((carrier - hz_to_rad(cd)).abs() < tol);
        }
    }
}
