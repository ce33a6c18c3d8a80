use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3};

use super::constraints::apply_constraints;
use super::params::{ModelParams, TraceParams};
use super::FitProblem;
use crate::error::Result;
use crate::spectrum::{grid_center, model_rate, LaserOn, Spectrum};
use crate::units::two_pi_mhz;

pub const DEFAULT_BRANCHING: f64 = 0.7;
pub const DEFAULT_STRENGTH: f64 = 0.1;

pub fn default_gamma4() -> f64 {
    two_pi_mhz(10.0)
}

pub fn default_gamma1() -> f64 {
    two_pi_mhz(1.0)
}

/// Separation assumed when only one dip is visible, Hz.
pub const MERGED_DIP_HALF_SPLIT: f64 = 1e6;

/// Dip positions for initialization, sorted by frequency.
///
/// Each trace is lightly smoothed and its local minima are ranked by
/// prominence against the highest point within a twentieth of the grid on
/// either side, so dips sitting on a resonance peak are found and the peak's
/// wings are not. The trace whose best dip is most prominent relative to its
/// maximum is used. The second dip must lie outside the first one's
/// half-prominence region and reach a fifth of its prominence. A single
/// visible dip is split by ±[`MERGED_DIP_HALF_SPLIT`].
pub fn find_dips(traces: &[&Spectrum]) -> Option<(f64, f64)> {
    traces
        .iter()
        .filter(|s| s.len() >= 7)
        .filter_map(|s| dips_in(s))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, dips)| dips)
}

/// Relative prominence of the best dip and the dip pair of one trace.
fn dips_in(s: &Spectrum) -> Option<(f64, (f64, f64))> {
    let n = s.len();
    let half_window = (n / 100).max(2);
    let y: Vec<f64> = (0..n)
        .map(|k| {
            let lo = k.saturating_sub(half_window);
            let hi = (k + half_window).min(n - 1);
            s.intensity[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let reach = (n / 20).max(2 * half_window);
    let max_of = |r: &[f64]| r.iter().copied().fold(f64::MIN, f64::max);
    let minima: Vec<(usize, f64)> = (half_window..n - half_window)
        .filter(|&k| y[k] <= y[k - 1] && y[k] <= y[k + 1])
        .map(|k| {
            let left = max_of(&y[k.saturating_sub(reach)..k]);
            let right = max_of(&y[k + 1..=(k + reach).min(n - 1)]);
            (k, left.min(right) - y[k])
        })
        .filter(|&(_, p)| p > 0.0)
        .collect();
    let &(i0, prom) = minima.iter().max_by(|a, b| a.1.total_cmp(&b.1))?;
    let first = s.f_mod[i0];
    let half = y[i0] + 0.5 * prom;
    let mut lo = i0;
    while lo > 0 && y[lo - 1] < half {
        lo -= 1;
    }
    let mut hi = i0;
    while hi + 1 < n && y[hi + 1] < half {
        hi += 1;
    }
    let second = minima
        .iter()
        .filter(|&&(k, p)| (k + 1 < lo || k > hi + 1) && p >= 0.2 * prom)
        .max_by(|a, b| a.1.total_cmp(&b.1));
    let dips = match second {
        Some(&(k, _)) if (s.f_mod[k] - first).abs() > MERGED_DIP_HALF_SPLIT => {
            (first.min(s.f_mod[k]), first.max(s.f_mod[k]))
        }
        _ => (first - MERGED_DIP_HALF_SPLIT, first + MERGED_DIP_HALF_SPLIT),
    };
    let top = max_of(&y);
    Some((if top > 0.0 { prom / top } else { prom }, dips))
}

/// Default starting point: fixed physics guesses, E₂/E₃ from the data, one
/// Rabi scale for all groups, and a regressed readout.
pub fn default_init(problem: &FitProblem) -> Result<ModelParams> {
    // Traces with the carrier on m_s = 0 show dips on a flat background.
    let mut spectra: Vec<&Spectrum> = problem
        .traces
        .iter()
        .filter(|t| t.setup.laser_on == LaserOn::Ms0)
        .map(|t| &t.spectrum)
        .collect();
    if spectra.is_empty() {
        spectra = problem.traces.iter().map(|t| &t.spectrum).collect();
    }
    let (e2, e3) = find_dips(&spectra).unwrap_or((2.8775e9, 2.8825e9));
    // One scale per √W for every group, with the carrier Rabi frequency at Γ in
    // the highest-power trace.
    let rabi = problem
        .traces
        .iter()
        .map(|t| {
            let carrier_strength = match t.setup.laser_on {
                LaserOn::Ms0 => 1.0,
                LaserOn::Ms1 => DEFAULT_STRENGTH,
            };
            t.setup.power * carrier_strength
        })
        .fold(0.0, f64::max);
    let rabi_scale = alloc::vec![problem.gamma_total / libm::sqrt(rabi); problem.groups()];
    let mut p = ModelParams {
        s2: DEFAULT_STRENGTH,
        s3: DEFAULT_STRENGTH,
        branching: DEFAULT_BRANCHING,
        gamma4: default_gamma4(),
        gamma1: default_gamma1(),
        e2,
        e3,
        rabi_scale,
        traces: alloc::vec![
            TraceParams {
                scale: 1.0,
                offset: 0.0,
                slope: 0.0,
                carrier_detune: 0.0,
            };
            problem.traces.len()
        ],
    };
    regress_readout(problem, &mut p)?;
    Ok(p)
}

/// Replaces each trace's scale, offset and slope by the linear least-squares
/// fit of the data to the model rate at the current physical parameters. Falls
/// back to a pure scale if the regression yields a non-positive scale.
pub fn regress_readout(problem: &FitProblem, p: &mut ModelParams) -> Result<()> {
    let model = apply_constraints(p, problem.gamma_total)?;
    for (t, trace) in problem.traces.iter().enumerate() {
        let s = &trace.spectrum;
        let cfg = model.config(&trace.setup, p.rabi_scale[trace.setup.group], p.traces[t].carrier_detune);
        let rates = s.f_mod.iter().map(|&f| model_rate(&cfg, f)).collect::<Result<Vec<f64>>>()?;
        let center = grid_center(&s.f_mod);
        let mut a = Matrix3::<f64>::zeros();
        let mut b = Vector3::<f64>::zeros();
        for ((&f, &y), &r) in s.f_mod.iter().zip(&s.intensity).zip(&rates) {
            let row = Vector3::new(r, 1.0, f - center);
            a += row * row.transpose();
            b += row * y;
        }
        let solved = a.lu().solve(&b).filter(|v| v[0] > 0.0 && v.iter().all(|x| x.is_finite()));
        let tp = &mut p.traces[t];
        match solved {
            Some(v) => {
                tp.scale = v[0];
                tp.offset = v[1];
                tp.slope = v[2];
            }
            None => {
                let rmax = rates.iter().copied().fold(0.0, f64::max);
                let ymax = s.intensity.iter().copied().fold(0.0, f64::max);
                tp.scale = if rmax > 0.0 && ymax > 0.0 { ymax / rmax } else { 1.0 };
                tp.offset = 0.0;
                tp.slope = 0.0;
            }
        }
    }
    Ok(())
}
