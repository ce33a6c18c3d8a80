//! Constrained least-squares fitting of one or more spectra to the forward model.
//!
//! All traces share the level structure and relaxation model. Each trace has its
//! own readout (scale, offset, slope) and carrier detuning, and belongs to a
//! declared power group whose traces share one `rabi_scale`.

mod constraints;
mod init;
pub mod lm;
mod params;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

pub use constraints::{apply_constraints, ConstrainedModel, TraceSetup};
pub use init::{default_gamma1, default_gamma4, default_init, find_dips, regress_readout, DEFAULT_BRANCHING, DEFAULT_STRENGTH};
pub use lm::{LmOptions, LmReport, Termination};
pub use params::{Bound, ModelParams, ParamId, TraceParams, Transform};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::spectrum::{grid_center, model_rate, ExperimentConfig, Spectrum};

/// Largest tolerated violation of the constraint identities during a fit.
pub const CLOSURE_TOLERANCE: f64 = 1e-12;

/// Relative one-sigma above which a bounded parameter is reported as poorly constrained.
pub const POORLY_CONSTRAINED_REL: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceData {
    pub name: String,
    pub spectrum: Spectrum,
    pub setup: TraceSetup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// σᵢ = √max(dataᵢ, 1).
    #[default]
    Poisson,
    /// σᵢ = 1.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitProblem {
    pub traces: Vec<TraceData>,
    /// Total excited-state decay rate Γ, rad/s (held fixed).
    pub gamma_total: f64,
    pub weighting: Weighting,
}

impl FitProblem {
    /// Number of power groups (one more than the largest group index).
    pub fn groups(&self) -> usize {
        self.traces.iter().map(|t| t.setup.group + 1).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.traces.iter().map(|t| t.spectrum.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Non-empty traces, contiguous group indices, and one grid per group.
    pub fn validate(&self) -> Result<()> {
        if self.traces.is_empty() {
            return Err(Error::invalid("traces", "fit problem has no traces"));
        }
        if !(self.gamma_total > 0.0 && self.gamma_total.is_finite()) {
            return Err(Error::invalid("gamma_total", format!("must be positive, got {}", self.gamma_total)));
        }
        for t in &self.traces {
            if t.spectrum.is_empty() {
                return Err(Error::invalid(format!("traces[{}]", t.name), "empty spectrum"));
            }
            let s = &t.setup;
            if !(s.power > 0.0 && s.power.is_finite()) || !(s.sideband_rel >= 0.0 && s.sideband_rel.is_finite()) {
                return Err(Error::invalid(format!("traces[{}]", t.name), "power must be > 0 and sideband_rel >= 0"));
            }
        }
        for g in 0..self.groups() {
            let mut members = self.traces.iter().filter(|t| t.setup.group == g);
            let Some(first) = members.next() else {
                return Err(Error::invalid("group", format!("group {g} has no traces")));
            };
            for other in members {
                if other.spectrum.f_mod != first.spectrum.f_mod {
                    return Err(Error::invalid(
                        "group",
                        format!("traces `{}` and `{}` in group {g} use different grids", first.name, other.name),
                    ));
                }
            }
        }
        Ok(())
    }

    fn sigmas(&self) -> Vec<Vec<f64>> {
        self.traces
            .iter()
            .map(|t| {
                t.spectrum
                    .intensity
                    .iter()
                    .map(|&y| match self.weighting {
                        Weighting::Poisson => libm::sqrt(y.max(1.0)),
                        Weighting::Uniform => 1.0,
                    })
                    .collect()
            })
            .collect()
    }
}

/// How bounds are enforced during the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundMode {
    /// Log coordinates for positive parameters, logistic for Γ₁/Γ.
    #[default]
    Transform,
    /// Linear coordinates with trial points clamped onto the bounds.
    Clamp,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitOptions {
    pub lm: LmOptions,
    pub bound_mode: BoundMode,
    /// Parameters held at their initial values.
    pub fixed: Vec<ParamId>,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: ModelParams,
    pub model: ConstrainedModel,
    /// Free parameters, in the order of `sigma` and `covariance`.
    pub free: Vec<ParamId>,
    /// One-sigma uncertainties; infinite when the Gram matrix is singular.
    pub sigma: Vec<f64>,
    /// Covariance of the free physical parameters.
    pub covariance: Option<DMatrix<f64>>,
    /// Condition number of the correlation-normalized Gram matrix JᵀJ.
    pub condition_number: f64,
    pub poorly_constrained: Vec<ParamId>,
    /// Σ rᵢ².
    pub rss: f64,
    pub dof: usize,
    pub reduced_chi2: f64,
    /// Weighted residuals per trace.
    pub residuals: Vec<Vec<f64>>,
    /// Model intensity per trace at the optimum.
    pub fitted: Vec<Vec<f64>>,
    pub iterations: usize,
    pub step_norm: f64,
    pub termination: Termination,
    pub converged: bool,
    pub cost_history: Vec<f64>,
}

impl FitResult {
    pub fn value(&self, id: ParamId) -> f64 {
        self.params.get(id)
    }

    /// One-sigma of a free parameter, `None` if it was held fixed.
    pub fn sigma_of(&self, id: ParamId) -> Option<f64> {
        self.free.iter().position(|&p| p == id).map(|k| self.sigma[k])
    }
}

/// Free coordinates and their mapping to physical parameters.
#[derive(Debug, Clone)]
struct Layout {
    ids: Vec<ParamId>,
    transforms: Vec<Transform>,
    base: ModelParams,
    mode: BoundMode,
}

impl Layout {
    fn new(problem: &FitProblem, init: &ModelParams, options: &FitOptions) -> Result<(Self, Vec<f64>)> {
        let mut base = init.clone();
        let mut ids = Vec::new();
        let mut transforms = Vec::new();
        let mut x0 = Vec::new();
        let data_scale: Vec<f64> = problem
            .traces
            .iter()
            .map(|t| t.spectrum.intensity.iter().copied().fold(1.0, f64::max))
            .collect();
        for id in ModelParams::all_ids(init.rabi_scale.len(), init.traces.len()) {
            if options.fixed.contains(&id) {
                continue;
            }
            let mut p = init.get(id);
            let transform = match (options.bound_mode, id.bound()) {
                (BoundMode::Transform, Bound::Positive) => {
                    if p <= 0.0 {
                        p = positive_floor(id, problem.gamma_total).ok_or_else(|| {
                            Error::invalid(id.name(), "must start strictly positive when fitted")
                        })?;
                        base.set(id, p);
                    }
                    Transform::Log
                }
                (BoundMode::Transform, Bound::UnitInterval) => {
                    p = p.clamp(1e-9, 1.0 - 1e-9);
                    base.set(id, p);
                    Transform::Logistic
                }
                (_, bound) => Transform::Linear {
                    origin: p,
                    unit: linear_unit(id, bound, p, &data_scale, problem),
                },
            };
            ids.push(id);
            transforms.push(transform);
            x0.push(transform.to_internal(p));
        }
        Ok((
            Layout {
                ids,
                transforms,
                base,
                mode: options.bound_mode,
            },
            x0,
        ))
    }

    fn physical(&self, x: &[f64]) -> ModelParams {
        let mut p = self.base.clone();
        for ((&id, t), &xi) in self.ids.iter().zip(&self.transforms).zip(x) {
            p.set(id, t.to_physical(xi));
        }
        p
    }

    fn project(&self, x: &mut [f64]) {
        if self.mode != BoundMode::Clamp {
            return;
        }
        for ((&id, t), xi) in self.ids.iter().zip(&self.transforms).zip(x.iter_mut()) {
            let p = t.to_physical(*xi);
            let c = id.bound().clamp(p);
            if c != p {
                *xi = t.to_internal(c);
            }
        }
    }

    /// dp/dx for every free coordinate.
    fn derivatives(&self, x: &[f64]) -> Vec<f64> {
        self.transforms.iter().zip(x).map(|(t, &xi)| t.derivative(xi)).collect()
    }
}

fn positive_floor(id: ParamId, gamma_total: f64) -> Option<f64> {
    match id {
        ParamId::Gamma4 | ParamId::Gamma1 => Some(1e-6 * gamma_total),
        ParamId::S2 | ParamId::S3 => Some(1e-6),
        _ => None,
    }
}

fn linear_unit(id: ParamId, bound: Bound, p: f64, data_scale: &[f64], problem: &FitProblem) -> f64 {
    match id {
        ParamId::E2 | ParamId::E3 | ParamId::CarrierDetune(_) => 1e6,
        ParamId::Offset(t) => data_scale[t],
        ParamId::Slope(t) => {
            let f = &problem.traces[t].spectrum.f_mod;
            let span = (f[f.len() - 1] - f[0]).abs().max(1.0);
            data_scale[t] / span
        }
        ParamId::Branching => 0.1,
        _ => match bound {
            Bound::Positive if p > 0.0 => p,
            _ => 1.0,
        },
    }
}

/// Which traces a perturbation of `id` changes.
fn affects(id: ParamId, setup: &TraceSetup, trace: usize) -> bool {
    match id {
        ParamId::RabiScale(g) => setup.group == g,
        ParamId::CarrierDetune(t) => t == trace,
        _ => true,
    }
}

struct ModelObjective<'a, E: Executor> {
    problem: &'a FitProblem,
    layout: &'a Layout,
    exec: &'a E,
    sigma: Vec<Vec<f64>>,
    centers: Vec<f64>,
    rows: Vec<usize>,
}

impl<'a, E: Executor> ModelObjective<'a, E> {
    fn new(problem: &'a FitProblem, layout: &'a Layout, exec: &'a E) -> Self {
        let mut rows = Vec::with_capacity(problem.traces.len() + 1);
        rows.push(0);
        for t in &problem.traces {
            rows.push(rows[rows.len() - 1] + t.spectrum.len());
        }
        ModelObjective {
            problem,
            layout,
            exec,
            sigma: problem.sigmas(),
            centers: problem.traces.iter().map(|t| grid_center(&t.spectrum.f_mod)).collect(),
            rows,
        }
    }

    fn constrained(&self, p: &ModelParams) -> Result<ConstrainedModel> {
        let model = apply_constraints(p, self.problem.gamma_total)?;
        let defect = model.closure_defect();
        if defect > CLOSURE_TOLERANCE {
            return Err(Error::NumericalFailure(format!("constraint closure violated by {defect:e}")));
        }
        Ok(model)
    }

    fn trace_config(&self, model: &ConstrainedModel, p: &ModelParams, t: usize) -> ExperimentConfig {
        let setup = &self.problem.traces[t].setup;
        model.config(setup, p.rabi_scale[setup.group], p.traces[t].carrier_detune)
    }

    /// Model rates for each (config, trace) job, evaluated as one flat batch.
    fn rates(&self, jobs: &[(ExperimentConfig, usize)]) -> Result<Vec<Vec<f64>>> {
        self.rates_each(jobs).into_iter().collect()
    }

    /// As [`Self::rates`], with a separate outcome per job.
    fn rates_each(&self, jobs: &[(ExperimentConfig, usize)]) -> Vec<Result<Vec<f64>>> {
        let mut starts = Vec::with_capacity(jobs.len() + 1);
        starts.push(0);
        for (_, t) in jobs {
            starts.push(starts[starts.len() - 1] + self.problem.traces[*t].spectrum.len());
        }
        let total = starts[jobs.len()];
        let flat = self.exec.map(total, |i| {
            let j = starts.partition_point(|&s| s <= i) - 1;
            let (cfg, t) = &jobs[j];
            model_rate(cfg, self.problem.traces[*t].spectrum.f_mod[i - starts[j]])
        });
        let mut flat = flat.into_iter();
        starts
            .windows(2)
            .map(|w| flat.by_ref().take(w[1] - w[0]).collect::<Result<Vec<f64>>>())
            .collect()
    }

    fn all_rates(&self, p: &ModelParams) -> Result<Vec<Vec<f64>>> {
        let model = self.constrained(p)?;
        let jobs: Vec<_> = (0..self.problem.traces.len())
            .map(|t| (self.trace_config(&model, p, t), t))
            .collect();
        self.rates(&jobs)
    }

    fn intensity(&self, p: &ModelParams, t: usize, k: usize, rate: f64) -> f64 {
        let tp = &p.traces[t];
        let f = self.problem.traces[t].spectrum.f_mod[k];
        tp.scale * rate + tp.offset + tp.slope * (f - self.centers[t])
    }

    fn fitted(&self, p: &ModelParams, rates: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rates
            .iter()
            .enumerate()
            .map(|(t, r)| r.iter().enumerate().map(|(k, &rate)| self.intensity(p, t, k, rate)).collect())
            .collect()
    }

    fn residuals_from(&self, fitted: &[Vec<f64>]) -> Vec<Vec<f64>> {
        fitted
            .iter()
            .enumerate()
            .map(|(t, m)| {
                let data = &self.problem.traces[t].spectrum.intensity;
                m.iter()
                    .zip(data)
                    .zip(&self.sigma[t])
                    .map(|((m, y), s)| (m - y) / s)
                    .collect()
            })
            .collect()
    }
}

impl<E: Executor> lm::Objective for ModelObjective<'_, E> {
    fn residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = self.layout.physical(x);
        let rates = self.all_rates(&p)?;
        Ok(self.residuals_from(&self.fitted(&p, &rates)).concat())
    }

    fn jacobian(&self, x: &[f64], _r0: &[f64], h: &[f64]) -> Result<DMatrix<f64>> {
        let n = x.len();
        let m = self.rows[self.rows.len() - 1];
        let mut jac = DMatrix::zeros(m, n);
        let p0 = self.layout.physical(x);
        let dpdx = self.layout.derivatives(x);

        // Jobs: base rates first, then ± perturbations of the physical coordinates
        // restricted to the traces each one affects.
        let model0 = self.constrained(&p0)?;
        let mut jobs: Vec<(ExperimentConfig, usize)> = (0..self.problem.traces.len())
            .map(|t| (self.trace_config(&model0, &p0, t), t))
            .collect();
        let mut columns = Vec::new();
        for (k, &id) in self.layout.ids.iter().enumerate() {
            if !id.is_physical() {
                continue;
            }
            let mut xp = x.to_vec();
            xp[k] = x[k] + h[k];
            self.layout.project(&mut xp);
            let mut xm = x.to_vec();
            xm[k] = x[k] - h[k];
            self.layout.project(&mut xm);
            let (up, down) = (xp[k] - x[k], x[k] - xm[k]);
            if up + down == 0.0 {
                continue;
            }
            let pp = self.layout.physical(&xp);
            let pm = self.layout.physical(&xm);
            let (mp, mm) = (self.constrained(&pp)?, self.constrained(&pm)?);
            for (t, trace) in self.problem.traces.iter().enumerate() {
                if affects(id, &trace.setup, t) {
                    columns.push((k, t, up, down, jobs.len()));
                    jobs.push((self.trace_config(&mp, &pp, t), t));
                    jobs.push((self.trace_config(&mm, &pm, t), t));
                }
            }
        }
        let mut outcomes = self.rates_each(&jobs);
        let base: Vec<Vec<f64>> = outcomes
            .drain(..self.problem.traces.len())
            .collect::<Result<Vec<_>>>()?;
        let offset = base.len();

        for (k, t, up, down, job) in columns {
            let scale = p0.traces[t].scale;
            let r0 = &base[t];
            // A side where the model fails falls back to a one-sided difference.
            let (plus, minus, width) = match (&outcomes[job - offset], &outcomes[job + 1 - offset]) {
                (Ok(p), Ok(m)) if up > 0.0 && down > 0.0 => (p, m, up + down),
                (Ok(p), _) if up > 0.0 => (p, r0, up),
                (_, Ok(m)) if down > 0.0 => (r0, m, down),
                (Err(e), _) | (_, Err(e)) => return Err(e.clone()),
                _ => unreachable!("a zero-width side always pairs with a usable one"),
            };
            for i in 0..plus.len() {
                jac[(self.rows[t] + i, k)] = scale * (plus[i] - minus[i]) / (width * self.sigma[t][i]);
            }
        }
        let rates = base;
        // Readout parameters enter linearly; their columns follow from the base rates.
        for (k, &id) in self.layout.ids.iter().enumerate() {
            let t = match id {
                ParamId::Scale(t) | ParamId::Offset(t) | ParamId::Slope(t) => t,
                _ => continue,
            };
            let f = &self.problem.traces[t].spectrum.f_mod;
            for (i, &rate) in rates[t].iter().enumerate() {
                let dmodel = match id {
                    ParamId::Scale(_) => rate,
                    ParamId::Offset(_) => 1.0,
                    _ => f[i] - self.centers[t],
                };
                jac[(self.rows[t] + i, k)] = dmodel * dpdx[k] / self.sigma[t][i];
            }
        }
        Ok(jac)
    }
}

/// Fits `problem` starting from `init`.
///
/// Non-convergence is reported through [`FitResult::converged`] rather than as
/// an error; errors are reserved for invalid input and model failures.
pub fn fit<E: Executor>(problem: &FitProblem, init: &ModelParams, options: &FitOptions, exec: &E) -> Result<FitResult> {
    problem.validate()?;
    if init.traces.len() != problem.traces.len() {
        return Err(Error::invalid(
            "init",
            format!("{} trace parameter sets for {} traces", init.traces.len(), problem.traces.len()),
        ));
    }
    if init.rabi_scale.len() != problem.groups() {
        return Err(Error::invalid(
            "init",
            format!("{} rabi_scale values for {} groups", init.rabi_scale.len(), problem.groups()),
        ));
    }
    init.check_bounds()?;

    let (layout, x0) = Layout::new(problem, init, options)?;
    let objective = ModelObjective::new(problem, &layout, exec);
    // Residuals at the rounding level of the data are treated as an exact fit.
    let data_norm: f64 = problem
        .traces
        .iter()
        .zip(&objective.sigma)
        .flat_map(|(t, s)| t.spectrum.intensity.iter().zip(s).map(|(y, s)| (y / s) * (y / s)))
        .sum();
    let lm_options = LmOptions {
        zero_cost: options.lm.zero_cost.max(1e-26 * data_norm),
        ..options.lm
    };
    let report = lm::minimize(&objective, &x0, &lm_options, &|x| layout.project(x))?;

    let params = layout.physical(&report.x);
    let model = objective.constrained(&params)?;
    let rates = objective.all_rates(&params)?;
    let fitted = objective.fitted(&params, &rates);
    let residuals = objective.residuals_from(&fitted);

    let n = layout.ids.len();
    let m = problem.len();
    let dof = m.saturating_sub(n);
    let reduced_chi2 = if dof > 0 { report.cost / dof as f64 } else { f64::NAN };

    let (covariance, condition_number) = if n == 0 {
        (Some(DMatrix::zeros(0, 0)), 1.0)
    } else {
        let h = lm::fd_steps(&report.x, options.lm.fd_step);
        match lm::Objective::jacobian(&objective, &report.x, &report.residuals, &h) {
            Ok(mut jp) => {
                // Physical-coordinate Jacobian: columns divided by dp/dx.
                for (k, d) in layout.derivatives(&report.x).iter().enumerate() {
                    jp.column_mut(k).unscale_mut(*d);
                }
                let gram = jp.transpose() * &jp;
                let cond = correlation_condition(&gram);
                let cov = gram.cholesky().map(|c| c.inverse()).map(|mut c| {
                    if problem.weighting == Weighting::Uniform && reduced_chi2.is_finite() {
                        c *= reduced_chi2;
                    }
                    c
                });
                (cov, cond)
            }
            // Only reachable after a flagged termination; no uncertainties then.
            Err(_) => (None, f64::INFINITY),
        }
    };

    let sigma: Vec<f64> = (0..n)
        .map(|k| match &covariance {
            Some(c) if c[(k, k)] >= 0.0 => libm::sqrt(c[(k, k)]),
            _ => f64::INFINITY,
        })
        .collect();
    let poorly_constrained = layout
        .ids
        .iter()
        .zip(&sigma)
        .filter(|(id, s)| {
            !s.is_finite() || (id.bound() != Bound::Unbounded && **s > POORLY_CONSTRAINED_REL * params.get(**id).abs())
        })
        .map(|(id, _)| *id)
        .collect();

    Ok(FitResult {
        params,
        model,
        free: layout.ids.clone(),
        sigma,
        covariance,
        condition_number,
        poorly_constrained,
        rss: report.cost,
        dof,
        reduced_chi2,
        residuals,
        fitted,
        iterations: report.iterations,
        step_norm: report.step_norm,
        converged: report.termination.converged(),
        termination: report.termination,
        cost_history: report.cost_history,
    })
}

/// Outcome of one start of [`fit_best`].
#[derive(Debug, Clone, PartialEq)]
pub struct StartOutcome {
    /// Final Σ rᵢ², or the error that ended this start.
    pub rss: core::result::Result<f64, Error>,
    pub converged: bool,
    pub iterations: usize,
}

/// Runs [`fit`] from every start and keeps the lowest residual sum of squares.
///
/// Starts that fail are recorded and skipped; the first error is returned only
/// when every start fails. Returns the winning result, its index and a summary
/// of each start.
pub fn fit_best<E: Executor>(
    problem: &FitProblem,
    starts: &[ModelParams],
    options: &FitOptions,
    exec: &E,
) -> Result<(FitResult, usize, Vec<StartOutcome>)> {
    if starts.is_empty() {
        return Err(Error::invalid("starts", "at least one starting point is required"));
    }
    let mut best: Option<(FitResult, usize)> = None;
    let mut outcomes = Vec::with_capacity(starts.len());
    let mut first_error = None;
    for (k, start) in starts.iter().enumerate() {
        match fit(problem, start, options, exec) {
            Ok(res) => {
                outcomes.push(StartOutcome {
                    rss: Ok(res.rss),
                    converged: res.converged,
                    iterations: res.iterations,
                });
                if best.as_ref().is_none_or(|(b, _)| res.rss < b.rss) {
                    best = Some((res, k));
                }
            }
            Err(e) => {
                outcomes.push(StartOutcome {
                    rss: Err(e.clone()),
                    converged: false,
                    iterations: 0,
                });
                first_error.get_or_insert(e);
            }
        }
    }
    match (best, first_error) {
        (Some((res, k)), _) => Ok((res, k, outcomes)),
        (None, Some(e)) => Err(e),
        (None, None) => unreachable!("every start yields a result or an error"),
    }
}

/// Weighted residuals at physical parameters `p` (no optimization).
pub fn residuals<E: Executor>(problem: &FitProblem, p: &ModelParams, exec: &E) -> Result<Vec<Vec<f64>>> {
    problem.validate()?;
    let layout = Layout {
        ids: Vec::new(),
        transforms: Vec::new(),
        base: p.clone(),
        mode: BoundMode::Transform,
    };
    let objective = ModelObjective::new(problem, &layout, exec);
    let rates = objective.all_rates(p)?;
    Ok(objective.residuals_from(&objective.fitted(p, &rates)))
}

/// Model intensity per trace at physical parameters `p`.
pub fn model_curves<E: Executor>(problem: &FitProblem, p: &ModelParams, exec: &E) -> Result<Vec<Vec<f64>>> {
    let layout = Layout {
        ids: Vec::new(),
        transforms: Vec::new(),
        base: p.clone(),
        mode: BoundMode::Transform,
    };
    let objective = ModelObjective::new(problem, &layout, exec);
    let rates = objective.all_rates(p)?;
    Ok(objective.fitted(p, &rates))
}

fn correlation_condition(gram: &DMatrix<f64>) -> f64 {
    let n = gram.nrows();
    let d: Vec<f64> = (0..n).map(|k| gram[(k, k)]).collect();
    if d.iter().any(|&v| !(v > 0.0)) {
        return f64::INFINITY;
    }
    let corr = DMatrix::from_fn(n, n, |i, j| gram[(i, j)] / libm::sqrt(d[i] * d[j]));
    let eig = SymmetricEigen::new(corr).eigenvalues;
    let max = eig.iter().copied().fold(f64::MIN, f64::max);
    let min = eig.iter().copied().fold(f64::MAX, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}
