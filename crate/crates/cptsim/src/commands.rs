//! Subcommand implementations. Each writes its outputs plus `run.json`, a
//! record holding the fully resolved manifest; feeding that record back as
//! `--manifest` repeats the run exactly.

use std::io::Write;
use std::path::{Path, PathBuf};

use cptsim_core::analysis::{dark_subspace, predict_dip_frequencies, DarkReport};
use cptsim_core::fitter::{
    default_init, fit_best, regress_readout, FitOptions, FitProblem, FitResult, LmOptions, ModelParams, StartOutcome,
    TraceData, TraceSetup,
};
use cptsim_core::spectrum::{sweep, threshold_sum, Spectrum};
use cptsim_core::units::{hz_to_rad, rad_to_hz};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io;
use crate::manifest::{
    param_by_name, to_manifest_units, unit_of, DarkstateManifest, FitManifest, InitSpec, LevelsSpec, SimulateManifest,
    ZeemanManifest,
};
use crate::par::Rayon;
use crate::scans::simulate_scans;

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub manifest: PathBuf,
    pub seed: Option<u64>,
    pub out: PathBuf,
    /// Stream the primary CSV (or JSON report) to stdout as well.
    pub stdout: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunRecord<M> {
    pub command: String,
    pub version: String,
    pub manifest: M,
    pub outputs: Vec<String>,
}

/// Loads a manifest, or the manifest inside a previous run's `run.json`.
pub fn load_manifest<M: DeserializeOwned>(path: &Path, command: &str) -> CliResult<M> {
    let value: serde_json::Value = io::read_json(path)?;
    let json_err = |reason: String| CliError::Json {
        path: path.into(),
        reason,
    };
    let inner = match value.get("manifest") {
        Some(m) if value.get("command").is_some() => {
            let recorded = value["command"].as_str().unwrap_or_default();
            if recorded != command {
                return Err(json_err(format!("run record is for `{recorded}`, not `{command}`")));
            }
            m.clone()
        }
        _ => value,
    };
    serde_json::from_value(inner).map_err(|e| json_err(e.to_string()))
}

struct Outputs<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl<'a> Outputs<'a> {
    fn new(dir: &'a Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Outputs {
            dir,
            written: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_owned());
        self.dir.join(name)
    }

    fn record<M: Serialize>(mut self, command: &str, manifest: M) -> CliResult<()> {
        let path = self.path("run.json");
        let record = RunRecord {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            manifest,
            outputs: self.written,
        };
        io::write_json(&path, &record)
    }
}

fn stream_spectrum(s: &Spectrum) -> CliResult<()> {
    let stdout = std::io::stdout();
    io::write_spectrum(stdout.lock(), Path::new("<stdout>"), s)
}

#[derive(Debug, Serialize)]
struct ScanSidecar {
    seed: u64,
    n_scans: usize,
    bins: usize,
    active: Vec<bool>,
    totals: Vec<u64>,
    threshold: f64,
    threshold_rule: &'static str,
    kept: usize,
    selected: Vec<bool>,
    noise: crate::scans::NoiseModel,
    experiment: crate::manifest::ExperimentSpec,
    readout: crate::manifest::ReadoutSpec,
}

pub fn simulate(opts: &RunOptions) -> CliResult<()> {
    let mut m: SimulateManifest = load_manifest(&opts.manifest, "simulate")?;
    m.seed = opts.seed.or(m.seed);
    let cfg = m.experiment.build()?;
    let grid = m.grid.build()?;
    let readout = m.readout.build()?;
    if m.scans.is_some() && m.seed.is_none() {
        return Err(CliError::Usage("scans requested but no seed given (manifest `seed` or --seed)".into()));
    }
    let spectrum = sweep(&cfg, &grid, &readout, &Rayon)?;

    let mut out = Outputs::new(&opts.out)?;
    io::spectrum_to_file(&out.path("spectrum.csv"), &spectrum)?;
    if opts.stdout {
        stream_spectrum(&spectrum)?;
    }
    if let (Some(scans), Some(seed)) = (m.scans, m.seed) {
        let series = simulate_scans(&cfg, &grid, &readout, scans.n_scans, &scans.noise(), seed, &Rayon)?;
        let path = out.path("scans.csv");
        io::write_scans(io::create(&path)?, &path, &series)?;
        let (threshold, rule) = match scans.threshold {
            Some(t) => (t, "fixed"),
            None => (series.midpoint_threshold(), "midpoint"),
        };
        let kept = threshold_sum(&series, threshold)?;
        io::spectrum_to_file(&out.path("threshold_sum.csv"), &kept.spectrum)?;
        let sidecar = ScanSidecar {
            seed,
            n_scans: series.len(),
            bins: grid.len(),
            active: series.active.clone(),
            totals: series.totals(),
            threshold,
            threshold_rule: rule,
            kept: kept.kept,
            selected: kept.selected.clone(),
            noise: scans.noise(),
            experiment: m.experiment,
            readout: m.readout,
        };
        io::write_json(&out.path("scans.json"), &sidecar)?;
    }
    out.record("simulate", &m)
}

#[derive(Debug, Serialize)]
struct DipRow {
    b_gauss: f64,
    predicted_low_hz: f64,
    predicted_high_hz: f64,
    simulated_low_hz: f64,
    simulated_high_hz: f64,
    off_dip_intensity: f64,
}

/// Grid point of lowest intensity within `half_width` of `f`.
pub fn min_near(s: &Spectrum, f: f64, half_width: f64) -> f64 {
    s.points()
        .filter(|(x, _)| (x - f).abs() <= half_width)
        .fold((f, f64::INFINITY), |best, (x, y)| if y < best.1 { (x, y) } else { best })
        .0
}

pub fn zeeman(opts: &RunOptions) -> CliResult<()> {
    let mut m: ZeemanManifest = load_manifest(&opts.manifest, "zeeman")?;
    m.seed = opts.seed.or(m.seed);
    if m.fields_gauss.is_empty() {
        return Err(CliError::Usage("fields_gauss is empty".into()));
    }
    if let Some(b) = m.fields_gauss.iter().find(|b| !(**b >= 0.0 && b.is_finite())) {
        return Err(CliError::Usage(format!("field {b} G is negative or non-finite")));
    }
    let LevelsSpec::Structure { .. } = m.experiment.levels else {
        return Err(CliError::Usage("zeeman needs `levels` with delta_pm_hz (structure form)".into()));
    };
    let grid = m.grid.build()?;
    let readout = m.readout.build()?;

    let mut out = Outputs::new(&opts.out)?;
    let mut rows = Vec::new();
    for &b in &m.fields_gauss {
        let mut exp = m.experiment;
        if let LevelsSpec::Structure { b_gauss, .. } = &mut exp.levels {
            *b_gauss = b;
        }
        let structure = exp.levels.structure().expect("structure form");
        let (lo, hi) = predict_dip_frequencies(&structure)?;
        let cfg = exp.build()?;
        let s = sweep(&cfg, &grid, &readout, &Rayon)?;
        io::spectrum_to_file(&out.path(&format!("zeeman_b{b}.csv")), &s)?;
        if opts.stdout {
            stream_spectrum(&s)?;
        }
        let window = (0.5 * (hi - lo)).clamp(0.5e6, 20e6);
        rows.push(DipRow {
            b_gauss: b,
            predicted_low_hz: lo,
            predicted_high_hz: hi,
            simulated_low_hz: min_near(&s, lo, window),
            simulated_high_hz: min_near(&s, hi, window),
            off_dip_intensity: s.intensity.iter().copied().fold(0.0, f64::max),
        });
    }
    let path = out.path("dips.csv");
    let mut w = csv::Writer::from_writer(io::create(&path)?);
    for row in &rows {
        w.serialize(row).map_err(|e| CliError::Csv {
            path: path.clone(),
            row: 0,
            reason: e.to_string(),
        })?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    out.record("zeeman", &m)
}

#[derive(Debug, Serialize)]
pub struct DarkReportJson {
    pub dimension: usize,
    pub residual: f64,
    /// Ground-state amplitudes of each dark state, as (re, im) pairs.
    pub basis: Vec<[[f64; 2]; 3]>,
}

impl From<&DarkReport> for DarkReportJson {
    fn from(r: &DarkReport) -> Self {
        DarkReportJson {
            dimension: r.dimension,
            residual: r.residual,
            basis: r.basis.iter().map(|v| v.map(|c| [c.re, c.im])).collect(),
        }
    }
}

pub fn darkstate(opts: &RunOptions) -> CliResult<DarkReportJson> {
    let mut m: DarkstateManifest = load_manifest(&opts.manifest, "darkstate")?;
    m.seed = opts.seed.or(m.seed);
    let report = dark_subspace(&m.drive.build(), m.tolerance)?;
    let json = DarkReportJson::from(&report);
    let text = serde_json::to_string_pretty(&json).expect("serializable report");
    println!("{text}");
    let mut out = Outputs::new(&opts.out)?;
    let path = out.path("darkstate.json");
    io::write_json(&path, &json)?;
    out.record("darkstate", m)?;
    Ok(json)
}

#[derive(Debug, Serialize)]
struct ParamReport {
    name: String,
    value: f64,
    sigma: Option<f64>,
    unit: &'static str,
    free: bool,
}

#[derive(Debug, Serialize)]
struct TraceReport {
    name: String,
    curve_csv: String,
    points: usize,
}

#[derive(Debug, Serialize)]
struct StartReport {
    rss: Option<f64>,
    converged: bool,
    iterations: usize,
    error: Option<String>,
}

impl From<&StartOutcome> for StartReport {
    fn from(o: &StartOutcome) -> Self {
        StartReport {
            rss: o.rss.as_ref().ok().copied(),
            converged: o.converged,
            iterations: o.iterations,
            error: o.rss.as_ref().err().map(|e| e.to_string()),
        }
    }
}

#[derive(Debug, Serialize)]
struct FitReport {
    converged: bool,
    termination: String,
    iterations: usize,
    step_norm: f64,
    rss: f64,
    dof: usize,
    reduced_chi2: f64,
    condition_number: f64,
    parameters: Vec<ParamReport>,
    gamma_pop_hz: [f64; 3],
    gamma_coh_hz: [f64; 6],
    poorly_constrained: Vec<String>,
    cost_history: Vec<f64>,
    /// Index of the winning starting point (0 is `init`, then `restarts`).
    start: usize,
    starts: Vec<StartReport>,
    traces: Vec<TraceReport>,
}

fn fit_report(res: &FitResult, start: usize, outcomes: &[StartOutcome], traces: Vec<TraceReport>) -> FitReport {
    let ids = ModelParams::all_ids(res.params.rabi_scale.len(), res.params.traces.len());
    let parameters = ids
        .into_iter()
        .map(|id| {
            let sigma = res.sigma_of(id);
            ParamReport {
                name: id.name(),
                value: to_manifest_units(id, res.value(id)),
                sigma: sigma.filter(|s| s.is_finite()).map(|s| to_manifest_units(id, s)),
                unit: unit_of(id),
                free: sigma.is_some(),
            }
        })
        .collect();
    FitReport {
        converged: res.converged,
        termination: format!("{:?}", res.termination),
        iterations: res.iterations,
        step_norm: res.step_norm,
        rss: res.rss,
        dof: res.dof,
        reduced_chi2: res.reduced_chi2,
        condition_number: res.condition_number,
        parameters,
        gamma_pop_hz: res.model.relax.gamma_pop.map(rad_to_hz),
        gamma_coh_hz: res.model.relax.gamma_coh.map(rad_to_hz),
        poorly_constrained: res.poorly_constrained.iter().map(|id| id.name()).collect(),
        cost_history: res.cost_history.clone(),
        start,
        starts: outcomes.iter().map(StartReport::from).collect(),
        traces,
    }
}

/// Starting point from the default initialization with `spec` overlaid.
fn resolve_start(problem: &FitProblem, spec: &InitSpec) -> CliResult<ModelParams> {
    let mut p = default_init(problem)?;
    if spec.overlay(&mut p)? {
        regress_readout(problem, &mut p)?;
        spec.overlay(&mut p)?;
    }
    Ok(p)
}

/// Reads the traces, resolves the starting points (the init first, then each
/// restart), and returns them together with a manifest whose paths are
/// absolute and whose starting values are complete.
pub fn prepare_fit(
    manifest_path: &Path,
    mut m: FitManifest,
) -> CliResult<(FitProblem, Vec<ModelParams>, FitOptions, FitManifest)> {
    if m.traces.is_empty() {
        return Err(CliError::Usage("fit manifest has no traces".into()));
    }
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut traces = Vec::new();
    for t in &mut m.traces {
        let path = io::resolve(base, &t.csv);
        let spectrum = io::spectrum_from_file(&path)?;
        t.csv = std::fs::canonicalize(&path).map_err(|e| CliError::io(&path, e))?;
        traces.push(TraceData {
            name: t.name.clone(),
            spectrum,
            setup: TraceSetup {
                laser_on: t.laser_on.into(),
                power: t.power_w,
                sideband_rel: t.sideband_rel,
                group: t.group,
            },
        });
    }
    let problem = FitProblem {
        traces,
        gamma_total: hz_to_rad(m.gamma_total_hz),
        weighting: m.weighting.into(),
    };
    problem.validate()?;

    let starts = std::iter::once(&m.init)
        .chain(&m.restarts)
        .map(|spec| resolve_start(&problem, spec))
        .collect::<CliResult<Vec<_>>>()?;
    let fixed = m
        .fixed
        .iter()
        .map(|name| param_by_name(name, problem.groups(), problem.traces.len()))
        .collect::<CliResult<Vec<_>>>()?;
    let options = FitOptions {
        lm: LmOptions {
            max_iterations: m.max_iterations,
            ..LmOptions::default()
        },
        bound_mode: m.bound_mode.into(),
        fixed,
    };
    m.init = InitSpec::from_params(&starts[0]);
    m.restarts = starts[1..].iter().map(InitSpec::from_params).collect();
    Ok((problem, starts, options, m))
}

pub fn run_fit(opts: &RunOptions) -> CliResult<FitResult> {
    let mut m: FitManifest = load_manifest(&opts.manifest, "fit")?;
    m.seed = opts.seed.or(m.seed);
    let (problem, starts, options, resolved) = prepare_fit(&opts.manifest, m)?;
    let (res, start, outcomes) = fit_best(&problem, &starts, &options, &Rayon)?;

    let mut out = Outputs::new(&opts.out)?;
    let mut traces = Vec::new();
    for (t, trace) in problem.traces.iter().enumerate() {
        let name = format!("fit_{}.csv", trace.name);
        let path = out.path(&name);
        io::write_fit_curve(io::create(&path)?, &path, &trace.spectrum, &res.fitted[t], &res.residuals[t])?;
        traces.push(TraceReport {
            name: trace.name.clone(),
            curve_csv: name,
            points: trace.spectrum.len(),
        });
    }
    let report = fit_report(&res, start, &outcomes, traces);
    io::write_json(&out.path("fit.json"), &report)?;
    if opts.stdout {
        let mut stdout = std::io::stdout().lock();
        serde_json::to_writer_pretty(&mut stdout, &report).expect("serializable report");
        writeln!(stdout).map_err(|e| CliError::io("<stdout>", e))?;
    }
    out.record("fit", &resolved)?;
    if !res.converged {
        return Err(CliError::NotConverged(format!(
            "{:?} after {} iterations",
            res.termination, res.iterations
        )));
    }
    Ok(res)
}
