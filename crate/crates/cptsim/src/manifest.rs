//! JSON run manifests.
//!
//! Every frequency and rate is in Hz (cycles per second, not 2π-scaled):
//! `gamma4_hz: 23e6` means γ₄ = 2π × 23 MHz. Rabi scales are Ω/2π per √W.
//! Defaults are filled in when a manifest is resolved, and the resolved form is
//! what runs echo back in `run.json`.

use std::path::PathBuf;

use cptsim_core::analysis::{LevelStructure, ZeemanCombination, NV_GYROMAGNETIC_HZ_PER_GAUSS, NV_ZERO_FIELD_SPLITTING_HZ};
use cptsim_core::dynamics::{DriveParams, RelaxationParams};
use cptsim_core::fitter::{apply_constraints, BoundMode, ModelParams, ParamId, TraceParams, Weighting};
use cptsim_core::spectrum::{linspace, validate_grid, ExperimentConfig, GroundLevels, LaserOn, Readout};
use cptsim_core::units::{hz_to_rad, rad_to_hz};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::scans::NoiseModel;

pub const DEFAULT_GAMMA_TOTAL_HZ: f64 = 13.4e6;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaserOnSpec {
    Ms0,
    Ms1,
}

impl From<LaserOnSpec> for LaserOn {
    fn from(l: LaserOnSpec) -> Self {
        match l {
            LaserOnSpec::Ms0 => LaserOn::Ms0,
            LaserOnSpec::Ms1 => LaserOn::Ms1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombinationSpec {
    #[default]
    Quadrature,
    Linear,
}

fn default_d_gs() -> f64 {
    NV_ZERO_FIELD_SPLITTING_HZ
}

fn default_gyromag() -> f64 {
    NV_GYROMAGNETIC_HZ_PER_GAUSS
}

fn default_gamma_total() -> f64 {
    DEFAULT_GAMMA_TOTAL_HZ
}

fn default_strengths() -> [f64; 3] {
    [1.0, 0.14, 0.05]
}

fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LevelsSpec {
    /// Ground-level structure from zero-field splitting and magnetic field.
    Structure {
        delta_pm_hz: f64,
        #[serde(default)]
        b_gauss: f64,
        #[serde(default = "default_d_gs")]
        d_gs_hz: f64,
        #[serde(default = "default_gyromag")]
        gyromag_hz_per_gauss: f64,
        #[serde(default)]
        combination: CombinationSpec,
    },
    /// Energies of |2⟩ and |3⟩ given directly.
    Energies { e2_hz: f64, e3_hz: f64 },
}

impl LevelsSpec {
    pub fn structure(&self) -> Option<LevelStructure> {
        match *self {
            LevelsSpec::Structure {
                delta_pm_hz,
                b_gauss,
                d_gs_hz,
                gyromag_hz_per_gauss,
                combination,
            } => Some(LevelStructure {
                d_gs: d_gs_hz,
                delta_pm: delta_pm_hz,
                b_field: b_gauss,
                gyromag: gyromag_hz_per_gauss,
                combination: match combination {
                    CombinationSpec::Quadrature => ZeemanCombination::Quadrature,
                    CombinationSpec::Linear => ZeemanCombination::Linear,
                },
            }),
            LevelsSpec::Energies { .. } => None,
        }
    }

    pub fn ground_levels(&self) -> CliResult<GroundLevels> {
        match (self.structure(), *self) {
            (Some(s), _) => {
                s.validate()?;
                Ok(GroundLevels::from(&s))
            }
            (None, LevelsSpec::Energies { e2_hz, e3_hz }) => Ok(GroundLevels { e2: e2_hz, e3: e3_hz }),
            _ => unreachable!(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RelaxSpec {
    /// The constrained family: Γ₁ = branching·Γ, Γ₃/Γ₂ = s₃/s₂,
    /// γᵢ₄ = Γ/2 + γ₄, ground coherences all γ₁.
    Constrained {
        #[serde(default = "default_gamma_total")]
        gamma_total_hz: f64,
        branching: f64,
        gamma4_hz: f64,
        gamma1_hz: f64,
    },
    /// Explicit rates; coherence order γ12, γ13, γ23, γ14, γ24, γ34.
    Explicit { gamma_pop_hz: [f64; 3], gamma_coh_hz: [f64; 6] },
}

impl RelaxSpec {
    pub fn build(&self, strengths: &[f64; 3], levels: GroundLevels) -> CliResult<RelaxationParams> {
        match *self {
            RelaxSpec::Constrained {
                gamma_total_hz,
                branching,
                gamma4_hz,
                gamma1_hz,
            } => {
                let p = ModelParams {
                    s2: strengths[1],
                    s3: strengths[2],
                    branching,
                    gamma4: hz_to_rad(gamma4_hz),
                    gamma1: hz_to_rad(gamma1_hz),
                    e2: levels.e2,
                    e3: levels.e3,
                    rabi_scale: vec![],
                    traces: vec![],
                };
                Ok(apply_constraints(&p, hz_to_rad(gamma_total_hz))?.relax)
            }
            RelaxSpec::Explicit {
                gamma_pop_hz,
                gamma_coh_hz,
            } => Ok(RelaxationParams::new(gamma_pop_hz.map(hz_to_rad), gamma_coh_hz.map(hz_to_rad))?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub levels: LevelsSpec,
    pub laser_on: LaserOnSpec,
    #[serde(default)]
    pub carrier_detune_hz: f64,
    pub power_w: f64,
    pub sideband_rel: f64,
    #[serde(default = "default_strengths")]
    pub strengths: [f64; 3],
    /// Ω/2π per √W of power × strength.
    pub rabi_hz_per_sqrt_w: f64,
    pub relax: RelaxSpec,
}

impl ExperimentSpec {
    pub fn build(&self) -> CliResult<ExperimentConfig> {
        let levels = self.levels.ground_levels()?;
        let cfg = ExperimentConfig {
            levels,
            laser_on: self.laser_on.into(),
            carrier_detune: self.carrier_detune_hz,
            power: self.power_w,
            sideband_rel: self.sideband_rel,
            strengths: self.strengths,
            rabi_scale: hz_to_rad(self.rabi_hz_per_sqrt_w),
            relax: self.relax.build(&self.strengths, levels)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Range { start_hz: f64, stop_hz: f64, points: usize },
    Values { values_hz: Vec<f64> },
}

impl GridSpec {
    pub fn build(&self) -> CliResult<Vec<f64>> {
        let grid = match self {
            GridSpec::Range { start_hz, stop_hz, points } => linspace(*start_hz, *stop_hz, *points),
            GridSpec::Values { values_hz } => values_hz.clone(),
        };
        validate_grid(&grid)?;
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutSpec {
    #[serde(default = "default_one")]
    pub scale: f64,
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub slope_per_hz: f64,
}

impl Default for ReadoutSpec {
    fn default() -> Self {
        ReadoutSpec {
            scale: 1.0,
            offset: 0.0,
            slope_per_hz: 0.0,
        }
    }
}

impl ReadoutSpec {
    pub fn build(&self) -> CliResult<Readout> {
        for (name, v) in [("scale", self.scale), ("offset", self.offset), ("slope_per_hz", self.slope_per_hz)] {
            if !v.is_finite() {
                return Err(usage(format!("readout.{name} must be finite")));
            }
        }
        if self.scale < 0.0 {
            return Err(usage("readout.scale must be >= 0"));
        }
        Ok(Readout {
            scale: self.scale,
            offset: self.offset,
            slope: self.slope_per_hz,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub n_scans: usize,
    pub active_prob: f64,
    pub dwell_s: f64,
    #[serde(default)]
    pub spectral_diffusion_hz: f64,
    /// Total-count threshold for the kept sum; the midpoint rule when absent.
    #[serde(default)]
    pub threshold: Option<f64>,
}

impl ScanSpec {
    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            active_prob: self.active_prob,
            dwell: self.dwell_s,
            spectral_diffusion: self.spectral_diffusion_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateManifest {
    #[serde(default)]
    pub seed: Option<u64>,
    pub experiment: ExperimentSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub readout: ReadoutSpec,
    #[serde(default)]
    pub scans: Option<ScanSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeemanManifest {
    #[serde(default)]
    pub seed: Option<u64>,
    /// `levels` must be the structure form; its `b_gauss` is replaced per field.
    pub experiment: ExperimentSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub readout: ReadoutSpec,
    pub fields_gauss: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    /// Ω/2π of the 1–4, 2–4 and 3–4 drives.
    pub omega_hz: [f64; 3],
    pub delta1_hz: f64,
    pub delta2_hz: f64,
    pub delta23_hz: f64,
}

impl DriveSpec {
    pub fn build(&self) -> DriveParams {
        DriveParams::real(
            self.omega_hz.map(hz_to_rad),
            hz_to_rad(self.delta1_hz),
            hz_to_rad(self.delta2_hz),
            hz_to_rad(self.delta23_hz),
        )
    }
}

fn default_dark_tolerance() -> f64 {
    cptsim_core::analysis::DEFAULT_DARK_TOLERANCE
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarkstateManifest {
    #[serde(default)]
    pub seed: Option<u64>,
    pub drive: DriveSpec,
    #[serde(default = "default_dark_tolerance")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSpec {
    pub name: String,
    /// Spectrum CSV, relative to the manifest's directory unless absolute.
    pub csv: PathBuf,
    pub laser_on: LaserOnSpec,
    pub power_w: f64,
    pub sideband_rel: f64,
    /// Power group sharing one Rabi scale.
    pub group: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightingSpec {
    #[default]
    Poisson,
    Uniform,
}

impl From<WeightingSpec> for Weighting {
    fn from(w: WeightingSpec) -> Self {
        match w {
            WeightingSpec::Poisson => Weighting::Poisson,
            WeightingSpec::Uniform => Weighting::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundModeSpec {
    #[default]
    Transform,
    Clamp,
}

impl From<BoundModeSpec> for BoundMode {
    fn from(b: BoundModeSpec) -> Self {
        match b {
            BoundModeSpec::Transform => BoundMode::Transform,
            BoundModeSpec::Clamp => BoundMode::Clamp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceInit {
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default)]
    pub offset: Option<f64>,
    #[serde(default)]
    pub slope_per_hz: Option<f64>,
    #[serde(default)]
    pub carrier_detune_hz: Option<f64>,
}

/// Starting values; anything missing comes from the default initialization.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InitSpec {
    #[serde(default)]
    pub s2: Option<f64>,
    #[serde(default)]
    pub s3: Option<f64>,
    #[serde(default)]
    pub branching: Option<f64>,
    #[serde(default)]
    pub gamma4_hz: Option<f64>,
    #[serde(default)]
    pub gamma1_hz: Option<f64>,
    #[serde(default)]
    pub e2_hz: Option<f64>,
    #[serde(default)]
    pub e3_hz: Option<f64>,
    #[serde(default)]
    pub rabi_hz_per_sqrt_w: Vec<Option<f64>>,
    #[serde(default)]
    pub traces: Vec<TraceInit>,
}

impl InitSpec {
    /// Overlays the given values on `base`. Returns whether any readout value
    /// was left to the default (and so should be regressed).
    pub fn overlay(&self, base: &mut ModelParams) -> CliResult<bool> {
        let set = |slot: &mut f64, v: Option<f64>, f: fn(f64) -> f64| {
            if let Some(v) = v {
                *slot = f(v);
            }
        };
        let id = |x: f64| x;
        set(&mut base.s2, self.s2, id);
        set(&mut base.s3, self.s3, id);
        set(&mut base.branching, self.branching, id);
        set(&mut base.gamma4, self.gamma4_hz, hz_to_rad);
        set(&mut base.gamma1, self.gamma1_hz, hz_to_rad);
        set(&mut base.e2, self.e2_hz, id);
        set(&mut base.e3, self.e3_hz, id);
        if self.rabi_hz_per_sqrt_w.len() > base.rabi_scale.len() {
            return Err(usage("init.rabi_hz_per_sqrt_w has more entries than power groups"));
        }
        for (slot, v) in base.rabi_scale.iter_mut().zip(&self.rabi_hz_per_sqrt_w) {
            set(slot, *v, hz_to_rad);
        }
        if self.traces.len() > base.traces.len() {
            return Err(usage("init.traces has more entries than traces"));
        }
        let mut readout_defaulted = self.traces.len() < base.traces.len();
        for (tp, ti) in base.traces.iter_mut().zip(&self.traces) {
            set(&mut tp.scale, ti.scale, id);
            set(&mut tp.offset, ti.offset, id);
            set(&mut tp.slope, ti.slope_per_hz, id);
            set(&mut tp.carrier_detune, ti.carrier_detune_hz, id);
            readout_defaulted |= ti.scale.is_none() || ti.offset.is_none() || ti.slope_per_hz.is_none();
        }
        Ok(readout_defaulted)
    }

    /// Complete specification of `p`.
    pub fn from_params(p: &ModelParams) -> Self {
        InitSpec {
            s2: Some(p.s2),
            s3: Some(p.s3),
            branching: Some(p.branching),
            gamma4_hz: Some(rad_to_hz(p.gamma4)),
            gamma1_hz: Some(rad_to_hz(p.gamma1)),
            e2_hz: Some(p.e2),
            e3_hz: Some(p.e3),
            rabi_hz_per_sqrt_w: p.rabi_scale.iter().map(|&r| Some(rad_to_hz(r))).collect(),
            traces: p.traces.iter().map(trace_init).collect(),
        }
    }
}

fn trace_init(t: &TraceParams) -> TraceInit {
    TraceInit {
        scale: Some(t.scale),
        offset: Some(t.offset),
        slope_per_hz: Some(t.slope),
        carrier_detune_hz: Some(t.carrier_detune),
    }
}

fn default_max_iterations() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitManifest {
    #[serde(default)]
    pub seed: Option<u64>,
    pub traces: Vec<TraceSpec>,
    #[serde(default = "default_gamma_total")]
    pub gamma_total_hz: f64,
    #[serde(default)]
    pub weighting: WeightingSpec,
    #[serde(default)]
    pub bound_mode: BoundModeSpec,
    /// Names of parameters held at their initial values, e.g. `"gamma1"`, `"carrier_detune[0]"`.
    #[serde(default)]
    pub fixed: Vec<String>,
    #[serde(default)]
    pub init: InitSpec,
    /// Further starting points, each overlaid on the default initialization;
    /// `{}` restarts from the default itself. The lowest-cost fit is reported.
    #[serde(default)]
    pub restarts: Vec<InitSpec>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

/// Looks up a parameter by its display name.
pub fn param_by_name(name: &str, groups: usize, traces: usize) -> CliResult<ParamId> {
    ModelParams::all_ids(groups, traces)
        .into_iter()
        .find(|id| id.name() == name)
        .ok_or_else(|| usage(format!("unknown parameter `{name}`")))
}

/// Physical value of a parameter in manifest units (rates and Rabi scales in Hz).
pub fn to_manifest_units(id: ParamId, v: f64) -> f64 {
    match id {
        ParamId::Gamma4 | ParamId::Gamma1 | ParamId::RabiScale(_) => rad_to_hz(v),
        _ => v,
    }
}

pub fn unit_of(id: ParamId) -> &'static str {
    match id {
        ParamId::Gamma4 | ParamId::Gamma1 | ParamId::E2 | ParamId::E3 | ParamId::CarrierDetune(_) => "Hz",
        ParamId::RabiScale(_) => "Hz/sqrt(W)",
        ParamId::Slope(_) => "1/Hz",
        _ => "",
    }
}
