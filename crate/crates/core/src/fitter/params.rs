use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// One scalar of the fit model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamId {
    /// Ω₂²/Ω₁² at equal power.
    S2,
    /// Ω₃²/Ω₁² at equal power.
    S3,
    /// Γ₁/Γ.
    Branching,
    /// Extra optical dephasing γ₄, rad/s.
    Gamma4,
    /// Ground-state decoherence γ₁, rad/s.
    Gamma1,
    /// Energy of |2⟩, Hz.
    E2,
    /// Energy of |3⟩, Hz.
    E3,
    /// Shared rabi_scale of a linked power group, rad/s/√W.
    RabiScale(usize),
    /// Per-trace fluorescence multiplier.
    Scale(usize),
    /// Per-trace background offset.
    Offset(usize),
    /// Per-trace background slope, per Hz.
    Slope(usize),
    /// Per-trace carrier detuning, Hz.
    CarrierDetune(usize),
}

impl ParamId {
    pub fn name(&self) -> String {
        match self {
            ParamId::S2 => "s2".into(),
            ParamId::S3 => "s3".into(),
            ParamId::Branching => "branching".into(),
            ParamId::Gamma4 => "gamma4".into(),
            ParamId::Gamma1 => "gamma1".into(),
            ParamId::E2 => "e2".into(),
            ParamId::E3 => "e3".into(),
            ParamId::RabiScale(g) => format!("rabi_scale[{g}]"),
            ParamId::Scale(t) => format!("scale[{t}]"),
            ParamId::Offset(t) => format!("offset[{t}]"),
            ParamId::Slope(t) => format!("slope[{t}]"),
            ParamId::CarrierDetune(t) => format!("carrier_detune[{t}]"),
        }
    }

    pub fn bound(&self) -> Bound {
        match self {
            ParamId::S2 | ParamId::S3 | ParamId::Gamma4 | ParamId::Gamma1 | ParamId::RabiScale(_) | ParamId::Scale(_) => {
                Bound::Positive
            }
            ParamId::Branching => Bound::UnitInterval,
            _ => Bound::Unbounded,
        }
    }

    /// Parameters that change the steady state (everything except the readout).
    pub fn is_physical(&self) -> bool {
        !matches!(self, ParamId::Scale(_) | ParamId::Offset(_) | ParamId::Slope(_))
    }
}

impl fmt::Display for ParamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// p ≥ 0.
    Positive,
    /// 0 ≤ p ≤ 1.
    UnitInterval,
    Unbounded,
}

impl Bound {
    pub fn contains(&self, p: f64) -> bool {
        p.is_finite()
            && match self {
                Bound::Positive => p >= 0.0,
                Bound::UnitInterval => (0.0..=1.0).contains(&p),
                Bound::Unbounded => true,
            }
    }

    pub fn clamp(&self, p: f64) -> f64 {
        match self {
            Bound::Positive => p.max(0.0),
            Bound::UnitInterval => p.clamp(0.0, 1.0),
            Bound::Unbounded => p,
        }
    }
}

/// Readout and carrier parameters of one trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceParams {
    pub scale: f64,
    pub offset: f64,
    pub slope: f64,
    pub carrier_detune: f64,
}

/// Physical values of every fit parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub s2: f64,
    pub s3: f64,
    pub branching: f64,
    pub gamma4: f64,
    pub gamma1: f64,
    pub e2: f64,
    pub e3: f64,
    pub rabi_scale: Vec<f64>,
    pub traces: Vec<TraceParams>,
}

impl ModelParams {
    pub fn get(&self, id: ParamId) -> f64 {
        match id {
            ParamId::S2 => self.s2,
            ParamId::S3 => self.s3,
            ParamId::Branching => self.branching,
            ParamId::Gamma4 => self.gamma4,
            ParamId::Gamma1 => self.gamma1,
            ParamId::E2 => self.e2,
            ParamId::E3 => self.e3,
            ParamId::RabiScale(g) => self.rabi_scale[g],
            ParamId::Scale(t) => self.traces[t].scale,
            ParamId::Offset(t) => self.traces[t].offset,
            ParamId::Slope(t) => self.traces[t].slope,
            ParamId::CarrierDetune(t) => self.traces[t].carrier_detune,
        }
    }

    pub fn set(&mut self, id: ParamId, v: f64) {
        let slot = match id {
            ParamId::S2 => &mut self.s2,
            ParamId::S3 => &mut self.s3,
            ParamId::Branching => &mut self.branching,
            ParamId::Gamma4 => &mut self.gamma4,
            ParamId::Gamma1 => &mut self.gamma1,
            ParamId::E2 => &mut self.e2,
            ParamId::E3 => &mut self.e3,
            ParamId::RabiScale(g) => &mut self.rabi_scale[g],
            ParamId::Scale(t) => &mut self.traces[t].scale,
            ParamId::Offset(t) => &mut self.traces[t].offset,
            ParamId::Slope(t) => &mut self.traces[t].slope,
            ParamId::CarrierDetune(t) => &mut self.traces[t].carrier_detune,
        };
        *slot = v;
    }

    /// Every parameter id for `groups` rabi groups and `traces` traces, in canonical order.
    pub fn all_ids(groups: usize, traces: usize) -> Vec<ParamId> {
        let mut ids = alloc::vec![
            ParamId::S2,
            ParamId::S3,
            ParamId::Branching,
            ParamId::Gamma4,
            ParamId::Gamma1,
            ParamId::E2,
            ParamId::E3,
        ];
        ids.extend((0..groups).map(ParamId::RabiScale));
        for t in 0..traces {
            ids.extend([ParamId::Scale(t), ParamId::Offset(t), ParamId::Slope(t), ParamId::CarrierDetune(t)]);
        }
        ids
    }

    pub fn check_bounds(&self) -> Result<()> {
        for id in Self::all_ids(self.rabi_scale.len(), self.traces.len()) {
            let v = self.get(id);
            if !id.bound().contains(v) {
                return Err(Error::invalid(id.name(), format!("value {v} violates bound {:?}", id.bound())));
            }
        }
        Ok(())
    }
}

/// How a free parameter maps to the optimizer's unconstrained coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    /// p = exp(x).
    Log,
    /// p = 1/(1+exp(−x)).
    Logistic,
    /// p = origin + unit·x.
    Linear { origin: f64, unit: f64 },
}

impl Transform {
    pub fn to_internal(&self, p: f64) -> f64 {
        match *self {
            Transform::Log => libm::log(p),
            Transform::Logistic => libm::log(p / (1.0 - p)),
            Transform::Linear { origin, unit } => (p - origin) / unit,
        }
    }

    pub fn to_physical(&self, x: f64) -> f64 {
        match *self {
            Transform::Log => libm::exp(x),
            Transform::Logistic => 1.0 / (1.0 + libm::exp(-x)),
            Transform::Linear { origin, unit } => origin + unit * x,
        }
    }

    /// dp/dx at internal coordinate x.
    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Transform::Log => libm::exp(x),
            Transform::Logistic => {
                let p = self.to_physical(x);
                p * (1.0 - p)
            }
            Transform::Linear { unit, .. } => unit,
        }
    }
}
