use alloc::boxed::Box;
use alloc::string::String;

/// Errors produced by the model, solver and fitter.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// The Liouvillian has more than one stationary state.
    #[error("steady state is not unique: null space has dimension {dimension}")]
    DegenerateSteadyState { dimension: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A coherence fraction was requested for an (almost) empty level.
    #[error("coherence fraction undefined: population of level {level} is {population:e}")]
    UndefinedFraction { level: usize, population: f64 },

    #[error("no scan has total counts above threshold {threshold}")]
    EmptySelection { threshold: f64 },

    /// Wraps a forward-model failure with the modulation frequency at which it happened.
    #[error("at f_mod = {f_mod_hz} Hz: {source}")]
    AtFrequency { f_mod_hz: f64, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn at_frequency(self, f_mod_hz: f64) -> Self {
        Error::AtFrequency {
            f_mod_hz,
            source: Box::new(self),
        }
    }

    /// Strips any frequency context and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtFrequency { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
