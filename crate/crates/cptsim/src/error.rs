use std::path::PathBuf;

/// Failures of the file and command layer, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad manifest, flag or argument.
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {reason}", path.display())]
    Json { path: PathBuf, reason: String },

    /// Malformed CSV; `row` is the 1-based line number in the file.
    #[error("{}: row {row}: {reason}", path.display())]
    Csv { path: PathBuf, row: u64, reason: String },

    #[error(transparent)]
    Model(#[from] cptsim_core::Error),

    /// The fit finished without meeting a convergence criterion. Results are written.
    #[error("fit did not converge ({0})")]
    NotConverged(String),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use cptsim_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Json { .. } | CliError::Csv { .. } => EXIT_INVALID,
            CliError::Io { .. } => EXIT_IO,
            CliError::Model(e) => match e.root() {
                E::DegenerateSteadyState { .. } | E::NumericalFailure(_) => EXIT_DEGENERATE,
                _ => EXIT_INVALID,
            },
            CliError::NotConverged(_) => EXIT_NOT_CONVERGED,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
