//! Error type shared by every module of the library.
//!
//! Errors fall into three categories that the command-line frontend maps to
//! process exit codes:
//!
//! * **input errors** (exit code 1): malformed files, out-of-vocabulary
//!   tokens, inconsistent sessions, degenerate statistical inputs;
//! * **infeasible configurations** (exit code 2): parameter sets that cannot
//!   be satisfied, such as a fixture spec whose timing targets contradict the
//!   classifier thresholds, or a DTW band too narrow for the input lengths;
//! * **internal errors** (exit code 3): invariant violations that indicate a
//!   bug in this library rather than in the caller's data.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for the whole library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Underlying I/O failure, annotated with the offending path.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file could not be parsed. `row` is the 1-based *data* row
    /// (the header row is row 0 and never reported).
    #[error("{}: row {row}: {message}", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },

    /// The input data or arguments violate a documented precondition.
    #[error("{0}")]
    InvalidInput(String),

    /// A correlation-style measure was asked of a constant signal.
    #[error("zero variance: {0}")]
    ZeroVariance(String),

    /// The requested configuration cannot be satisfied by any output.
    #[error("{0}")]
    Infeasible(String),

    /// An internal invariant was violated; indicates a library bug.
    #[error("internal invariant violation: {0}")]
    Internal(String),

    /// An error that occurred inside a named pipeline stage, wrapping the
    /// underlying cause with the stage name and the input it was processing.
    #[error("{stage} ({locus}): {source}")]
    Stage {
        stage: &'static str,
        locus: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the pipeline stage name and the input locus
    /// (session id, file path, ...) it was working on.
    pub fn in_stage(self, stage: &'static str, locus: impl Into<String>) -> Self {
        Error::Stage {
            stage,
            locus: locus.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code for this error: 1 = input error, 2 = infeasible
    /// configuration, 3 = internal invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::InvalidInput(_)
            | Error::ZeroVariance(_) => 1,
            Error::Infeasible(_) => 2,
            Error::Internal(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
        }
    }
}
