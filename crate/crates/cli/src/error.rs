use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Pipeline step an error came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Estimate,
    Normalize,
    Pairing,
    Decompose,
    Contributions,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Estimate => "estimate",
            Stage::Normalize => "normalize",
            Stage::Pairing => "pairing",
            Stage::Decompose => "decompose",
            Stage::Contributions => "contributions",
            Stage::Report => "report",
        })
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: symfisher::Error,
    },
    #[error("determinant audit failed: log prod(lambda) = {log_lambda}, log prod(d^2) = {log_d2}")]
    DeterminantAudit { log_lambda: f64, log_d2: f64 },
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn at(stage: Stage) -> impl FnOnce(symfisher::Error) -> Self {
        move |source| CliError::Stage { stage, source }
    }

    /// 2 for configuration problems, 3 for numerical failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Stage { source, .. } => match source {
                symfisher::Error::Io(_) => 4,
                e if e.is_numerical() => 3,
                _ => 2,
            },
            CliError::DeterminantAudit { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }
}
