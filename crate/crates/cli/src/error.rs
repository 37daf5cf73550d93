use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    /// 1 usage or configuration, 2 data or input files, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<skewpmc::Error> for CliError {
    fn from(e: skewpmc::Error) -> Self {
        use skewpmc::Error as E;
        match e {
            E::InvalidParameter(_) | E::Unsupported(_) | E::Inadmissible { .. } => CliError::Config(e.to_string()),
            E::DimensionMismatch { .. } | E::DegenerateData(_) => CliError::Data(e.to_string()),
            E::NotSymmetric { .. }
            | E::NotPositiveDefinite { .. }
            | E::Domain(_)
            | E::DegenerateWeights { .. }
            | E::Quadrature(_) => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
