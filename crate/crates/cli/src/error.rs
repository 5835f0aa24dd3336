use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] aerial_link::Error),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(String),

    /// Validation finished but at least one comparison broke its bound.
    #[error("{0}")]
    Flagged(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub mod exit {
    pub const OTHER: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const PARSE: i32 = 3;
    pub const VALIDATION: i32 = 4;
    pub const QUADRATURE: i32 = 5;
    pub const FLAGGED: i32 = 6;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use aerial_link::Error as E;
        match self {
            CliError::Core(E::Parse(_)) => exit::PARSE,
            CliError::Core(E::Validation(_) | E::InvalidGeometry(_)) => exit::VALIDATION,
            CliError::Core(E::QuadratureFailure { .. }) => exit::QUADRATURE,
            CliError::Core(E::OutOfFootprint { .. }) => exit::OTHER,
            CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } | CliError::Csv(_) => exit::OTHER,
            CliError::Flagged(_) => exit::FLAGGED,
        }
    }

    pub fn io(path: impl std::fmt::Display, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            source,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e.to_string())
    }
}
