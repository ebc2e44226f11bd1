use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid attack case at {path}: {message}")]
    AttackCase { path: String, message: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("numerical failure{}: {message}", step.map(|k| format!(" at control step {k}")).unwrap_or_default())]
    Numerical { step: Option<usize>, message: String },

    #[error("degenerate range: every value equals {0}")]
    DegenerateRange(f64),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn attack(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::AttackCase { path: path.into(), message: message.into() }
    }

    pub(crate) fn numerical(message: impl Into<String>) -> Self {
        Error::Numerical { step: None, message: message.into() }
    }

    /// Attach the failing control step to a numerical error.
    pub fn at_step(self, k: usize) -> Self {
        match self {
            Error::Numerical { step: None, message } => Error::Numerical { step: Some(k), message },
            other => other,
        }
    }

    /// Process exit code: 2 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical { .. } => 2,
            _ => 1,
        }
    }
}
