use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The Riccati flow left the exponential-moment domain.
    #[error("flow blew up at t = {blow_up_time}")]
    DomainViolation { blow_up_time: f64 },

    #[error("cannot fit maturity {maturity}: {reason}")]
    Fit { maturity: f64, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("index {index} out of range ({len} available)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("degenerate contract: {0}")]
    DegenerateContract(String),

    #[error("comparison error: {0}")]
    Comparison(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn in_stage(self, stage: &str) -> Self {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
