use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Stat(#[from] sncpa_core::Error),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("bridge Gram matrix numerically singular in {redraws} consecutive draws")]
    SingularBridgeGram { redraws: u64 },

    #[error("no cached critical values for {family} at probability {prob} (need steps >= {steps}, reps >= {reps})")]
    CacheMiss { family: String, prob: f64, steps: usize, reps: usize },

    #[error("missing critical values: {0}")]
    MissingCriticalValues(String),

    #[error("table generated by '{found}', this build reads '{expected}'")]
    GeneratorVersionMismatch { found: String, expected: String },

    #[error("malformed table: {0}")]
    MalformedTable(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }
}
