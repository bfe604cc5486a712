use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} is out of range for a network with {nodes} nodes")]
    InvalidNode { node: usize, nodes: usize },

    #[error("edge {edge} has probability {prob}, expected a value in [0, 1]")]
    InvalidProbability { edge: usize, prob: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("weight {0} is negative")]
    NegativeWeight(f64),

    #[error("seed set is empty")]
    EmptySeedSet,

    #[error(
        "exact enumeration over {edges} edges visits 2^{edges} possible graphs; \
         refusing above {limit} edges"
    )]
    EnumerationTooLarge { edges: usize, limit: usize },

    #[error("stratum index {index} out of range for {width} selected edges")]
    StratumOutOfRange { index: usize, width: usize },

    #[error("invalid generator spec: {0}")]
    InvalidGenerator(String),

    #[error("invalid estimator configuration: {0}")]
    InvalidConfig(String),

    #[error("variance estimation needs at least 2 trials, got {0}")]
    TooFewTrials(usize),

    #[error("baseline variance is zero, relative variance is undefined")]
    ZeroBaselineVariance,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input or configuration, as opposed to
    /// failures while doing the work.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Csv(_) | Error::Json(_))
    }
}
