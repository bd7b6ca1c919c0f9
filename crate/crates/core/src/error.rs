use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state is not normalized: squared norm {norm_squared} deviates from 1 by more than {tolerance}")]
    NotNormalized { norm_squared: f64, tolerance: f64 },

    #[error("amplitude count {0} is not a power of two with at least one qubit")]
    BadLength(usize),

    #[error("qubit count must be at least 1 (got {0})")]
    NoQubits(usize),

    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },

    #[error("qubit {qubit} out of range for {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("mask {mask:#b} does not fit in {n_qubits} qubits")]
    MaskOutOfRange { mask: u64, n_qubits: usize },

    #[error("subset must be non-empty")]
    EmptySubset,

    #[error("budget exceeded: {what} needs {requested} but the limit is {limit}")]
    Budget {
        what: &'static str,
        requested: u64,
        limit: u64,
    },

    #[error("outcome has zero probability ({0:e})")]
    ZeroProbability(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal consistency violated: {0}")]
    Consistency(String),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
