use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("unsupported gate {gate} in a unitary-only context")]
    UnsupportedGate { gate: String },

    #[error("invalid gate {gate}: {reason}")]
    InvalidGate { gate: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("no vertex at level {level}, index {index}")]
    Address { level: usize, index: usize },

    #[error("regime unreachable: np too large (tree capacity is zero)")]
    RegimeUnreachable,

    #[error("invalid regime: {0}")]
    InvalidRegime(String),

    #[error("partition error: circuit has {circuit} gates but tree root has size {tree}")]
    Partition { circuit: usize, tree: usize },

    #[error("layout error: {0}")]
    Layout(String),

    #[error("invalid markov parameters: {0}")]
    InvalidParameters(String),

    #[error("degenerate regime: {0}")]
    Degenerate(String),

    #[error("divergent restarts: detection probability is one")]
    DivergentRestart,

    #[error("noiseless execution failed: {0}")]
    Execution(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
