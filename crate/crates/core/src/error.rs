use thiserror::Error;

/// Position of a token in QASM source, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourcePos {
    pub line: usize,
    pub col: usize,
}

impl std::fmt::Display for SourcePos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: SourcePos, msg: String },
    #[error("{pos}: unsupported gate `{name}`")]
    UnsupportedGate { pos: SourcePos, name: String },
    #[error("{pos}: unsupported statement `{what}`")]
    Unsupported { pos: SourcePos, what: String },
    #[error("{pos}: gate on `{reg}[{index}]` after it was measured")]
    MidCircuitMeasurement {
        pos: SourcePos,
        reg: String,
        index: usize,
    },
    #[error("{pos}: index {index} out of range for register `{reg}` of size {size}")]
    IndexOutOfRange {
        pos: SourcePos,
        reg: String,
        index: usize,
        size: usize,
    },
    #[error("{pos}: unknown register `{reg}`")]
    UnknownRegister { pos: SourcePos, reg: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("malformed parameter file: {0}")]
    Malformed(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapacityError {
    #[error("insufficient SLM capacity: need {needed} sites, grid has {available}")]
    InsufficientSlm { needed: usize, available: usize },
    #[error("insufficient AOD capacity: need {needed} slots, cache holds {available}")]
    InsufficientAod { needed: usize, available: usize },
    #[error("insufficient SLM capacity: {qubits} qubits exceed the doubled-layout capacity of {capacity}")]
    ExceedsLayout { qubits: usize, capacity: usize },
    #[error("both groups are full with {remaining} qubits left to place")]
    GroupsFull { remaining: usize },
    #[error("memory zone cannot hold the initial atom arrangement: {0}")]
    Memory(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
}

/// Top-level error for the compile pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{0}")]
    Oracle(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
