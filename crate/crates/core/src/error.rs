use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count {0} is outside the supported range 1..={max}", max = crate::sim::MAX_QUBITS)]
    QubitCount(usize),
    #[error("wire {wire} out of range for a {num_qubits}-qubit register")]
    WireOutOfRange { wire: usize, num_qubits: usize },
    #[error("{kind:?} gate needs {expected} distinct wire(s), got {got:?}")]
    BadWires {
        kind: crate::sim::GateKind,
        expected: usize,
        got: Vec<usize>,
    },
    #[error("{0:?} is not parametric and only accepts a zero constant binding")]
    NonParametric(crate::sim::GateKind),
    #[error("non-finite value: {0}")]
    NonFinite(&'static str),
    #[error("{what} index {index} out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },
    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("probability {name} = {value} outside [{lo}, {hi}]")]
    Probability {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parameter subset is empty")]
    EmptySubset,
    #[error("parameter {0} does not appear in any gate")]
    UnusedParameter(usize),
    #[error("accumulate called outside the accumulation phase")]
    WrongPhase,
    #[error("malformed IDX data: {0}")]
    Idx(String),
    #[error("malformed table: {0}")]
    Table(String),
    #[error("not enough samples: need {needed}, have {available}")]
    InsufficientSamples { needed: usize, available: usize },
    #[error("covariance matrix is rank deficient: {nonzero} nonzero eigenvalues, need {needed}")]
    RankDeficient { nonzero: usize, needed: usize },
    #[error("dataset file {path}: {source}")]
    DatasetIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    TomlParse(#[from] toml::de::Error),
    #[error(transparent)]
    TomlWrite(#[from] toml::ser::Error),
}
