use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("qubit count {0} outside the supported range 1..=24")]
    QubitCount(usize),
    #[error("qubit index {index} out of range for a {n_qubits}-qubit state")]
    QubitIndex { index: usize, n_qubits: usize },
    #[error("control and target of a two-qubit gate must differ (both are {0})")]
    RepeatedQubit(usize),
    #[error("amplitudes are not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("amplitude count {0} is not a power of two")]
    AmplitudeCount(usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("empty sequence")]
    EmptySequence,
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("corpus contains a single class; cannot balance")]
    SingleClass,
    #[error("label {0} is not 0 or 1")]
    Label(i64),
    #[error("vector table line {line}: {message}")]
    VectorLine { line: usize, message: String },
    #[error("embedding mode {mode} expects {expected} vector table(s), got {actual}")]
    TableCount {
        mode: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("index {index} out of range for {rows} embedding rows")]
    EmbeddingIndex { index: usize, rows: usize },
    #[error("parameter {name}: shape mismatch ({expected} vs {actual} values)")]
    Shape {
        name: String,
        expected: usize,
        actual: usize,
    },
    #[error("parameter name mismatch: {expected} vs {actual}")]
    ParamName { expected: String, actual: String },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("training diverged: loss became {0}")]
    Diverged(f64),
}
