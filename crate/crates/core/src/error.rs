use thiserror::Error;

pub type Result<T> = std::result::Result<T, QfeoError>;

#[derive(Debug, Error)]
pub enum QfeoError {
    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("qubit index {index} out of range for {n_qubits}-qubit register")]
    QubitIndex { index: usize, n_qubits: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("angle range error: {0}")]
    AngleRange(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("metric error: {0}")]
    Metric(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("batch {batch}: {source}")]
    Batch {
        batch: usize,
        #[source]
        source: Box<QfeoError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
