use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("empty input: {what}")]
    EmptyInput { what: String },

    #[error("row {row}: expected {expected} values, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column {col}: cannot parse {token:?}")]
    Parse {
        row: usize,
        col: usize,
        token: String,
    },

    #[error("row {row}, column {col}: non-finite value")]
    NonFinite { row: usize, col: usize },

    #[error("raw float32 payload of {bytes} bytes is not a multiple of 4*dim={dim}")]
    RawLength { bytes: usize, dim: usize },

    #[error("probability matrix needs at least 2 classes, got {classes}")]
    TooFewClasses { classes: usize },

    #[error("row {row}, column {col}: probability {value} outside [0,1]")]
    ProbabilityOutOfRange { row: usize, col: usize, value: f64 },

    #[error("row {row}: probabilities sum to {sum}, not 1")]
    RowSumMismatch { row: usize, sum: f64 },

    #[error("weight {index} is {value}; weights must be finite and nonnegative")]
    InvalidWeight { index: usize, value: f64 },

    #[error("length mismatch: {what} has {found} entries, expected {expected}")]
    LengthMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("point {index} is the zero vector; cosine distance undefined")]
    ZeroVectorCosine { index: usize },

    #[error("index {index} out of range for ground set of size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("center set is empty")]
    EmptyCenters,

    #[error("budget k={k} exceeds ground set size n={n}")]
    BudgetExceedsGroundSet { k: usize, n: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("graph has {graph} nodes but ground set has {set}")]
    GraphMismatch { graph: usize, set: usize },

    #[error("{m} workers requested for {n} points")]
    TooManyWorkers { m: usize, n: usize },

    #[error("instance needs {subsets} subsets, above the cap of {cap}")]
    InstanceTooLarge { subsets: u128, cap: u128 },

    #[error("report parse error at line {line}: {msg}")]
    Report { line: usize, msg: String },
}

impl Error {
    /// Stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "Io",
            Error::EmptyInput { .. } => "EmptyInput",
            Error::RaggedRow { .. } => "RaggedRow",
            Error::Parse { .. } => "Parse",
            Error::NonFinite { .. } => "NonFinite",
            Error::RawLength { .. } => "RawLength",
            Error::TooFewClasses { .. } => "TooFewClasses",
            Error::ProbabilityOutOfRange { .. } => "ProbabilityOutOfRange",
            Error::RowSumMismatch { .. } => "RowSumMismatch",
            Error::InvalidWeight { .. } => "InvalidWeight",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::ZeroVectorCosine { .. } => "ZeroVectorCosine",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::EmptyCenters => "EmptyCenters",
            Error::BudgetExceedsGroundSet { .. } => "BudgetExceedsGroundSet",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::GraphMismatch { .. } => "GraphMismatch",
            Error::TooManyWorkers { .. } => "TooManyWorkers",
            Error::InstanceTooLarge { .. } => "InstanceTooLarge",
            Error::Report { .. } => "Report",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
