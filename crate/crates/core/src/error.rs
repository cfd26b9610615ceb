use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("t = {t} lies outside [-1, 1]")]
    Domain { t: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dimension mismatch: expected {expected} coordinates, found {found} (line {line})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        line: usize,
    },

    #[error("non-unit point at row {row}: norm {norm}")]
    NonUnitPoint { row: usize, norm: f64 },

    #[error("no points")]
    NoPoints,

    #[error("duplicate points at rows {first} and {second}")]
    DuplicatePoints { first: usize, second: usize },

    #[error("invalid nodes: {0}")]
    InvalidNodes(String),

    #[error("f is not finite at node t = {t}")]
    NonFiniteAtNode { t: f64 },

    #[error("missing index n = {n}: normalized pair sum {sum:e} is not zero")]
    MissingIndex { n: usize, sum: f64 },

    #[error("node conditions fail: {0}")]
    NodeConditions(String),

    #[error("<Q_2, P_{degree}> = {value:e} is not positive")]
    DegenerateOrthogonalization { degree: usize, value: f64 },

    #[error("witness spectrum not within node set: {0}")]
    WitnessSpectrum(String),

    #[error("unknown configuration `{0}`")]
    UnknownConfiguration(String),

    #[error("invalid potential spec `{spec}`: {reason}")]
    PotentialSpec { spec: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 2 for bad input, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::DimensionMismatch { .. }
            | Error::NonUnitPoint { .. }
            | Error::NoPoints
            | Error::DuplicatePoints { .. }
            | Error::UnknownConfiguration(_)
            | Error::PotentialSpec { .. }
            | Error::Io(_)
            | Error::Json(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
