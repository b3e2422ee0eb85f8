use serde::Serialize;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum Error {
    #[error("transformation `{name}` is not a bijection: {detail}")]
    NonBijective { name: String, detail: String },

    #[error("transformation `{name}` does not preserve the measure: weight of {point} differs from weight of its image {image}")]
    NotMeasurePreserving {
        name: String,
        point: usize,
        image: usize,
    },

    #[error("transformations {i} and {j} do not commute at point {x}: T{i}T{j}(x) = {left}, T{j}T{i}(x) = {right}")]
    NotCommuting {
        i: usize,
        j: usize,
        x: usize,
        left: usize,
        right: usize,
    },

    #[error("bad weights: {0}")]
    BadWeights(String),

    #[error("observable has {got} values but the space has {expected} points")]
    LengthMismatch { expected: usize, got: usize },

    #[error("partitions live on different spaces ({0} vs {1} points)")]
    MismatchedSpace(usize, usize),

    #[error("relative product hit a cell of zero mass (cell {0})")]
    EmptyCellMass(usize),

    #[error("sparse measure would exceed {cap} entries; use the recursive integrator")]
    SupportOverflow { cap: usize },

    #[error("empty box: interval {axis} is [{start}, {end})")]
    EmptyBox { axis: usize, start: i64, end: i64 },

    #[error("observable is not a 0/1 indicator (value {value} at point {point})")]
    NotIndicator { point: usize, value: String },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("invalid epsilon: {0}")]
    BadEpsilon(String),

    #[error("system must have at least one transformation")]
    NoTransformations,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonBijective { .. } => "NonBijective",
            Error::NotMeasurePreserving { .. } => "NotMeasurePreserving",
            Error::NotCommuting { .. } => "NotCommuting",
            Error::BadWeights(_) => "BadWeights",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::MismatchedSpace(..) => "MismatchedSpace",
            Error::EmptyCellMass(_) => "EmptyCellMass",
            Error::SupportOverflow { .. } => "SupportOverflow",
            Error::EmptyBox { .. } => "EmptyBox",
            Error::NotIndicator { .. } => "NotIndicator",
            Error::HypothesisViolated(_) => "HypothesisViolated",
            Error::BadEpsilon(_) => "BadEpsilon",
            Error::NoTransformations => "NoTransformations",
            Error::Parse(_) => "Parse",
            Error::Io { .. } => "Io",
        }
    }
}
