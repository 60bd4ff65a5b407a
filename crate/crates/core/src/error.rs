use crate::dist::{DistKind, Violation};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("support top H = {0} is outside 1..={max}", max = crate::dist::MAX_H)]
    SupportOutOfRange(usize),

    #[error("expected {expected} entries for H = {h}, got {got}")]
    LengthMismatch { h: usize, expected: usize, got: usize },

    #[error("real probability {value} at index {index} is not in [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },

    #[error("scaled value {value} at index {index} exceeds the scale")]
    ScaledOutOfRange { index: usize, value: u64 },

    #[error("expected a {expected} distribution, got {got}")]
    WrongKind { expected: DistKind, got: DistKind },

    #[error("seller and buyer supports differ (H = {seller} vs H = {buyer})")]
    SupportMismatch { seller: usize, buyer: usize },

    #[error("point {value} is outside the domain 0..={h}")]
    PointOutOfDomain { value: usize, h: usize },

    #[error("distribution fails validation with {} violation(s)", .0.len())]
    Invalid(Vec<Violation>),

    #[error("invalid seller family parameters: {0}")]
    InvalidParams(String),

    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),

    #[error("approximation ratio is undefined (random-offerer GFT is zero)")]
    UndefinedRatio,

    #[error("integer overflow in exact accumulation")]
    Overflow,

    #[error("search budget exhausted before any successful evaluation")]
    NoEvaluations,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
