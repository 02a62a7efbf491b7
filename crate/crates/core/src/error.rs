use thiserror::Error;

/// A precondition of one of the allocation constructions that does not hold.
/// Indices are zero-based; messages count from 1.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HypothesisViolation {
    #[error("parameter sum d = {d} must be below 1")]
    ParameterSumNotBelowOne { d: f64 },
    #[error("parameter sum d = {d} must be at least 1")]
    ParameterSumBelowOne { d: f64 },
    #[error("parameter sum d = {d} must lie in (0, 1)")]
    ParameterSumOutOfRange { d: f64 },
    #[error("distortion {} is not saturated: g(1 - d + alpha) = {value} < 1", .index + 1)]
    NotSaturated { index: usize, value: f64 },
    #[error("active part of distortion {} is not concave", .index + 1)]
    NonConcaveActivePart { index: usize },
    #[error("every distortion satisfies g(1 - d + alpha) = 1; no unbounded escape exists")]
    NoUnsaturatedIndex,
    #[error("measure {} is not of V@R type at level {alpha}", .index + 1)]
    NotVarType { index: usize, alpha: f64 },
    #[error("extra measure is not strongly surplus sensitive at level {level}")]
    NotSurplusSensitive { level: f64 },
    #[error("measure {} is not a distortion measure", .index + 1)]
    NotDistortion { index: usize },
    #[error("distortion {} is improper (g(1) = {g1})", .index + 1)]
    ImproperDistortion { index: usize, g1: f64 },
    #[error("measure {} has no structural V@R-type level", .index + 1)]
    NoVarLevel { index: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid distortion: {0}")]
    InvalidDistortion(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("value {value} outside the domain [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },
    #[error("expectile bracket [{lo}, {hi}] does not contain the acceptance boundary")]
    BisectionBracket { lo: f64, hi: f64 },
    #[error("hypothesis violated: {0}")]
    Hypothesis(#[from] HypothesisViolation),
    #[error("oracle instance too large: {grid_points}^{cells} assignments exceeds {limit}")]
    OracleTooLarge {
        grid_points: usize,
        cells: usize,
        limit: u64,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
