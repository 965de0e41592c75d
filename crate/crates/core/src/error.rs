use thiserror::Error;

use crate::symexpr::ExprError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("chart mismatch: {0} vs {1}")]
    ChartMismatch(String, String),
    #[error("expected {expected} components, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("coordinate map {0} has no inverse")]
    MissingInverse(String),
    #[error("dimension {0} is odd")]
    OddDimension(usize),
    #[error("rank deficient: {0}")]
    RankDeficient(String),
    #[error("no decidable pivot: {0}")]
    PivotUndecidable(String),
    #[error("not basic: {0}")]
    NotBasic(String),
    #[error("adapted coordinates unavailable: {0}")]
    NotAdapted(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("lagrangian is not hyperregular")]
    NotHyperregular,
    #[error("lagrangian is not fiber-quadratic: {0}")]
    NonQuadratic(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
