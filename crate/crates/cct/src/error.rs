use thiserror::Error;

/// Everything that can go wrong across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("entry {index} is not strictly positive")]
    NonPositiveEntry { index: usize },
    #[error("entry {index} is not strictly less than one")]
    EntryAtLeastOne { index: usize },
    #[error("entries sum to {sum}, which exceeds one")]
    MassExceedsOne { sum: f64 },
    #[error("a distribution needs at least one entry")]
    EmptyVector,
    #[error("null mass is one; no coupon can ever be collected")]
    DegenerateNullMass,
    #[error("vectors have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("vectors carry different entry mass ({left} vs {right})")]
    MassMismatch { left: f64, right: f64 },
    #[error("position {position} is out of range 1..={n}")]
    IndexOutOfRange { position: usize, n: usize },
    #[error("lambda {lambda} is outside [0, 1]")]
    LambdaOutOfRange { lambda: f64 },
    #[error("theta {theta} is outside (0, (1-p0)/n]")]
    ThetaOutOfRange { theta: f64 },
    #[error("entry {index} lies below the floor theta")]
    NotInFamily { index: usize },
    #[error("entries at positions {i} and {j} do not straddle the target value")]
    PairNotCrossing { i: usize, j: usize },
    #[error("collection size c={c} is outside 1..={n}")]
    InvalidC { c: usize, n: usize },
    #[error(
        "workload of {terms} terms exceeds the guard of {guard}; \
         use the Monte-Carlo oracle for instances this large"
    )]
    WorkloadExceeded { terms: u128, guard: u128 },
    #[error("the no-progress rate is one within tolerance; collecting {c} distinct coupons never finishes")]
    TailRateOne { c: usize },
    #[error("curve truncated with residual {residual:e}, not below the tolerance {tol:e}")]
    InsufficientTruncation { residual: f64, tol: f64 },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("invalid simulation config: {0}")]
    ConfigInvalid(String),
    #[error("cannot parse {0:?} as a probability literal")]
    BadLiteral(String),
}

pub type Result<T> = std::result::Result<T, Error>;
