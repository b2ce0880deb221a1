use thiserror::Error;

/// Errors raised by configuration, simulation and search.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("M must be >= 2 (got {0})")]
    TooFewDirections(u32),
    #[error("L must be >= 1 (got {0})")]
    EmptyBlock(u32),
    #[error("b_peak must be >= 1 (got {0})")]
    ZeroPeak(u32),
    #[error("b_peak exceeds M (b_peak = {b_peak}, M = {m})")]
    PeakExceedsDirections { b_peak: u32, m: u32 },
    #[error("beam index {index} outside [1..{m}]")]
    IndexOutOfRange { index: u32, m: u32 },
    #[error("input weight {weight} exceeds peak cost {b_peak}")]
    WeightExceeded { weight: usize, b_peak: u32 },
    #[error("mask over {got} directions used with a {expected}-direction configuration")]
    DimensionMismatch { expected: u32, got: u32 },
    #[error("inconsistent trajectory: no direction agrees with the observed feedback")]
    InconsistentTrajectory,
    #[error("feedback history of length {len} is not an interior node of a depth-{depth} policy tree")]
    HistoryOutOfRange { len: usize, depth: u32 },
    #[error("search space of {estimate} policies exceeds the budget of {budget}")]
    BudgetExceeded { estimate: u128, budget: u128 },
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("block count must be >= 1")]
    NoBlocks,
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
