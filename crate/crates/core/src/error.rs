use thiserror::Error;

use crate::expr::ParseError;
use crate::model::Shape;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("process count must be at least 1")]
    NoProcesses,
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error(
        "{n} processes over {horizon} rounds do not fit the {}-bit collection encoding",
        crate::model::ENCODING_BITS
    )]
    EncodingOverflow { n: usize, horizon: usize },
    #[error("process {process} out of range for n = {n}")]
    ProcessOutOfRange { process: usize, n: usize },
    #[error("crash round {round} outside 1..={horizon}")]
    CrashRoundOutOfRange { round: usize, horizon: usize },
    #[error("operands have different shapes ({left} vs {right})")]
    ShapeMismatch { left: Shape, right: Shape },
    #[error("operands have different process counts ({left} vs {right})")]
    ProcessCountMismatch { left: usize, right: usize },
    #[error("states are at different rounds ({left} vs {right})")]
    RoundMismatch { left: usize, right: usize },
    #[error("predicate has no collection")]
    EmptyPredicate,
    #[error("heard-of product needs a non-empty generator set")]
    EmptyGenerators,
    #[error("cannot wait for n - F messages with F = {faults} and n = {n}")]
    TooManyFaults { faults: usize, n: usize },
    #[error("strategy is not valid for the predicate: {0}")]
    InvalidStrategy(String),
    #[error("invalid timing function: {0}")]
    InvalidTiming(String),
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("malformed value: {0}")]
    Malformed(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}
