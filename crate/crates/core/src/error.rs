use thiserror::Error;

/// Errors raised by the library. The variant name is what the CLI reports as
/// the error kind.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed input at line {line}: {reason}")]
    MalformedInput { line: usize, reason: String },
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("graph is not a tree")]
    NotATree,
    #[error("node {0} has no neighbors")]
    IsolatedNode(usize),
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("shape mismatch: {0}")]
    ShapeError(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("every walk hit the step cap of {max_steps}")]
    AllTruncated { max_steps: u64 },
    #[error("no node pairs at distance {0}")]
    NoPairsAtDistance(usize),
    #[error("bound ordering violated for pair ({i}, {j}): nba {nba} < gnn {gnn}")]
    BoundViolation { i: usize, j: usize, nba: f64, gnn: f64 },
    #[error("could not build an independent start column for orthogonal iteration")]
    DegenerateStart,
    #[error("leading eigenvalue did not converge (residual {residual:e})")]
    SpectrumNotConverged { residual: f64 },
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
}

impl Error {
    /// Stable variant name, used as the `kind` field of error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MalformedInput { .. } => "MalformedInput",
            Error::EmptyGraph => "EmptyGraph",
            Error::NotATree => "NotATree",
            Error::IsolatedNode(_) => "IsolatedNode",
            Error::NodeOutOfRange { .. } => "NodeOutOfRange",
            Error::ShapeError(_) => "ShapeError",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::AllTruncated { .. } => "AllTruncated",
            Error::NoPairsAtDistance(_) => "NoPairsAtDistance",
            Error::BoundViolation { .. } => "BoundViolation",
            Error::DegenerateStart => "DegenerateStart",
            Error::SpectrumNotConverged { .. } => "SpectrumNotConverged",
            Error::NonFiniteLoss { .. } => "NonFiniteLoss",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
