use thiserror::Error;

use crate::classifiers::TrialTrace;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet needs at least 2 symbols, got {0}")]
    AlphabetTooSmall(usize),
    #[error("duplicate symbol label {0:?}")]
    DuplicateSymbol(String),
    #[error("weight {index} is negative ({value})")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weight {index} is not finite")]
    NonFiniteWeight { index: usize },
    #[error("weights sum to {sum}, not 1 (tolerance 1e-9)")]
    NotNormalized { sum: f64 },
    #[error("expected {expected} entries, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("sequence is empty")]
    EmptySequence,
    #[error("operands are defined over different alphabets")]
    AlphabetMismatch,
    #[error("alpha must be finite and nonnegative, got {0}")]
    NegativeAlpha(f64),
    #[error("distribution is not in the interior of the simplex (min weight {min_weight})")]
    NotInterior { min_weight: f64 },
    #[error("gamma must be positive, got {0}")]
    NonPositiveGamma(f64),
    #[error("no positive fixed point: gamma {gamma} >= D(p||q) = {kl}")]
    NoSolution { gamma: f64, kl: f64 },
    #[error("gamma exceeds Chernoff information ({gamma} > {chernoff})")]
    GammaOutOfRange { gamma: f64, chernoff: f64 },
    #[error("distributions {0} and {1} are identical")]
    DuplicateDistribution(usize, usize),
    #[error("need at least {needed} distributions, got {got}")]
    TooFewDistributions { needed: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("optimization problem has no feasible point with finite objective")]
    Infeasible,
    #[error("numerical routine did not converge: {0}")]
    NonConvergence(String),
    #[error("weight vector is empty")]
    EmptyWeights,
    #[error("training sequence {index} has length {got}, expected {expected}")]
    LengthMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("sequential test already stopped")]
    SteppedAfterStop,
    #[error("identical operands have zero separation")]
    DegeneratePair,
    #[error("only {usable} grid points observed any errors; at least 2 are needed for a slope")]
    InsufficientErrors { usable: usize },
    /// The test stream ran dry before the test stopped; the partial trace
    /// is kept for inspection.
    #[error("test stream ended after {} samples without a decision", .0.steps())]
    StreamExhausted(Box<TrialTrace>),
}

pub type Result<T> = std::result::Result<T, Error>;
