use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QemError {
    #[error("qubit {qubit} out of range for a {width}-qubit circuit")]
    TargetOutOfRange { qubit: usize, width: usize },

    #[error("gate targets must be distinct, got {0:?}")]
    DuplicateTargets(Vec<usize>),

    #[error("gate {gate} expects {expected} target(s), got {got}")]
    GateArity {
        gate: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("circuit width {width} exceeds the limit of {limit} qubits")]
    WidthExceeded { width: usize, limit: usize },

    #[error("probability {name}={value} is outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("negative probability {value} at basis index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("invalid Trotter parameters: {0}")]
    InvalidParams(String),

    #[error("scale factor must be an odd positive integer, got {0}")]
    InvalidScaleFactor(u32),

    #[error("bit-width mismatch: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },

    #[error("distribution is invalid: {0}")]
    InvalidDistribution(String),

    #[error("counts contain zero shots")]
    ZeroShots,

    #[error("linear ansatz is invalid: {0}")]
    InvalidAnsatz(String),

    #[error("shot plan has {plan} entries but the ansatz has {terms} terms")]
    PlanLengthMismatch { plan: usize, terms: usize },

    #[error("{total} shots cannot cover {terms} terms")]
    TooFewShots { total: u64, terms: usize },

    #[error("duplicate scale factor {0}")]
    DuplicateLambda(f64),

    #[error("{strategy} needs {needed} points, got {got}")]
    NotEnoughPoints {
        strategy: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("no distribution for scale factor {0}")]
    MissingLambda(f64),

    #[error("quasi-distribution is all zero after clipping")]
    AllZeroAfterClipping,

    #[error("selection needs at least {needed} candidates, got {got}")]
    TooFewCandidates { needed: usize, got: usize },

    #[error("subset size L={l} is invalid for K={k} points")]
    SubsetSizeOutOfRange { l: usize, k: usize },

    #[error("no applicable strategy")]
    NoApplicableStrategy,
}

pub type Result<T> = std::result::Result<T, QemError>;
