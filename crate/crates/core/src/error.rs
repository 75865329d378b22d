use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("degree {degree} exceeds the cap of {max}")]
    DegreeTooLarge { degree: usize, max: usize },
    #[error("{breakpoints} breakpoints do not match {pieces} pieces")]
    PieceCount { breakpoints: usize, pieces: usize },
    #[error("breakpoints must be strictly increasing")]
    UnsortedBreakpoints,
    #[error("integration bounds reversed: a = {a} > b = {b}")]
    ReversedBounds { a: f64, b: f64 },
    #[error("function has empty or zero-width support")]
    EmptySupport,
    #[error("unbounded tail pieces must be identically zero")]
    NonzeroTail,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MixtureError {
    #[error("a mixture needs at least one component")]
    Empty,
    #[error("weights must be nonnegative and sum to 1 (sum = {0})")]
    Weights(f64),
    #[error("component {index}: {reason}")]
    Component { index: usize, reason: String },
    #[error("invalid argument: {0}")]
    Argument(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample {index} is not finite")]
    NonFiniteSample { index: usize },
    #[error("samples have zero spread")]
    DegenerateSamples,
    #[error("accuracy must lie in (0, 1), got {0}")]
    Accuracy(f64),
    #[error("k must be at least 1")]
    ZeroComponents,
    #[error("line {line}: cannot parse {text:?} as a number")]
    Parse { line: usize, text: String },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("invalid problem: {0}")]
    Problem(String),
    #[error("objective evaluated to a non-finite value")]
    NonFiniteObjective,
    #[error("system too large to materialize: t = {t} exceeds cap {cap}")]
    TooLarge { t: usize, cap: usize },
    #[error("system text parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Mixture(#[from] MixtureError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no feasible fit found even at the largest threshold")]
    Infeasible,
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Mixture(#[from] MixtureError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}
