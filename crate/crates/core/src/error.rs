use thiserror::Error;

/// Everything that can go wrong across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix not positive definite: pivot {pivot:e} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("rho = {0} outside [0, 1)")]
    InvalidRho(f64),
    #[error("p = {0} outside (0, 1)")]
    InvalidP(f64),
    #[error("no single r in [0, 1] gives Bernoulli({p}) marginals; first failing position {position}")]
    NoValidR { p: f64, position: usize },
    #[error("Voronoi cell {cell} received {points} reference points, fewer than {min}")]
    DegenerateBase {
        cell: usize,
        points: usize,
        min: usize,
    },
    #[error("degenerate sample: every observation equals the known mean")]
    DegenerateSample,
    #[error("need at least one group with two or more observations")]
    InsufficientData,
    #[error("set expects samples of length {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("mu1 and mu2 must differ")]
    EqualMeans,
    #[error("lambda1 and lambda2 must differ")]
    EqualValues,
    #[error("residual variances differ: (1-rho1)*sigma1^2 = {left}, (1-rho2)*sigma2^2 = {right}")]
    NotMatched { left: f64, right: f64 },
    #[error("mu grid [{lo}, {hi}] leaves more than {max_tail:e} of a mean-law mass outside")]
    GridTooNarrow { lo: f64, hi: f64, max_tail: f64 },
    #[error("need at least {k} points, got {n}")]
    TooFewPoints { n: usize, k: usize },
    #[error("k^n = {combinations:e} exceeds the enumeration cap {cap:e}")]
    TooLarge { combinations: f64, cap: f64 },
    #[error("dense dimension {n} exceeds the configured cap {cap}")]
    DimensionTooLarge { n: usize, cap: usize },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
