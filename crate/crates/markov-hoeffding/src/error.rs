//! Crate-wide error type.

/// Errors raised by chain construction, bound evaluators, solvers and
/// experiments.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A kernel row does not sum to one (or has entries outside `[0, 1]`).
    #[error("kernel is not row-stochastic: {0}")]
    NotStochastic(String),

    /// The stationary solve produced a non-unique or non-positive vector,
    /// which signals reducible input or states of zero mass.
    #[error("stationary distribution is degenerate: {0}")]
    DegenerateStationary(String),

    /// A bound was requested for a chain with no usable spectral gap.
    #[error("spectral gap exhausted: {0}")]
    GapExhausted(String),

    /// Norm orders must lie in `(1, inf]`.
    #[error("norm order must exceed 1, got {0}")]
    InvalidP(f64),

    /// `F(r)` was evaluated too close to one of its poles.
    #[error("evaluation point {r} is within tolerance of the pole at {pole}")]
    PoleHit { r: f64, pole: f64 },

    /// Bisection could not establish a sign change inside a root bracket.
    #[error("root bracketing failed: {0}")]
    BracketFailure(String),

    /// A two-point range collapsed to a single point.
    #[error("degenerate range: a = b = {0}")]
    DegenerateRange(f64),

    /// The dynamic-programming oracle refuses horizons past its cap.
    #[error("horizon {n} exceeds the cap of {cap}")]
    HorizonTooLarge { n: usize, cap: usize },

    /// All ranges are degenerate and the tail request is indeterminate.
    #[error("variance proxy is zero with eps = 0")]
    ZeroProxy,

    /// The matrix perturbation is too large for the inverse bound to apply.
    #[error("perturbation too large: {0}")]
    PerturbationTooLarge(String),

    /// The requested sample size is below the theorem's minimum.
    #[error("sample size {n} is below the required minimum {n_min}")]
    SampleTooSmall { n: usize, n_min: usize },

    /// The population Gram matrix is singular or numerically so.
    #[error("population Gram matrix is singular")]
    SingularSigma,

    /// No admissible threshold exists for the requested sample size.
    #[error("threshold bracket is empty: {0}")]
    BracketEmpty(String),

    /// The covariance model class constraints are violated.
    #[error("covariance model violated: {0}")]
    ModelViolation(String),

    /// The graph underlying a random walk is not connected.
    #[error("graph is not connected")]
    Disconnected,

    /// The UCB exploration constant is below the theorem's threshold.
    #[error("exploration constant c = {c} must exceed 2*alpha = {floor}")]
    CTooSmall { c: f64, floor: f64 },

    /// Catch-all for malformed inputs.
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
