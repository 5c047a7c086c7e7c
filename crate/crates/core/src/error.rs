use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration has no slits")]
    EmptyConfig,
    #[error("slit positions must be strictly increasing (u[{index}] <= u[{prev}])", prev = .index - 1)]
    NonIncreasingPositions { index: usize },
    #[error("slit height h[{index}] = {value} is negative or not finite")]
    NegativeHeight { index: usize, value: f64 },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid norm specification: {0}")]
    InvalidNorm(String),
    #[error("gap endpoints are not interlaced at gap {index}")]
    InvalidInterlacing { index: usize },
    #[error("evaluation at branch point x = {x}")]
    EvaluationAtBranchPoint { x: f64 },
    #[error("closure system did not converge (residuals {residuals:?})")]
    NewtonDivergence { residuals: Vec<f64> },
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    #[error("point x = {x} lies outside gap {gap}")]
    OutOfGap { gap: usize, x: f64 },
    #[error("gap index {0} out of range")]
    InvalidGapIndex(usize),
    #[error("identity 2Q0 = sum A violated: {lhs} vs {rhs}")]
    IdentityViolation { lhs: f64, rhs: f64 },
    #[error("inversion of k failed at k = {re} + {im}i")]
    InversionFailure { re: f64, im: f64 },
    #[error("continuation exhausted at t = {last_t} (residual {residual:e})")]
    ContinuationExhausted { last_t: f64, residual: f64, path: Vec<(f64, f64)> },
    #[error("gaps {index} and {next} are about to collide", next = .index + 1)]
    GapCollision { index: usize },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { residual: f64, iterations: usize },
    #[error("monotonicity violated: {0}")]
    MonotonicityViolation(String),
    #[error("point lies on a slit")]
    OnSlit,
    #[error("point lies on the set")]
    OnSet,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid interval union: {0}")]
    InvalidIntervals(String),
}

impl Error {
    /// Bad input, as opposed to a numerical failure on valid input.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::EmptyConfig
                | Error::NonIncreasingPositions { .. }
                | Error::NegativeHeight { .. }
                | Error::LengthMismatch { .. }
                | Error::InvalidNorm(_)
                | Error::InvalidInterlacing { .. }
                | Error::OutOfGap { .. }
                | Error::InvalidGapIndex(_)
                | Error::InvalidArgument(_)
                | Error::InvalidIntervals(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
