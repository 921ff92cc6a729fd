use thiserror::Error;

/// Errors produced by the library.
///
/// Two broad families: *input errors* (bad files, wrong shapes, negative
/// entries) and *hypothesis violations* (the operator fails one of the
/// structural conditions the convergence theory needs). The CLI maps the
/// former to exit code 1 and the latter to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("negative off-diagonal entry {value} at ({row}, {col}); generator is not Metzler")]
    NotMetzler { row: usize, col: usize, value: f64 },

    #[error("vector has a negative component {value} at index {index}; not in the cone")]
    NotInCone { index: usize, value: f64 },

    #[error("vector is zero")]
    ZeroVector,

    #[error("vector is not strictly interior (component {value} at index {index})")]
    NotInterior { index: usize, value: f64 },

    #[error("u is not a fixed point of the operator: ||Au - u||_u = {residual:e} exceeds {tol:e}")]
    NotFixedPoint { residual: f64, tol: f64 },

    #[error("oscillation monotonicity violated at step {step} (drift {drift:e}); the fixed-point hypothesis looks broken")]
    MonotonicityViolation { step: usize, drift: f64 },

    #[error("trajectory did not converge within {steps} steps (oscillation {delta:e})")]
    NotConverged { steps: usize, delta: f64 },

    #[error("regularity condition 1 fails at basis vector {index} (no power within cap {cap} reaches the interior)")]
    RegularityFailure { index: usize, cap: usize },

    #[error("power norms diverge: ||A^{n}|| = {norm:e}; spectral radius exceeds 1")]
    PowerNormsDiverge { n: u64, norm: f64 },

    #[error("limit functional vanishes; the powers converge to zero")]
    VanishingLimit,

    #[error("fixed-point eigenvalue is not simple: nullity of (A - I) is {nullity}")]
    EigenvalueNotSimple { nullity: usize },

    #[error("operator is not strongly positive at power {p}: zero ratio in column {column}")]
    ZeroColumnRatio { p: usize, column: usize },

    #[error("negative time t = {t}")]
    NegativeTime { t: f64 },

    #[error("matrix exponential overflowed (t*||G|| too large)")]
    ExponentialOverflow,

    #[error("series term norms fail to decrease over a window of {window} powers at n = {n} (term norm {norm:e})")]
    SeriesNotDecreasing { n: usize, window: usize, norm: f64 },

    #[error("t = {t} must exceed tau = {tau}")]
    TimeBeforeTau { t: f64, tau: f64 },

    #[error("parameter out of range: {0}")]
    InvalidParameter(String),

    #[error("threshold indeterminate at this resolution: {0}")]
    IndeterminateAtResolution(String),

    #[error("fixture regression: {0}")]
    FixtureRegression(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that signal a broken hypothesis of the convergence
    /// theory rather than malformed input.
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(
            self,
            Error::NotFixedPoint { .. }
                | Error::MonotonicityViolation { .. }
                | Error::NotConverged { .. }
                | Error::RegularityFailure { .. }
                | Error::PowerNormsDiverge { .. }
                | Error::VanishingLimit
                | Error::EigenvalueNotSimple { .. }
                | Error::ZeroColumnRatio { .. }
                | Error::ExponentialOverflow
                | Error::SeriesNotDecreasing { .. }
                | Error::IndeterminateAtResolution(_)
                | Error::FixtureRegression(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
