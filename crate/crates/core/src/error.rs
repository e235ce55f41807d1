use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite derivative value in {block}[{row}, {col}]")]
    NonFiniteDerivative {
        block: &'static str,
        row: usize,
        col: usize,
    },

    #[error("strong Legendre condition violated: H_uu singular or ill-conditioned (condition number {condition:e})")]
    LegendreViolated { condition: f64 },

    #[error("static solve diverged after {iterations} iterations (last residual {residual:e})")]
    StaticDiverged { iterations: usize, residual: f64 },

    #[error("singular Newton matrix in static solve at iteration {iteration}; try a different initial guess")]
    StaticSingular { iteration: usize },

    #[error("static LQ system singular: null(A^T) and null(B^T) intersect nontrivially")]
    StaticLqSingular,

    #[error("R singular at (x_bar, x_bar): R_x R_x^T + R_y R_y^T is not invertible")]
    TerminalMapSingular,

    #[error("non-hyperbolic: turnpike assumptions violated ({detail})")]
    NonHyperbolic { margin: f64, detail: String },

    #[error("invariant subspace not a graph: leading block singular (rcond {rcond:e})")]
    NotAGraph { rcond: f64 },

    #[error("pointwise control solve failed at x = {x:?}, lambda = {lambda:?}: {reason}")]
    ControlSolve {
        x: Vec<f64>,
        lambda: Vec<f64>,
        reason: &'static str,
    },

    #[error("integration blow-up at t = {t}")]
    BlowUp { t: f64 },

    #[error("shooting did not converge after {iterations} iterations (residual {residual:e})")]
    ShootingFailed {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("direct method did not converge after {iterations} iterations (KKT residual {kkt_residual:e})")]
    DirectDiverged { iterations: usize, kkt_residual: f64 },

    #[error("KKT factorization failed after maximal regularization (tau = {tau:e})")]
    KktFactorization { tau: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
