use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("dimension mismatch: expected {expected} modes, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("fractional exponent must lie in [0, 1], got {0}")]
    InvalidExponent(f64),

    #[error("collocation grid with {nodes} nodes cannot resolve {modes} modes")]
    GridTooCoarse { nodes: usize, modes: usize },

    #[error("sample set is empty")]
    EmptySamples,

    #[error("non-finite value in {context} at t = {time}")]
    NonFinite { context: &'static str, time: f64 },

    #[error("blow-up at t = {time}: X^1/2 norm {norm:.6e} exceeds guard {limit:.3e}")]
    BlowUp { time: f64, norm: f64, limit: f64 },

    #[error("invalid time span: {0}")]
    InvalidSpan(String),

    #[error("clock ledger is not strictly increasing at sample {0}")]
    NonMonotoneLedger(usize),

    #[error("adaptive quadrature did not converge on [{lo}, {hi}]")]
    Quadrature { lo: f64, hi: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("order violation: {0}")]
    OrderViolation(String),

    #[error("operation requires an autonomous model, `{0}` depends on time")]
    NotAutonomous(String),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),
}
