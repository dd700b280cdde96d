use thiserror::Error;

/// Errors produced by the certification pipeline.
#[derive(Error, Debug, Clone)]
pub enum Error {
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("evaluation error at t = {t}: {message}")]
    Eval { t: f64, message: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not unitary (residual {residual:.3e} exceeds tolerance {tol:.3e})")]
    NotUnitary { residual: f64, tol: f64 },

    #[error("quadrature failed to converge on [{a}, {b}] (estimated error {err:.3e})")]
    Quadrature { a: f64, b: f64, err: f64 },

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("integration exceeded the step budget at t = {t}")]
    StepBudget { t: f64 },

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),

    #[error("envelopes cannot be derived: {0}; supply them explicitly")]
    EnvelopeDerivation(String),

    #[error("Riccati solution escaped at t = {t}; the criterion machinery is inapplicable")]
    RiccatiEscape { t: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
