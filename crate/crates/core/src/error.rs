use thiserror::Error;

/// Errors raised by model evaluation, simulation and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A quantity left the region where the model is defined.
    #[error("domain error: {quantity} = {value} is outside [{lower}, {upper}]")]
    Domain {
        quantity: String,
        value: f64,
        lower: f64,
        upper: f64,
    },

    /// Malformed arguments: wrong lengths, mismatched layouts, bad kinds.
    #[error("argument error: {0}")]
    Argument(String),

    /// A physical parameter violates its invariant.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// The current-to-flux Jacobian is not safely invertible.
    #[error("singular mass matrix (condition number {condition:.3e}) at {state}")]
    SingularMassMatrix { condition: f64, state: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("unsupported model kind `{kind}` for {operation}")]
    UnsupportedKind { kind: String, operation: String },

    /// A computed quantity disagrees with an identity it must satisfy.
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("steady-state solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian in steady-state solver")]
    SingularJacobian,

    #[error("point is not a steady state (residual {residual:.3e} > {bound:.1e})")]
    NotSteady { residual: f64, bound: f64 },

    #[error("full-rank observability matrix ({rank}/{dim}) at sample {sample}: {detail}")]
    PropositionViolation {
        sample: usize,
        rank: usize,
        dim: usize,
        detail: String,
    },

    #[error("step count {steps} exceeds the cap of {cap}")]
    StepCap { steps: u64, cap: u64 },

    #[error("singular value decomposition did not converge")]
    SvdFailure,
}

pub type Result<T> = std::result::Result<T, Error>;
