use thiserror::Error;

/// Errors raised by the analytic pipeline and the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Model parameters or configuration are invalid.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A caller-supplied argument is outside its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `theta` lies on or beyond a pole of the Laplace exponent.
    #[error("theta = {theta} is outside the domain of the Laplace exponent (pole at {pole}, rate {rate})")]
    Domain { theta: f64, pole: f64, rate: f64 },

    #[error("net profit condition violated: mean drift {mean} <= 0")]
    NetProfit { mean: f64 },

    #[error("rho undefined: Psi(theta) = {delta} has no positive root in the domain")]
    RhoUndefined { delta: f64 },

    #[error("Cramér condition fails: Psi(-R) = 0 has no root R > 0")]
    CramerFails,

    /// A tangency of `Psi(theta) = q` was found where simple roots are required.
    #[error("double root of Psi(theta) = {q} at theta = {root}")]
    DoubleRoot { q: f64, root: f64 },

    #[error("degenerate boundary system: {0}")]
    DegenerateSystem(String),

    #[error("model is not spectrally negative (has upward jumps)")]
    NotSpectrallyNegative,

    #[error("unknown catalog density '{0}'")]
    UnknownCatalog(String),

    #[error("unsupported model: {0}")]
    Unsupported(String),

    /// A jump integral over an unbounded region does not converge.
    #[error("divergent jump integral: exponent {exponent} against rate {rate}")]
    DivergentIntegral { exponent: f64, rate: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
