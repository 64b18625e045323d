use thiserror::Error;

/// Failures raised by the library.
///
/// The split between parameter problems and numerical problems is
/// deliberate: the CLI maps the first group to exit code 2 and the second
/// to exit code 3.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} = {value} lies outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("constant market price of rate risk needs a = kappa (a = {a}, kappa = {kappa})")]
    PriceOfRiskNotConstant { a: f64, kappa: f64 },

    #[error("nu = 1/2 has no extremal strategy")]
    HalfNu,

    #[error("singular nu = {nu}: coefficient system has relative determinant {det:e}")]
    SingularNu { nu: f64, det: f64 },

    #[error(
        "quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e}"
    )]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("numerical overflow: {0}")]
    Overflow(String),

    #[error("root finder failed: {0}")]
    Root(String),

    #[error("non-finite value in simulated path {path} at step {step}")]
    NonFinitePath { path: usize, step: usize },
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularNu { .. }
                | Error::Quadrature { .. }
                | Error::Overflow(_)
                | Error::Root(_)
                | Error::NonFinitePath { .. }
        )
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
