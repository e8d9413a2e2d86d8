use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{function}: argument outside domain ({reason})")]
    Domain {
        function: &'static str,
        reason: String,
    },

    #[error("renewal series needs more than {cap} terms to reach tail mass {epsilon:e}")]
    TailCapExceeded { epsilon: f64, cap: usize },

    #[error(
        "quadrature did not converge: estimated error {achieved:e} exceeds requested {requested:e} (value {value})"
    )]
    QuadratureNonConvergence {
        value: f64,
        achieved: f64,
        requested: f64,
    },

    #[error("Gumbel-Gamma closed form needs ell * c_m * e > 2 and ell * c_m > 2 (ell = {ell}, c_m = {c_m}); use the QN or quadrature path")]
    GumbelDomain { ell: u64, c_m: f64 },

    #[error("QN closed form limited to ell <= {cap} (got {ell})")]
    QnCapExceeded { ell: u64, cap: u64 },

    #[error("collision-time tail 1 - Omega(ell * t_b) stays above {target:e} up to the hard cap ell = {cap}")]
    EllCapExceeded { target: f64, cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn domain(function: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        function,
        reason: reason.into(),
    }
}
