use thiserror::Error;

/// Errors raised by counting, saddle-point and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured size bound (sieve, modulus, exact-count range) was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A structural precondition such as `P+(q) <= y` does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// `log x` is not below `phi_1(0+, y) = psi(y)/2`, so the saddle point
    /// `beta` does not exist.
    #[error(
        "outside the small-y domain: psi(y)/2 = {limit:.6} <= log x = {log_x:.6}; \
         reduce x through the divisor symmetry Upsilon(x) = tau(N) - Upsilon((N/x)-)"
    )]
    Regime { limit: f64, log_x: f64 },

    /// The case is well defined but not covered by an implemented formula.
    #[error("unsupported case: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
