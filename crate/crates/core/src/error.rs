use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shooting bracket [{lo}, {hi}] does not enclose a root")]
    Bracket { lo: f64, hi: f64 },

    #[error("{what} did not converge after {iterations} iterations (last error {last_error:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        last_error: f64,
    },

    #[error("quadrature did not reach tolerance: estimate {estimate:e}, error {error:e} after {subdivisions} subdivisions")]
    Quadrature {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("grid cannot resolve the problem: {0}")]
    Grid(String),

    #[error("exchange hole undefined: total mass {mass} < 1/2")]
    HoleUndefined { mass: f64 },

    #[error("kernel inequality violated at xi={xi}, xi'={xi_prime}: {lhs:e} > {rhs:e}")]
    KernelInequality {
        xi: f64,
        xi_prime: f64,
        lhs: f64,
        rhs: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
