use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} lies outside the valid domain [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("invalid range: start time {t_start} must exceed end time {t_end}")]
    InvalidRange { t_start: f64, t_end: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("polynomial of degree {degree} exceeds the supported maximum {max}")]
    DegreeOverflow { degree: usize, max: usize },
    #[error("duplicate interpolation node at index {0}")]
    DuplicateNodes(usize),
    #[error("non-finite value produced by {0}")]
    NonFinite(String),
    #[error("order schedule invalid at step {step}: {reason}")]
    InvalidOrders { step: usize, reason: String },
    #[error("lambda sequence not strictly increasing at index {index}")]
    NotIncreasing { index: usize },
    #[error("infeasible: span {span} cannot hold {steps} gaps of at least {margin}")]
    Infeasible {
        span: f64,
        steps: usize,
        margin: f64,
    },
    #[error("sampler state became non-finite at step {0}")]
    NonFiniteState(usize),
    #[error("adaptive integrator failed: {0}")]
    Integrator(String),
}
