use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain where an evaluation is valid.
    #[error("{what}: argument {value} outside valid range [{lo}, {hi}]")]
    Range {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("jet with constant term {constant:e} cannot be inverted or square-rooted")]
    SingularJet { constant: f64 },

    #[error("composition requires an inner jet with zero constant term, got {constant:e}")]
    CompositionBase { constant: f64 },

    #[error("jet orders differ: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("boundary-value solve did not converge after {iterations} Newton steps (max residual {max_residual:e})")]
    Convergence {
        iterations: usize,
        max_residual: f64,
    },

    #[error("integrator step size fell below {min_step:e} at x = {x}")]
    Stiffness { x: f64, min_step: f64 },

    #[error("m = {m} needs Taylor coefficients through order {needed}, solution carries order {available}")]
    Capability {
        m: usize,
        needed: usize,
        available: usize,
    },

    #[error("F(s = {s}, m = {m}) is ill-conditioned: a 1e-10 change in the jets moves it by {sensitivity:e}")]
    IllConditioned { m: usize, s: f64, sensitivity: f64 },

    #[error("F decreases by {drop:e} at s = {s}, beyond rounding")]
    NonMonotone { s: f64, drop: f64 },

    #[error("distribution table does not capture the full mass: F(s_min) = {lower:e}, 1 - F(s_max) = {upper:e}")]
    Truncation { lower: f64, upper: f64 },

    #[error("non-finite value encountered while {context}")]
    NumericalRange { context: &'static str },

    #[error("eigenvalue computation failed for replicate {rep}: {reason}")]
    SampleFailure { rep: u64, reason: String },

    #[error("need at least {needed} usable samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
