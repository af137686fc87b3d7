use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("deterministic rectangle probability supports at most 2 looks, got {0}; use mc_rect_prob")]
    UnsupportedDimension(usize),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("root finder did not converge after {iterations} iterations (residual {residual_norm:e})")]
    NonConvergence {
        iterations: usize,
        residual_norm: f64,
        best: Vec<f64>,
    },

    #[error("singular Jacobian (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("residual evaluated to a non-finite value at {at:?}")]
    DomainEscape { at: Vec<f64> },

    #[error("infeasible design: {0}")]
    Infeasible(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
