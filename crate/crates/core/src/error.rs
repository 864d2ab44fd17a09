use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("point {0} lies inside the polygon")]
    InsidePolygon(Complex64),

    #[error("inverse map did not converge after {iterations} iterations (best residual {residual:.3e})")]
    InverseNoConvergence {
        best: Complex64,
        residual: f64,
        iterations: usize,
    },

    #[error("Newton iteration did not converge (residual history {trace:?})")]
    NewtonNoConvergence { trace: Vec<f64> },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("eigenvalue iteration stagnated (Rayleigh quotient history {history:?})")]
    EigenStagnation { history: Vec<f64> },

    #[error("bisection bracket failure at theta = {theta}")]
    Bracket { theta: f64 },

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
