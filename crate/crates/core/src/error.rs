use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("gradient undefined at a point of norm {0:e}")]
    GradientUndefined(f64),

    #[error("polytope is infeasible or has empty interior (certificate direction {certificate:?})")]
    Infeasible { certificate: Vec<f64> },

    #[error("polytope is unbounded (recession direction {direction:?})")]
    Unbounded { direction: Vec<f64> },

    #[error("solver failed after {iterations} iterations: {reason} (residual {residual:e})")]
    SolverFailure { reason: String, iterations: usize, residual: f64, best_iterate: Vec<f64> },

    #[error("vertex {vertex:?}: {source}")]
    Vertex {
        vertex: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
