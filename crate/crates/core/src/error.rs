use num_complex::Complex64;
use thiserror::Error;

/// Errors raised anywhere in the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{what} did not converge after {iterations} iterations (best residual {residual:.3e})")]
    Convergence {
        what: String,
        iterations: usize,
        residual: f64,
    },

    #[error("singular {what} (condition estimate {condition:.3e})")]
    Singular { what: String, condition: f64 },

    #[error("singular resolvent sI - A0 - A1 exp(-s tau) at s = {s}")]
    SingularResolvent { s: Complex64 },

    #[error("characteristic function {lambda} is not simple (nearest other eigenvalue at distance {gap:.3e})")]
    Multiplicity { lambda: Complex64, gap: f64 },

    #[error("eigenvalue tracking jumped from {from} to {to}")]
    TrackingJump { from: Complex64, to: Complex64 },

    #[error("resonance: L_{harmonic} = GJ({harmonic} i omega) + I is singular (|det| = {det:.3e})")]
    Resonance { harmonic: i32, det: f64 },

    #[error("restricted solve on the complement of ker(L1) failed: {0}")]
    Projection(String),

    #[error("critical frequency collapsed to {0:.3e}; a Hopf point needs omega != 0")]
    DegenerateFrequency(f64),

    #[error("nondegeneracy condition violated: {0}")]
    Degeneracy(String),

    #[error("not supported: {0}")]
    Capability(String),

    #[error("finite-difference precision lost: {0}")]
    Precision(String),

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("invalid model: {0}")]
    Validation(String),

    #[error("all expansion coefficients are below tolerance {tol:.1e}; retry with a larger q")]
    IndeterminateOrder { tol: f64 },

    #[error("codimension overflow: {0}")]
    CodimensionOverflow(String),

    #[error("series fit is ill-conditioned (residual {residual:.3e}, tail change {tail:.3e})")]
    IllConditioned { residual: f64, tail: f64 },

    #[error("nothing found: {0}")]
    NotFound(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn convergence(what: impl Into<String>, iterations: usize, residual: f64) -> Self {
        Error::Convergence {
            what: what.into(),
            iterations,
            residual,
        }
    }

    /// True for failures that mean the mathematics itself is obstructed
    /// (resonance, degeneracy, loss of simplicity) rather than bad input.
    pub fn is_obstruction(&self) -> bool {
        matches!(
            self,
            Error::Resonance { .. }
                | Error::Projection(_)
                | Error::Multiplicity { .. }
                | Error::DegenerateFrequency(_)
                | Error::Degeneracy(_)
                | Error::CodimensionOverflow(_)
                | Error::IndeterminateOrder { .. }
                | Error::SingularResolvent { .. }
        )
    }

    /// Process exit code: 2 input error, 3 nothing found, 4 mathematical
    /// obstruction, 5 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation(_) | Error::Dimension(_) | Error::Io(_) => 2,
            Error::NotFound(_) => 3,
            e if e.is_obstruction() => 4,
            _ => 5,
        }
    }
}
