use num_complex::Complex64;
use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{} invariant violation(s), first: {}", .0.len(), .0.first().map(|v| v.to_string()).unwrap_or_default())]
    Validation(Vec<Violation>),

    #[error("parse error in field `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("exp(i*lambda*x) overflows on this grid (|Im lambda| * max|x| = {exponent:.1}); shrink the grid or rescale")]
    Overflow { exponent: f64 },

    #[error("singular gauge map at zero spectral value")]
    SingularMap,

    #[error("multiplicity {0} is not supported here")]
    UnsupportedMultiplicity(usize),

    #[error("not a bound state: proportionality residual {residual:.3e}")]
    NotBoundState { residual: f64 },

    #[error("contour passes too close to a zero (min |value| = {min:.3e}); refine the search region")]
    RegionRefinement { min: f64 },

    #[error("Newton iteration did not converge: last iterate {last}, residual {residual:.3e}")]
    NewtonFailed { last: Complex64, residual: f64 },

    #[error("winding number {winding} does not match located zeros (total multiplicity {found})")]
    WindingMismatch { winding: i64, found: usize },

    #[error("spectral spacing {spacing:.4e} too coarse for kernel range {y_max:.4} (need spacing <= pi/y_max)")]
    Nyquist { spacing: f64, y_max: f64 },

    #[error("kernel does not decay: relative magnitude {ratio:.3e} at s = {s:.4}")]
    KernelDecay { s: f64, ratio: f64 },

    #[error("ill-conditioned linear system (estimated condition number {cond:.3e})")]
    Conditioning { cond: f64 },

    #[error("inconsistent data: {0}")]
    Inconsistent(String),

    #[error("step ({step}) {name}: {source}")]
    Step {
        step: char,
        name: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for errors caused by the inputs rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Invalid(_)
            | Error::Validation(_)
            | Error::Parse { .. }
            | Error::GridMismatch(_)
            | Error::Nyquist { .. }
            | Error::UnsupportedMultiplicity(_) => true,
            Error::Step { source, .. } => source.is_validation(),
            _ => false,
        }
    }

    pub(crate) fn at_step(step: char, name: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::Step {
            step,
            name,
            source: Box::new(e),
        }
    }

    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Error {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}
