//! Domain types shared by the solvers, with validation and the text format.

mod grid;
pub mod io;
mod jost;
mod potential;
mod scattering;
mod triplets;

use std::fmt;

pub use grid::{SpatialGrid, SpectralAxis, SpectralGrid};
pub use jost::{JostField, JostKind};
pub use potential::{PotentialPair, DEFAULT_DECAY_TOL};
pub use scattering::{ScatteringMatrixData, DEFAULT_RELATION_TOL};
pub use triplets::{build_triplets, BoundState, BoundStateTriplets};

/// Which of the three linear systems a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// The energy-dependent system with potentials (q, r) multiplied by zeta.
    EnergyDependent,
    Uv,
    Ps,
}

impl Variant {
    pub fn tag(self) -> &'static str {
        match self {
            Variant::EnergyDependent => "qr",
            Variant::Uv => "uv",
            Variant::Ps => "ps",
        }
    }

    pub fn from_tag(s: &str) -> Option<Variant> {
        match s {
            "qr" => Some(Variant::EnergyDependent),
            "uv" => Some(Variant::Uv),
            "ps" => Some(Variant::Ps),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// One failed invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub invariant: &'static str,
    pub index: Option<usize>,
    pub detail: String,
}

impl Violation {
    pub(crate) fn new(invariant: &'static str, index: Option<usize>, detail: impl Into<String>) -> Self {
        Violation {
            invariant,
            index,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{} at index {}: {}", self.invariant, i, self.detail),
            None => write!(f, "{}: {}", self.invariant, self.detail),
        }
    }
}

pub trait Validate {
    /// Empty iff every invariant of the type holds.
    fn validate(&self) -> Vec<Violation>;
}

pub(crate) fn into_result<T: Validate>(value: T) -> crate::Result<T> {
    let v = value.validate();
    if v.is_empty() {
        Ok(value)
    } else {
        Err(crate::Error::Validation(v))
    }
}
