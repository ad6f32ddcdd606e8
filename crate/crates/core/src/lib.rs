//! Direct and inverse scattering for the energy-dependent system
//! `d/dx [a; b] = [[-i zeta^2, zeta q], [zeta r, i zeta^2]] [a; b]`
//! and its two energy-independent gauges with potentials (u, v) and (p, s).

pub mod alternate;
pub mod direct;
pub mod error;
pub mod gauge;
pub mod inverse;
pub mod marchenko;
pub mod model;
pub mod numerics;

pub use error::{Error, Result};
