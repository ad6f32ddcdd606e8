use num_complex::Complex64 as C64;

use super::{into_result, SpatialGrid, Validate, Variant, Violation};
use crate::error::Result;

pub const DEFAULT_DECAY_TOL: f64 = 1e-10;

/// Complex samples of a potential pair, (q, r), (u, v) or (p, s), on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPair {
    pub grid: SpatialGrid,
    pub first: Vec<C64>,
    pub second: Vec<C64>,
    pub variant: Variant,
    /// Tail magnitude allowed at both ends, relative to the largest sample.
    pub decay_tol: f64,
}

impl PotentialPair {
    /// Validated constructor with the default decay tolerance.
    pub fn new(grid: SpatialGrid, first: Vec<C64>, second: Vec<C64>, variant: Variant) -> Result<Self> {
        Self::with_decay_tol(grid, first, second, variant, DEFAULT_DECAY_TOL)
    }

    pub fn with_decay_tol(
        grid: SpatialGrid,
        first: Vec<C64>,
        second: Vec<C64>,
        variant: Variant,
        decay_tol: f64,
    ) -> Result<Self> {
        into_result(PotentialPair {
            grid,
            first,
            second,
            variant,
            decay_tol,
        })
    }

    pub fn zeros(grid: SpatialGrid, variant: Variant) -> Self {
        let z = vec![C64::new(0.0, 0.0); grid.len()];
        PotentialPair {
            grid,
            first: z.clone(),
            second: z,
            variant,
            decay_tol: DEFAULT_DECAY_TOL,
        }
    }

    /// Samples two closures on the grid and validates the result.
    pub fn from_fn(
        grid: SpatialGrid,
        variant: Variant,
        first: impl Fn(f64) -> C64,
        second: impl Fn(f64) -> C64,
    ) -> Result<Self> {
        let xs = grid.points();
        let a = xs.iter().map(|&x| first(x)).collect();
        let b = xs.iter().map(|&x| second(x)).collect();
        PotentialPair::new(grid, a, b, variant)
    }

    pub fn max_abs(&self) -> f64 {
        self.first
            .iter()
            .chain(&self.second)
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest end-sample magnitude divided by the largest sample magnitude.
    pub fn tail_ratio(&self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        let n = self.first.len();
        if n == 0 {
            return 0.0;
        }
        [self.first[0], self.first[n - 1], self.second[0], self.second[n - 1]]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            / m
    }
}

impl Validate for PotentialPair {
    fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.grid.len();
        for (name, arr) in [("first", &self.first), ("second", &self.second)] {
            if arr.len() != n {
                out.push(Violation::new(
                    "sample count",
                    None,
                    format!("{name} has {} samples, grid has {n}", arr.len()),
                ));
            }
            if let Some(i) = arr.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
                out.push(Violation::new("finite samples", Some(i), format!("{name} is not finite")));
            }
        }
        if !(self.decay_tol > 0.0) {
            out.push(Violation::new("decay tolerance", None, "must be positive"));
        }
        if !out.is_empty() {
            return out;
        }
        let m = self.max_abs();
        if m > 0.0 {
            for (name, arr) in [("first", &self.first), ("second", &self.second)] {
                for i in [0, n - 1] {
                    let ratio = arr[i].norm() / m;
                    if ratio > self.decay_tol {
                        out.push(Violation::new(
                            "decay",
                            Some(i),
                            format!("|{name}| / max = {ratio:.3e} exceeds {:.1e}", self.decay_tol),
                        ));
                    }
                }
            }
        }
        out
    }
}
