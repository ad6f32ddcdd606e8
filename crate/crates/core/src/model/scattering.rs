use num_complex::Complex64 as C64;

use super::{SpectralGrid, Validate, Variant, Violation};

pub const DEFAULT_RELATION_TOL: f64 = 1e-6;

/// Sampled scattering coefficients on a real spectral grid.
///
/// Points in `singular` carry NaN coefficients: the transmission denominator vanished there.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringMatrixData {
    pub grid: SpectralGrid,
    pub t: Vec<C64>,
    pub r: Vec<C64>,
    pub l: Vec<C64>,
    pub t_bar: Vec<C64>,
    pub r_bar: Vec<C64>,
    pub l_bar: Vec<C64>,
    pub variant: Variant,
    /// e^{i mu / 2}, once known.
    pub phase: Option<C64>,
    pub singular: Vec<usize>,
    pub relation_tol: f64,
}

impl ScatteringMatrixData {
    /// Free-system data: unit transmission, zero reflection.
    pub fn free(grid: SpectralGrid, variant: Variant) -> Self {
        let n = grid.len();
        let one = vec![C64::new(1.0, 0.0); n];
        let zero = vec![C64::new(0.0, 0.0); n];
        ScatteringMatrixData {
            grid,
            t: one.clone(),
            r: zero.clone(),
            l: zero.clone(),
            t_bar: one,
            r_bar: zero.clone(),
            l_bar: zero,
            variant,
            phase: None,
            singular: Vec::new(),
            relation_tol: DEFAULT_RELATION_TOL,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Pointwise residual max(|L + Rbar T / Tbar|, |Lbar + R Tbar / T|); NaN at singular points.
    pub fn relation_residuals(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let a = self.l[k] + self.r_bar[k] * self.t[k] / self.t_bar[k];
                let b = self.l_bar[k] + self.r[k] * self.t_bar[k] / self.t[k];
                a.norm().max(b.norm())
            })
            .collect()
    }

    pub fn max_relation_residual(&self) -> f64 {
        self.relation_residuals()
            .into_iter()
            .enumerate()
            .filter(|(k, _)| !self.singular.contains(k))
            .map(|(_, v)| v)
            .fold(0.0, f64::max)
    }

    /// True when both reflection coefficients are exactly zero everywhere.
    pub fn is_reflectionless(&self) -> bool {
        let zero = C64::new(0.0, 0.0);
        self.r.iter().chain(&self.r_bar).all(|z| *z == zero)
    }
}

impl Validate for ScatteringMatrixData {
    fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.grid.len();
        let arrays = [
            ("T", &self.t),
            ("R", &self.r),
            ("L", &self.l),
            ("T_bar", &self.t_bar),
            ("R_bar", &self.r_bar),
            ("L_bar", &self.l_bar),
        ];
        for (name, arr) in arrays {
            if arr.len() != n {
                out.push(Violation::new(
                    "sample count",
                    None,
                    format!("{name} has {} samples, grid has {n}", arr.len()),
                ));
            }
        }
        if let Some(&k) = self.singular.iter().find(|&&k| k >= n) {
            out.push(Violation::new("singular index in range", Some(k), "index beyond grid"));
        }
        if let Some(p) = self.phase {
            if !(p.re.is_finite() && p.im.is_finite()) {
                out.push(Violation::new("finite phase", None, format!("phase = {p}")));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for (k, res) in self.relation_residuals().into_iter().enumerate() {
            if self.singular.contains(&k) {
                continue;
            }
            if !(res <= self.relation_tol) {
                out.push(Violation::new(
                    "L = -Rbar T / Tbar relation",
                    Some(k),
                    format!("residual {res:.3e} exceeds {:.1e}", self.relation_tol),
                ));
            }
        }
        out
    }
}
