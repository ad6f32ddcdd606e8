use crate::error::{Error, Result};

/// Uniform grid on [x_min, x_max] with `n_points` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || !(x_min < x_max) {
            return Err(Error::Invalid(format!(
                "grid needs finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < 3 {
            return Err(Error::Invalid(format!("grid needs at least 3 points, got {n_points}")));
        }
        Ok(SpatialGrid {
            x_min,
            x_max,
            n_points,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.h()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Every `stride`-th point; the stride must divide the interval count.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 || (self.n_points - 1) % stride != 0 {
            return Err(Error::GridMismatch(format!(
                "stride {stride} does not divide {} intervals",
                self.n_points - 1
            )));
        }
        SpatialGrid::new(self.x_min, self.x_max, (self.n_points - 1) / stride + 1)
    }

    /// Stride such that `other` is a subsample of `self`, if it is one.
    pub fn stride_to(&self, other: &SpatialGrid) -> Option<usize> {
        if self.x_min != other.x_min || self.x_max != other.x_max {
            return None;
        }
        let a = self.n_points - 1;
        let b = other.n_points - 1;
        (b > 0 && a % b == 0).then_some(a / b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralAxis {
    Lambda,
    Zeta,
}

impl SpectralAxis {
    pub fn tag(self) -> &'static str {
        match self {
            SpectralAxis::Lambda => "lambda",
            SpectralAxis::Zeta => "zeta",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        match s {
            "lambda" => Some(SpectralAxis::Lambda),
            "zeta" => Some(SpectralAxis::Zeta),
            _ => None,
        }
    }
}

/// Strictly increasing real samples of lambda or zeta.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    values: Vec<f64>,
    axis: SpectralAxis,
}

impl SpectralGrid {
    pub fn new(values: Vec<f64>, axis: SpectralAxis) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invalid("spectral grid is empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("spectral value {i} is not finite")));
        }
        if let Some(i) = values.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::Invalid(format!(
                "spectral grid not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(SpectralGrid { values, axis })
    }

    /// `n` equally spaced samples including both ends.
    pub fn uniform(min: f64, max: f64, n: usize, axis: SpectralAxis) -> Result<Self> {
        if n < 2 || !(min < max) {
            return Err(Error::Invalid(format!(
                "uniform spectral grid needs n >= 2 and min < max, got {min}:{max}:{n}"
            )));
        }
        let d = (max - min) / (n - 1) as f64;
        let values = (0..n)
            .map(|k| if k + 1 == n { max } else { min + k as f64 * d })
            .collect();
        SpectralGrid::new(values, axis)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn axis(&self) -> SpectralAxis {
        self.axis
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// lambda for every sample (zeta squared on the zeta axis).
    pub fn lambdas(&self) -> Vec<f64> {
        match self.axis {
            SpectralAxis::Lambda => self.values.clone(),
            SpectralAxis::Zeta => self.values.iter().map(|z| z * z).collect(),
        }
    }

    /// Common spacing if the grid is uniform to relative `tol`.
    pub fn uniform_spacing(&self, tol: f64) -> Option<f64> {
        let n = self.values.len();
        if n < 2 {
            return None;
        }
        let d = (self.values[n - 1] - self.values[0]) / (n - 1) as f64;
        self.values
            .windows(2)
            .all(|w| ((w[1] - w[0]) - d).abs() <= tol * d)
            .then_some(d)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.values.len();
        let scale = self.values.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
        (0..n).all(|k| (self.values[k] + self.values[n - 1 - k]).abs() <= tol * scale)
    }
}
