use num_complex::Complex64 as C64;

use super::DirectConfig;
use crate::error::{Error, Result};
use crate::model::{JostKind, PotentialPair, SpatialGrid, Variant};
use crate::numerics::{lagrange_weights, principal_sqrt, I};

/// Potentials resampled at every Runge-Kutta stage point, reusable across spectral values.
///
/// The integration runs on the modified solution `m = exp(-s i lambda x) * sol`, where `s` is
/// the sign of the plane wave of the requested Jost solution, with an integrating factor for
/// the diagonal part. Modified solutions stay bounded for real lambda and in the half plane
/// where the Jost solution is analytic.
#[derive(Debug, Clone)]
pub(crate) struct JostSolver {
    pub grid: SpatialGrid,
    pub variant: Variant,
    substeps: usize,
    first: Vec<C64>,
    second: Vec<C64>,
    overflow_limit: f64,
}

fn resample(values: &[C64], n: usize, substeps: usize) -> Vec<C64> {
    let per_cell = 2 * substeps;
    let total = per_cell * (n - 1) + 1;
    let width = n.min(6);
    let mut out = Vec::with_capacity(total);
    for k in 0..total {
        if k % per_cell == 0 {
            out.push(values[k / per_cell]);
            continue;
        }
        let pos = k as f64 / per_cell as f64;
        let cell = k / per_cell;
        let i0 = cell.saturating_sub(2).min(n - width);
        let nodes: Vec<f64> = (i0..i0 + width).map(|i| i as f64).collect();
        let w = lagrange_weights(&nodes, pos);
        out.push(w.iter().zip(&values[i0..i0 + width]).map(|(wi, v)| v * *wi).sum());
    }
    out
}

/// Diagonal of the shifted coefficient matrix, starting vector and plane-wave sign.
fn kind_setup(kind: JostKind, lambda: C64) -> ([C64; 2], [C64; 2], f64) {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    match kind {
        JostKind::Psi | JostKind::PhiBar => ([-2.0 * I * lambda, zero], [zero, one], 1.0),
        JostKind::Phi | JostKind::PsiBar => ([zero, 2.0 * I * lambda], [one, zero], -1.0),
    }
}

/// Plane-wave sign of the Jost solution: the physical solution is `exp(s i lambda x) m`.
pub(crate) fn plane_sign(kind: JostKind) -> f64 {
    kind_setup(kind, C64::new(0.0, 0.0)).2
}

impl JostSolver {
    pub fn new(pot: &PotentialPair, cfg: &DirectConfig) -> Result<Self> {
        cfg.check()?;
        let mut checked = pot.clone();
        checked.decay_tol = pot.decay_tol.max(cfg.boundary_tol);
        let v = crate::model::Validate::validate(&checked);
        if !v.is_empty() {
            return Err(Error::Validation(v));
        }
        let n = pot.grid.len();
        Ok(JostSolver {
            grid: pot.grid,
            variant: pot.variant,
            substeps: cfg.substeps,
            first: resample(&pot.first, n, cfg.substeps),
            second: resample(&pot.second, n, cfg.substeps),
            overflow_limit: cfg.overflow_limit,
        })
    }

    /// lambda and the potential coupling for a spectral value (zeta on the energy-dependent system).
    pub fn lambda_and_coupling(&self, spectral: C64) -> (C64, C64) {
        match self.variant {
            Variant::EnergyDependent => (spectral * spectral, spectral),
            _ => (spectral, C64::new(1.0, 0.0)),
        }
    }

    /// Spectral value to use for a given lambda: the principal zeta on the energy-dependent system.
    pub fn spectral_for_lambda(&self, lambda: C64) -> C64 {
        match self.variant {
            Variant::EnergyDependent => principal_sqrt(lambda),
            _ => lambda,
        }
    }

    pub fn check_overflow(&self, lambda: C64) -> Result<()> {
        let exponent = lambda.im.abs() * self.grid.x_min().abs().max(self.grid.x_max().abs());
        if exponent > self.overflow_limit {
            Err(Error::Overflow { exponent })
        } else {
            Ok(())
        }
    }

    /// Modified solution `m` at the grid points.
    pub fn modified(&self, spectral: C64, kind: JostKind) -> Vec<[C64; 2]> {
        let (lambda, coupling) = self.lambda_and_coupling(spectral);
        let (d, m0, _) = kind_setup(kind, lambda);
        let n = self.grid.len();
        let sub = self.substeps;
        let steps = sub * (n - 1);
        let last = 2 * steps;
        let from_right = kind.from_right();
        let dt = self.grid.h() / sub as f64;
        let tau = if from_right { -dt } else { dt };
        let delta = d[1] - d[0];
        let e_half = (delta * (0.5 * tau)).exp();
        let e_full = e_half * e_half;
        let ie_half = e_half.inv();
        let ie_full = e_full.inv();
        let g = [(d[0] * tau).exp(), (d[1] * tau).exp()];
        let half = 0.5 * tau;
        let sixth = tau / 6.0;

        let mut out = vec![[C64::new(0.0, 0.0); 2]; n];
        let mut m = m0;
        let start = if from_right { n - 1 } else { 0 };
        out[start] = m;
        for s in 0..steps {
            let (i0, i1, i2) = if from_right {
                (last - 2 * s, last - 2 * s - 1, last - 2 * s - 2)
            } else {
                (2 * s, 2 * s + 1, 2 * s + 2)
            };
            let a0 = coupling * self.first[i0];
            let b0 = coupling * self.second[i0];
            let a1 = coupling * self.first[i1] * e_half;
            let b1 = coupling * self.second[i1] * ie_half;
            let a2 = coupling * self.first[i2] * e_full;
            let b2 = coupling * self.second[i2] * ie_full;

            let k1 = [a0 * m[1], b0 * m[0]];
            let v = [m[0] + half * k1[0], m[1] + half * k1[1]];
            let k2 = [a1 * v[1], b1 * v[0]];
            let v = [m[0] + half * k2[0], m[1] + half * k2[1]];
            let k3 = [a1 * v[1], b1 * v[0]];
            let v = [m[0] + tau * k3[0], m[1] + tau * k3[1]];
            let k4 = [a2 * v[1], b2 * v[0]];
            let v0 = m[0] + sixth * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0]);
            let v1 = m[1] + sixth * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1]);
            m = [g[0] * v0, g[1] * v1];
            if (s + 1) % sub == 0 {
                let cells = (s + 1) / sub;
                let idx = if from_right { n - 1 - cells } else { cells };
                out[idx] = m;
            }
        }
        out
    }

    /// Physical Jost solution at the grid points.
    pub fn physical(&self, spectral: C64, kind: JostKind) -> Result<Vec<[C64; 2]>> {
        let (lambda, _) = self.lambda_and_coupling(spectral);
        self.check_overflow(lambda)?;
        let sign = plane_sign(kind);
        let mut m = self.modified(spectral, kind);
        // impose the exact plane wave at the normalization end
        let n = m.len();
        for (i, mi) in m.iter_mut().enumerate() {
            let x = self.grid.x(i);
            let f = (sign * I * lambda * x).exp();
            mi[0] *= f;
            mi[1] *= f;
        }
        let (i, x) = if kind.from_right() {
            (n - 1, self.grid.x_max())
        } else {
            (0, self.grid.x_min())
        };
        m[i] = kind.plane_wave(lambda, x);
        Ok(m)
    }
}
