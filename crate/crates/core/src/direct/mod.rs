//! Jost solutions, Wronskians, scattering coefficients and bound states.

mod bound_states;
mod integrator;

use num_complex::Complex64 as C64;

pub use bound_states::{
    find_bound_states, simple_norming_constants, BoundStateSearchRegion, NormingConstant,
};
pub(crate) use integrator::{plane_sign, JostSolver};

use crate::error::{Error, Result};
use crate::model::{
    JostField, JostKind, PotentialPair, ScatteringMatrixData, SpectralGrid, DEFAULT_RELATION_TOL,
};
use crate::numerics::I;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectConfig {
    /// Runge-Kutta steps per grid cell.
    pub substeps: usize,
    /// Floor on the tail tolerance used when checking potentials before integration.
    pub boundary_tol: f64,
    /// Allowed deviation of a Wronskian from its mean over x.
    pub wronskian_drift_tol: f64,
    /// Transmission denominators below this mark a spectral singularity.
    pub singular_tol: f64,
    /// Largest |Im lambda| * max|x| before exponentials are considered unrepresentable.
    pub overflow_limit: f64,
    /// Relative residual allowed when testing phi and psi for proportionality.
    pub proportionality_tol: f64,
}

impl Default for DirectConfig {
    fn default() -> Self {
        DirectConfig {
            substeps: 4,
            boundary_tol: crate::model::DEFAULT_DECAY_TOL,
            wronskian_drift_tol: 1e-8,
            singular_tol: 1e-10,
            overflow_limit: 700.0,
            proportionality_tol: 1e-6,
        }
    }
}

impl DirectConfig {
    pub fn check(&self) -> Result<()> {
        let ok = self.substeps >= 1
            && self.boundary_tol > 0.0
            && self.wronskian_drift_tol > 0.0
            && self.singular_tol > 0.0
            && self.overflow_limit > 0.0
            && self.proportionality_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("direct config needs positive settings: {self:?}")))
        }
    }
}

/// Integrates one Jost solution. `spectral` is zeta on the energy-dependent system, lambda otherwise.
pub fn integrate_jost(pot: &PotentialPair, spectral: C64, which: JostKind, cfg: &DirectConfig) -> Result<JostField> {
    let solver = JostSolver::new(pot, cfg)?;
    let mut field = JostField::empty(pot.grid, spectral, pot.variant);
    field.set(which, solver.physical(spectral, which)?);
    Ok(field)
}

/// All four Jost solutions at one spectral value.
pub fn integrate_all(pot: &PotentialPair, spectral: C64, cfg: &DirectConfig) -> Result<JostField> {
    let solver = JostSolver::new(pot, cfg)?;
    let mut field = JostField::empty(pot.grid, spectral, pot.variant);
    for kind in JostKind::ALL {
        field.set(kind, solver.physical(spectral, kind)?);
    }
    Ok(field)
}

/// Pointwise determinant `a1 b2 - a2 b1`.
pub fn wronskian(a: &[[C64; 2]], b: &[[C64; 2]]) -> Result<Vec<C64>> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!("{} vs {} samples", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).map(|(u, v)| u[0] * v[1] - u[1] * v[0]).collect())
}

/// Wronskian of two populated Jost columns; both must share grid and spectral value.
pub fn wronskian_of(fa: &JostField, ka: JostKind, fb: &JostField, kb: JostKind) -> Result<Vec<C64>> {
    if fa.grid != fb.grid {
        return Err(Error::GridMismatch("Jost fields live on different grids".into()));
    }
    if fa.spectral_value != fb.spectral_value || fa.variant != fb.variant {
        return Err(Error::GridMismatch("Jost fields have different spectral values".into()));
    }
    let a = fa.get(ka).ok_or_else(|| Error::Invalid(format!("{ka:?} not populated")))?;
    let b = fb.get(kb).ok_or_else(|| Error::Invalid(format!("{kb:?} not populated")))?;
    wronskian(a, b)
}

/// Mean of a sampled Wronskian and its largest deviation from the mean.
pub fn mean_and_drift(w: &[C64]) -> (C64, f64) {
    let mean = w.iter().sum::<C64>() / w.len() as f64;
    let drift = w.iter().map(|z| (z - mean).norm()).fold(0.0, f64::max);
    (mean, drift)
}

/// The four independent Wronskians at one spectral value, with their drifts.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Wronskians {
    /// [phi; psi]
    pub phi_psi: C64,
    /// [psibar; phibar]
    pub psibar_phibar: C64,
    /// [phi; psibar]
    pub phi_psibar: C64,
    /// [phibar; psi]
    pub phibar_psi: C64,
    pub drift: f64,
}

fn modified_wronskian(solver: &JostSolver, lambda: C64, a: &[[C64; 2]], ka: JostKind, b: &[[C64; 2]], kb: JostKind) -> (C64, f64) {
    let s = plane_sign(ka) + plane_sign(kb);
    let w: Vec<C64> = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (u, v))| {
            let det = u[0] * v[1] - u[1] * v[0];
            if s == 0.0 {
                det
            } else {
                det * (s * I * lambda * solver.grid.x(i)).exp()
            }
        })
        .collect();
    mean_and_drift(&w)
}

pub(crate) fn wronskians_at(solver: &JostSolver, spectral: C64) -> Wronskians {
    let (lambda, _) = solver.lambda_and_coupling(spectral);
    let psi = solver.modified(spectral, JostKind::Psi);
    let phi = solver.modified(spectral, JostKind::Phi);
    let psib = solver.modified(spectral, JostKind::PsiBar);
    let phib = solver.modified(spectral, JostKind::PhiBar);
    let (a, da) = modified_wronskian(solver, lambda, &phi, JostKind::Phi, &psi, JostKind::Psi);
    let (b, db) = modified_wronskian(solver, lambda, &psib, JostKind::PsiBar, &phib, JostKind::PhiBar);
    let (c, dc) = modified_wronskian(solver, lambda, &phi, JostKind::Phi, &psib, JostKind::PsiBar);
    let (d, dd) = modified_wronskian(solver, lambda, &phib, JostKind::PhiBar, &psi, JostKind::Psi);
    Wronskians {
        phi_psi: a,
        psibar_phibar: b,
        phi_psibar: c,
        phibar_psi: d,
        drift: da.max(db).max(dc).max(dd),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringDiagnostics {
    /// Largest Wronskian drift at each spectral point.
    pub drift: Vec<f64>,
    pub max_drift: f64,
    pub max_relation_residual: f64,
    pub singular: Vec<usize>,
}

/// Scattering coefficients on a real grid, read from Wronskian means.
pub fn scattering_coefficients(pot: &PotentialPair, grid: &SpectralGrid, cfg: &DirectConfig) -> Result<ScatteringMatrixData> {
    scattering_with_diagnostics(pot, grid, cfg).map(|(d, _)| d)
}

pub fn scattering_with_diagnostics(
    pot: &PotentialPair,
    grid: &SpectralGrid,
    cfg: &DirectConfig,
) -> Result<(ScatteringMatrixData, ScatteringDiagnostics)> {
    let solver = JostSolver::new(pot, cfg)?;
    let n = grid.len();
    let nan = C64::new(f64::NAN, f64::NAN);
    let mut data = ScatteringMatrixData::free(grid.clone(), pot.variant);
    data.relation_tol = DEFAULT_RELATION_TOL;
    let mut drift = Vec::with_capacity(n);
    for (k, &v) in grid.values().iter().enumerate() {
        let spectral = match (grid.axis(), pot.variant) {
            (crate::model::SpectralAxis::Zeta, crate::model::Variant::EnergyDependent) => C64::new(v, 0.0),
            (crate::model::SpectralAxis::Zeta, _) => C64::new(v * v, 0.0),
            (crate::model::SpectralAxis::Lambda, _) => solver.spectral_for_lambda(C64::new(v, 0.0)),
        };
        let w = wronskians_at(&solver, spectral);
        drift.push(w.drift);
        if w.phi_psi.norm() < cfg.singular_tol || w.psibar_phibar.norm() < cfg.singular_tol {
            data.singular.push(k);
            for arr in [&mut data.t, &mut data.r, &mut data.l, &mut data.t_bar, &mut data.r_bar, &mut data.l_bar] {
                arr[k] = nan;
            }
            continue;
        }
        data.t[k] = w.phi_psi.inv();
        data.t_bar[k] = w.psibar_phibar.inv();
        data.r[k] = -w.phi_psibar / w.phi_psi;
        data.r_bar[k] = w.phibar_psi / w.psibar_phibar;
        data.l[k] = -w.phibar_psi / w.phi_psi;
        data.l_bar[k] = w.phi_psibar / w.psibar_phibar;
    }
    let max_drift = drift.iter().copied().fold(0.0, f64::max);
    let diag = ScatteringDiagnostics {
        max_drift,
        max_relation_residual: data.max_relation_residual(),
        singular: data.singular.clone(),
        drift,
    };
    Ok((data, diag))
}

/// The Wronskian [phi; psi] = 1/T continued into the upper half plane (Im lambda > 0),
/// or [psibar; phibar] = 1/Tbar into the lower half plane (Im lambda < 0).
pub fn transmission_denominator(pot: &PotentialPair, lambda: C64, cfg: &DirectConfig) -> Result<C64> {
    let solver = JostSolver::new(pot, cfg)?;
    denominator(&solver, lambda)
}

/// [phi; psi] at Im lambda > 0; tends to 1 as |lambda| grows.
pub fn transmission_in_upper_plane(pot: &PotentialPair, lambda: C64, cfg: &DirectConfig) -> Result<C64> {
    if !(lambda.im > 0.0) {
        return Err(Error::Invalid(format!("need Im lambda > 0, got {lambda}")));
    }
    transmission_denominator(pot, lambda, cfg)
}

pub(crate) fn denominator(solver: &JostSolver, lambda: C64) -> Result<C64> {
    solver.check_overflow(lambda)?;
    let spectral = solver.spectral_for_lambda(lambda);
    let (a, b) = if lambda.im >= 0.0 {
        (JostKind::Phi, JostKind::Psi)
    } else {
        (JostKind::PsiBar, JostKind::PhiBar)
    };
    let ma = solver.modified(spectral, a);
    let mb = solver.modified(spectral, b);
    Ok(modified_wronskian(solver, lambda, &ma, a, &mb, b).0)
}
