//! Gauge maps between the energy-dependent system and its (u, v) and (p, s) forms.
//!
//! Everything hangs on `E(x) = exp((i/2) int_{-inf}^x q r)` and the constant
//! `mu = int q r`. Where a map involves `sqrt(lambda)` the square root is `zeta` itself,
//! which is the principal root whenever `zeta` comes from the principal branch.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{JostField, JostKind, PotentialPair, ScatteringMatrixData, SpatialGrid, SpectralAxis, Variant};
use crate::numerics::{cumulative_integral, derivative, principal_sqrt, I};

/// E on the grid together with mu and e^{i mu / 2}.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeData {
    pub grid: SpatialGrid,
    pub e: Vec<C64>,
    pub mu: C64,
    pub phase: C64,
}

impl GaugeData {
    /// Gauge built from a sampled cumulative integral of q r.
    pub fn from_cumulative(grid: SpatialGrid, cumulative: &[C64]) -> Result<Self> {
        if cumulative.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} samples on a {}-point grid", cumulative.len(), grid.len())));
        }
        let e: Vec<C64> = cumulative.iter().map(|c| (0.5 * I * c).exp()).collect();
        if let Some(k) = e.iter().position(|z| !(z.norm() > 0.0) || !z.re.is_finite()) {
            return Err(Error::Invalid(format!("E vanishes or overflows at sample {k}")));
        }
        let mu = *cumulative.last().unwrap();
        Ok(GaugeData {
            grid,
            e,
            mu,
            phase: (0.5 * I * mu).exp(),
        })
    }
}

fn require(pot: &PotentialPair, variant: Variant) -> Result<()> {
    if pot.variant != variant {
        return Err(Error::Invalid(format!("expected a {} pair, got {}", variant.tag(), pot.variant.tag())));
    }
    Ok(())
}

fn same_grid(pot: &PotentialPair, gauge: &GaugeData) -> Result<()> {
    if pot.grid != gauge.grid {
        return Err(Error::GridMismatch("potential and gauge grids differ".into()));
    }
    Ok(())
}

pub fn compute_gauge(pot: &PotentialPair) -> Result<GaugeData> {
    require(pot, Variant::EnergyDependent)?;
    let v = crate::model::Validate::validate(pot);
    if !v.is_empty() {
        return Err(Error::Validation(v));
    }
    let qr: Vec<C64> = pot.first.iter().zip(&pot.second).map(|(q, r)| q * r).collect();
    GaugeData::from_cumulative(pot.grid, &cumulative_integral(&qr, pot.grid.h()))
}

/// u = q E^-2, v = (-(i/2) r' + q r^2 / 4) E^2.
pub fn to_uv(pot: &PotentialPair, gauge: &GaugeData) -> Result<PotentialPair> {
    require(pot, Variant::EnergyDependent)?;
    same_grid(pot, gauge)?;
    let dr = derivative(&pot.second, pot.grid.h());
    let mut u = Vec::with_capacity(pot.grid.len());
    let mut v = Vec::with_capacity(pot.grid.len());
    for k in 0..pot.grid.len() {
        let (q, r, e) = (pot.first[k], pot.second[k], gauge.e[k]);
        let e2 = e * e;
        u.push(q / e2);
        v.push((-0.5 * I * dr[k] + 0.25 * q * r * r) * e2);
    }
    PotentialPair::with_decay_tol(pot.grid, u, v, Variant::Uv, pot.decay_tol)
}

/// p = ((i/2) q' + q^2 r / 4) E^-2, s = r E^2.
pub fn to_ps(pot: &PotentialPair, gauge: &GaugeData) -> Result<PotentialPair> {
    require(pot, Variant::EnergyDependent)?;
    same_grid(pot, gauge)?;
    let dq = derivative(&pot.first, pot.grid.h());
    let mut p = Vec::with_capacity(pot.grid.len());
    let mut s = Vec::with_capacity(pot.grid.len());
    for k in 0..pot.grid.len() {
        let (q, r, e) = (pot.first[k], pot.second[k], gauge.e[k]);
        let e2 = e * e;
        p.push((0.5 * I * dq[k] + 0.25 * q * q * r) / e2);
        s.push(r * e2);
    }
    PotentialPair::with_decay_tol(pot.grid, p, s, Variant::Ps, pot.decay_tol)
}

/// Which way a Jost map runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JostDirection {
    /// Gauged system to the energy-dependent one.
    ToEnergyDependent,
    /// Energy-dependent system to the gauged one.
    FromEnergyDependent,
}

type Mat2 = [[C64; 2]; 2];

/// Multiplier taking a gauged Jost solution to the energy-dependent one at one grid point.
fn multiplier(gauge: Variant, kind: JostKind, z: C64, e: C64, q: C64, r: C64, phase: C64) -> Mat2 {
    let zero = C64::new(0.0, 0.0);
    let ie = e.inv();
    match gauge {
        Variant::Uv => {
            // two shapes: with sqrt(lambda) on top, or 1/sqrt(lambda) underneath
            let top = [[z * e, zero], [0.5 * I * r * e, ie]];
            let under = [[e, zero], [0.5 * I * r * e / z, ie / z]];
            match kind {
                JostKind::Psi => scale(top, phase),
                JostKind::Phi => under,
                JostKind::PsiBar => scale(under, phase.inv()),
                JostKind::PhiBar => top,
            }
        }
        _ => {
            let under = [[e / z, -0.5 * I * q * ie / z], [zero, ie]];
            let top = [[e, -0.5 * I * q * ie], [zero, z * ie]];
            match kind {
                JostKind::Psi => scale(under, phase),
                JostKind::Phi => top,
                JostKind::PsiBar => scale(top, phase.inv()),
                JostKind::PhiBar => under,
            }
        }
    }
}

fn scale(m: Mat2, c: C64) -> Mat2 {
    [[m[0][0] * c, m[0][1] * c], [m[1][0] * c, m[1][1] * c]]
}

fn inverse(m: Mat2) -> Mat2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

fn apply(m: &Mat2, v: [C64; 2]) -> [C64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn map_jost(
    field: &JostField,
    gauge: &GaugeData,
    pot: &PotentialPair,
    zeta: C64,
    gauged: Variant,
    direction: JostDirection,
) -> Result<JostField> {
    require(pot, Variant::EnergyDependent)?;
    same_grid(pot, gauge)?;
    if field.grid != gauge.grid {
        return Err(Error::GridMismatch("Jost field and gauge grids differ".into()));
    }
    let lambda = zeta * zeta;
    let (source, target, expected, out_spectral) = match direction {
        JostDirection::ToEnergyDependent => (gauged, Variant::EnergyDependent, lambda, zeta),
        JostDirection::FromEnergyDependent => (Variant::EnergyDependent, gauged, zeta, lambda),
    };
    if field.variant != source {
        return Err(Error::Invalid(format!("expected a {} Jost field, got {}", source.tag(), field.variant.tag())));
    }
    if (field.spectral_value - expected).norm() > 1e-12 * (1.0 + expected.norm()) {
        return Err(Error::Invalid(format!(
            "Jost field at {} does not correspond to zeta = {zeta}",
            field.spectral_value
        )));
    }
    let mut out = JostField::empty(field.grid, out_spectral, target);
    for kind in JostKind::ALL {
        let Some(samples) = field.get(kind) else { continue };
        if zeta.norm() == 0.0 {
            return Err(Error::SingularMap);
        }
        let mapped = samples
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let m = multiplier(gauged, kind, zeta, gauge.e[k], pot.first[k], pot.second[k], gauge.phase);
                match direction {
                    JostDirection::ToEnergyDependent => apply(&m, v),
                    JostDirection::FromEnergyDependent => apply(&inverse(m), v),
                }
            })
            .collect();
        out.set(kind, mapped);
    }
    Ok(out)
}

/// Jost solutions between the (u, v) system at lambda = zeta^2 and the energy-dependent system at zeta.
pub fn map_jost_uv(
    field: &JostField,
    gauge: &GaugeData,
    pot: &PotentialPair,
    zeta: C64,
    direction: JostDirection,
) -> Result<JostField> {
    map_jost(field, gauge, pot, zeta, Variant::Uv, direction)
}

/// Jost solutions between the (p, s) system at lambda = zeta^2 and the energy-dependent system at zeta.
pub fn map_jost_ps(
    field: &JostField,
    gauge: &GaugeData,
    pot: &PotentialPair,
    zeta: C64,
    direction: JostDirection,
) -> Result<JostField> {
    map_jost(field, gauge, pot, zeta, Variant::Ps, direction)
}

/// Factors X^{variant} / X^{energy-dependent} for (T, R, L, Tbar, Rbar, Lbar).
fn factors(variant: Variant, phase: C64, root: C64) -> [C64; 6] {
    let one = C64::new(1.0, 0.0);
    let p2 = phase * phase;
    match variant {
        Variant::EnergyDependent => [one; 6],
        Variant::Uv => [phase, p2 * root, root.inv(), phase.inv(), root.inv() / p2, root],
        Variant::Ps => [phase, p2 / root, root, phase.inv(), root / p2, root.inv()],
    }
}

/// Scattering coefficients of one variant rewritten for another, pointwise.
///
/// `phase` is e^{i mu / 2}. Points with lambda = 0 are marked singular whenever the map
/// involves sqrt(lambda).
pub fn map_scattering(data: &ScatteringMatrixData, phase: C64, target: Variant) -> Result<ScatteringMatrixData> {
    if !(phase.re.is_finite() && phase.im.is_finite()) || phase.norm() == 0.0 {
        return Err(Error::Invalid(format!("unusable gauge phase {phase}")));
    }
    let source = data.variant;
    let mut out = data.clone();
    out.variant = target;
    out.phase = Some(phase);
    if source == target {
        return Ok(out);
    }
    let nan = C64::new(f64::NAN, f64::NAN);
    for (k, &v) in data.grid.values().iter().enumerate() {
        // the real root matching the sign convention of the source grid
        let root = match data.grid.axis() {
            SpectralAxis::Zeta => C64::new(v, 0.0),
            SpectralAxis::Lambda => principal_sqrt(C64::new(v, 0.0)),
        };
        if root.norm() == 0.0 {
            if !out.singular.contains(&k) {
                out.singular.push(k);
            }
            for arr in [&mut out.t, &mut out.r, &mut out.l, &mut out.t_bar, &mut out.r_bar, &mut out.l_bar] {
                arr[k] = nan;
            }
            continue;
        }
        let fs = factors(source, phase, root);
        let ft = factors(target, phase, root);
        let arrays = [&mut out.t, &mut out.r, &mut out.l, &mut out.t_bar, &mut out.r_bar, &mut out.l_bar];
        for (j, arr) in arrays.into_iter().enumerate() {
            arr[k] *= ft[j] / fs[j];
        }
    }
    out.singular.sort_unstable();
    Ok(out)
}
