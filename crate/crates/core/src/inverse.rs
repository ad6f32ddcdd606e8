//! Inversion of energy-dependent scattering data through the (u, v) and (p, s) Marchenko
//! systems.
//!
//! Steps: (a) recover e^{i mu / 2}, (b) build the auxiliary (u, v) and (p, s) data,
//! (c) synthesize both kernel pairs, (d) solve both Marchenko systems, (e) read u and s off
//! the diagonals, (f) rebuild E, (g) q = u E^2 and r = s E^-2.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gauge::{map_scattering, GaugeData};
use crate::marchenko::{
    build_kernel_from_data, nystrom_solution, recover_potentials, separable_solution, KernelConfig, MarchenkoSolution,
    NystromConfig,
};
use crate::model::{
    build_triplets, BoundState, BoundStateTriplets, PotentialPair, ScatteringMatrixData, SpatialGrid, SpectralAxis,
    SpectralGrid, Validate, Variant,
};
use crate::numerics::{max_abs, principal_sqrt, tail_integral, I};

/// Norming constants of the auxiliary systems, supplied by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryStates {
    pub uv: BoundStateTriplets,
    pub ps: BoundStateTriplets,
}

/// Scattering data of the energy-dependent system with its bound states.
///
/// Bound states are stored in lambda with the norming constants of the energy-dependent system.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyDependentData {
    pub scattering: ScatteringMatrixData,
    pub triplets: BoundStateTriplets,
    /// Overrides the conversion of norming constants; needed for multiple poles.
    pub auxiliary: Option<AuxiliaryStates>,
}

impl EnergyDependentData {
    pub fn new(scattering: ScatteringMatrixData, triplets: BoundStateTriplets) -> Result<Self> {
        let d = EnergyDependentData {
            scattering,
            triplets,
            auxiliary: None,
        };
        d.check()?;
        Ok(d)
    }

    pub fn check(&self) -> Result<()> {
        if self.scattering.variant != Variant::EnergyDependent {
            return Err(Error::Invalid(format!(
                "expected energy-dependent data, got {}",
                self.scattering.variant.tag()
            )));
        }
        let v = self.scattering.validate();
        if !v.is_empty() {
            return Err(Error::Validation(v));
        }
        let v = self.triplets.validate();
        if !v.is_empty() {
            return Err(Error::Validation(v));
        }
        // on a zeta grid T and Tbar must be even in zeta
        let s = &self.scattering;
        if s.grid.axis() == SpectralAxis::Zeta {
            let vals = s.grid.values();
            for (k, &z) in vals.iter().enumerate() {
                let Some(j) = vals.iter().position(|&w| (w + z).abs() <= 1e-12 * (1.0 + z.abs())) else { continue };
                for (a, name) in [(&s.t, "T"), (&s.t_bar, "T_bar")] {
                    if (a[k] - a[j]).norm() > s.relation_tol * (1.0 + a[k].norm()) {
                        return Err(Error::Inconsistent(format!("{name} differs at zeta = {z} and -{z}")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// e^{i mu / 2} from both transmission coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEstimate {
    /// The estimate used downstream, from T.
    pub phase: C64,
    pub from_t_bar: C64,
    pub disagreement: f64,
}

/// Fraction of the grid, split between both ends, averaged for the phase.
pub const PHASE_FRACTION: f64 = 0.1;

pub fn recover_phase(data: &ScatteringMatrixData, tol: f64) -> Result<PhaseEstimate> {
    let n = data.len();
    if n == 0 {
        return Err(Error::Invalid("empty spectral grid".into()));
    }
    let per_end = ((0.5 * PHASE_FRACTION * n as f64).ceil() as usize).max(1).min(n.div_ceil(2));
    let idx: Vec<usize> = (0..per_end).chain(n - per_end..n).collect();
    let idx: Vec<usize> = {
        let mut v = idx;
        v.dedup();
        v.into_iter().filter(|&k| !data.singular.contains(&k)).collect()
    };
    if idx.is_empty() {
        return Err(Error::Inconsistent("no regular samples at the grid ends".into()));
    }
    let avg = |a: &[C64]| idx.iter().map(|&k| a[k]).sum::<C64>() / idx.len() as f64;
    let phase = avg(&data.t).inv();
    let from_t_bar = avg(&data.t_bar);
    let disagreement = (phase - from_t_bar).norm();
    if !(disagreement <= tol) {
        return Err(Error::Inconsistent(format!(
            "phase from T ({phase}) and from Tbar ({from_t_bar}) differ by {disagreement:.3e}"
        )));
    }
    Ok(PhaseEstimate {
        phase,
        from_t_bar,
        disagreement,
    })
}

/// Scattering data and triplets of the (u, v) and (p, s) systems.
#[derive(Debug, Clone)]
pub struct AuxiliaryData {
    pub uv: ScatteringMatrixData,
    pub ps: ScatteringMatrixData,
    pub triplets_uv: BoundStateTriplets,
    pub triplets_ps: BoundStateTriplets,
}

/// Norming constants of simple states carried to the (u, v) and (p, s) systems.
pub fn convert_norming(triplets: &BoundStateTriplets, phase: C64) -> Result<AuxiliaryStates> {
    let p2 = phase * phase;
    let mut out = [(Vec::new(), Vec::new()), (Vec::new(), Vec::new())];
    for s in triplets.states() {
        if s.multiplicity() != 1 {
            return Err(Error::UnsupportedMultiplicity(s.multiplicity()));
        }
        let root = principal_sqrt(s.lambda);
        let c = s.norming[0];
        out[0].0.push(BoundState::simple(s.lambda, root * p2 * c));
        out[1].0.push(BoundState::simple(s.lambda, p2 * c / root));
    }
    for s in triplets.barred() {
        if s.multiplicity() != 1 {
            return Err(Error::UnsupportedMultiplicity(s.multiplicity()));
        }
        let root = principal_sqrt(s.lambda);
        let c = s.norming[0];
        out[0].1.push(BoundState::simple(s.lambda, c / (p2 * root)));
        out[1].1.push(BoundState::simple(s.lambda, root * c / p2));
    }
    let [(uv, uvb), (ps, psb)] = out;
    Ok(AuxiliaryStates {
        uv: build_triplets(&uv, &uvb)?,
        ps: build_triplets(&ps, &psb)?,
    })
}

pub fn build_auxiliary_data(data: &EnergyDependentData, phase: C64) -> Result<AuxiliaryData> {
    let s = &data.scattering;
    if s.grid.axis() != SpectralAxis::Lambda {
        return Err(Error::Invalid("inversion needs data on the lambda axis".into()));
    }
    if let Some(k) = s.grid.values().iter().position(|&l| l == 0.0) {
        return Err(Error::Invalid(format!("spectral grid contains lambda = 0 (sample {k})")));
    }
    if !s.singular.is_empty() {
        return Err(Error::Invalid(format!("{} singular spectral samples", s.singular.len())));
    }
    let uv = map_scattering(s, phase, Variant::Uv)?;
    let ps = map_scattering(s, phase, Variant::Ps)?;
    let aux = match &data.auxiliary {
        Some(a) => a.clone(),
        None => convert_norming(&data.triplets, phase)?,
    };
    Ok(AuxiliaryData {
        uv,
        ps,
        triplets_uv: aux.uv,
        triplets_ps: aux.ps,
    })
}

/// E from the diagonals of K2 of both systems:
/// `E(x) = e^{i mu / 2} exp(2 int_x^inf (K2ps(z,z) - K2uv(z,z)) dz)`.
pub fn reconstruct_e(grid: SpatialGrid, k2_uv: &[C64], k2_ps: &[C64], phase: C64) -> Result<GaugeData> {
    if k2_uv.len() != grid.len() || k2_ps.len() != grid.len() {
        return Err(Error::GridMismatch("diagonal traces do not match the grid".into()));
    }
    let diff: Vec<C64> = k2_ps.iter().zip(k2_uv).map(|(a, b)| a - b).collect();
    let tail = tail_integral(&diff, grid.h());
    // E = exp((i/2) cum) with cum = mu - 4 i tail
    let mu = -2.0 * I * phase.ln();
    let cum: Vec<C64> = tail.iter().map(|t| mu - 4.0 * I * t).collect();
    let mut g = GaugeData::from_cumulative(grid, &cum)?;
    g.phase = phase;
    Ok(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionConfig {
    /// x-grid on which the Marchenko systems are solved and the potentials returned.
    pub grid: SpatialGrid,
    pub kernel: KernelConfig,
    pub nystrom: NystromConfig,
    pub phase_tol: f64,
    /// Decay tolerance attached to the recovered potentials.
    pub output_decay_tol: f64,
    /// Use the closed-form solver when the reflection data vanish identically.
    pub auto_separable: bool,
}

impl InversionConfig {
    pub fn new(grid: SpatialGrid) -> Self {
        InversionConfig {
            grid,
            kernel: KernelConfig::default(),
            nystrom: NystromConfig::default(),
            phase_tol: 1e-3,
            output_decay_tol: 1e-4,
            auto_separable: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionDiagnostics {
    pub phase: PhaseEstimate,
    pub diagonal_residual_uv: f64,
    pub diagonal_residual_ps: f64,
    /// max |(i/2) q r - 2 (K2uv - K2ps)| on the diagonal.
    pub product_residual: f64,
    pub max_nystrom_residual: f64,
    pub separable: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Inversion {
    pub potentials: PotentialPair,
    pub gauge: GaugeData,
    pub uv: PotentialPair,
    pub ps: PotentialPair,
    pub diagnostics: InversionDiagnostics,
}

fn solve(
    data: &ScatteringMatrixData,
    triplets: &BoundStateTriplets,
    cfg: &InversionConfig,
    separable: bool,
) -> Result<MarchenkoSolution> {
    if separable {
        return separable_solution(triplets, cfg.grid, data.variant);
    }
    let kernel = build_kernel_from_data(data, triplets, cfg.grid, &cfg.kernel)?;
    nystrom_solution(&kernel, &cfg.nystrom)
}

pub fn invert(data: &EnergyDependentData, cfg: &InversionConfig) -> Result<Inversion> {
    data.check().map_err(Error::at_step('a', "recover phase"))?;
    let phase = recover_phase(&data.scattering, cfg.phase_tol).map_err(Error::at_step('a', "recover phase"))?;
    let aux = build_auxiliary_data(data, phase.phase).map_err(Error::at_step('b', "auxiliary data"))?;
    let separable = cfg.auto_separable && data.scattering.is_reflectionless();
    let uv_sol = solve(&aux.uv, &aux.triplets_uv, cfg, separable).map_err(Error::at_step('c', "(u, v) Marchenko system"))?;
    let ps_sol = solve(&aux.ps, &aux.triplets_ps, cfg, separable).map_err(Error::at_step('d', "(p, s) Marchenko system"))?;
    let loose = f64::INFINITY;
    let uv = recover_potentials(&uv_sol, loose).map_err(Error::at_step('e', "u and s"))?;
    let ps = recover_potentials(&ps_sol, loose).map_err(Error::at_step('e', "u and s"))?;
    let [_, _, k2_uv, _] = uv_sol.diagonals();
    let [_, _, k2_ps, _] = ps_sol.diagonals();
    let gauge = reconstruct_e(cfg.grid, &k2_uv, &k2_ps, phase.phase).map_err(Error::at_step('f', "E"))?;

    let n = cfg.grid.len();
    let mut q = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(n);
    for k in 0..n {
        let e2 = gauge.e[k] * gauge.e[k];
        q.push(uv.potentials.first[k] * e2);
        r.push(ps.potentials.second[k] / e2);
    }
    let product_residual = (0..n)
        .map(|k| (0.5 * I * q[k] * r[k] - 2.0 * (k2_uv[k] - k2_ps[k])).norm())
        .fold(0.0, f64::max);
    let potentials = PotentialPair::with_decay_tol(cfg.grid, q, r, Variant::EnergyDependent, cfg.output_decay_tol)
        .map_err(Error::at_step('g', "q and r"))?;
    let mut warnings: Vec<String> = [&uv.warning, &ps.warning].into_iter().flatten().cloned().collect();
    let scale = max_abs(&potentials.first).max(max_abs(&potentials.second)).max(1.0);
    if product_residual > 1e-3 * scale * scale {
        warnings.push(format!("q r consistency residual {product_residual:.3e}"));
    }
    let diagnostics = InversionDiagnostics {
        phase,
        diagonal_residual_uv: uv.diagonal_residual,
        diagonal_residual_ps: ps.diagonal_residual,
        product_residual,
        max_nystrom_residual: uv_sol.max_residual().max(ps_sol.max_residual()),
        separable,
        warnings,
    };
    Ok(Inversion {
        potentials,
        gauge,
        uv: uv.potentials,
        ps: ps.potentials,
        diagnostics,
    })
}

/// Transmission coefficients of reflectionless (u, v) or (p, s) data:
/// `T = prod (lambda - lambdabar_k) / prod (lambda - lambda_j)` and `Tbar = 1 / T`.
pub fn reflectionless_transmission(triplets: &BoundStateTriplets, lambda: C64) -> C64 {
    let mut t = C64::new(1.0, 0.0);
    for s in triplets.barred() {
        t *= (lambda - s.lambda).powi(s.multiplicity() as i32);
    }
    for s in triplets.states() {
        t /= (lambda - s.lambda).powi(s.multiplicity() as i32);
    }
    t
}

/// Reflectionless scattering data for the given triplets.
///
/// On the energy-dependent system the norming constants are read in that system's
/// convention and the phase is fixed by `T(lambda = 0) = 1`. Returns the data and a warning
/// when the numbers of upper and lower states differ, since T then has no unit limit.
pub fn reflectionless_data(
    triplets: &BoundStateTriplets,
    grid: &SpectralGrid,
    variant: Variant,
) -> Result<(ScatteringMatrixData, Option<String>)> {
    if grid.axis() != SpectralAxis::Lambda {
        return Err(Error::Invalid("reflectionless data are generated on the lambda axis".into()));
    }
    let mut data = ScatteringMatrixData::free(grid.clone(), variant);
    let phase = match variant {
        Variant::EnergyDependent => {
            let p = reflectionless_transmission(triplets, C64::new(0.0, 0.0));
            data.phase = Some(p);
            p
        }
        _ => C64::new(1.0, 0.0),
    };
    for (k, &l) in grid.values().iter().enumerate() {
        let t = reflectionless_transmission(triplets, C64::new(l, 0.0));
        data.t[k] = t / phase;
        data.t_bar[k] = phase / t;
    }
    let n: usize = triplets.multiplicities().iter().sum();
    let nb: usize = triplets.multiplicities_bar().iter().sum();
    let warning = (n != nb).then(|| format!("{n} upper and {nb} lower bound states: T does not tend to a constant"));
    Ok((data, warning))
}
