//! The alternate Marchenko method: two uncoupled scalar equations whose diagonal
//! derivatives give q and r directly.
//!
//! With `G(y) = int_y^inf Omega` and its barred and (p, s) analogs, the unknowns solve
//!
//! ```text
//! K(x,y) + Gbar_uv(x+y) - int int Omegabar_uv(z+y) G_uv(t+z) K_t(x,t) dt dz = 0
//! Kbar(x,y) + G_ps(x+y) - int int Omega_ps(z+y) Gbar_ps(t+z) Kbar_t(x,t) dt dz = 0
//! ```
//!
//! over `x <= z, t`, and `q = e^{i mu} dK(x,x)/dx`, `r = e^{-i mu} dKbar(x,x)/dx`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gauge::GaugeData;
use crate::inverse::{build_auxiliary_data, recover_phase, EnergyDependentData, PhaseEstimate};
use crate::marchenko::{build_kernel_from_data, KernelConfig, MarchenkoKernel, NystromConfig};
use crate::model::{PotentialPair, SpatialGrid, Variant};
use crate::numerics::{derivative, max_abs, solve_dense, tail_integral, I};

/// Zero-energy Jost solutions of the (u, v) and (p, s) systems, in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroEnergyJost {
    pub psi_uv: Vec<[C64; 2]>,
    pub psi_bar_uv: Vec<[C64; 2]>,
    pub psi_ps: Vec<[C64; 2]>,
    pub psi_bar_ps: Vec<[C64; 2]>,
}

pub fn zero_energy_jost(pot: &PotentialPair, gauge: &GaugeData) -> Result<ZeroEnergyJost> {
    if pot.variant != Variant::EnergyDependent {
        return Err(Error::Invalid("zero-energy Jost solutions need a (q, r) pair".into()));
    }
    if pot.grid != gauge.grid {
        return Err(Error::GridMismatch("potential and gauge grids differ".into()));
    }
    let h = pot.grid.h();
    let tq = tail_integral(&pot.first, h);
    let tr = tail_integral(&pot.second, h);
    let p = gauge.phase;
    let ip = p.inv();
    let n = pot.grid.len();
    let mut out = ZeroEnergyJost {
        psi_uv: Vec::with_capacity(n),
        psi_bar_uv: Vec::with_capacity(n),
        psi_ps: Vec::with_capacity(n),
        psi_bar_ps: Vec::with_capacity(n),
    };
    for k in 0..n {
        let (q, r, e) = (pot.first[k], pot.second[k], gauge.e[k]);
        let ie = e.inv();
        out.psi_uv.push([-ip * ie * tq[k], ip * e * (1.0 + 0.5 * I * r * tq[k])]);
        out.psi_bar_uv.push([p * ie, -0.5 * I * p * r * e]);
        out.psi_ps.push([0.5 * I * ip * q * ie, ip * e]);
        out.psi_bar_ps.push([p * ie * (1.0 - 0.5 * I * q * tr[k]), -p * e * tr[k]]);
    }
    Ok(out)
}

/// Tail integrals of the kernels of both auxiliary systems on the kernel lattice.
#[derive(Debug, Clone)]
pub struct AltKernel {
    pub grid: SpatialGrid,
    pub uv: MarchenkoKernel,
    pub ps: MarchenkoKernel,
    pub g_uv: Vec<C64>,
    pub g_bar_uv: Vec<C64>,
    pub g_ps: Vec<C64>,
    pub g_bar_ps: Vec<C64>,
}

fn tail_of(kernel: &MarchenkoKernel, cont: &[C64], bar: bool) -> Result<Vec<C64>> {
    let mut g = tail_integral(cont, kernel.grid.h());
    for (m, gm) in g.iter_mut().enumerate() {
        let s = kernel.s(m);
        *gm += if bar {
            kernel.triplets.kernel_bar_tail(s)?
        } else {
            kernel.triplets.kernel_tail(s)?
        };
    }
    Ok(g)
}

impl AltKernel {
    pub fn from_kernels(uv: MarchenkoKernel, ps: MarchenkoKernel) -> Result<Self> {
        if uv.grid != ps.grid || uv.variant != Variant::Uv || ps.variant != Variant::Ps {
            return Err(Error::Invalid("need a (u, v) and a (p, s) kernel on the same grid".into()));
        }
        Ok(AltKernel {
            grid: uv.grid,
            g_uv: tail_of(&uv, &uv.omega_cont, false)?,
            g_bar_uv: tail_of(&uv, &uv.omega_bar_cont, true)?,
            g_ps: tail_of(&ps, &ps.omega_cont, false)?,
            g_bar_ps: tail_of(&ps, &ps.omega_bar_cont, true)?,
            uv,
            ps,
        })
    }

    /// `max |G' + Omega| / max |Omega|` over all four kernels, by central differences.
    pub fn derivative_residual(&self) -> f64 {
        let h = self.grid.h();
        let pairs = [
            (&self.g_uv, self.uv.omega()),
            (&self.g_bar_uv, self.uv.omega_bar()),
            (&self.g_ps, self.ps.omega()),
            (&self.g_bar_ps, self.ps.omega_bar()),
        ];
        let mut worst: f64 = 0.0;
        for (g, om) in pairs {
            let scale = max_abs(om);
            if scale == 0.0 {
                continue;
            }
            let dg = derivative(g, h);
            let r = dg.iter().zip(om).map(|(d, o)| (d + o).norm()).fold(0.0, f64::max);
            worst = worst.max(r / scale);
        }
        worst
    }

    fn support(&self) -> f64 {
        self.uv.support().max(self.ps.support())
    }

    pub fn is_zero(&self) -> bool {
        self.uv.is_zero() && self.ps.is_zero()
    }
}

pub fn build_alt_kernel(
    aux: &crate::inverse::AuxiliaryData,
    grid: SpatialGrid,
    cfg: &KernelConfig,
) -> Result<AltKernel> {
    let uv = build_kernel_from_data(&aux.uv, &aux.triplets_uv, grid, cfg)?;
    let ps = build_kernel_from_data(&aux.ps, &aux.triplets_ps, grid, cfg)?;
    AltKernel::from_kernels(uv, ps)
}

/// The two scalar unknowns at one x, for y >= x.
#[derive(Debug, Clone, PartialEq)]
pub struct AltRow {
    pub x: f64,
    pub y: Vec<f64>,
    pub k: Vec<C64>,
    pub k_bar: Vec<C64>,
    pub residual: f64,
}

/// `X D` for the banded five-point differentiation matrix `D`.
fn times_derivative(x: &DMatrix<C64>, h: f64) -> DMatrix<C64> {
    let n = x.ncols();
    let d = crate::numerics::differentiation_matrix(n, h);
    let mut out = DMatrix::zeros(x.nrows(), n);
    for k in 0..n {
        for c in 0..n {
            let w = d[(k, c)];
            if w != 0.0 {
                let col = x.column(k) * C64::new(w, 0.0);
                let mut target = out.column_mut(c);
                target += col;
            }
        }
    }
    out
}

fn solve_one(
    outer: &[C64],
    inner: &[C64],
    forcing: &[C64],
    i: usize,
    w: &[f64],
    h: f64,
    cfg: &NystromConfig,
) -> Result<(Vec<C64>, f64)> {
    let n = w.len();
    let at = |v: &[C64], j: usize, k: usize| v[2 * i + j + k];
    let ow = DMatrix::from_fn(n, n, |y, z| at(outer, y, z) * w[z]);
    let gw = DMatrix::from_fn(n, n, |z, t| at(inner, z, t) * w[t]);
    let m = DMatrix::<C64>::identity(n, n) - times_derivative(&(ow * gw), h);
    let f = DVector::from_fn(n, |y, _| -at(forcing, 0, y));
    let k = solve_dense(m.clone(), &f, cfg.max_cond)?;
    let res = (&m * &k - &f).camax() / f.camax().max(k.camax()).max(f64::MIN_POSITIVE);
    Ok((k.iter().copied().collect(), res))
}

pub fn solve_alt(kernel: &AltKernel, x: f64, cfg: &NystromConfig) -> Result<AltRow> {
    let grid = kernel.grid;
    let pos = (x - grid.x_min()) / grid.h();
    let i = pos.round();
    if !(i >= 0.0 && i < grid.len() as f64) || (pos - i).abs() > 1e-6 {
        return Err(Error::GridMismatch(format!("x = {x} is not a point of the inversion grid")));
    }
    let i = i as usize;
    let x = grid.x(i);
    let h = grid.h();
    let reach = grid.x_max().max(kernel.support() - x);
    let wanted = ((reach - x) / h - 1e-9).ceil().max(0.0) as usize;
    let n_int = wanted.min(2 * (grid.len() - 1) - i);
    let y: Vec<f64> = (0..=n_int).map(|j| x + j as f64 * h).collect();
    let zero = vec![C64::new(0.0, 0.0); y.len()];
    if kernel.is_zero() {
        return Ok(AltRow {
            x,
            y,
            k: zero.clone(),
            k_bar: zero,
            residual: 0.0,
        });
    }
    let w = cfg.rule.weights(n_int, h);
    let (k, r1) = solve_one(kernel.uv.omega_bar(), &kernel.g_uv, &kernel.g_bar_uv, i, &w, h, cfg)?;
    let (k_bar, r2) = solve_one(kernel.ps.omega(), &kernel.g_bar_ps, &kernel.g_ps, i, &w, h, cfg)?;
    let residual = r1.max(r2);
    if !(residual <= cfg.residual_tol) {
        return Err(Error::Conditioning { cond: residual / f64::EPSILON });
    }
    Ok(AltRow {
        x,
        y,
        k,
        k_bar,
        residual,
    })
}

#[derive(Debug, Clone)]
pub struct AltSolution {
    pub grid: SpatialGrid,
    pub rows: Vec<AltRow>,
}

impl AltSolution {
    /// Diagonal traces K(x,x) and Kbar(x,x).
    pub fn diagonals(&self) -> (Vec<C64>, Vec<C64>) {
        (self.rows.iter().map(|r| r.k[0]).collect(), self.rows.iter().map(|r| r.k_bar[0]).collect())
    }

    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

pub fn alt_solution(kernel: &AltKernel, cfg: &NystromConfig) -> Result<AltSolution> {
    let rows = kernel
        .grid
        .points()
        .into_iter()
        .map(|x| solve_alt(kernel, x, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(AltSolution { grid: kernel.grid, rows })
}

#[derive(Debug, Clone)]
pub struct AltRecovery {
    pub potentials: PotentialPair,
    /// Set when the grid is too short for the five-point stencil.
    pub stencil_fallback: bool,
}

/// q and r from the diagonal traces; `phase` is e^{i mu / 2}.
pub fn recover_qr_alt(solution: &AltSolution, phase: C64, decay_tol: f64) -> Result<AltRecovery> {
    if solution.rows.len() != solution.grid.len() {
        return Err(Error::GridMismatch("solution rows do not cover the grid".into()));
    }
    let (k, k_bar) = solution.diagonals();
    let h = solution.grid.h();
    let e_mu = phase * phase;
    let q: Vec<C64> = derivative(&k, h).into_iter().map(|d| e_mu * d).collect();
    let r: Vec<C64> = derivative(&k_bar, h).into_iter().map(|d| d / e_mu).collect();
    Ok(AltRecovery {
        potentials: PotentialPair::with_decay_tol(solution.grid, q, r, Variant::EnergyDependent, decay_tol)?,
        stencil_fallback: solution.grid.len() < 5,
    })
}

#[derive(Debug, Clone)]
pub struct AlternateInversion {
    pub potentials: PotentialPair,
    pub phase: PhaseEstimate,
    pub derivative_residual: f64,
    pub max_residual: f64,
    pub stencil_fallback: bool,
}

/// The whole alternate pipeline; the phase comes from the same estimate as `inverse::invert`.
pub fn invert_alternate(data: &EnergyDependentData, cfg: &crate::inverse::InversionConfig) -> Result<AlternateInversion> {
    data.check().map_err(Error::at_step('a', "recover phase"))?;
    let phase = recover_phase(&data.scattering, cfg.phase_tol).map_err(Error::at_step('a', "recover phase"))?;
    let aux = build_auxiliary_data(data, phase.phase).map_err(Error::at_step('b', "auxiliary data"))?;
    let kernel = build_alt_kernel(&aux, cfg.grid, &cfg.kernel).map_err(Error::at_step('c', "G kernels"))?;
    let sol = alt_solution(&kernel, &cfg.nystrom).map_err(Error::at_step('d', "alternate system"))?;
    let rec = recover_qr_alt(&sol, phase.phase, cfg.output_decay_tol).map_err(Error::at_step('e', "q and r"))?;
    Ok(AlternateInversion {
        potentials: rec.potentials,
        phase,
        derivative_residual: kernel.derivative_residual(),
        max_residual: sol.max_residual(),
        stencil_fallback: rec.stencil_fallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::compute_gauge;
    use crate::marchenko::build_kernel;
    use crate::model::{build_triplets, BoundState, BoundStateTriplets, SpectralAxis, SpectralGrid};

    fn zeros_kernel(grid: SpatialGrid, t_uv: &BoundStateTriplets, t_ps: &BoundStateTriplets) -> AltKernel {
        let sg = SpectralGrid::uniform(-1.0, 1.0, 4, SpectralAxis::Lambda).unwrap();
        let z = vec![C64::new(0.0, 0.0); 4];
        let cfg = KernelConfig::default();
        let uv = build_kernel(&z, &z, &sg, t_uv, grid, Variant::Uv, &cfg).unwrap();
        let ps = build_kernel(&z, &z, &sg, t_ps, grid, Variant::Ps, &cfg).unwrap();
        AltKernel::from_kernels(uv, ps).unwrap()
    }

    #[test]
    fn zero_energy_trivial_cases() {
        let g = SpatialGrid::new(-6.0, 6.0, 241).unwrap();
        let p = PotentialPair::zeros(g, Variant::EnergyDependent);
        let z = zero_energy_jost(&p, &compute_gauge(&p).unwrap()).unwrap();
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        assert!(z.psi_uv.iter().all(|v| *v == [o, l]));
        assert!(z.psi_bar_uv.iter().all(|v| *v == [l, o]));
        let p = PotentialPair::from_fn(g, Variant::EnergyDependent, |x| C64::new((-x * x).exp(), 0.0), |_| o).unwrap();
        let z = zero_energy_jost(&p, &compute_gauge(&p).unwrap()).unwrap();
        let tail = tail_integral(&p.first, g.h());
        for k in 0..g.len() {
            assert!((z.psi_uv[k][0] + tail[k]).norm() < 1e-15);
            assert_eq!(z.psi_uv[k][1], l);
        }
    }

    #[test]
    fn one_state_tail_is_exponential() {
        let grid = SpatialGrid::new(0.0, 12.0, 121).unwrap();
        let t = build_triplets(&[BoundState::simple(I, C64::new(2.0, 0.0))], &[]).unwrap();
        let k = zeros_kernel(grid, &t, &t);
        for m in 0..k.uv.len() {
            let s = k.uv.s(m);
            assert!((k.g_uv[m] - 2.0 * (-s).exp()).norm() < 1e-14 * (1.0 + (-s).exp()));
        }
        assert!(k.derivative_residual() < 1e-4);
    }

    #[test]
    fn homogeneous_cases_vanish() {
        let grid = SpatialGrid::new(-1.0, 10.0, 111).unwrap();
        let k = zeros_kernel(grid, &BoundStateTriplets::empty(), &BoundStateTriplets::empty());
        let row = solve_alt(&k, 0.0, &NystromConfig::default()).unwrap();
        assert!(row.k.iter().chain(&row.k_bar).all(|z| z.norm() == 0.0));
        // only G_uv and G_ps nonzero: both equations are homogeneous
        let t = build_triplets(&[BoundState::simple(I, C64::new(2.0, 0.0))], &[]).unwrap();
        let k = zeros_kernel(grid, &t, &BoundStateTriplets::empty());
        let row = solve_alt(&k, 0.0, &NystromConfig::default()).unwrap();
        assert!(row.k.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn synthetic_trace() {
        let grid = SpatialGrid::new(0.0, 4.0, 81).unwrap();
        let rows = grid
            .points()
            .into_iter()
            .map(|x| AltRow {
                x,
                y: vec![x],
                k: vec![C64::new((-x).exp(), 0.0)],
                k_bar: vec![C64::new(0.0, 0.0)],
                residual: 0.0,
            })
            .collect();
        let sol = AltSolution { grid, rows };
        let rec = recover_qr_alt(&sol, C64::new(1.0, 0.0), 10.0).unwrap();
        for (k, x) in grid.points().into_iter().enumerate() {
            assert!((rec.potentials.first[k] + (-x).exp()).norm() < 1e-5);
        }
        assert!(!rec.stencil_fallback);
    }
}
