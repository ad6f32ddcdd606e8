//! Marchenko kernels and the coupled Marchenko equations of the (u, v) and (p, s) systems.
//!
//! With `Omega` and `Omegabar` the kernels, the unknowns satisfy, for y >= x,
//!
//! ```text
//! Kbar1(x,y) + int_x^inf K1(x,z) Omega(z+y) dz = 0
//! K1(x,y) + Omegabar(x+y) + int_x^inf Kbar1(x,z) Omegabar(z+y) dz = 0
//! Kbar2(x,y) + Omega(x+y) + int_x^inf K2(x,z) Omega(z+y) dz = 0
//! K2(x,y) + int_x^inf Kbar2(x,z) Omegabar(z+y) dz = 0
//! ```
//!
//! and the potentials follow from the diagonal: `u = -2 K1(x,x)`, `v = -2 Kbar2(x,x)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{BoundStateTriplets, PotentialPair, ScatteringMatrixData, SpatialGrid, SpectralAxis, SpectralGrid, Variant};
use crate::numerics::{gregory_weights, simpson_weights, solve_dense, I};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    /// Largest allowed |Omega(s)| / max |Omega| for s >= 2 x_max.
    pub decay_tol: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { decay_tol: 1e-6 }
    }
}

/// Omega and Omegabar on the lattice `s = 2 x_min + m h`, which covers every `z + y`
/// needed by rows of the x-grid.
#[derive(Debug, Clone)]
pub struct MarchenkoKernel {
    pub grid: SpatialGrid,
    pub variant: Variant,
    pub triplets: BoundStateTriplets,
    /// Fourier parts alone.
    pub omega_cont: Vec<C64>,
    pub omega_bar_cont: Vec<C64>,
    omega: Vec<C64>,
    omega_bar: Vec<C64>,
    support: f64,
}

impl MarchenkoKernel {
    pub fn s(&self, m: usize) -> f64 {
        2.0 * self.grid.x_min() + m as f64 * self.grid.h()
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn omega(&self) -> &[C64] {
        &self.omega
    }

    pub fn omega_bar(&self) -> &[C64] {
        &self.omega_bar
    }

    /// Last lattice point where either kernel is still significant.
    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn is_zero(&self) -> bool {
        self.omega.iter().chain(&self.omega_bar).all(|z| z.norm() == 0.0)
    }
}

/// `(1/2pi) int R(lambda) e^{i sign lambda s} dlambda` by the trapezoid rule on the given grid.
pub fn fourier_synthesis(values: &[C64], lambdas: &[f64], s: &[f64], sign: f64) -> Vec<C64> {
    let n = lambdas.len();
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let d = 0.5 * (lambdas[k + 1] - lambdas[k]);
        w[k] += d;
        w[k + 1] += d;
    }
    let active: Vec<(f64, C64)> = (0..n)
        .filter(|&k| values[k].norm() != 0.0)
        .map(|k| (lambdas[k], values[k] * w[k] / (2.0 * PI)))
        .collect();
    s.iter()
        .map(|&sv| active.iter().map(|&(l, c)| c * (sign * I * l * sv).exp()).sum())
        .collect()
}

/// Kernels from right reflection data and bound-state triplets of a (u, v) or (p, s) system.
pub fn build_kernel(
    r: &[C64],
    r_bar: &[C64],
    spectral: &SpectralGrid,
    triplets: &BoundStateTriplets,
    grid: SpatialGrid,
    variant: Variant,
    cfg: &KernelConfig,
) -> Result<MarchenkoKernel> {
    if variant == Variant::EnergyDependent {
        return Err(Error::Invalid("Marchenko kernels need (u, v) or (p, s) data".into()));
    }
    if spectral.axis() != SpectralAxis::Lambda {
        return Err(Error::Invalid("reflection data must be sampled on the lambda axis".into()));
    }
    if r.len() != spectral.len() || r_bar.len() != spectral.len() {
        return Err(Error::GridMismatch(format!(
            "{} and {} reflection samples on a {}-point grid",
            r.len(),
            r_bar.len(),
            spectral.len()
        )));
    }
    if let Some(k) = r.iter().chain(r_bar).position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Invalid(format!("non-finite reflection sample {}", k % spectral.len())));
    }
    if !(cfg.decay_tol > 0.0) {
        return Err(Error::Invalid("kernel decay tolerance must be positive".into()));
    }
    let n = grid.len();
    let count = 4 * (n - 1) + 1;
    let s: Vec<f64> = (0..count).map(|m| 2.0 * grid.x_min() + m as f64 * grid.h()).collect();
    let lambdas = spectral.values();
    let reflectionless = r.iter().chain(r_bar).all(|z| z.norm() == 0.0);
    let (omega_cont, omega_bar_cont) = if reflectionless {
        (vec![C64::new(0.0, 0.0); count], vec![C64::new(0.0, 0.0); count])
    } else {
        let y_max = s[0].abs().max(s[count - 1].abs());
        let spacing = lambdas.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        if spacing > PI / y_max * (1.0 + 1e-12) {
            return Err(Error::Nyquist { spacing, y_max });
        }
        (fourier_synthesis(r, lambdas, &s, 1.0), fourier_synthesis(r_bar, lambdas, &s, -1.0))
    };
    let omega: Vec<C64> = s.iter().zip(&omega_cont).map(|(&sv, c)| c + triplets.kernel(sv)).collect();
    let omega_bar: Vec<C64> = s.iter().zip(&omega_bar_cont).map(|(&sv, c)| c + triplets.kernel_bar(sv)).collect();

    let peak = omega.iter().chain(&omega_bar).map(|z| z.norm()).fold(0.0, f64::max);
    let mut support = s[0];
    if peak > 0.0 {
        let edge = 2.0 * grid.x_max() - 1e-9 * grid.h();
        for m in 0..count {
            let mag = omega[m].norm().max(omega_bar[m].norm());
            if s[m] >= edge && mag > cfg.decay_tol * peak {
                return Err(Error::KernelDecay {
                    s: s[m],
                    ratio: mag / peak,
                });
            }
            if mag > 1e-10 * peak {
                support = s[m];
            }
        }
    }
    Ok(MarchenkoKernel {
        grid,
        variant,
        triplets: triplets.clone(),
        omega_cont,
        omega_bar_cont,
        omega,
        omega_bar,
        support,
    })
}

/// Kernel from a scattering data set of a (u, v) or (p, s) system.
pub fn build_kernel_from_data(
    data: &ScatteringMatrixData,
    triplets: &BoundStateTriplets,
    grid: SpatialGrid,
    cfg: &KernelConfig,
) -> Result<MarchenkoKernel> {
    build_kernel(&data.r, &data.r_bar, &data.grid, triplets, grid, data.variant, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NystromRule {
    /// Trapezoid with seventh-order Gregory end corrections.
    #[default]
    Gregory,
    /// Composite Simpson, 3/8 rule on the last three panels for odd panel counts.
    Simpson,
}

impl NystromRule {
    pub fn weights(self, n_intervals: usize, h: f64) -> Vec<f64> {
        if n_intervals == 0 {
            return vec![0.0];
        }
        match self {
            NystromRule::Gregory => gregory_weights(n_intervals, h),
            NystromRule::Simpson => simpson_weights(n_intervals, h),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NystromConfig {
    pub rule: NystromRule,
    /// Relative residual of the discretized equations above which a row is rejected.
    pub residual_tol: f64,
    pub max_cond: f64,
}

impl Default for NystromConfig {
    fn default() -> Self {
        NystromConfig {
            rule: NystromRule::Gregory,
            residual_tol: 1e-10,
            max_cond: 1e13,
        }
    }
}

/// The four kernel entries at one x, sampled for y >= x.
#[derive(Debug, Clone, PartialEq)]
pub struct MarchenkoRow {
    pub x: f64,
    pub y: Vec<f64>,
    pub k1: Vec<C64>,
    pub k1_bar: Vec<C64>,
    pub k2: Vec<C64>,
    pub k2_bar: Vec<C64>,
    pub residual: f64,
}

impl MarchenkoRow {
    fn zero(x: f64, y: Vec<f64>) -> Self {
        let z = vec![C64::new(0.0, 0.0); y.len()];
        MarchenkoRow {
            x,
            y,
            k1: z.clone(),
            k1_bar: z.clone(),
            k2: z.clone(),
            k2_bar: z,
            residual: 0.0,
        }
    }
}

fn grid_index(grid: &SpatialGrid, x: f64) -> Result<usize> {
    let pos = (x - grid.x_min()) / grid.h();
    let i = pos.round();
    if !(i >= 0.0 && i < grid.len() as f64) || (pos - i).abs() > 1e-6 {
        return Err(Error::GridMismatch(format!("x = {x} is not a point of the inversion grid")));
    }
    Ok(i as usize)
}

/// Solves the Marchenko equations at one grid point by Nystrom discretization.
///
/// The y-range extends beyond x_max while `Omega(x + y)` is still significant, so rows near
/// x_min see the whole kernel.
pub fn nystrom_solve(kernel: &MarchenkoKernel, x: f64, cfg: &NystromConfig) -> Result<MarchenkoRow> {
    let grid = kernel.grid;
    let i = grid_index(&grid, x)?;
    let x = grid.x(i);
    let h = grid.h();
    let n_grid = grid.len();
    let reach = grid.x_max().max(kernel.support - x);
    let wanted = ((reach - x) / h - 1e-9).ceil().max(0.0) as usize;
    let n_int = wanted.min(2 * (n_grid - 1) - i);
    let y: Vec<f64> = (0..=n_int).map(|j| x + j as f64 * h).collect();
    if kernel.is_zero() {
        return Ok(MarchenkoRow::zero(x, y));
    }
    let n = n_int + 1;
    let w = cfg.rule.weights(n_int, h);
    let at = |v: &[C64], j: usize, k: usize| v[2 * i + j + k];
    let a = DMatrix::from_fn(n, n, |t, z| at(&kernel.omega, t, z) * w[z]);
    let a_bar = DMatrix::from_fn(n, n, |t, z| at(&kernel.omega_bar, t, z) * w[z]);
    let f = DVector::from_fn(n, |t, _| at(&kernel.omega, 0, t));
    let f_bar = DVector::from_fn(n, |t, _| at(&kernel.omega_bar, 0, t));
    let id = DMatrix::<C64>::identity(n, n);

    let k1 = solve_dense(&id - &a_bar * &a, &(-&f_bar), cfg.max_cond)?;
    let k1_bar = -(&a * &k1);
    let k2_bar = solve_dense(&id - &a * &a_bar, &(-&f), cfg.max_cond)?;
    let k2 = -(&a_bar * &k2_bar);

    let r1 = &k1 + &f_bar + &a_bar * &k1_bar;
    let r2 = &k2_bar + &f + &a * &k2;
    let scale = f.camax().max(f_bar.camax()).max(k1.camax()).max(k2_bar.camax()).max(f64::MIN_POSITIVE);
    let residual = r1.camax().max(r2.camax()) / scale;
    if !(residual <= cfg.residual_tol) {
        return Err(Error::Conditioning { cond: residual / f64::EPSILON });
    }
    Ok(MarchenkoRow {
        x,
        y,
        k1: k1.iter().copied().collect(),
        k1_bar: k1_bar.iter().copied().collect(),
        k2: k2.iter().copied().collect(),
        k2_bar: k2_bar.iter().copied().collect(),
        residual,
    })
}

/// Rows of the Marchenko solution on the whole x-grid.
#[derive(Debug, Clone)]
pub struct MarchenkoSolution {
    pub grid: SpatialGrid,
    pub variant: Variant,
    pub rows: Vec<MarchenkoRow>,
}

impl MarchenkoSolution {
    /// Diagonal values (K1, Kbar1, K2, Kbar2) at each x.
    pub fn diagonals(&self) -> [Vec<C64>; 4] {
        let pick = |f: fn(&MarchenkoRow) -> C64| self.rows.iter().map(f).collect::<Vec<_>>();
        [pick(|r| r.k1[0]), pick(|r| r.k1_bar[0]), pick(|r| r.k2[0]), pick(|r| r.k2_bar[0])]
    }

    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

pub fn nystrom_solution(kernel: &MarchenkoKernel, cfg: &NystromConfig) -> Result<MarchenkoSolution> {
    let rows = kernel
        .grid
        .points()
        .into_iter()
        .map(|x| nystrom_solve(kernel, x, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(MarchenkoSolution {
        grid: kernel.grid,
        variant: kernel.variant,
        rows,
    })
}

/// Solves `Ahat X + X Bhat = rhs` by a dense Kronecker solve.
fn sylvester(ahat: &DMatrix<C64>, bhat: &DMatrix<C64>, rhs: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let (p, q) = rhs.shape();
    let big = DMatrix::<C64>::identity(q, q).kronecker(ahat) + bhat.transpose().kronecker(&DMatrix::<C64>::identity(p, p));
    let v = DVector::from_column_slice(rhs.as_slice());
    let sol = solve_dense(big, &v, 1e14)?;
    Ok(DMatrix::from_column_slice(p, q, sol.as_slice()))
}

/// Gram-type matrices `P0 = int_0^inf e^{-Abar z} Bbar C e^{-A z} dz` and
/// `Q0 = int_0^inf e^{-A z} B Cbar e^{-Abar z} dz`.
fn gram(t: &BoundStateTriplets) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let bc = t.b_bar() * t.c();
    let p0 = sylvester(t.a_bar(), t.a(), &bc)?;
    let bc = t.b() * t.c_bar();
    let q0 = sylvester(t.a(), t.a_bar(), &bc)?;
    Ok((p0, q0))
}

fn invert(m: DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = m.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let mut out = DMatrix::zeros(n, n);
    for c in 0..n {
        let col = solve_dense(m.clone(), &id.column(c).into_owned(), 1e14)?;
        out.set_column(c, &col);
    }
    Ok(out)
}

/// Closed-form solution for reflectionless kernels `C e^{-Ay} B` and `Cbar e^{-Abar y} Bbar`.
pub fn separable_solve(triplets: &BoundStateTriplets, x: f64, y: &[f64]) -> Result<MarchenkoRow> {
    let (n, nb) = (triplets.n(), triplets.n_bar());
    if n == 0 && nb == 0 {
        return Ok(MarchenkoRow::zero(x, y.to_vec()));
    }
    let (p0, q0) = gram(triplets)?;
    let ea = triplets.exp_neg_a(x);
    let eab = triplets.exp_neg_a_bar(x);
    let p = &eab * &p0 * &ea;
    let q = &ea * &q0 * &eab;
    let alpha = -(triplets.c_bar() * &eab) * invert(DMatrix::identity(nb, nb) - &p * &q)?;
    let beta = -(&alpha * &p);
    let gamma = -(triplets.c() * &ea) * invert(DMatrix::identity(n, n) - &q * &p)?;
    let delta = -(&gamma * &q);
    let mut row = MarchenkoRow::zero(x, y.to_vec());
    for (j, &yj) in y.iter().enumerate() {
        let ey = triplets.exp_neg_a(yj) * triplets.b();
        let eby = triplets.exp_neg_a_bar(yj) * triplets.b_bar();
        let dot = |a: &DMatrix<C64>, v: &DVector<C64>| (a * v).get(0).copied().unwrap_or_default();
        row.k1[j] = dot(&alpha, &eby);
        row.k1_bar[j] = dot(&beta, &ey);
        row.k2_bar[j] = dot(&gamma, &ey);
        row.k2[j] = dot(&delta, &eby);
    }
    Ok(row)
}

/// Closed-form solution on a grid, with y running from x to x_max.
pub fn separable_solution(triplets: &BoundStateTriplets, grid: SpatialGrid, variant: Variant) -> Result<MarchenkoSolution> {
    let pts = grid.points();
    let rows = (0..pts.len())
        .map(|i| separable_solve(triplets, pts[i], &pts[i..]))
        .collect::<Result<Vec<_>>>()?;
    Ok(MarchenkoSolution { grid, variant, rows })
}

/// Potentials read off the diagonal of a Marchenko solution.
#[derive(Debug, Clone)]
pub struct RecoveredPotentials {
    /// (u, v) or (p, s), following the variant of the solution.
    pub potentials: PotentialPair,
    /// `int_x^inf u v`, as `2 Kbar1(x,x)`.
    pub product_integral: Vec<C64>,
    /// `max |Kbar1(x,x) - K2(x,x)|`.
    pub diagonal_residual: f64,
    pub warning: Option<String>,
}

/// Diagonal residual above which `recover_potentials` attaches a warning.
pub const DIAGONAL_TOL: f64 = 1e-6;

pub fn recover_potentials(solution: &MarchenkoSolution, decay_tol: f64) -> Result<RecoveredPotentials> {
    if solution.rows.len() != solution.grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} rows on a {}-point grid",
            solution.rows.len(),
            solution.grid.len()
        )));
    }
    let [k1, k1_bar, k2, k2_bar] = solution.diagonals();
    let first: Vec<C64> = k1.iter().map(|z| -2.0 * z).collect();
    let second: Vec<C64> = k2_bar.iter().map(|z| -2.0 * z).collect();
    let product_integral: Vec<C64> = k1_bar.iter().map(|z| 2.0 * z).collect();
    let diagonal_residual = k1_bar.iter().zip(&k2).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let warning = (diagonal_residual > DIAGONAL_TOL)
        .then(|| format!("diagonal identity residual {diagonal_residual:.3e} exceeds {DIAGONAL_TOL:.0e}"));
    let potentials = PotentialPair::with_decay_tol(solution.grid, first, second, solution.variant, decay_tol)?;
    Ok(RecoveredPotentials {
        potentials,
        product_integral,
        diagonal_residual,
        warning,
    })
}
