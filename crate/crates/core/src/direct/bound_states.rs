use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{denominator, DirectConfig, JostSolver};
use crate::error::{Error, Result};
use crate::model::{JostKind, PotentialPair};
use crate::numerics::I;

/// Rectangle in the lambda plane scanned for zeros of the transmission denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundStateSearchRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    /// Initial contour samples; refined adaptively where the phase turns quickly.
    pub samples: usize,
}

impl BoundStateSearchRegion {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64, samples: usize) -> Result<Self> {
        let r = BoundStateSearchRegion {
            re_min,
            re_max,
            im_min,
            im_max,
            samples,
        };
        r.check()?;
        Ok(r)
    }

    pub fn default_upper() -> Self {
        BoundStateSearchRegion {
            re_min: -10.0,
            re_max: 10.0,
            im_min: 1e-3,
            im_max: 10.0,
            samples: 256,
        }
    }

    /// Mirror image of the default region, for zeros of 1/Tbar.
    pub fn default_lower() -> Self {
        BoundStateSearchRegion {
            re_min: -10.0,
            re_max: 10.0,
            im_min: -10.0,
            im_max: -1e-3,
            samples: 256,
        }
    }

    pub fn is_upper(&self) -> bool {
        self.im_min > 0.0
    }

    fn check(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max].iter().all(|v| v.is_finite());
        if !finite || !(self.re_min < self.re_max) || !(self.im_min < self.im_max) {
            return Err(Error::Invalid(format!("degenerate search region {self:?}")));
        }
        if !(self.im_min > 0.0 || self.im_max < 0.0) {
            return Err(Error::Invalid("search region must lie in one open half plane".into()));
        }
        if self.samples < 64 {
            return Err(Error::Invalid(format!("need at least 64 contour samples, got {}", self.samples)));
        }
        Ok(())
    }

    fn contains(&self, z: C64) -> bool {
        z.re > self.re_min && z.re < self.re_max && z.im > self.im_min && z.im < self.im_max
    }

    /// Counter-clockwise perimeter samples, corners included.
    fn perimeter(&self) -> Vec<C64> {
        let w = self.re_max - self.re_min;
        let h = self.im_max - self.im_min;
        let corners = [
            C64::new(self.re_min, self.im_min),
            C64::new(self.re_max, self.im_min),
            C64::new(self.re_max, self.im_max),
            C64::new(self.re_min, self.im_max),
        ];
        let lens = [w, h, w, h];
        let total = 2.0 * (w + h);
        let mut pts = Vec::with_capacity(self.samples + 4);
        for side in 0..4 {
            let a = corners[side];
            let b = corners[(side + 1) % 4];
            let k = ((self.samples as f64 * lens[side] / total).ceil() as usize).max(1);
            for j in 0..k {
                pts.push(a + (b - a) * (j as f64 / k as f64));
            }
        }
        pts
    }
}

fn phase_step(a: C64, b: C64) -> f64 {
    (b / a).arg()
}

/// Contour samples refined until consecutive phase steps stay below pi/4.
fn refined_contour<F: Fn(C64) -> Result<C64>>(region: &BoundStateSearchRegion, f: &F) -> Result<Vec<(C64, C64)>> {
    let base = region.perimeter();
    let mut vals: Vec<(C64, C64)> = base.iter().map(|&z| f(z).map(|v| (z, v))).collect::<Result<_>>()?;
    let scale = region.re_max - region.re_min + region.im_max - region.im_min;
    let mut out: Vec<(C64, C64)> = Vec::with_capacity(vals.len());
    vals.push(vals[0]);
    let mut stack: Vec<((C64, C64), (C64, C64), u32)> = Vec::new();
    for w in vals.windows(2) {
        stack.push((w[0], w[1], 0));
        while let Some((a, b, depth)) = stack.pop() {
            if phase_step(a.1, b.1).abs() <= PI / 4.0 {
                out.push(a);
                continue;
            }
            if depth > 30 || (b.0 - a.0).norm() < 1e-9 * scale {
                let min = a.1.norm().min(b.1.norm());
                return Err(Error::RegionRefinement { min });
            }
            let zm = 0.5 * (a.0 + b.0);
            let m = (zm, f(zm)?);
            // process the first half next
            stack.push((m, b, depth + 1));
            stack.push((a, m, depth + 1));
        }
    }
    Ok(out)
}

fn winding(samples: &[(C64, C64)]) -> f64 {
    let n = samples.len();
    (0..n).map(|k| phase_step(samples[k].1, samples[(k + 1) % n].1)).sum::<f64>() / (2.0 * PI)
}

/// Local winding number of `f` on a circle.
fn local_winding<F: Fn(C64) -> Result<C64>>(f: &F, center: C64, radius: f64, m: usize) -> Result<i64> {
    let vals: Vec<(C64, C64)> = (0..m)
        .map(|k| {
            let z = center + radius * C64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64);
            f(z).map(|v| (z, v))
        })
        .collect::<Result<_>>()?;
    Ok(winding(&vals).round() as i64)
}

/// Power sums of the enclosed zeros from the contour samples, then the zeros themselves.
fn initial_guesses(samples: &[(C64, C64)], count: usize) -> Vec<C64> {
    let n = samples.len();
    let mut s = vec![C64::new(0.0, 0.0); count + 1];
    for k in 0..n {
        let (za, fa) = samples[k];
        let (zb, fb) = samples[(k + 1) % n];
        let dlog = C64::new((fb.norm() / fa.norm()).ln(), phase_step(fa, fb));
        let zm = 0.5 * (za + zb);
        let mut p = C64::new(1.0, 0.0);
        for sp in s.iter_mut().skip(1) {
            p *= zm;
            *sp += p * dlog;
        }
    }
    for sp in s.iter_mut() {
        *sp /= 2.0 * PI * I;
    }
    if count == 1 {
        return vec![s[1]];
    }
    // elementary symmetric polynomials by Newton's identities
    let mut e = vec![C64::new(0.0, 0.0); count + 1];
    e[0] = C64::new(1.0, 0.0);
    for k in 1..=count {
        let mut acc = C64::new(0.0, 0.0);
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * e[k - i] * s[i];
        }
        e[k] = acc / k as f64;
    }
    // companion matrix of z^n - e1 z^(n-1) + e2 z^(n-2) - ...
    let mut comp = DMatrix::<C64>::zeros(count, count);
    for k in 1..=count {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        comp[(0, k - 1)] = sign * e[k];
    }
    for i in 1..count {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    match comp.clone().schur().eigenvalues() {
        Some(ev) => ev.iter().copied().collect(),
        None => vec![s[1] / count as f64; count],
    }
}

fn newton<F: Fn(C64) -> Result<C64>>(f: &F, z0: C64) -> Result<(C64, f64)> {
    let mut z = z0;
    let mut fz = f(z)?;
    for _ in 0..200 {
        if fz.norm() < 1e-10 {
            return Ok((z, fz.norm()));
        }
        let d = 1e-6 * z.norm().max(1.0);
        let fp = (f(z + d)? - f(z - d)?) / (2.0 * d);
        if fp.norm() == 0.0 || !fp.re.is_finite() {
            break;
        }
        z -= fz / fp;
        fz = f(z)?;
    }
    if fz.norm() < 1e-10 {
        Ok((z, fz.norm()))
    } else {
        Err(Error::NewtonFailed {
            last: z,
            residual: fz.norm(),
        })
    }
}

/// Zeros of 1/T (upper region) or 1/Tbar (lower region) with multiplicities.
pub fn find_bound_states(pot: &PotentialPair, region: &BoundStateSearchRegion, cfg: &DirectConfig) -> Result<Vec<(C64, usize)>> {
    region.check()?;
    let solver = JostSolver::new(pot, cfg)?;
    let f = |z: C64| denominator(&solver, z);
    let contour = refined_contour(region, &f)?;
    let min = contour.iter().map(|(_, v)| v.norm()).fold(f64::INFINITY, f64::min);
    if min < 1e-8 {
        return Err(Error::RegionRefinement { min });
    }
    let w = winding(&contour);
    let count = w.round();
    if (w - count).abs() > 0.1 || count < 0.0 {
        return Err(Error::RegionRefinement { min });
    }
    let count = count as usize;
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut roots: Vec<C64> = Vec::new();
    for g in initial_guesses(&contour, count) {
        let (z, _) = newton(&f, g)?;
        if !region.contains(z) {
            return Err(Error::NewtonFailed { last: z, residual: f(z)?.norm() });
        }
        if roots.iter().all(|r| (r - z).norm() > 1e-6 * (1.0 + z.norm())) {
            roots.push(z);
        }
    }
    let mut out = Vec::new();
    for (i, &z) in roots.iter().enumerate() {
        let mut radius = 1e-2 * (1.0 + z.norm());
        for (j, &o) in roots.iter().enumerate() {
            if i != j {
                radius = radius.min(0.4 * (z - o).norm());
            }
        }
        radius = radius.min(0.5 * z.im.abs());
        let m = local_winding(&f, z, radius, 64)?;
        if m < 1 {
            return Err(Error::WindingMismatch { winding: count as i64, found: 0 });
        }
        out.push((z, m as usize));
    }
    let found: usize = out.iter().map(|(_, m)| m).sum();
    if found != count {
        return Err(Error::WindingMismatch {
            winding: count as i64,
            found,
        });
    }
    out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    Ok(out)
}

/// Norming constant of a simple bound state and the quantities it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormingConstant {
    pub lambda: C64,
    /// c for an upper-plane state, cbar for a lower-plane state.
    pub value: C64,
    /// gamma with phi = gamma psi (upper) or phibar = gamma psibar (lower).
    pub proportionality: C64,
    /// Residue of T (upper) or Tbar (lower) at lambda.
    pub residue: C64,
    /// Relative least-squares residual of the proportionality fit.
    pub residual: f64,
}

/// Norming constant of a simple bound state: `c = -i Res(T) gamma` in the upper half plane and
/// `cbar = i Res(Tbar) gammabar` in the lower, the convention under which the discrete kernel
/// terms `c e^{i lambda y}` and `cbar e^{-i lambdabar y}` reproduce the potential.
pub fn simple_norming_constants(
    pot: &PotentialPair,
    lambda: C64,
    multiplicity: usize,
    cfg: &DirectConfig,
) -> Result<NormingConstant> {
    if multiplicity != 1 {
        return Err(Error::UnsupportedMultiplicity(multiplicity));
    }
    if lambda.im == 0.0 {
        return Err(Error::Invalid("bound states lie off the real axis".into()));
    }
    let solver = JostSolver::new(pot, cfg)?;
    let upper = lambda.im > 0.0;
    let spectral = solver.spectral_for_lambda(lambda);
    let (ka, kb) = if upper {
        (JostKind::Phi, JostKind::Psi)
    } else {
        (JostKind::PhiBar, JostKind::PsiBar)
    };
    let a = solver.physical(spectral, ka)?;
    let b = solver.physical(spectral, kb)?;
    let mut num = C64::new(0.0, 0.0);
    let mut den = 0.0;
    let mut norm_a = 0.0;
    for (u, v) in a.iter().zip(&b) {
        num += v[0].conj() * u[0] + v[1].conj() * u[1];
        den += v[0].norm_sqr() + v[1].norm_sqr();
        norm_a += u[0].norm_sqr() + u[1].norm_sqr();
    }
    let gamma = num / den;
    let res: f64 = a
        .iter()
        .zip(&b)
        .map(|(u, v)| (u[0] - gamma * v[0]).norm_sqr() + (u[1] - gamma * v[1]).norm_sqr())
        .sum();
    let residual = (res / norm_a).sqrt();
    if !(residual < cfg.proportionality_tol) {
        return Err(Error::NotBoundState { residual });
    }
    // residue by the trapezoid rule on a small circle
    let radius = (1e-2 * lambda.norm().max(1.0)).min(0.5 * lambda.im.abs());
    let m = 64;
    let mut residue = C64::new(0.0, 0.0);
    for k in 0..m {
        let e = C64::from_polar(radius, 2.0 * PI * k as f64 / m as f64);
        residue += e / denominator(&solver, lambda + e)?;
    }
    residue /= m as f64;
    let value = if upper { -I * residue * gamma } else { I * residue * gamma };
    Ok(NormingConstant {
        lambda,
        value,
        proportionality: gamma,
        residue,
        residual,
    })
}
