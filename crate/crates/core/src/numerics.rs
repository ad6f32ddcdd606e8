//! Quadrature, finite differences, interpolation and dense solves on uniform grids.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Principal square root with the cut on the negative real axis, Im >= 0 on the cut.
pub fn principal_sqrt(z: C64) -> C64 {
    if z.im == 0.0 {
        if z.re >= 0.0 {
            C64::new(z.re.sqrt(), 0.0)
        } else {
            C64::new(0.0, (-z.re).sqrt())
        }
    } else {
        z.sqrt()
    }
}

/// Composite Simpson weights on `n_intervals + 1` nodes.
///
/// Odd interval counts close with a 3/8 panel; a single interval falls back to the trapezoid.
pub fn simpson_weights(n_intervals: usize, h: f64) -> Vec<f64> {
    let n = n_intervals;
    let mut w = vec![0.0; n + 1];
    match n {
        0 => {}
        1 => {
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
        }
        3 => {
            for (wi, c) in w.iter_mut().zip([3.0, 9.0, 9.0, 3.0]) {
                *wi = c * h / 8.0;
            }
        }
        _ if n % 2 == 0 => {
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                } * h
                    / 3.0;
            }
        }
        _ => {
            let m = n - 3;
            let head = simpson_weights(m, h);
            w[..=m].copy_from_slice(&head);
            for (k, c) in [3.0, 9.0, 9.0, 3.0].into_iter().enumerate() {
                w[m + k] += c * h / 8.0;
            }
        }
    }
    w
}

const GREGORY: [f64; 9] = [
    1.0 / 2.0,
    1.0 / 12.0,
    1.0 / 24.0,
    19.0 / 720.0,
    3.0 / 160.0,
    863.0 / 60480.0,
    275.0 / 24192.0,
    33953.0 / 3628800.0,
    8183.0 / 1036800.0,
];

pub const GREGORY_ORDER: usize = 7;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Corrections to the unit interior weight at the left end, for end differences up to order m-1.
fn gregory_end_corrections(m: usize) -> Vec<f64> {
    let mut w = vec![0.0; m + 1];
    w[0] = -0.5;
    for k in 1..m {
        let sgn = if k % 2 == 1 { 1.0 } else { -1.0 };
        for (j, wj) in w.iter_mut().enumerate().take(k + 1) {
            let alt = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
            *wj += sgn * GREGORY[k] * binomial(k, j) * alt;
        }
    }
    w
}

/// Trapezoid weights with Gregory end corrections of order `GREGORY_ORDER`.
///
/// Falls back to Simpson when the node count is too small for non-overlapping end stencils.
pub fn gregory_weights(n_intervals: usize, h: f64) -> Vec<f64> {
    let m = GREGORY_ORDER;
    let n = n_intervals + 1;
    if n < 2 * m + 2 {
        return simpson_weights(n_intervals, h);
    }
    let c = gregory_end_corrections(m);
    let mut w = vec![1.0; n];
    for (k, ck) in c.iter().enumerate() {
        w[k] += ck;
        w[n - 1 - k] += ck;
    }
    w.iter_mut().for_each(|wi| *wi *= h);
    w
}

/// Running integral from the left end, fourth order.
///
/// Interior cells use the cubic through the four surrounding samples, end cells one-sided
/// stencils. Fewer than four samples fall back to the trapezoid rule.
pub fn cumulative_integral(f: &[C64], h: f64) -> Vec<C64> {
    let n = f.len();
    let mut c = vec![C64::new(0.0, 0.0); n];
    if n < 4 {
        for k in 1..n {
            c[k] = c[k - 1] + (f[k - 1] + f[k]) * (0.5 * h);
        }
        return c;
    }
    let s = h / 24.0;
    for k in 0..n - 1 {
        let seg = if k == 0 {
            f[0] * 9.0 + f[1] * 19.0 - f[2] * 5.0 + f[3]
        } else if k == n - 2 {
            f[n - 1] * 9.0 + f[n - 2] * 19.0 - f[n - 3] * 5.0 + f[n - 4]
        } else {
            -f[k - 1] + f[k] * 13.0 + f[k + 1] * 13.0 - f[k + 2]
        };
        c[k + 1] = c[k] + seg * s;
    }
    c
}

/// Integral from each sample to the right end, with the same rule as `cumulative_integral`.
pub fn tail_integral(f: &[C64], h: f64) -> Vec<C64> {
    let rev: Vec<C64> = f.iter().rev().copied().collect();
    let mut t = cumulative_integral(&rev, h);
    t.reverse();
    t
}

/// Derivative weights of the Lagrange interpolant through `nodes`, evaluated at `x0`.
pub fn derivative_weights(nodes: &[f64], x0: f64) -> Vec<f64> {
    let m = nodes.len();
    let mut w = vec![0.0; m];
    for j in 0..m {
        let mut total = 0.0;
        for k in 0..m {
            if k == j {
                continue;
            }
            let mut p = 1.0 / (nodes[j] - nodes[k]);
            for l in 0..m {
                if l != j && l != k {
                    p *= (x0 - nodes[l]) / (nodes[j] - nodes[l]);
                }
            }
            total += p;
        }
        w[j] = total;
    }
    w
}

/// Lagrange interpolation weights through `nodes` at `x0`.
pub fn lagrange_weights(nodes: &[f64], x0: f64) -> Vec<f64> {
    let m = nodes.len();
    (0..m)
        .map(|a| {
            (0..m)
                .filter(|&b| b != a)
                .map(|b| (x0 - nodes[b]) / (nodes[a] - nodes[b]))
                .product()
        })
        .collect()
}

/// Fourth-order derivative: central 5-point stencil inside, one-sided 5-point at the ends.
///
/// Shorter arrays use the widest Lagrange stencil available.
pub fn derivative(f: &[C64], h: f64) -> Vec<C64> {
    let n = f.len();
    let mut d = vec![C64::new(0.0, 0.0); n];
    if n < 5 {
        if n < 2 {
            return d;
        }
        let nodes: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        for (i, di) in d.iter_mut().enumerate() {
            let w = derivative_weights(&nodes, nodes[i]);
            *di = w.iter().zip(f).map(|(wk, fk)| fk * *wk).sum();
        }
        return d;
    }
    let s = 1.0 / (12.0 * h);
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - f[i - 1] * 8.0 + f[i + 1] * 8.0 - f[i + 2]) * s;
    }
    for i in 0..2 {
        d[i] = (f[i] * -25.0 + f[i + 1] * 48.0 - f[i + 2] * 36.0 + f[i + 3] * 16.0
            - f[i + 4] * 3.0)
            * s;
        let j = n - 1 - i;
        d[j] = (f[j] * 25.0 - f[j - 1] * 48.0 + f[j - 2] * 36.0 - f[j - 3] * 16.0
            + f[j - 4] * 3.0)
            * s;
    }
    d
}

/// Dense differentiation matrix on `n` uniform nodes, 5-node Lagrange stencils (fewer if n < 5).
pub fn differentiation_matrix(n: usize, h: f64) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n, n);
    if n < 2 {
        return d;
    }
    let m = n.min(5);
    for i in 0..n {
        let i0 = i.saturating_sub(2).min(n - m);
        let nodes: Vec<f64> = (i0..i0 + m).map(|k| k as f64 * h).collect();
        let w = derivative_weights(&nodes, i as f64 * h);
        for (k, wk) in w.into_iter().enumerate() {
            d[(i, i0 + k)] = wk;
        }
    }
    d
}

/// Solves `m x = b` by LU and checks the pivot growth as a condition estimate.
pub fn solve_dense(m: DMatrix<C64>, b: &DVector<C64>, max_cond: f64) -> Result<DVector<C64>> {
    if m.nrows() == 0 {
        return Ok(DVector::zeros(0));
    }
    let lu = m.lu();
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for i in 0..u.nrows() {
        let p = u[(i, i)].norm();
        lo = lo.min(p);
        hi = hi.max(p);
    }
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond <= max_cond) {
        return Err(Error::Conditioning { cond });
    }
    lu.solve(b).ok_or(Error::Conditioning { cond })
}

pub fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
