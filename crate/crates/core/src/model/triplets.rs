use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::{into_result, Validate, Violation};
use crate::error::{Error, Result};
use crate::numerics::I;

/// A bound-state eigenvalue with its norming constants `c_0, ..., c_{m-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub lambda: C64,
    pub norming: Vec<C64>,
}

impl BoundState {
    pub fn simple(lambda: C64, c: C64) -> Self {
        BoundState {
            lambda,
            norming: vec![c],
        }
    }

    pub fn multiplicity(&self) -> usize {
        self.norming.len()
    }
}

/// Jordan-form triplets (A, B, C) for the upper half plane and (Abar, Bbar, Cbar) for the lower.
///
/// Blocks of A have diagonal -i*lambda_j and superdiagonal -1. Blocks of Abar have diagonal
/// +i*lambdabar_j and superdiagonal -1, so that both `C exp(-Ay) B` and `Cbar exp(-Abar y) Bbar`
/// decay as y grows.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateTriplets {
    states: Vec<BoundState>,
    barred: Vec<BoundState>,
    a: DMatrix<C64>,
    b: DVector<C64>,
    c: DMatrix<C64>,
    a_bar: DMatrix<C64>,
    b_bar: DVector<C64>,
    c_bar: DMatrix<C64>,
}

fn assemble_side(states: &[BoundState], diag: impl Fn(C64) -> C64) -> (DMatrix<C64>, DVector<C64>, DMatrix<C64>) {
    let n: usize = states.iter().map(|s| s.multiplicity()).sum();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    let mut c = DMatrix::zeros(1, n);
    let mut off = 0;
    for s in states {
        let m = s.multiplicity();
        for i in 0..m {
            a[(off + i, off + i)] = diag(s.lambda);
            if i + 1 < m {
                a[(off + i, off + i + 1)] = C64::new(-1.0, 0.0);
            }
            // highest-index constant first
            c[(0, off + i)] = s.norming[m - 1 - i];
        }
        if m > 0 {
            b[off + m - 1] = C64::new(1.0, 0.0);
        }
        off += m;
    }
    (a, b, c)
}

/// Builds and validates the triplets for the given bound states.
pub fn build_triplets(states: &[BoundState], barred: &[BoundState]) -> Result<BoundStateTriplets> {
    into_result(BoundStateTriplets::assemble(states.to_vec(), barred.to_vec()))
}

impl BoundStateTriplets {
    /// Assembles the block matrices without checking half-plane or count invariants.
    pub fn assemble(states: Vec<BoundState>, barred: Vec<BoundState>) -> Self {
        let (a, b, c) = assemble_side(&states, |l| -I * l);
        let (a_bar, b_bar, c_bar) = assemble_side(&barred, |l| I * l);
        BoundStateTriplets {
            states,
            barred,
            a,
            b,
            c,
            a_bar,
            b_bar,
            c_bar,
        }
    }

    pub fn empty() -> Self {
        Self::assemble(Vec::new(), Vec::new())
    }

    pub fn states(&self) -> &[BoundState] {
        &self.states
    }

    pub fn barred(&self) -> &[BoundState] {
        &self.barred
    }

    pub fn a(&self) -> &DMatrix<C64> {
        &self.a
    }
    pub fn b(&self) -> &DVector<C64> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<C64> {
        &self.c
    }
    pub fn a_bar(&self) -> &DMatrix<C64> {
        &self.a_bar
    }
    pub fn b_bar(&self) -> &DVector<C64> {
        &self.b_bar
    }
    pub fn c_bar(&self) -> &DMatrix<C64> {
        &self.c_bar
    }

    /// Total multiplicity in the upper half plane.
    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn n_bar(&self) -> usize {
        self.b_bar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty() && self.barred.is_empty()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.states.iter().map(|s| s.multiplicity()).collect()
    }

    pub fn multiplicities_bar(&self) -> Vec<usize> {
        self.barred.iter().map(|s| s.multiplicity()).collect()
    }

    /// `exp(-A y)` in closed form, block by block.
    pub fn exp_neg_a(&self, y: f64) -> DMatrix<C64> {
        block_exp(&self.states, y, |l| -I * l)
    }

    /// `exp(-Abar y)` in closed form.
    pub fn exp_neg_a_bar(&self, y: f64) -> DMatrix<C64> {
        block_exp(&self.barred, y, |l| I * l)
    }

    /// `C exp(-A y) B`.
    pub fn kernel(&self, y: f64) -> C64 {
        poly_exp_sum(&self.states, y, |l| -I * l)
    }

    /// `Cbar exp(-Abar y) Bbar`.
    pub fn kernel_bar(&self, y: f64) -> C64 {
        poly_exp_sum(&self.barred, y, |l| I * l)
    }

    /// `C A^{-1} exp(-A y) B`, the integral of `kernel` from y to infinity.
    pub fn kernel_tail(&self, y: f64) -> Result<C64> {
        tail_sum(&self.states, y, |l| -I * l)
    }

    /// `Cbar Abar^{-1} exp(-Abar y) Bbar`.
    pub fn kernel_bar_tail(&self, y: f64) -> Result<C64> {
        tail_sum(&self.barred, y, |l| I * l)
    }
}

fn block_exp(states: &[BoundState], y: f64, diag: impl Fn(C64) -> C64) -> DMatrix<C64> {
    let n: usize = states.iter().map(|s| s.multiplicity()).sum();
    let mut e = DMatrix::zeros(n, n);
    let mut off = 0;
    for s in states {
        let m = s.multiplicity();
        let base = (-diag(s.lambda) * y).exp();
        let mut term = 1.0;
        for k in 0..m {
            if k > 0 {
                term *= y / k as f64;
            }
            for i in 0..m - k {
                e[(off + i, off + i + k)] = base * term;
            }
        }
        off += m;
    }
    e
}

fn poly_exp_sum(states: &[BoundState], y: f64, diag: impl Fn(C64) -> C64) -> C64 {
    let mut total = C64::new(0.0, 0.0);
    for s in states {
        let base = (-diag(s.lambda) * y).exp();
        let mut term = 1.0;
        let mut acc = C64::new(0.0, 0.0);
        for (k, ck) in s.norming.iter().enumerate() {
            if k > 0 {
                term *= y / k as f64;
            }
            acc += ck * term;
        }
        total += acc * base;
    }
    total
}

fn tail_sum(states: &[BoundState], y: f64, diag: impl Fn(C64) -> C64) -> Result<C64> {
    let mut total = C64::new(0.0, 0.0);
    for s in states {
        let a = diag(s.lambda);
        if a.norm() < 1e-8 {
            return Err(Error::Conditioning { cond: 1.0 / a.norm() });
        }
        let m = s.multiplicity();
        let base = (-a * y).exp();
        // v = exp(-A_j y) B_j, entries y^(m-1-i)/(m-1-i)!
        let mut v = vec![C64::new(0.0, 0.0); m];
        let mut term = 1.0;
        for k in 0..m {
            if k > 0 {
                term *= y / k as f64;
            }
            v[m - 1 - k] = base * term;
        }
        // w = A_j^{-1} v with A_j^{-1} = sum_k N^k / a^(k+1)
        let inv = a.inv();
        for i in 0..m {
            let mut w = C64::new(0.0, 0.0);
            let mut p = inv;
            for vk in &v[i..] {
                w += p * vk;
                p *= inv;
            }
            total += s.norming[m - 1 - i] * w;
        }
    }
    Ok(total)
}

impl Validate for BoundStateTriplets {
    fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (j, s) in self.states.iter().enumerate() {
            if !(s.lambda.im > 0.0) {
                out.push(Violation::new(
                    "unbarred eigenvalue in upper half plane",
                    Some(j),
                    format!("lambda = {}", s.lambda),
                ));
            }
            if s.norming.is_empty() {
                out.push(Violation::new("multiplicity >= 1", Some(j), "no norming constants"));
            }
        }
        for (j, s) in self.barred.iter().enumerate() {
            if !(s.lambda.im < 0.0) {
                out.push(Violation::new(
                    "barred eigenvalue in lower half plane",
                    Some(j),
                    format!("lambda = {}", s.lambda),
                ));
            }
            if s.norming.is_empty() {
                out.push(Violation::new("multiplicity >= 1", Some(j), "no norming constants"));
            }
        }
        let fresh = BoundStateTriplets::assemble(self.states.clone(), self.barred.clone());
        let pairs = [
            ("A", &self.a, &fresh.a),
            ("C", &self.c, &fresh.c),
            ("A_bar", &self.a_bar, &fresh.a_bar),
            ("C_bar", &self.c_bar, &fresh.c_bar),
        ];
        for (name, have, want) in pairs {
            if have != want {
                out.push(Violation::new("Jordan block structure", None, format!("{name} differs from its bound states")));
            }
        }
        if self.b != fresh.b || self.b_bar != fresh.b_bar {
            out.push(Violation::new("Jordan block structure", None, "B or B_bar differs from its bound states"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn one_simple_state() {
        let t = build_triplets(&[BoundState::simple(c(0.0, 1.0), c(2.0, 0.0))], &[]).unwrap();
        assert_eq!(t.a()[(0, 0)], c(1.0, 0.0));
        assert_eq!(t.b()[0], c(1.0, 0.0));
        assert_eq!(t.c()[(0, 0)], c(2.0, 0.0));
        assert!((t.kernel(0.7) - 2.0 * (-0.7f64).exp()).norm() < 1e-15);
        assert!((t.kernel_tail(0.7).unwrap() - 2.0 * (-0.7f64).exp()).norm() < 1e-15);
    }

    #[test]
    fn empty_triplets() {
        let t = build_triplets(&[], &[]).unwrap();
        assert_eq!(t.n(), 0);
        assert_eq!(t.a().nrows(), 0);
        assert_eq!(t.kernel(1.0), c(0.0, 0.0));
    }

    #[test]
    fn double_state_ordering() {
        let s = BoundState {
            lambda: c(0.0, 1.0),
            norming: vec![c(1.0, 0.0), c(3.0, 0.0)],
        };
        let t = build_triplets(&[s], &[]).unwrap();
        let a = t.a();
        assert_eq!(a[(0, 0)], c(1.0, 0.0));
        assert_eq!(a[(0, 1)], c(-1.0, 0.0));
        assert_eq!(a[(1, 0)], c(0.0, 0.0));
        assert_eq!(a[(1, 1)], c(1.0, 0.0));
        assert_eq!(t.b().as_slice(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(t.c().as_slice(), &[c(3.0, 0.0), c(1.0, 0.0)]);
        // C exp(-Ay) B = (c0 + c1 y) e^{-y}
        let y = 0.4;
        let m = t.c() * t.exp_neg_a(y) * t.b();
        assert!((m[0] - (1.0 + 3.0 * y) * (-y).exp()).norm() < 1e-15);
        assert!((t.kernel(y) - m[0]).norm() < 1e-15);
    }

    #[test]
    fn tail_matches_matrix_formula() {
        let s = BoundState {
            lambda: c(0.5, 1.5),
            norming: vec![c(1.0, 0.5), c(-0.3, 2.0), c(0.7, 0.0)],
        };
        let sb = BoundState {
            lambda: c(-0.3, -1.0),
            norming: vec![c(-0.8, 0.0), c(0.2, 0.1)],
        };
        let t = build_triplets(&[s], &[sb]).unwrap();
        let y = 0.9;
        let want = t.c() * t.a().clone().try_inverse().unwrap() * t.exp_neg_a(y) * t.b();
        assert!((t.kernel_tail(y).unwrap() - want[0]).norm() < 1e-13);
        let want = t.c_bar() * t.a_bar().clone().try_inverse().unwrap() * t.exp_neg_a_bar(y) * t.b_bar();
        assert!((t.kernel_bar_tail(y).unwrap() - want[0]).norm() < 1e-13);
        let k = t.c_bar() * t.exp_neg_a_bar(y) * t.b_bar();
        assert!((t.kernel_bar(y) - k[0]).norm() < 1e-14);
        assert!(t.kernel_bar(30.0).norm() < 1e-10);
    }

    #[test]
    fn wrong_half_plane_is_one_violation() {
        let t = BoundStateTriplets::assemble(vec![BoundState::simple(c(0.0, -1.0), c(1.0, 0.0))], vec![]);
        assert_eq!(t.validate().len(), 1);
        assert!(build_triplets(&[], &[BoundState::simple(c(0.0, 1.0), c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn spectrum_of_a() {
        let s1 = BoundState {
            lambda: c(1.0, 2.0),
            norming: vec![c(1.0, 0.0), c(1.0, 0.0)],
        };
        let s2 = BoundState::simple(c(-0.5, 0.5), c(1.0, 0.0));
        let t = build_triplets(&[s1.clone(), s2.clone()], &[]).unwrap();
        for (s, m) in [(s1, 2), (s2, 1)] {
            let ev = -I * s.lambda;
            let shifted = t.a() - DMatrix::identity(3, 3) * ev;
            assert!(shifted.determinant().norm() < 1e-14);
            // rank deficiency equals geometric multiplicity 1, algebraic multiplicity m
            let mut p = DMatrix::identity(3, 3);
            for _ in 0..m {
                p *= &shifted;
            }
            let rank = p.rank(1e-12);
            assert_eq!(rank, 3 - m);
        }
    }
}
