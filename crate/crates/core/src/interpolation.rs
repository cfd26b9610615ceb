//! Hermite interpolation of a potential at nodes `t_1 < ... < t_m` in the
//! basis `(a_i + b_i (t - t_i)) Pi_{i-1}(t)`, `Pi_i = prod_{j<=i} (t - t_j)^2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::polynomial::Polynomial;
use crate::potentials::PotentialSpec;

/// Nodes closer than this are rejected as ill-conditioned.
pub const MIN_NODE_GAP: f64 = 1e-6;

/// Lower-bound sweeps stop this far short of `t = 1` for singular `f`.
pub const SINGULAR_EDGE: f64 = 1e-8;

pub const LOWER_BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HermiteInterpolant {
    pub nodes: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn validate_nodes(nodes: &[f64]) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::InvalidNodes("empty node set".into()));
    }
    for &t in nodes {
        if !(t > -1.0 && t < 1.0) {
            return Err(Error::InvalidNodes(format!("node {t} is not inside (-1, 1)")));
        }
    }
    for w in nodes.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidNodes(format!(
                "nodes must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if w[1] - w[0] < MIN_NODE_GAP {
            return Err(Error::InvalidNodes(format!(
                "nodes {} and {} are closer than {MIN_NODE_GAP:e}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

impl HermiteInterpolant {
    pub fn m(&self) -> usize {
        self.nodes.len()
    }

    /// Value and derivative of the first `k` terms at `t`.
    fn partial(&self, k: usize, t: f64) -> (f64, f64) {
        let (mut p, mut dp) = (0.0, 0.0);
        for i in (0..k).rev() {
            let lin = self.a[i] + self.b[i] * (t - self.nodes[i]);
            if i + 1 < k {
                let s = t - self.nodes[i];
                // p <- lin + s^2 p
                dp = self.b[i] + 2.0 * s * p + s * s * dp;
                p = lin + s * s * p;
            } else {
                p = lin;
                dp = self.b[i];
            }
        }
        (p, dp)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.partial(self.m(), t).0
    }

    pub fn eval_derivative(&self, t: f64) -> f64 {
        self.partial(self.m(), t).1
    }

    /// `Pi_k(t) = prod_{j<k} (t - t_j)^2` as a polynomial.
    pub fn pi(&self, k: usize) -> Polynomial {
        let roots: Vec<f64> = self.nodes[..k].iter().flat_map(|&t| [t, t]).collect();
        Polynomial::from_roots(&roots)
    }

    pub fn to_polynomial(&self) -> Polynomial {
        let mut acc = Polynomial::zero();
        for i in 0..self.m() {
            let lin = Polynomial::new(vec![self.a[i] - self.b[i] * self.nodes[i], self.b[i]]);
            acc = &acc + &(&lin * &self.pi(i));
        }
        acc
    }
}

/// The unique `(a, b)` with `p(t_i) = f(t_i)`, `p'(t_i) = f'(t_i)`, found term
/// by term: the first `k` terms already interpolate at `t_1..t_k`, so term
/// `k+1` is fixed by the residual value and slope at `t_{k+1}`.
pub fn hermite_coeffs(f: &PotentialSpec, nodes: &[f64]) -> Result<HermiteInterpolant> {
    validate_nodes(nodes)?;
    let m = nodes.len();
    let mut h = HermiteInterpolant {
        nodes: nodes.to_vec(),
        a: Vec::with_capacity(m),
        b: Vec::with_capacity(m),
    };
    for (k, &t) in nodes.iter().enumerate() {
        let fv = f.eval(t)?;
        let fd = f.derivative(1, t)?;
        if !fv.is_finite() || !fd.is_finite() {
            return Err(Error::NonFiniteAtNode { t });
        }
        let (q, dq) = if k == 0 { (0.0, 0.0) } else { h.partial(k, t) };
        // Pi_k and its derivative at t.
        let (mut pi, mut dpi) = (1.0, 0.0);
        for &tj in &nodes[..k] {
            let s = (t - tj) * (t - tj);
            dpi = dpi * s + pi * 2.0 * (t - tj);
            pi *= s;
        }
        let a = (fv - q) / pi;
        let b = (fd - dq - a * dpi) / pi;
        h.a.push(a);
        h.b.push(b);
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBoundReport {
    /// `min (f - candidate)` over the sweep grid.
    pub min_gap: f64,
    pub argmin: f64,
    pub grid_size: usize,
    /// Right end of the sweep (`1`, or `1 - 1e-8` when `f(1)` is infinite).
    pub upper: f64,
}

impl LowerBoundReport {
    /// How far the candidate rises above `f` (zero when it never does).
    pub fn violation(&self) -> f64 {
        (-self.min_gap).max(0.0)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.min_gap >= -tol
    }
}

/// Sweeps `f - candidate` over a uniform grid of `[-1, upper]`.
pub fn check_lower_bound(
    candidate: impl Fn(f64) -> f64,
    f: &PotentialSpec,
    grid_size: usize,
) -> LowerBoundReport {
    assert!(grid_size >= 2);
    let upper = if f.is_singular() { 1.0 - SINGULAR_EDGE } else { 1.0 };
    let step = (upper + 1.0) / (grid_size - 1) as f64;
    let mut rep = LowerBoundReport {
        min_gap: f64::INFINITY,
        argmin: -1.0,
        grid_size,
        upper,
    };
    for i in 0..grid_size {
        let t = if i + 1 == grid_size { upper } else { -1.0 + step * i as f64 };
        let gap = f.eval_unchecked(t) - candidate(t);
        if gap < rep.min_gap {
            rep.min_gap = gap;
            rep.argmin = t;
        }
    }
    rep
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientSigns {
    pub a_m: f64,
    pub b_m: f64,
    pub a_m_nonnegative: bool,
    pub b_m_nonnegative: bool,
}

/// The last Newton coefficients `a_m`, `b_m`, which the lower-bound chain
/// needs non-negative.
pub fn coefficient_sign_report(h: &HermiteInterpolant) -> CoefficientSigns {
    let a_m = *h.a.last().expect("non-empty interpolant");
    let b_m = *h.b.last().expect("non-empty interpolant");
    CoefficientSigns {
        a_m,
        b_m,
        a_m_nonnegative: a_m >= -1e-12,
        b_m_nonnegative: b_m >= -1e-12,
    }
}
