//! Gegenbauer polynomials `P_n^{(d)}` for the sphere `S^d`, normalized by
//! `P_n(1) = 1`, and the probability weight `w_d(t) = c_d (1 - t^2)^{d/2 - 1}`
//! on `[-1, 1]` they are orthogonal against.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::polynomial::Polynomial;

pub const DEFAULT_N_MAX: usize = 30;

/// Recurrence factors `(A_n, C_n)` in `P_{n+1} = A_n t P_n - C_n P_{n-1}`.
fn recurrence(d: usize, n: usize) -> (f64, f64) {
    debug_assert!(n >= 1);
    let n = n as f64;
    let d = d as f64;
    ((2.0 * n + d - 1.0) / (n + d - 1.0), n / (n + d - 1.0))
}

/// Ratio of leading coefficients `alpha_{n+1} / alpha_n`; `P_1 = t` is seeded
/// so the ratio at `n = 0` is one.
fn leading_ratio(d: usize, n: usize) -> f64 {
    if n == 0 {
        1.0
    } else {
        recurrence(d, n).0
    }
}

/// The normalization constant `c_d` making `w_d` a probability density,
/// `c_d = 1 / B(1/2, d/2) = Gamma((d+1)/2) / (sqrt(pi) Gamma(d/2))`.
pub fn weight_constant(d: usize) -> f64 {
    assert!(d >= 1);
    // R(d) = Gamma((d+1)/2) / Gamma(d/2) with R(d+2) = R(d) (d+1)/d.
    let (mut r, mut k) = if d % 2 == 1 {
        (1.0 / PI.sqrt(), 1)
    } else {
        (PI.sqrt() / 2.0, 2)
    };
    while k < d {
        r *= (k as f64 + 1.0) / k as f64;
        k += 2;
    }
    r / PI.sqrt()
}

pub fn weight(d: usize, t: f64) -> f64 {
    weight_constant(d) * (1.0 - t * t).powf(d as f64 / 2.0 - 1.0)
}

/// `P_0 .. P_{n_max}` on `S^d` with their leading coefficients `alpha_n` and
/// the magnitudes `gamma_n` of their `t^{n-2}` coefficients
/// (`P_n = alpha_n t^n - gamma_n t^{n-2} + ...`).
#[derive(Debug, Clone)]
pub struct GegenbauerBasis {
    d: usize,
    polys: Vec<Polynomial>,
    alphas: Vec<f64>,
    gammas: Vec<f64>,
}

impl GegenbauerBasis {
    pub fn build(d: usize, n_max: usize) -> Self {
        assert!(d >= 1, "sphere dimension must be at least 1");
        let mut coeffs: Vec<Vec<f64>> = vec![vec![1.0]];
        if n_max >= 1 {
            coeffs.push(vec![0.0, 1.0]);
        }
        for n in 1..n_max {
            let (a, c) = recurrence(d, n);
            let mut next = vec![0.0; n + 2];
            for (k, &pk) in coeffs[n].iter().enumerate() {
                next[k + 1] += a * pk;
            }
            for (k, &pk) in coeffs[n - 1].iter().enumerate() {
                next[k] -= c * pk;
            }
            coeffs.push(next);
        }
        let alphas = coeffs.iter().map(|c| *c.last().unwrap()).collect();
        let gammas = coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| if n >= 2 { -c[n - 2] } else { 0.0 })
            .collect();
        Self {
            d,
            polys: coeffs.into_iter().map(Polynomial::new).collect(),
            alphas,
            gammas,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_max(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn poly(&self, n: usize) -> &Polynomial {
        &self.polys[n]
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn alpha(&self, n: usize) -> f64 {
        self.alphas[n]
    }

    pub fn gamma(&self, n: usize) -> f64 {
        self.gammas[n]
    }

    /// Evaluates `P_n(t)` by the three-term recurrence (stable on `[-1, 1]`).
    pub fn eval(&self, n: usize, t: f64) -> f64 {
        eval_recurrence(self.d, n, t)
    }
}

pub fn build_basis(d: usize, n_max: usize) -> GegenbauerBasis {
    GegenbauerBasis::build(d, n_max)
}

/// `P_n^{(d)}(t)` via the recurrence.
pub fn eval_recurrence(d: usize, n: usize, t: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, t);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let (a, c) = recurrence(d, k);
        let next = a * t * cur - c * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Writes `P_0(t) .. P_{out.len()-1}(t)` into `out`.
pub fn eval_all(d: usize, t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = t;
    }
    for n in 1..out.len().saturating_sub(1) {
        let (a, c) = recurrence(d, n);
        out[n + 1] = a * t * out[n] - c * out[n - 1];
    }
}

/// `(P_n(t), P_n'(t))` via the differentiated recurrence.
fn eval_with_derivative(d: usize, n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    let (mut dp0, mut dp1) = (0.0, 1.0);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let (a, c) = recurrence(d, k);
        let p2 = a * t * p1 - c * p0;
        let dp2 = a * (p1 + t * dp1) - c * dp0;
        p0 = p1;
        p1 = p2;
        dp0 = dp1;
        dp1 = dp2;
    }
    (p1, dp1)
}

/// `<P_n, P_n>_d`.
pub fn norm_sq(d: usize, n: usize) -> f64 {
    let mut h = 1.0;
    for k in 1..=n {
        let (a, c) = recurrence(d, k);
        // h_k = alpha_k^2 beta_1..beta_k with beta_k = C_k / (A_k A_{k-1})
        // and alpha_k = A_{k-1} alpha_{k-1}.
        let a_prev = leading_ratio(d, k - 1);
        h *= a_prev * c / a;
    }
    h
}

/// Gauss quadrature for the probability weight `w_d`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `k`-node rule, exact for polynomials of degree `<= 2k - 1`.
    pub fn new(d: usize, k: usize) -> Self {
        assert!(k >= 1);
        // Jacobi matrix of the monic recurrence t p_n = p_{n+1} + beta_n p_{n-1}.
        let mut jac = DMatrix::<f64>::zeros(k, k);
        for n in 1..k {
            let (a, c) = recurrence(d, n);
            let beta = c / (a * leading_ratio(d, n - 1));
            let off = beta.sqrt();
            jac[(n, n - 1)] = off;
            jac[(n - 1, n)] = off;
        }
        let mut nodes: Vec<f64> = jac.symmetric_eigenvalues().iter().copied().collect();
        nodes.sort_by(f64::total_cmp);

        // Newton polish on P_k, then force exact symmetry.
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                let (p, dp) = eval_with_derivative(d, k, *x);
                if dp != 0.0 {
                    *x -= p / dp;
                }
            }
        }
        for i in 0..k / 2 {
            let s = 0.5 * (nodes[k - 1 - i] - nodes[i]);
            nodes[i] = -s;
            nodes[k - 1 - i] = s;
        }
        if k % 2 == 1 {
            nodes[k / 2] = 0.0;
        }

        // Christoffel weights 1 / sum_j P_j(x)^2 / h_j.
        let norms: Vec<f64> = (0..k).map(|j| norm_sq(d, j)).collect();
        let mut vals = vec![0.0; k];
        let mut weights: Vec<f64> = nodes
            .iter()
            .map(|&x| {
                eval_all(d, x, &mut vals);
                1.0 / vals.iter().zip(&norms).map(|(p, h)| p * p / h).sum::<f64>()
            })
            .collect();
        for i in 0..k / 2 {
            let w = 0.5 * (weights[i] + weights[k - 1 - i]);
            weights[i] = w;
            weights[k - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `<p, q>_d = int_{-1}^{1} p q w_d dt`, exact for polynomial integrands.
pub fn inner_product(p: &Polynomial, q: &Polynomial, d: usize) -> f64 {
    let (Some(dp), Some(dq)) = (p.degree(), q.degree()) else {
        return 0.0;
    };
    let k = (dp + dq).div_ceil(2) + 1;
    let rule = GaussRule::new(d, k);
    rule.integrate(|t| p.eval_compensated(t) * q.eval_compensated(t))
}

/// `gamma_n / alpha_n = n(n-1) / (2(2n+d-3))`.
pub fn coeff_ratio(d: usize, n: usize) -> f64 {
    assert!(n >= 2);
    let n = n as f64;
    n * (n - 1.0) / (2.0 * (2.0 * n + d as f64 - 3.0))
}

/// Coefficients `beta_n` with `p = sum_n beta_n P_n^{(d)}`, by triangular
/// back-substitution from the leading monomial down.
pub fn expand(p: &Polynomial, d: usize) -> Vec<f64> {
    let Some(deg) = p.degree() else {
        return Vec::new();
    };
    let basis = GegenbauerBasis::build(d, deg);
    let mut rest = p.coeffs().to_vec();
    let mut beta = vec![0.0; deg + 1];
    for n in (0..=deg).rev() {
        let b = rest[n] / basis.alpha(n);
        beta[n] = b;
        for (k, c) in basis.poly(n).coeffs().iter().enumerate() {
            rest[k] -= b * c;
        }
        rest[n] = 0.0;
    }
    beta
}

/// Inverse of [`expand`].
pub fn resum(beta: &[f64], d: usize) -> Polynomial {
    if beta.is_empty() {
        return Polynomial::zero();
    }
    let basis = GegenbauerBasis::build(d, beta.len() - 1);
    beta.iter()
        .enumerate()
        .fold(Polynomial::zero(), |acc, (n, &b)| &acc + &basis.poly(n).scale(b))
}
