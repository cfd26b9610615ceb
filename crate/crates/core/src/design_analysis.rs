//! Index sets and design strength of configurations, plus randomized
//! evidence for claims about how few distinct dot products a point of the
//! sphere can form with a configuration.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::configurations::{dot, dot_product_set, geodesic, normalize, Configuration};
use crate::gegenbauer::{eval_all, eval_recurrence};
use crate::sphere_search::random_unit_vector;

pub const DEFAULT_INDEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexSum {
    pub n: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexReport {
    pub label: String,
    pub d: usize,
    pub n_points: usize,
    pub n_max: usize,
    pub tol: f64,
    /// `S_n = (1/N^2) sum_i sum_j P_n(x_i . x_j)` for `n = 1..=n_max`.
    pub sums: Vec<IndexSum>,
    pub zero_set: Vec<usize>,
    pub strength: usize,
    pub nontrivial: Vec<usize>,
}

impl IndexReport {
    pub fn sum(&self, n: usize) -> f64 {
        self.sums[n - 1].value
    }

    pub fn contains(&self, n: usize) -> bool {
        self.zero_set.binary_search(&n).is_ok()
    }
}

pub fn index_sums(c: &Configuration, n_max: usize, tol: f64) -> IndexReport {
    let n = c.len();
    let d = c.d();
    let totals = (0..n)
        .into_par_iter()
        .fold(
            || (vec![0.0; n_max + 1], vec![0.0; n_max + 1]),
            |(mut acc, mut vals), i| {
                let xi = c.point(i);
                for j in (i + 1)..n {
                    eval_all(d, dot(xi, c.point(j)), &mut vals);
                    for (a, v) in acc.iter_mut().zip(&vals) {
                        *a += v;
                    }
                }
                (acc, vals)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(
            || vec![0.0; n_max + 1],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let nf = n as f64;
    let sums: Vec<IndexSum> = (1..=n_max)
        .map(|k| IndexSum {
            n: k,
            // Diagonal pairs contribute P_k(1) = 1 each.
            value: (nf + 2.0 * totals[k]) / (nf * nf),
        })
        .collect();
    let zero_set: Vec<usize> = sums
        .iter()
        .filter(|s| s.value.abs() < tol)
        .map(|s| s.n)
        .collect();
    let strength = (1..=n_max)
        .take_while(|k| zero_set.contains(k))
        .last()
        .unwrap_or(0);
    let nontrivial = zero_set
        .iter()
        .copied()
        .filter(|&k| k % 2 == 0 && k > strength)
        .collect();
    IndexReport {
        label: c.label().to_string(),
        d,
        n_points: n,
        n_max,
        tol,
        sums,
        zero_set,
        strength,
        nontrivial,
    }
}

pub fn is_antipodal(c: &Configuration, tol: f64) -> bool {
    c.points().all(|p| {
        c.points()
            .any(|q| p.iter().zip(q).all(|(a, b)| (a + b).abs() <= tol))
    })
}

/// `|sum_i P_n(x . x_i)|` at `x`.
pub fn pointwise_sum(c: &Configuration, n: usize, x: &[f64]) -> f64 {
    c.points()
        .map(|p| eval_recurrence(c.d(), n, dot(x, p)))
        .sum::<f64>()
        .abs()
}

/// Largest `|sum_i P_n(x . x_i)|` over `trials` uniform random `x`.
pub fn pointwise_index_check(c: &Configuration, n: usize, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| pointwise_sum(c, n, &random_unit_vector(c.dim(), &mut rng)))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountCandidate {
    pub point: Vec<f64>,
    pub distinct: usize,
    pub nearest_witness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinDotReport {
    pub label: String,
    pub claimed_min: usize,
    /// Every witness forms exactly `claimed_min` distinct dot products.
    pub witnesses_ok: bool,
    pub witness_counts_min: usize,
    pub witness_counts_max: usize,
    pub trials: usize,
    /// Fewest distinct products seen among probes.
    pub probe_min_count: usize,
    /// Probes that landed on exactly `claimed_min` distinct products.
    pub probes_at_claimed: usize,
    /// Probes with fewer than `claimed_min` products, or exactly
    /// `claimed_min` but farther than 1e-6 from every witness.
    pub counterexamples: Vec<CountCandidate>,
}

impl MinDotReport {
    pub fn passed(&self) -> bool {
        self.witnesses_ok && self.counterexamples.is_empty()
    }
}

/// Tolerance for counting distinct dot products at a probe.
const COUNT_TOL: f64 = 1e-9;
const WITNESS_RADIUS: f64 = 1e-6;
/// Soft-count widths, annealed from coarse to fine.
const SOFT_WIDTHS: [f64; 4] = [0.3, 0.1, 0.03, 0.01];
const SOFT_ITERS: usize = 25;

/// Checks the witnesses, then runs `trials` randomized probes looking for
/// points that form fewer distinct dot products than claimed (or as few,
/// away from every witness).
///
/// Each probe descends a soft count of distinct values (sum over adjacent
/// sorted gaps of `1 - exp(-(g/h)^2)`, annealing `h`), then snaps: with the
/// value clusters fixed, the within-cluster variance is a quadratic form in
/// `x`, minimized on the sphere by its lowest eigenvector.
pub fn verify_min_dot_count(
    c: &Configuration,
    claimed_min: usize,
    witnesses: &Configuration,
    trials: usize,
    seed: u64,
) -> MinDotReport {
    let counts: Vec<usize> = witnesses
        .points()
        .map(|w| dot_product_set(w, c, COUNT_TOL).len())
        .collect();
    let witnesses_ok = counts.iter().all(|&k| k == claimed_min);

    let probes: Vec<(usize, Vec<f64>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
            let x = probe(c, &mut rng);
            (dot_product_set(&x, c, COUNT_TOL).len(), x)
        })
        .collect();

    let mut counterexamples = Vec::new();
    let mut probes_at_claimed = 0;
    for (count, x) in &probes {
        if *count > claimed_min {
            continue;
        }
        let nearest = witnesses
            .points()
            .map(|w| geodesic(&x[..], w))
            .fold(f64::INFINITY, f64::min);
        if *count == claimed_min {
            probes_at_claimed += 1;
        }
        if *count < claimed_min || nearest > WITNESS_RADIUS {
            counterexamples.push(CountCandidate {
                point: x.clone(),
                distinct: *count,
                nearest_witness: nearest,
            });
        }
    }

    MinDotReport {
        label: c.label().to_string(),
        claimed_min,
        witnesses_ok,
        witness_counts_min: counts.iter().copied().min().unwrap_or(0),
        witness_counts_max: counts.iter().copied().max().unwrap_or(0),
        trials,
        probe_min_count: probes.iter().map(|p| p.0).min().unwrap_or(0),
        probes_at_claimed,
        counterexamples,
    }
}

fn probe(c: &Configuration, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = random_unit_vector(c.dim(), rng);
    for h in SOFT_WIDTHS {
        soft_descent(c, &mut x, h);
    }
    snap(c, &x, SOFT_WIDTHS[SOFT_WIDTHS.len() - 1]).unwrap_or(x)
}

/// Soft count and its gradient at `x`.
fn soft_count(c: &Configuration, x: &[f64], h: f64, grad: Option<&mut [f64]>) -> f64 {
    let mut vals: Vec<(f64, usize)> = c.points().enumerate().map(|(i, p)| (dot(x, p), i)).collect();
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut g_out = grad;
    if let Some(g) = g_out.as_deref_mut() {
        g.iter_mut().for_each(|v| *v = 0.0);
    }
    for w in vals.windows(2) {
        let gap = w[1].0 - w[0].0;
        let e = (-(gap / h).powi(2)).exp();
        total += 1.0 - e;
        if let Some(g) = g_out.as_deref_mut() {
            let slope = 2.0 * gap / (h * h) * e;
            let (lo, hi) = (c.point(w[0].1), c.point(w[1].1));
            for k in 0..g.len() {
                g[k] += slope * (hi[k] - lo[k]);
            }
        }
    }
    total
}

fn soft_descent(c: &Configuration, x: &mut Vec<f64>, h: f64) {
    let dim = c.dim();
    let mut grad = vec![0.0; dim];
    let mut step = h;
    let mut value = soft_count(c, x, h, Some(&mut grad));
    for _ in 0..SOFT_ITERS {
        let gx = dot(&grad, x);
        let tangent: Vec<f64> = grad.iter().zip(x.iter()).map(|(g, xi)| g - gx * xi).collect();
        let gnorm = dot(&tangent, &tangent).sqrt();
        if gnorm < 1e-14 {
            return;
        }
        let mut accepted = false;
        for _ in 0..20 {
            let mut trial: Vec<f64> = x
                .iter()
                .zip(&tangent)
                .map(|(xi, t)| xi - step * t / gnorm)
                .collect();
            normalize(&mut trial);
            let v = soft_count(c, &trial, h, None);
            if v < value {
                *x = trial;
                value = soft_count(c, x, h, Some(&mut grad));
                step *= 1.5;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return;
        }
    }
}

/// Minimizes within-cluster variance of the dot products on the sphere,
/// keeping the clusters found at width `h`.
fn snap(c: &Configuration, x: &[f64], h: f64) -> Option<Vec<f64>> {
    let dim = c.dim();
    let mut vals: Vec<(f64, usize)> = c.points().enumerate().map(|(i, p)| (dot(x, p), i)).collect();
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    let mut start = 0;
    for i in 1..=vals.len() {
        if i == vals.len() || vals[i].0 - vals[i - 1].0 > h {
            let group = &vals[start..i];
            let k = group.len() as f64;
            let mean: Vec<f64> = (0..dim)
                .map(|a| group.iter().map(|g| c.point(g.1)[a]).sum::<f64>() / k)
                .collect();
            for g in group {
                let r = DVector::from_iterator(dim, c.point(g.1).iter().zip(&mean).map(|(p, q)| p - q));
                m += &r * r.transpose();
            }
            start = i;
        }
    }
    let eig = m.symmetric_eigen();
    let (imin, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let scale = eig.eigenvalues.amax().max(1e-300);
    // Project onto the (numerically) null eigenspace when it exists.
    let null: Vec<usize> = (0..dim)
        .filter(|&k| eig.eigenvalues[k] <= 1e-12 * scale)
        .collect();
    let basis = if null.is_empty() { vec![imin] } else { null };
    let xv = DVector::from_column_slice(x);
    let mut y = DVector::<f64>::zeros(dim);
    for k in basis {
        let v = eig.eigenvectors.column(k);
        y += v * v.dot(&xv);
    }
    let n = y.norm();
    if n < 1e-12 {
        return None;
    }
    Some((y / n).iter().copied().collect())
}
