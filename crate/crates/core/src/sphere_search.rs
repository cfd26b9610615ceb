//! Direct numerical search for the minimum of `p_f(x) = sum_i f(x . x_i)`
//! over the sphere, independent of the polynomial certificate.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::configurations::{dot, geodesic, normalize, Configuration};
use crate::potentials::PotentialSpec;

pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = dot(&v, &v).sqrt();
        if n > 1e-12 {
            v.iter_mut().for_each(|x| *x /= n);
            return v;
        }
    }
}

/// `n` points of the spherical Fibonacci lattice on `S^2`.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec<f64>> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let th = golden_angle * i as f64;
            vec![r * th.cos(), r * th.sin(), z]
        })
        .collect()
}

/// `sum_i f(x . x_i)`; `+inf` if any term is.
pub fn potential_value(x: &[f64], c: &Configuration, f: &PotentialSpec) -> f64 {
    c.points()
        .map(|p| f.eval_unchecked(dot(x, p).clamp(-1.0, 1.0)))
        .sum()
}

/// Value and tangent-space gradient at `x`.
fn value_and_tangent(x: &[f64], c: &Configuration, f: &PotentialSpec, grad: &mut [f64]) -> f64 {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut value = 0.0;
    for p in c.points() {
        let t = dot(x, p).clamp(-1.0, 1.0);
        value += f.eval_unchecked(t);
        let d1 = f.derivative_unchecked(1, t);
        for (g, pk) in grad.iter_mut().zip(p) {
            *g += d1 * pk;
        }
    }
    let gx = dot(grad, x);
    grad.iter_mut().zip(x).for_each(|(g, xk)| *g -= gx * xk);
    value
}

pub fn tangent_gradient_norm(x: &[f64], c: &Configuration, f: &PotentialSpec) -> f64 {
    let mut g = vec![0.0; x.len()];
    value_and_tangent(x, c, f, &mut g);
    dot(&g, &g).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalMin {
    pub point: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

/// Riemannian gradient descent with Barzilai-Borwein step lengths and
/// step-halving backtracking, retracting by normalization.
pub fn refine(x0: &[f64], c: &Configuration, f: &PotentialSpec, max_iter: usize, gtol: f64) -> LocalMin {
    let dim = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; dim];
    let mut fx = value_and_tangent(&x, c, f, &mut g);
    let mut gn = dot(&g, &g).sqrt();
    let mut step = if gn > 0.0 { (0.1 / gn).min(1.0) } else { 0.0 };
    let mut trial = vec![0.0; dim];
    let mut gt = vec![0.0; dim];
    let mut it = 0;
    // Slack for comparing nearly equal potential values.
    let slack = 1e-14 * c.len() as f64;
    while it < max_iter && gn > gtol && fx.is_finite() {
        it += 1;
        let mut accepted = false;
        for _ in 0..40 {
            for k in 0..dim {
                trial[k] = x[k] - step * g[k];
            }
            normalize(&mut trial);
            let ft = value_and_tangent(&trial, c, f, &mut gt);
            if ft <= fx - 1e-4 * step * gn * gn + slack * (1.0 + fx.abs()) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        // BB1 step from the displacement and gradient change.
        let (mut ss, mut sy) = (0.0, 0.0);
        for k in 0..dim {
            let s = trial[k] - x[k];
            ss += s * s;
            sy += s * (gt[k] - g[k]);
        }
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut g, &mut gt);
        fx = value_and_tangent(&x, c, f, &mut g);
        gn = dot(&g, &g).sqrt();
        // Cap the step so one move is at most about half a radian.
        let cap = if gn > 0.0 { 0.5 / gn } else { 1.0 };
        step = if sy > 0.0 { (ss / sy).clamp(1e-12, cap) } else { (step * 2.0).min(cap) };
    }
    LocalMin {
        point: x,
        value: fx,
        grad_norm: gn,
        iterations: it,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanBudget {
    /// Fibonacci seeds on `S^2`.
    pub grid: usize,
    /// Random seeds for `d >= 3`.
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for ScanBudget {
    fn default() -> Self {
        Self {
            grid: 100_000,
            restarts: 100_000,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptions {
    pub budget: ScanBudget,
    pub rng_seed: u64,
    /// Gradient norm at which refinement stops.
    pub gtol: f64,
    /// Minima within this of the best value are collected.
    pub value_tol: f64,
    /// A minimizer counts as converged below this tangent gradient norm.
    pub converged_grad: f64,
    /// Geodesic radius for merging minimizers into one cluster.
    pub cluster_radius: f64,
    /// Geodesic radius for matching a cluster against a witness.
    pub match_radius: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            budget: ScanBudget::default(),
            rng_seed: 42,
            gtol: 1e-10,
            value_tol: 1e-7,
            converged_grad: 1e-6,
            cluster_radius: 1e-4,
            match_radius: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub label: String,
    pub potential: String,
    pub seeds: usize,
    pub best_value: f64,
    pub best_point: Vec<f64>,
    /// Converged minimizers within `value_tol` of the best.
    pub near_best: usize,
    pub cluster_reps: Vec<LocalMin>,
    pub flat: bool,
    /// Every cluster lies within `match_radius` of a witness.
    pub matched: bool,
    pub unmatched_clusters: usize,
    /// Largest distance from a near-best minimizer to its nearest witness.
    pub max_witness_distance: f64,
    pub max_rep_grad_norm: f64,
    pub unconverged_seeds: usize,
    pub total_iterations: usize,
}

fn seeds(c: &Configuration, budget: &ScanBudget, rng_seed: u64) -> Vec<Vec<f64>> {
    if c.d() == 2 {
        fibonacci_sphere(budget.grid)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        (0..budget.restarts)
            .map(|_| random_unit_vector(c.dim(), &mut rng))
            .collect()
    }
}

/// Moves seeds that sit on a configuration point (where singular potentials
/// are infinite) by about 1e-6.
fn nudge(seed: &mut [f64], c: &Configuration) {
    if let Some(p) = c.points().find(|p| dot(seed, p) > 1.0 - 1e-12) {
        // Any direction not parallel to p works; take the smallest coordinate axis.
        let k = (0..p.len())
            .min_by(|&a, &b| p[a].abs().total_cmp(&p[b].abs()))
            .unwrap_or(0);
        seed[k] += 1e-6;
        normalize(seed);
    }
}

pub fn scan(
    c: &Configuration,
    f: &PotentialSpec,
    witnesses: Option<&Configuration>,
    opts: &ScanOptions,
) -> ScanResult {
    let mut starts = seeds(c, &opts.budget, opts.rng_seed);
    if f.is_singular() {
        starts.iter_mut().for_each(|s| nudge(s, c));
    }
    let mins: Vec<LocalMin> = starts
        .par_iter()
        .map(|s| refine(s, c, f, opts.budget.max_iter, opts.gtol))
        .collect();

    // Flat means the potential itself is constant, judged on the seeds.
    let (lo, hi) = starts
        .iter()
        .map(|s| potential_value(s, c, f))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let best = mins
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .cloned()
        .expect("at least one seed");
    let flat = hi - lo <= 1e-12 * (1.0 + lo.abs());
    let unconverged = mins.iter().filter(|m| m.grad_norm >= opts.converged_grad).count();
    let total_iterations = mins.iter().map(|m| m.iterations).sum();

    let mut near: Vec<&LocalMin> = mins
        .iter()
        .filter(|m| m.value <= best.value + opts.value_tol && m.grad_norm < opts.converged_grad)
        .collect();
    near.sort_by(|a, b| a.value.total_cmp(&b.value));

    let mut reps: Vec<LocalMin> = Vec::new();
    if !flat {
        for m in &near {
            if !reps.iter().any(|r| geodesic(&r.point, &m.point) < opts.cluster_radius) {
                reps.push((*m).clone());
            }
        }
    }

    let nearest = |x: &[f64]| -> f64 {
        witnesses.map_or(f64::INFINITY, |w| {
            w.points().map(|p| geodesic(x, p)).fold(f64::INFINITY, f64::min)
        })
    };
    let (matched, unmatched, max_wd) = if flat {
        (true, 0, 0.0)
    } else if witnesses.is_some() {
        let unmatched = reps
            .iter()
            .filter(|r| nearest(&r.point) > opts.match_radius)
            .count();
        let max_wd = near.iter().map(|m| nearest(&m.point)).fold(0.0, f64::max);
        (unmatched == 0 && !reps.is_empty(), unmatched, max_wd)
    } else {
        (false, reps.len(), f64::INFINITY)
    };

    ScanResult {
        label: c.label().to_string(),
        potential: f.to_string(),
        seeds: starts.len(),
        best_value: best.value,
        best_point: best.point.clone(),
        near_best: near.len(),
        max_rep_grad_norm: reps.iter().map(|r| r.grad_norm).fold(0.0, f64::max),
        cluster_reps: reps,
        flat,
        matched,
        unmatched_clusters: unmatched,
        max_witness_distance: max_wd,
        unconverged_seeds: unconverged,
        total_iterations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub samples: usize,
    /// Samples discarded for lying within the exclusion radius of a witness.
    pub excluded: usize,
    pub min_excess: f64,
    pub argmin: Vec<f64>,
}

/// Smallest `p_f(x) - certified_min` over uniform random `x` at least
/// `exclusion` (geodesic) from every witness.
pub fn uniqueness_probe(
    c: &Configuration,
    f: &PotentialSpec,
    certified_min: f64,
    witnesses: &Configuration,
    samples: usize,
    exclusion: f64,
    seed: u64,
) -> ProbeResult {
    let cos_ex = exclusion.cos();
    let chunk = 4096;
    let n_chunks = samples.div_ceil(chunk);
    let parts: Vec<(usize, f64, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let count = chunk.min(samples - k * chunk);
            let mut excluded = 0;
            let mut best = f64::INFINITY;
            let mut arg = Vec::new();
            for _ in 0..count {
                let x = random_unit_vector(c.dim(), &mut rng);
                if witnesses.points().any(|w| dot(&x, w) > cos_ex) {
                    excluded += 1;
                    continue;
                }
                let excess = potential_value(&x, c, f) - certified_min;
                if excess < best {
                    best = excess;
                    arg = x;
                }
            }
            (excluded, best, arg)
        })
        .collect();
    let excluded = parts.iter().map(|p| p.0).sum();
    let (min_excess, argmin) = parts
        .into_iter()
        .map(|p| (p.1, p.2))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap_or((f64::INFINITY, Vec::new()));
    ProbeResult {
        samples,
        excluded,
        min_excess,
        argmin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configurations::{dodecahedron, dot_product_set, icosahedron, DEFAULT_DOT_TOL};
    use crate::Polynomial;

    fn riesz1() -> PotentialSpec {
        PotentialSpec::riesz(1.0).unwrap()
    }

    #[test]
    fn self_term_is_infinite() {
        let c = icosahedron();
        assert_eq!(potential_value(c.point(0), &c, &riesz1()), f64::INFINITY);
    }

    #[test]
    fn dodecahedron_vertex_value_matches_spectrum_sum() {
        let ico = icosahedron();
        let x = dodecahedron().point(5).to_vec();
        let spec = dot_product_set(&x, &ico, DEFAULT_DOT_TOL);
        assert_eq!(spec.multiplicities, vec![3, 3, 3, 3]);
        let closed: f64 = spec.values.iter().map(|t| 3.0 * (2.0 - 2.0 * t).powf(-0.5)).sum();
        let v = potential_value(&x, &ico, &riesz1());
        assert!((v - closed).abs() < 1e-13 * closed);
    }

    #[test]
    fn constant_potential_sums_to_n_c0() {
        let c = dodecahedron();
        let f = PotentialSpec::Poly(Polynomial::constant(2.5));
        let x = [0.6, 0.0, 0.8];
        assert_eq!(potential_value(&x, &c, &f), 50.0);
    }

    #[test]
    fn fibonacci_points_are_unit() {
        for p in fibonacci_sphere(1000) {
            assert!((dot(&p, &p) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn refine_reaches_a_dodecahedron_vertex() {
        let ico = icosahedron();
        let dod = dodecahedron();
        let mut x0 = dod.point(0).to_vec();
        x0[0] += 0.05;
        normalize(&mut x0);
        let m = refine(&x0, &ico, &riesz1(), 200, 1e-10);
        assert!(m.grad_norm < 1e-9, "{m:?}");
        assert!(geodesic(&m.point, dod.point(0)) < 1e-8);
    }

    #[test]
    fn small_scan_finds_all_twenty_minima() {
        let ico = icosahedron();
        let dod = dodecahedron();
        let opts = ScanOptions {
            budget: ScanBudget { grid: 2000, restarts: 0, max_iter: 200 },
            ..Default::default()
        };
        let r = scan(&ico, &riesz1(), Some(&dod), &opts);
        assert_eq!(r.cluster_reps.len(), 20);
        assert!(r.matched);
    }

    #[test]
    fn flat_landscape_is_trivially_matched() {
        let opts = ScanOptions {
            budget: ScanBudget { grid: 200, restarts: 0, max_iter: 10 },
            ..Default::default()
        };
        let f = PotentialSpec::Poly(Polynomial::constant(1.5));
        let r = scan(&icosahedron(), &f, None, &opts);
        assert!(r.flat && r.matched);
        assert_eq!(r.best_value, 18.0);
    }

    #[test]
    fn midpoint_of_adjacent_witnesses_is_not_minimal() {
        let ico = icosahedron();
        let dod = dodecahedron();
        let a = dod.point(0);
        let b = dod
            .points()
            .filter(|p| *p != a)
            .max_by(|p, q| dot(a, p).total_cmp(&dot(a, q)))
            .unwrap();
        let mut mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        normalize(&mut mid);
        let f = riesz1();
        let at_vertex = potential_value(a, &ico, &f);
        assert!(potential_value(&mid, &ico, &f) - at_vertex > 1e-9);
    }
}
