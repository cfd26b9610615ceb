//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spherepot::certificate::{build_q, certify_minimum, check_node_conditions, Certificate, CertifyOptions};
use spherepot::configurations::{
    dodecahedron, dot, dot_product_set, e8_minimal_vectors, e8_minimum_set, geodesic, icosahedron, Configuration, PHI,
};
use spherepot::design_analysis::{index_sums, verify_min_dot_count};
use spherepot::gegenbauer::{build_basis, coeff_ratio, inner_product};
use spherepot::interpolation::hermite_coeffs;
use spherepot::potentials::PotentialSpec;
use spherepot::sphere_search::{random_unit_vector, scan, uniqueness_probe, ScanBudget, ScanOptions};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if $cond {} else {
            return Err(format!($($fmt)+));
        }
    };
}

fn within_time(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!("{what} took {:.2} s, limit {:.0} s", t.as_secs_f64(), limit.as_secs_f64()))
    } else {
        Ok(())
    }
}

// Independent closed forms of the potentials.
fn oracle_f(name: &str, t: f64) -> f64 {
    let r = 2.0 - 2.0 * t;
    match name {
        "riesz:s=1" => 1.0 / r.sqrt(),
        "riesz:s=2" => 1.0 / r,
        "riesz:s=3" => 1.0 / (r * r.sqrt()),
        "riesz:s=6" => 1.0 / (r * r * r),
        "log" => -0.5 * r.ln(),
        "gauss:sigma=0.5" => (-0.5 * r).exp(),
        "gauss:sigma=1" => (-r).exp(),
        "gauss:sigma=2" => (-2.0 * r).exp(),
        other => panic!("no oracle for {other}"),
    }
}

fn direct_sum(name: &str, x: &[f64], c: &Configuration) -> f64 {
    c.points().map(|p| oracle_f(name, dot(x, p))).sum()
}

fn ico_nodes() -> Vec<f64> {
    let s = (3.0 * PHI + 6.0).sqrt();
    vec![-(PHI + 1.0) / s, -(PHI - 1.0) / s, (PHI - 1.0) / s, (PHI + 1.0) / s]
}

fn e8_nodes() -> Vec<f64> {
    let r = 0.5f64.sqrt();
    vec![-r, -r / 2.0, 0.0, r / 2.0, r]
}

fn c1_indexes() -> Outcome {
    let start = Instant::now();
    let cases = [
        (icosahedron(), 5, vec![8, 14], 6),
        (dodecahedron(), 5, vec![8, 14], 6),
        (e8_minimal_vectors(), 7, vec![10], 8),
    ];
    let mut detail = Vec::new();
    for (c, strength, nontrivial, excluded) in cases {
        let r = index_sums(&c, 20, 1e-9);
        ensure!(r.strength == strength, "{}: strength {} != {strength}", c.label(), r.strength);
        ensure!(r.nontrivial == nontrivial, "{}: non-trivial {:?} != {nontrivial:?}", c.label(), r.nontrivial);
        let claimed_max = (1..=strength)
            .chain(nontrivial.iter().copied())
            .map(|n| r.sum(n).abs())
            .fold(0.0, f64::max);
        ensure!(claimed_max < 1e-9, "{}: claimed sums up to {claimed_max:e}", c.label());
        ensure!(r.sum(excluded) > 1e-3, "{}: S_{excluded} = {:e}", c.label(), r.sum(excluded));
        detail.push(format!("{} S_{excluded}={:.4}", c.label(), r.sum(excluded)));
    }
    for (name, expect) in [
        ("icosahedron", "strength=5,nontrivial=8,14"),
        ("dodecahedron", "strength=5,nontrivial=8,14"),
        ("e8", "strength=7,nontrivial=10"),
    ] {
        let o = Command::new(env!("CARGO_BIN_EXE_spherepot"))
            .args(["indexes", name, "--nmax", "20", "--expect", expect])
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(o.status.code() == Some(0), "`indexes {name} --expect {expect}` exited {:?}", o.status.code());
    }
    within_time(start, Duration::from_secs(10), "index sums")?;
    Ok(detail.join(", "))
}

fn c2_node_constants() -> Outcome {
    // Node sets as read off the witnesses, and in closed form.
    let from_dod = dot_product_set(dodecahedron().point(0), &icosahedron(), 1e-9).values;
    let from_e8 = dot_product_set(e8_minimum_set().point(0), &e8_minimal_vectors(), 1e-9).values;
    for (nodes, d, sum_sq, bound) in [
        (ico_nodes(), 2, 4.0 / 3.0, 28.0 / 15.0),
        (from_dod, 2, 4.0 / 3.0, 28.0 / 15.0),
        (e8_nodes(), 7, 5.0 / 4.0, 15.0 / 8.0),
        (from_e8, 7, 5.0 / 4.0, 15.0 / 8.0),
    ] {
        let r = check_node_conditions(&nodes, d, true).map_err(|e| e.to_string())?;
        ensure!((r.sum_sq - sum_sq).abs() < 1e-12, "sum t^2 = {} vs {sum_sq}", r.sum_sq);
        ensure!((r.bound - bound).abs() < 1e-12, "bound = {} vs {bound}", r.bound);
        ensure!(r.pass, "conditions fail for {nodes:?}");
    }
    Ok("4/3 < 28/15, 5/4 < 15/8".into())
}

const D2_POTENTIALS: [&str; 6] = ["riesz:s=1", "riesz:s=2", "riesz:s=3", "log", "gauss:sigma=0.5", "gauss:sigma=2"];

fn certify_case(c: &Configuration, w: &Configuration, name: &str) -> Result<Certificate, String> {
    let f: PotentialSpec = name.parse().map_err(|e: spherepot::Error| e.to_string())?;
    certify_minimum(c, &f, w, &CertifyOptions::default()).map_err(|e| format!("{name}: {e}"))
}

fn check_certificate(cert: &Certificate, c: &Configuration, w: &Configuration, name: &str) -> Result<f64, String> {
    ensure!(cert.valid, "{name}: certificate invalid: {:?}", cert.residuals);
    ensure!(cert.residuals.ortho < 1e-10, "{name}: ortho residual {:e}", cert.residuals.ortho);
    let mut worst = 0.0f64;
    for x in w.points() {
        let v = direct_sum(name, x, c);
        worst = worst.max((cert.certified_min - v).abs() / v.abs());
    }
    ensure!(worst < 1e-10, "{name}: witness disagreement {worst:e}");
    Ok(worst)
}

fn polyhedra_certificates(c: Configuration, w: Configuration) -> Outcome {
    let mut worst = 0.0f64;
    for name in D2_POTENTIALS {
        let start = Instant::now();
        let cert = certify_case(&c, &w, name)?;
        worst = worst.max(check_certificate(&cert, &c, &w, name)?);
        within_time(start, Duration::from_secs(1), name)?;
    }
    Ok(format!("{} potentials valid, worst witness deviation {worst:.1e}", D2_POTENTIALS.len()))
}

fn c3_icosahedron() -> Outcome {
    polyhedra_certificates(icosahedron(), dodecahedron())
}

fn c4_dodecahedron() -> Outcome {
    polyhedra_certificates(dodecahedron(), icosahedron())
}

fn c5_e8() -> Outcome {
    let start = Instant::now();
    let (c, w) = (e8_minimal_vectors(), e8_minimum_set());
    let mut worst = 0.0f64;
    for name in ["gauss:sigma=0.5", "gauss:sigma=1", "riesz:s=1", "riesz:s=6"] {
        let cert = certify_case(&c, &w, name)?;
        ensure!(cert.m == 5, "{name}: m = {}", cert.m);
        worst = worst.max(check_certificate(&cert, &c, &w, name)?);
    }
    within_time(start, Duration::from_secs(60), "E8 certificates")?;
    Ok(format!("4 potentials valid with m = 5, worst witness deviation {worst:.1e}"))
}

fn scan_polyhedron(c: &Configuration, w: &Configuration, clusters: usize) -> Result<String, String> {
    let f = PotentialSpec::riesz(1.0).unwrap();
    let cert = certify_minimum(c, &f, w, &CertifyOptions::default()).map_err(|e| e.to_string())?;
    let opts = ScanOptions {
        budget: ScanBudget { grid: 100_000, restarts: 0, max_iter: 200 },
        ..Default::default()
    };
    let r = scan(c, &f, Some(w), &opts);
    let gap = (r.best_value - cert.certified_min).abs();
    ensure!(gap < 1e-8, "{}: best {} vs certified {}", c.label(), r.best_value, cert.certified_min);
    ensure!(r.cluster_reps.len() == clusters, "{}: {} clusters", c.label(), r.cluster_reps.len());
    for rep in &r.cluster_reps {
        let near = w.points().map(|p| geodesic(&rep.point, p)).fold(f64::INFINITY, f64::min);
        ensure!(near < 1e-6, "{}: cluster {near:e} from nearest witness", c.label());
    }
    Ok(format!("{} clusters={clusters} gap={gap:.1e}", c.label()))
}

fn c6_scan_d2() -> Outcome {
    let start = Instant::now();
    let a = scan_polyhedron(&icosahedron(), &dodecahedron(), 20)?;
    let b = scan_polyhedron(&dodecahedron(), &icosahedron(), 12)?;
    within_time(start, Duration::from_secs(120), "d=2 scans")?;
    Ok(format!("{a}; {b}"))
}

fn c7_scan_e8() -> Outcome {
    let start = Instant::now();
    let (c, w) = (e8_minimal_vectors(), e8_minimum_set());
    let f = PotentialSpec::gauss(1.0).unwrap();
    let cert = certify_minimum(&c, &f, &w, &CertifyOptions::default()).map_err(|e| e.to_string())?;
    let opts = ScanOptions {
        budget: ScanBudget { grid: 0, restarts: 100_000, max_iter: 200 },
        value_tol: 1e-7,
        match_radius: 1e-5,
        ..Default::default()
    };
    let r = scan(&c, &f, Some(&w), &opts);
    let floor = cert.certified_min - 1e-8;
    ensure!(r.best_value >= floor, "best {} below certified {}", r.best_value, cert.certified_min);
    ensure!(r.near_best > 0, "no converged minimizer within 1e-7 of best");
    ensure!(
        r.max_witness_distance <= 1e-5,
        "a near-best minimizer is {:e} from the nearest witness",
        r.max_witness_distance
    );
    within_time(start, Duration::from_secs(600), "E8 scan")?;
    Ok(format!(
        "{} near-best minimizers in {} clusters, max witness distance {:.1e}, {} unconverged seeds",
        r.near_best,
        r.cluster_reps.len(),
        r.max_witness_distance,
        r.unconverged_seeds
    ))
}

// P_n^{(d)} by the three-term recurrence, P_n(1) = 1.
fn gegen(d: usize, n: usize, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return p0;
    }
    let d = d as f64;
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + d - 1.0) * t * p1 - k * p0) / (k + d - 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn hermite_oracle(f: &PotentialSpec, nodes: &[f64], t: f64) -> f64 {
    let n = 2 * nodes.len();
    let mut a = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for (i, &x) in nodes.iter().enumerate() {
        for j in 0..n {
            a[(2 * i, j)] = x.powi(j as i32);
            a[(2 * i + 1, j)] = if j == 0 { 0.0 } else { j as f64 * x.powi(j as i32 - 1) };
        }
        rhs[2 * i] = f.eval_unchecked(x);
        rhs[2 * i + 1] = f.derivative_unchecked(1, x);
    }
    let c = a.lu().solve(&rhs).expect("distinct nodes");
    c.iter().rev().fold(0.0, |acc, v| acc * t + v)
}

fn c8_properties() -> Outcome {
    // (a) orthogonality and P_n(1) = 1.
    for d in 1..=10 {
        let b = build_basis(d, 20);
        for n in 0..=20 {
            ensure!((gegen(d, n, 1.0) - 1.0).abs() < 1e-12, "P_{n}(1) != 1 for d={d}");
            ensure!((b.eval(n, 1.0) - 1.0).abs() < 1e-12, "basis P_{n}(1) != 1 for d={d}");
            for j in 0..n {
                let ip = inner_product(b.poly(j), b.poly(n), d);
                ensure!(ip.abs() < 1e-12, "<P_{j}, P_{n}> = {ip:e} for d={d}");
            }
        }
    }
    // (b) gamma_n / alpha_n against the extracted coefficients.
    for d in 1..=10 {
        let b = build_basis(d, 20);
        for n in 2..=20 {
            let p = b.poly(n);
            let extracted = -p.coeff(n - 2) / p.coeff(n);
            let r = coeff_ratio(d, n);
            ensure!((r - extracted).abs() < 1e-12 * r.abs(), "coeff ratio d={d} n={n}: {r} vs {extracted}");
        }
    }
    // (c) positivity of <P_{2m-2}, Q_i>.
    for (nodes, d) in [(ico_nodes(), 2), (e8_nodes(), 7)] {
        let m = nodes.len();
        let b = build_basis(d, 2 * m);
        for i in 0..3 {
            let v = inner_product(&build_q(&nodes, i), b.poly(2 * m - 2), d);
            ensure!(v > 0.0, "<P_{}, Q_{i}> = {v:e} for d={d}", 2 * m - 2);
        }
    }
    // (d) Hermite interpolant against the full linear system.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pots = [PotentialSpec::riesz(1.0).unwrap(), PotentialSpec::Log, PotentialSpec::gauss(1.0).unwrap()];
    let mut worst_d = 0.0f64;
    for inst in 0..100 {
        let m = rng.random_range(2..=5);
        let mut nodes: Vec<f64>;
        loop {
            nodes = (0..m).map(|_| rng.random_range(-0.9..0.8)).collect();
            nodes.sort_by(f64::total_cmp);
            if nodes.windows(2).all(|w| w[1] - w[0] > 0.1) {
                break;
            }
        }
        let f = &pots[inst % 3];
        let h = hermite_coeffs(f, &nodes).map_err(|e| e.to_string())?;
        for k in 0..=20 {
            let t = -1.0 + 0.09 * k as f64;
            let (got, want) = (h.eval(t), hermite_oracle(f, &nodes, t));
            let err = (got - want).abs() / want.abs().max(1.0);
            worst_d = worst_d.max(err);
        }
    }
    ensure!(worst_d < 1e-8, "Hermite vs linear system: {worst_d:e}");
    // (e), (f) on every certified case.
    let mut cases = Vec::new();
    for name in D2_POTENTIALS {
        cases.push((icosahedron(), dodecahedron(), name));
        cases.push((dodecahedron(), icosahedron(), name));
    }
    for name in ["gauss:sigma=0.5", "gauss:sigma=1", "riesz:s=1", "riesz:s=6"] {
        cases.push((e8_minimal_vectors(), e8_minimum_set(), name));
    }
    let mut worst_f = 0.0f64;
    for (c, w, name) in &cases {
        let cert = certify_case(c, w, name)?;
        let lam = |t: f64| cert.lambda.iter().rev().fold(0.0, |acc, a| acc * t + a);
        let upper = 1.0 - 1e-8;
        let grid = 100_000;
        for k in 0..grid {
            let t = -1.0 + (upper + 1.0) * k as f64 / (grid - 1) as f64;
            let gap = oracle_f(name, t) - lam(t);
            ensure!(gap >= -1e-9, "{} {name}: f - lambda = {gap:e} at t = {t}", c.label());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let x = random_unit_vector(c.dim(), &mut rng);
            let s: f64 = c.points().map(|p| lam(dot(&x, p))).sum();
            worst_f = worst_f.max((s - cert.certified_min).abs() / cert.certified_min.abs());
        }
    }
    ensure!(worst_f < 1e-8, "constant identity off by {worst_f:e}");
    Ok(format!(
        "(a)-(c) ok, Hermite {worst_d:.1e}, lower bound on {} cases, identity {worst_f:.1e}",
        cases.len()
    ))
}

fn c9_classification() -> Outcome {
    let s5 = 1.0 / 5f64.sqrt();
    let r2 = 0.5f64.sqrt();
    let ico = icosahedron();
    let dod = dodecahedron();
    let e8 = e8_minimal_vectors();
    let e8w = e8_minimum_set();
    let spectra: [(&Configuration, &Configuration, Vec<f64>); 4] = [
        (&ico, &ico, vec![-1.0, -s5, s5, 1.0]),
        (&dod, &ico, ico_nodes()),
        (&e8, &e8, vec![-1.0, -0.5, 0.0, 0.5, 1.0]),
        (&e8w, &e8, vec![-r2, -r2 / 2.0, 0.0, r2 / 2.0, r2]),
    ];
    for (w, c, expect) in &spectra {
        for x in w.points() {
            let got = dot_product_set(x, c, 1e-9).values;
            ensure!(got.len() == expect.len(), "{} vs {}: {got:?}", w.label(), c.label());
            for (a, b) in got.iter().zip(expect) {
                ensure!((a - b).abs() < 1e-12, "{} vs {}: {a} != {b}", w.label(), c.label());
            }
        }
    }
    let ico_dod = ico.union(&dod, "icosahedron+dodecahedron").map_err(|e| e.to_string())?;
    let e8_all = e8.union(&e8w, "e8-240+e8-2160").map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    for (c, k, w) in [(&ico, 4, &ico_dod), (&dod, 4, &ico), (&e8, 5, &e8_all)] {
        let r = verify_min_dot_count(c, k, w, 10_000, 2024);
        ensure!(r.witnesses_ok, "{}: witness counts {}..{}", c.label(), r.witness_counts_min, r.witness_counts_max);
        ensure!(
            r.counterexamples.is_empty(),
            "{}: {} counterexample candidates, first {:?}",
            c.label(),
            r.counterexamples.len(),
            r.counterexamples.first()
        );
        detail.push(format!("{} min count {} ({} at claim)", c.label(), r.probe_min_count, r.probes_at_claimed));
    }
    Ok(detail.join(", "))
}

fn c10_uniqueness() -> Outcome {
    let f = PotentialSpec::riesz(1.0).unwrap();
    let mut detail = Vec::new();
    for (c, w) in [(dodecahedron(), icosahedron()), (icosahedron(), dodecahedron())] {
        let cert = certify_minimum(&c, &f, &w, &CertifyOptions::default()).map_err(|e| e.to_string())?;
        let p = uniqueness_probe(&c, &f, cert.certified_min, &w, 1_000_000, 1e-3, 31);
        ensure!(p.min_excess > 1e-9, "{}: excess {:e}", c.label(), p.min_excess);
        detail.push(format!("{} min excess {:.2e} ({} excluded)", c.label(), p.min_excess, p.excluded));
    }
    Ok(detail.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("index sets and design strength", c1_indexes),
        ("node-condition constants", c2_node_constants),
        ("icosahedron certificates", c3_icosahedron),
        ("dodecahedron certificates", c4_dodecahedron),
        ("E8 certificates", c5_e8),
        ("d=2 independent search", c6_scan_d2),
        ("d=7 independent search", c7_scan_e8),
        ("property suites", c8_properties),
        ("dot-product classification evidence", c9_classification),
        ("uniqueness probe", c10_uniqueness),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2} s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2} s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
