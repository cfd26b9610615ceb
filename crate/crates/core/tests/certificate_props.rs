use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spherepot::certificate::{build_lambda, build_q, certify_minimum, CertifyOptions};
use spherepot::configurations::{
    dodecahedron, dot, e8_minimal_vectors, e8_minimum_set, icosahedron, Configuration, PHI,
};
use spherepot::design_analysis::index_sums;
use spherepot::gegenbauer::{build_basis, inner_product};
use spherepot::potentials::PotentialSpec;
use spherepot::sphere_search::{potential_value, random_unit_vector};
use spherepot::Error;

fn ico_nodes() -> Vec<f64> {
    let s = (3.0 * PHI + 6.0).sqrt();
    vec![-(PHI + 1.0) / s, -(PHI - 1.0) / s, (PHI - 1.0) / s, (PHI + 1.0) / s]
}

fn e8_nodes() -> Vec<f64> {
    let r = 0.5f64.sqrt();
    vec![-r, -r / 2.0, 0.0, r / 2.0, r]
}

#[test]
fn q_positivity_for_both_node_sets() {
    for (nodes, d) in [(ico_nodes(), 2), (e8_nodes(), 7)] {
        let m = nodes.len();
        let b = build_basis(d, 2 * m);
        for i in 0..3 {
            let v = inner_product(&build_q(&nodes, i), b.poly(2 * m - 2), d);
            assert!(v > 0.0, "d={d} i={i}: {v}");
        }
    }
}

#[test]
fn multipliers_negative_for_node_sets() {
    let pots = [PotentialSpec::riesz(1.0).unwrap(), PotentialSpec::Log, PotentialSpec::gauss(1.0).unwrap()];
    for f in &pots {
        for (nodes, d) in [(ico_nodes(), 2), (e8_nodes(), 7)] {
            let lc = build_lambda(f, &nodes, d).unwrap();
            assert!(lc.mu0 < 0.0 && lc.mu1 < 0.0, "{f} d={d}");
        }
    }
}

fn check_below_everywhere(c: &Configuration, f: &PotentialSpec, w: &Configuration, samples: usize) {
    let cert = certify_minimum(c, f, w, &CertifyOptions::default()).unwrap();
    assert!(cert.valid);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..samples {
        let x = random_unit_vector(c.dim(), &mut rng);
        let v = potential_value(&x, c, f);
        assert!(v >= cert.certified_min - 1e-10 * (1.0 + v.abs()), "{v} < {}", cert.certified_min);
    }
}

#[test]
fn certified_min_is_below_random_potential_values() {
    check_below_everywhere(&icosahedron(), &PotentialSpec::riesz(1.0).unwrap(), &dodecahedron(), 10_000);
    check_below_everywhere(&dodecahedron(), &PotentialSpec::Log, &icosahedron(), 10_000);
    check_below_everywhere(&e8_minimal_vectors(), &PotentialSpec::gauss(1.0).unwrap(), &e8_minimum_set(), 10_000);
}

#[test]
fn lambda_sum_is_constant_by_direct_summation() {
    let c = icosahedron();
    let cert = certify_minimum(&c, &PotentialSpec::riesz(2.0).unwrap(), &dodecahedron(), &CertifyOptions::default())
        .unwrap();
    let lam = |t: f64| cert.lambda.iter().rev().fold(0.0, |acc, a| acc * t + a);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let x = random_unit_vector(3, &mut rng);
        let s: f64 = c.points().map(|p| lam(dot(&x, p))).sum();
        assert!((s - cert.certified_min).abs() < 1e-8 * cert.certified_min.abs());
    }
}

#[test]
fn required_indexes_hold_for_catalog_cases() {
    for (c, m) in [(icosahedron(), 4), (dodecahedron(), 4), (e8_minimal_vectors(), 5)] {
        let r = index_sums(&c, 2 * m, 1e-9);
        for n in (1..=2 * m).filter(|&n| n != 2 * m - 2) {
            assert!(r.contains(n), "{} n={n}", c.label());
        }
        assert!(!r.contains(2 * m - 2));
    }
}

#[test]
fn foreign_witness_is_rejected() {
    // A coordinate axis forms products outside the dodecahedron node set.
    let pole = Configuration::new(2, vec![vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]], "axes").unwrap();
    let mixed = dodecahedron().union(&pole, "mixed").unwrap();
    let err = certify_minimum(&icosahedron(), &PotentialSpec::riesz(1.0).unwrap(), &mixed, &CertifyOptions::default())
        .unwrap_err();
    assert!(matches!(err, Error::WitnessSpectrum(_)), "{err}");
}

#[test]
fn certificate_json_is_reproducible() {
    let run = || {
        let cert = certify_minimum(
            &icosahedron(),
            &PotentialSpec::gauss(0.5).unwrap(),
            &dodecahedron(),
            &CertifyOptions::default(),
        )
        .unwrap();
        spherepot::json::to_string(&cert).unwrap()
    };
    let a = run();
    assert_eq!(a, run());
    assert!(a.contains("\"schema\": \"spherepot.certificate/1\""));
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["m"], 4);
    assert_eq!(v["valid"], true);
}
