//! The polynomial lower-bound certificate.
//!
//! Given nodes `t_1 < ... < t_m`, the Hermite interpolant `p` of `f` is
//! corrected by a multiple of `Pi_m = prod (t - t_j)^2` so that the result
//! `lambda` is orthogonal to `P_{2m-2}`. When the configuration's index set
//! contains `1..=2m-3, 2m-1, 2m`, the sum `sum_i lambda(x . x_i)` is the
//! constant `N beta_0` for every `x`; since `lambda <= f` and `lambda = f` at
//! the nodes, any witness `x*` whose dot products all lie among the nodes
//! attains the minimum of the `f`-potential.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::configurations::{dot, dot_product_set, Configuration, DEFAULT_DOT_TOL};
use crate::design_analysis::{index_sums, is_antipodal, DEFAULT_INDEX_TOL};
use crate::error::{Error, Result};
use crate::gegenbauer::{build_basis, coeff_ratio, expand, inner_product};
use crate::interpolation::{
    check_lower_bound, coefficient_sign_report, hermite_coeffs, CoefficientSigns, HermiteInterpolant,
    LowerBoundReport, LOWER_BOUND_TOL,
};
use crate::polynomial::Polynomial;
use crate::potentials::{PotentialSpec, SignReport};
use crate::sphere_search::{potential_value, random_unit_vector};

pub const SCHEMA_VERSION: &str = "spherepot.certificate/1";

pub const ORTHO_TOL: f64 = 1e-10;
pub const INTERP_TOL: f64 = 1e-9;
/// `|certified_min - witness_value| < WITNESS_TOL (1 + |witness_value|)`.
pub const WITNESS_TOL: f64 = 1e-8;
pub const CONSTANT_IDENTITY_TOL: f64 = 1e-8;

/// Inequalities the nodes must satisfy for the orthogonalized correction to
/// keep `lambda` below `f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeConditionReport {
    pub nodes: Vec<f64>,
    pub m: usize,
    pub d: usize,
    pub sum_t: f64,
    pub half_tm: f64,
    pub sum_sq: f64,
    /// `sum t_i^2 - 2 (sum t_i)^2`.
    pub quad: f64,
    /// `m(2m-1)/(4m+d-3)`, the ratio `gamma_{2m}/alpha_{2m}`.
    pub bound: f64,
    pub antipodal_shortcut: bool,
    pub pass: bool,
}

impl NodeConditionReport {
    /// The raw quantities, without validating the nodes.
    pub fn compute(nodes: &[f64], d: usize, antipodal: bool) -> Self {
        let m = nodes.len();
        let sum_t: f64 = nodes.iter().sum();
        let sum_sq: f64 = nodes.iter().map(|t| t * t).sum();
        let half_tm = nodes.last().copied().unwrap_or(0.0) / 2.0;
        let quad = sum_sq - 2.0 * sum_t * sum_t;
        let bound = if m >= 1 { coeff_ratio(d, 2 * m) } else { 0.0 };
        let pass = if antipodal {
            sum_sq < bound
        } else {
            sum_t < half_tm && quad < bound
        };
        Self {
            nodes: nodes.to_vec(),
            m,
            d,
            sum_t,
            half_tm,
            sum_sq,
            quad,
            bound,
            antipodal_shortcut: antipodal,
            pass,
        }
    }

    pub fn summary(&self) -> String {
        if self.antipodal_shortcut {
            format!(
                "m = {}, sum t^2 = {} vs bound {} (antipodal)",
                self.m, self.sum_sq, self.bound
            )
        } else {
            format!(
                "m = {}, sum t = {} vs t_m/2 = {}; sum t^2 - 2 (sum t)^2 = {} vs bound {}",
                self.m, self.sum_t, self.half_tm, self.quad, self.bound
            )
        }
    }
}

pub fn check_node_conditions(nodes: &[f64], d: usize, antipodal: bool) -> Result<NodeConditionReport> {
    for &t in nodes {
        if !(t > -1.0 && t < 1.0) {
            return Err(Error::InvalidNodes(format!("node {t} is not inside (-1, 1)")));
        }
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidNodes("nodes must be strictly increasing".into()));
    }
    Ok(NodeConditionReport::compute(nodes, d, antipodal))
}

/// `Q_i = (t - t_m)^i prod_{j<m} (t - t_j)^2` for `i = 0, 1, 2`.
pub fn build_q(nodes: &[f64], i: usize) -> Polynomial {
    assert!(nodes.len() >= 2 && i <= 2);
    let (last, rest) = nodes.split_last().expect("m >= 2");
    let mut roots: Vec<f64> = rest.iter().flat_map(|&t| [t, t]).collect();
    roots.extend(std::iter::repeat_n(*last, i));
    Polynomial::from_roots(&roots)
}

/// `lambda` and the pieces it is assembled from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaConstruction {
    pub m: usize,
    pub d: usize,
    pub interpolant: HermiteInterpolant,
    /// `<Q_i, P_{2m-2}>_d`, `i = 0, 1, 2`.
    pub q_inner: [f64; 3],
    /// Multipliers with `Q_i + mu_i Q_2` orthogonal to `P_{2m-2}`.
    pub mu0: f64,
    pub mu1: f64,
    pub lambda: Polynomial,
    pub gegen_coeffs: Vec<f64>,
    /// `|<lambda, P_{2m-2}>_d|`.
    pub ortho_residual: f64,
    /// `max_i |lambda(t_i) - f(t_i)|`.
    pub interp_residual: f64,
    pub coefficient_signs: CoefficientSigns,
}

pub fn build_lambda(f: &PotentialSpec, nodes: &[f64], d: usize) -> Result<LambdaConstruction> {
    let m = nodes.len();
    if m < 2 {
        return Err(Error::InvalidNodes(format!("need at least 2 nodes, got {m}")));
    }
    let report = check_node_conditions(nodes, d, false)?;
    if !report.pass {
        return Err(Error::NodeConditions(report.summary()));
    }
    let interpolant = hermite_coeffs(f, nodes)?;

    let basis = build_basis(d, 2 * m);
    let p = basis.poly(2 * m - 2);
    let q_inner = [0, 1, 2].map(|i| inner_product(&build_q(nodes, i), p, d));
    if !(q_inner[2] > 0.0) {
        return Err(Error::DegenerateOrthogonalization {
            degree: 2 * m - 2,
            value: q_inner[2],
        });
    }
    let mu0 = -q_inner[0] / q_inner[2];
    let mu1 = -q_inner[1] / q_inner[2];

    let a_m = interpolant.a[m - 1];
    let b_m = interpolant.b[m - 1];
    let correction = build_q(nodes, 2).scale(a_m * mu0 + b_m * mu1);
    let lambda = &interpolant.to_polynomial() + &correction;

    let gegen_coeffs = expand(&lambda, d);
    let ortho_residual = inner_product(&lambda, p, d).abs();
    let interp_residual = nodes
        .iter()
        .map(|&t| (lambda.eval(t) - f.eval_unchecked(t)).abs())
        .fold(0.0, f64::max);

    Ok(LambdaConstruction {
        m,
        d,
        coefficient_signs: coefficient_sign_report(&interpolant),
        interpolant,
        q_inner,
        mu0,
        mu1,
        lambda,
        gegen_coeffs,
        ortho_residual,
        interp_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifyOptions {
    /// Clustering tolerance for witness spectra, and how close each witness
    /// product must be to a node.
    pub witness_tol: f64,
    pub index_tol: f64,
    pub lower_bound_grid: usize,
    pub sign_grid: usize,
    /// Random points for the constant-sum identity check.
    pub identity_samples: usize,
    pub identity_seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            witness_tol: DEFAULT_DOT_TOL,
            index_tol: DEFAULT_INDEX_TOL,
            lower_bound_grid: 100_000,
            sign_grid: 1_000,
            identity_samples: 100,
            identity_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexCheck {
    pub required: Vec<usize>,
    /// Largest `|S_n|` over the required indexes.
    pub max_required_sum: f64,
    /// `S_{2m-2}`, which the construction does not need to vanish.
    pub skipped_index_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessSummary {
    pub label: String,
    pub count: usize,
    /// Potential at the first witness.
    pub value: f64,
    pub min_value: f64,
    pub max_value: f64,
    /// Largest `|value - certified_min| / (1 + |value|)` over all witnesses.
    pub max_deviation: f64,
    #[serde(serialize_with = "ser_points")]
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals {
    pub ortho: f64,
    pub interp: f64,
    /// `|beta_{2m-2}|`.
    pub skipped_coeff: f64,
    pub lower_bound: LowerBoundReport,
    /// `min (f - p)` for the uncorrected interpolant.
    pub interpolant_lower_bound: LowerBoundReport,
    /// Largest relative deviation of `sum_i lambda(x . x_i)` from `N beta_0`.
    pub constant_identity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub schema: &'static str,
    pub config: String,
    pub d: usize,
    pub n_points: usize,
    pub antipodal: bool,
    pub potential: String,
    pub m: usize,
    pub nodes: Vec<f64>,
    pub node_conditions: NodeConditionReport,
    pub indexes: IndexCheck,
    pub interpolant: HermiteInterpolant,
    pub q_inner: [f64; 3],
    pub mu0: f64,
    pub mu1: f64,
    pub lambda: Vec<f64>,
    pub gegen_coeffs: Vec<f64>,
    pub certified_min: f64,
    pub witness: WitnessSummary,
    pub residuals: Residuals,
    pub coefficient_signs: CoefficientSigns,
    /// Sampled derivative signs; advisory.
    pub sign_conditions: SignReport,
    pub notes: Vec<String>,
    pub valid: bool,
}

fn ser_points<S: Serializer>(pts: &[Vec<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    pts.serialize(s)
}

/// Certifies `min_x sum_i f(x . x_i) = N beta_0`, attained at the witnesses.
pub fn certify_minimum(
    c: &Configuration,
    f: &PotentialSpec,
    witnesses: &Configuration,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    if witnesses.d() != c.d() {
        return Err(Error::WitnessSpectrum(format!(
            "witnesses live on S^{} but the configuration on S^{}",
            witnesses.d(),
            c.d()
        )));
    }
    let antipodal = is_antipodal(c, 1e-12);
    let nodes = dot_product_set(witnesses.point(0), c, opts.witness_tol).values;
    let m = nodes.len();

    for (i, w) in witnesses.points().enumerate() {
        let spec = dot_product_set(w, c, opts.witness_tol);
        if !spec.within(&nodes, opts.witness_tol) {
            return Err(Error::WitnessSpectrum(format!(
                "witness {i} forms products {:?}, not all among the nodes {nodes:?}",
                spec.values
            )));
        }
    }

    let raw = NodeConditionReport::compute(&nodes, c.d(), antipodal);
    let boundary: Vec<f64> = nodes
        .iter()
        .copied()
        .filter(|t| !(t.abs() < 1.0 - opts.witness_tol))
        .collect();
    if !boundary.is_empty() {
        let why: Vec<String> = boundary
            .iter()
            .map(|&t| {
                if f.eval_unchecked(t.clamp(-1.0, 1.0)).is_finite() {
                    format!("{t} lies on the boundary of (-1, 1)")
                } else {
                    format!("f is infinite at {t}")
                }
            })
            .collect();
        return Err(Error::NodeConditions(format!(
            "witness spectrum {nodes:?}: {}; {}",
            why.join(", "),
            raw.summary()
        )));
    }
    if m < 2 {
        return Err(Error::InvalidNodes(format!("witness spectrum has {m} value(s); need at least 2")));
    }

    let report = index_sums(c, 2 * m, opts.index_tol);
    let required: Vec<usize> = (1..=2 * m).filter(|&n| n != 2 * m - 2).collect();
    if let Some(&n) = required.iter().find(|&&n| !report.contains(n)) {
        return Err(Error::MissingIndex { n, sum: report.sum(n) });
    }

    let conditions = check_node_conditions(&nodes, c.d(), antipodal)?;
    if !conditions.pass {
        return Err(Error::NodeConditions(conditions.summary()));
    }

    let lc = build_lambda(f, &nodes, c.d())?;
    let nf = c.len() as f64;
    let certified_min = nf * lc.gegen_coeffs[0];

    let values: Vec<f64> = witnesses
        .points()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|w| potential_value(w, c, f))
        .collect();
    let deviation = |v: f64| (v - certified_min).abs() / (1.0 + v.abs());
    let witness = WitnessSummary {
        label: witnesses.label().to_string(),
        count: witnesses.len(),
        value: values[0],
        min_value: values.iter().copied().fold(f64::INFINITY, f64::min),
        max_value: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        max_deviation: values.iter().map(|&v| deviation(v)).fold(0.0, f64::max),
        points: witnesses.to_rows(),
    };

    let lambda = &lc.lambda;
    let p = lc.interpolant.clone();
    let lower_bound = check_lower_bound(|t| lambda.eval(t), f, opts.lower_bound_grid);
    let interpolant_lower_bound = check_lower_bound(|t| p.eval(t), f, opts.lower_bound_grid);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.identity_seed);
    let constant_identity = (0..opts.identity_samples)
        .map(|_| {
            let x = random_unit_vector(c.dim(), &mut rng);
            let s: f64 = c.points().map(|q| lambda.eval(dot(&x, q))).sum();
            (s - certified_min).abs() / certified_min.abs().max(1.0)
        })
        .fold(0.0, f64::max);

    let skipped_coeff = lc.gegen_coeffs.get(2 * m - 2).copied().unwrap_or(0.0).abs();
    let residuals = Residuals {
        ortho: lc.ortho_residual,
        interp: lc.interp_residual,
        skipped_coeff,
        lower_bound,
        interpolant_lower_bound,
        constant_identity,
    };

    let sign_conditions = f.check_sign_conditions(m, opts.sign_grid);
    let mut notes = Vec::new();
    if report.contains(2 * m - 2) {
        notes.push(format!(
            "index {} also vanishes; the orthogonalizing correction is not needed for this configuration",
            2 * m - 2
        ));
    }
    if !sign_conditions.all_ok() {
        notes.push(format!(
            "sampled derivatives of orders {}, {}, {} are not all non-negative; the lower bound rests on the sweep only",
            2 * m - 2,
            2 * m - 1,
            2 * m
        ));
    }
    if !sign_conditions.strict_2m {
        notes.push(format!("f^({}) is not sampled strictly positive; minimizers may not be unique", 2 * m));
    }

    let valid = residuals.ortho < ORTHO_TOL
        && residuals.interp < INTERP_TOL
        && residuals.skipped_coeff < ORTHO_TOL
        && residuals.lower_bound.passed(LOWER_BOUND_TOL)
        && witness.max_deviation < WITNESS_TOL
        && residuals.constant_identity < CONSTANT_IDENTITY_TOL;

    Ok(Certificate {
        schema: SCHEMA_VERSION,
        config: c.label().to_string(),
        d: c.d(),
        n_points: c.len(),
        antipodal,
        potential: f.to_string(),
        m,
        nodes,
        node_conditions: conditions,
        indexes: IndexCheck {
            max_required_sum: required.iter().map(|&n| report.sum(n).abs()).fold(0.0, f64::max),
            skipped_index_sum: report.sum(2 * m - 2),
            required,
        },
        q_inner: lc.q_inner,
        mu0: lc.mu0,
        mu1: lc.mu1,
        lambda: lc.lambda.coeffs().to_vec(),
        gegen_coeffs: lc.gegen_coeffs,
        certified_min,
        witness,
        residuals,
        coefficient_signs: lc.coefficient_signs,
        interpolant: lc.interpolant,
        sign_conditions,
        notes,
        valid,
    })
}
