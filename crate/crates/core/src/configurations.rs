//! Point configurations on `S^d`: the exact catalog constructions, a plain
//! text point-file format, and dot-product spectra `D(x, omega_N)`.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Golden ratio.
pub const PHI: f64 = 1.618_033_988_749_895;

pub const DEFAULT_DOT_TOL: f64 = 1e-9;

/// Norm tolerance for constructed configurations.
const UNIT_TOL: f64 = 1e-12;

/// Loaded points within this of unit norm are renormalized; beyond it they
/// are rejected.
const LOAD_RENORM_TOL: f64 = 1e-6;

const DISTINCT_TOL: f64 = 1e-12;

/// `N` distinct unit vectors in `R^{d+1}`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    d: usize,
    coords: Vec<f64>,
    label: String,
}

impl Configuration {
    /// Validates unit norms (to 1e-12) and distinctness.
    pub fn new(d: usize, points: Vec<Vec<f64>>, label: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::NoPoints);
        }
        let dim = d + 1;
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (row, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                    line: row + 1,
                });
            }
            let norm = norm(p);
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(Error::NonUnitPoint { row, norm });
            }
            coords.extend_from_slice(p);
        }
        let c = Self {
            d,
            coords,
            label: label.into(),
        };
        c.check_distinct()?;
        Ok(c)
    }

    fn check_distinct(&self) -> Result<()> {
        // Sort by first coordinate so only nearby rows need comparing.
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.point(a)[0].total_cmp(&self.point(b)[0]));
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[k + 1..] {
                if self.point(j)[0] - self.point(i)[0] > DISTINCT_TOL {
                    break;
                }
                let same = self
                    .point(i)
                    .iter()
                    .zip(self.point(j))
                    .all(|(a, b)| (a - b).abs() <= DISTINCT_TOL);
                if same {
                    return Err(Error::DuplicatePoints {
                        first: i.min(j),
                        second: i.max(j),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.d + 1
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let dim = self.dim();
        &self.coords[i * dim..(i + 1) * dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    /// Union of two configurations on the same sphere (duplicates rejected).
    pub fn union(&self, other: &Self, label: impl Into<String>) -> Result<Self> {
        assert_eq!(self.d, other.d);
        let rows = self.points().chain(other.points()).map(<[f64]>::to_vec).collect();
        Self::new(self.d, rows, label)
    }

    /// Reads the point-file format:
    ///
    /// ```text
    /// # comment
    /// d N
    /// x_0 x_1 ... x_d     (N rows)
    /// ```
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "file".to_string());
        Self::parse(&text, label)
    }

    pub fn parse(text: &str, label: impl Into<String>) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            (!body.trim().is_empty()).then_some((i + 1, body))
        });
        let Some((hline, header)) = lines.next() else {
            return Err(Error::NoPoints);
        };
        let tokens: Vec<&str> = header.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: hline,
                column: 1,
                message: "expected header `d N`".into(),
            });
        }
        let int = |tok: &str, col: usize| -> Result<usize> {
            tok.parse().map_err(|_| Error::Parse {
                line: hline,
                column: col,
                message: format!("`{tok}` is not a non-negative integer"),
            })
        };
        let d = int(tokens[0], column_of(header, 0))?;
        let n = int(tokens[1], column_of(header, 1))?;
        if d == 0 {
            return Err(Error::Parse {
                line: hline,
                column: column_of(header, 0),
                message: "sphere dimension must be at least 1".into(),
            });
        }
        if n == 0 {
            return Err(Error::NoPoints);
        }

        let dim = d + 1;
        let mut rows = Vec::with_capacity(n);
        for (line, body) in lines {
            if rows.len() == n {
                return Err(Error::Parse {
                    line,
                    column: 1,
                    message: format!("more than the {n} points declared in the header"),
                });
            }
            let mut row = Vec::with_capacity(dim);
            for (k, tok) in body.split_whitespace().enumerate() {
                let v: f64 = tok.parse().map_err(|_| Error::Parse {
                    line,
                    column: column_of(body, k),
                    message: format!("`{tok}` is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line,
                        column: column_of(body, k),
                        message: "coordinate is not finite".into(),
                    });
                }
                row.push(v);
            }
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                    line,
                });
            }
            let nrm = norm(&row);
            if (nrm - 1.0).abs() > LOAD_RENORM_TOL {
                return Err(Error::NonUnitPoint {
                    row: rows.len(),
                    norm: nrm,
                });
            }
            if nrm != 1.0 {
                row.iter_mut().for_each(|x| *x /= nrm);
            }
            rows.push(row);
        }
        if rows.len() < n {
            return Err(Error::Parse {
                line: text.lines().count(),
                column: 1,
                message: format!("expected {n} points, found {}", rows.len()),
            });
        }
        Self::new(d, rows, label)
    }

    /// Serializes to the point-file format with round-trip exact decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.label);
        let _ = writeln!(out, "{} {}", self.d, self.len());
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|x| format!("{x:e}")).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// 1-based column where the `k`-th whitespace token of `line` starts.
fn column_of(line: &str, k: usize) -> usize {
    let mut col = 0;
    let mut seen = 0;
    let mut in_tok = false;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            in_tok = false;
        } else if !in_tok {
            in_tok = true;
            if seen == k {
                col = i + 1;
                break;
            }
            seen += 1;
        }
    }
    col.max(1)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: &mut [f64]) {
    let n = norm(a);
    a.iter_mut().for_each(|x| *x /= n);
}

/// Great-circle distance between unit vectors.
pub fn geodesic(a: &[f64], b: &[f64]) -> f64 {
    // atan2 form stays accurate for nearly equal and nearly antipodal pairs.
    let c = dot(a, b);
    let cross2: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let u = y - c * x;
            u * u
        })
        .sum();
    cross2.sqrt().atan2(c)
}

/// Apply the three cyclic shifts `(x,y,z), (y,z,x), (z,x,y)` to each base
/// vector, then scale by `1/scale`.
fn cyclic_family(bases: &[[f64; 3]], scale: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for shift in 0..3 {
        for b in bases {
            out.push((0..3).map(|i| b[(i + shift) % 3] / scale).collect());
        }
    }
    out
}

fn sign_pairs(a: f64, b: f64) -> [[f64; 3]; 4] {
    [[0.0, a, b], [0.0, a, -b], [0.0, -a, b], [0.0, -a, -b]]
}

/// The regular icosahedron: cyclic shifts of `(0, +-1, +-phi)`, normalized.
pub fn icosahedron() -> Configuration {
    let pts = cyclic_family(&sign_pairs(1.0, PHI), (PHI + 2.0).sqrt());
    Configuration::new(2, pts, "icosahedron").expect("valid construction")
}

/// The regular dodecahedron: `(+-1, +-1, +-1)` and cyclic shifts of
/// `(0, +-phi, +-1/phi)`, all scaled by `1/sqrt(3)`.
pub fn dodecahedron() -> Configuration {
    let s3 = 3f64.sqrt();
    let mut pts = Vec::with_capacity(20);
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                pts.push(vec![sx / s3, sy / s3, sz / s3]);
            }
        }
    }
    pts.extend(cyclic_family(&sign_pairs(PHI, 1.0 / PHI), s3));
    Configuration::new(2, pts, "dodecahedron").expect("valid construction")
}

fn sign_patterns(k: usize) -> impl Iterator<Item = Vec<f64>> {
    (0u32..1 << k).map(move |mask| {
        (0..k)
            .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
            .collect()
    })
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// The 240 minimal vectors of E8 scaled onto `S^7`.
pub fn e8_minimal_vectors() -> Configuration {
    let r2 = 0.5f64.sqrt();
    let mut pts = Vec::with_capacity(240);
    for pos in combinations(8, 2) {
        for signs in sign_patterns(2) {
            let mut v = vec![0.0; 8];
            v[pos[0]] = signs[0] * r2;
            v[pos[1]] = signs[1] * r2;
            pts.push(v);
        }
    }
    let h = 1.0 / (2.0 * 2f64.sqrt());
    for signs in sign_patterns(8) {
        if signs.iter().filter(|&&s| s < 0.0).count() % 2 == 0 {
            pts.push(signs.iter().map(|s| s * h).collect());
        }
    }
    Configuration::new(7, pts, "e8-240").expect("valid construction")
}

/// The 2160 points of `S^7` where the E8 potential attains its minimum.
pub fn e8_minimum_set() -> Configuration {
    let mut pts = Vec::with_capacity(2160);
    for pos in combinations(8, 4) {
        for signs in sign_patterns(4) {
            let mut v = vec![0.0; 8];
            for (p, s) in pos.iter().zip(&signs) {
                v[*p] = 0.5 * s;
            }
            pts.push(v);
        }
    }
    for i in 0..8 {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; 8];
            v[i] = s;
            pts.push(v);
        }
    }
    for big in 0..8 {
        for signs in sign_patterns(8) {
            if signs.iter().filter(|&&s| s < 0.0).count() % 2 == 1 {
                pts.push(
                    (0..8)
                        .map(|i| signs[i] * if i == big { 0.75 } else { 0.25 })
                        .collect(),
                );
            }
        }
    }
    Configuration::new(7, pts, "e8-2160").expect("valid construction")
}

/// Catalog names accepted on the command line (`e8` is an alias of `e8-240`).
pub const CATALOG: [&str; 4] = ["icosahedron", "dodecahedron", "e8-240", "e8-2160"];

pub fn catalog(name: &str) -> Option<Configuration> {
    match name {
        "icosahedron" => Some(icosahedron()),
        "dodecahedron" => Some(dodecahedron()),
        "e8" | "e8-240" => Some(e8_minimal_vectors()),
        "e8-2160" => Some(e8_minimum_set()),
        _ => None,
    }
}

/// The known minimizer set for the potential of a catalog configuration.
pub fn default_witnesses(name: &str) -> Option<Configuration> {
    match name {
        "icosahedron" => Some(dodecahedron()),
        "dodecahedron" => Some(icosahedron()),
        "e8" | "e8-240" => Some(e8_minimum_set()),
        _ => None,
    }
}

/// A catalog name, or else a path to a point file.
pub fn resolve(name_or_path: &str) -> Result<Configuration> {
    if let Some(c) = catalog(name_or_path) {
        return Ok(c);
    }
    let path = Path::new(name_or_path);
    if path.exists() {
        Configuration::load(path)
    } else {
        Err(Error::UnknownConfiguration(name_or_path.to_string()))
    }
}

/// Distinct values of `{x . x_i}` clustered with tolerance `tol`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DotSpectrum {
    pub values: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub tol: f64,
}

impl DotSpectrum {
    /// Clusters raw values: sorted neighbours closer than `tol` merge, and
    /// each cluster is represented by its mean.
    pub fn from_values(mut raw: Vec<f64>, tol: f64) -> Self {
        raw.sort_by(f64::total_cmp);
        let mut values = Vec::new();
        let mut multiplicities = Vec::new();
        let mut start = 0;
        for i in 1..=raw.len() {
            if i == raw.len() || raw[i] - raw[i - 1] > tol {
                let group = &raw[start..i];
                values.push(group.iter().sum::<f64>() / group.len() as f64);
                multiplicities.push(group.len());
                start = i;
            }
        }
        Self {
            values,
            multiplicities,
            tol,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Whether every value lies within `tol` of some entry of `set`.
    pub fn within(&self, set: &[f64], tol: f64) -> bool {
        self.values
            .iter()
            .all(|v| set.iter().any(|s| (v - s).abs() <= tol))
    }
}

pub fn dot_product_set(x: &[f64], c: &Configuration, tol: f64) -> DotSpectrum {
    DotSpectrum::from_values(c.points().map(|p| dot(x, p)).collect(), tol)
}
