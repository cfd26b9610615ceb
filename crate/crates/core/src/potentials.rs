//! Potentials of the dot product, `f(t) = g(2 - 2t)` where `2 - 2t` is the
//! squared chordal distance between two unit vectors with inner product `t`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::polynomial::Polynomial;

/// Slack allowed when `t` arrives a hair outside `[-1, 1]` from rounding.
pub const DOMAIN_SLACK: f64 = 1e-12;

/// Highest derivative order the closed forms are exercised at.
pub const MAX_DERIVATIVE_ORDER: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `(2-2t)^{-s/2}` for `s > 0`, `-(2-2t)^{-s/2}` for `-2 < s < 0`.
    Riesz { s: f64 },
    /// `(1/2) ln(1 / (2-2t))`.
    Log,
    /// `exp(-sigma (2-2t))`.
    Gauss { sigma: f64 },
    /// A polynomial in `t`, mostly for exactness tests.
    Poly(Polynomial),
}

impl PotentialSpec {
    pub fn riesz(s: f64) -> Result<Self> {
        if !(s > -2.0) || s == 0.0 || !s.is_finite() {
            return Err(Error::PotentialSpec {
                spec: format!("riesz:s={s}"),
                reason: "need s > -2 and s != 0".into(),
            });
        }
        Ok(Self::Riesz { s })
    }

    pub fn gauss(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::PotentialSpec {
                spec: format!("gauss:sigma={sigma}"),
                reason: "need sigma > 0".into(),
            });
        }
        Ok(Self::Gauss { sigma })
    }

    /// True when `f(1) = +inf`.
    pub fn is_singular(&self) -> bool {
        matches!(self, Self::Riesz { s } if *s > 0.0) || matches!(self, Self::Log)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t.abs() <= 1.0 + DOMAIN_SLACK) {
            return Err(Error::Domain { t });
        }
        Ok(self.eval_unchecked(t.clamp(-1.0, 1.0)))
    }

    /// `f(t)` without the domain check; callers guarantee `t` is in range.
    pub fn eval_unchecked(&self, t: f64) -> f64 {
        let r = 2.0 - 2.0 * t;
        match self {
            Self::Riesz { s } => {
                let v = r.powf(-s / 2.0);
                if *s > 0.0 {
                    v
                } else {
                    -v
                }
            }
            Self::Log => -0.5 * r.ln(),
            Self::Gauss { sigma } => (-sigma * r).exp(),
            Self::Poly(p) => p.eval(t),
        }
    }

    /// `f^{(k)}(t)` for `t` strictly inside `(-1, 1)`.
    pub fn derivative(&self, k: usize, t: f64) -> Result<f64> {
        if !(t.abs() < 1.0) {
            return Err(Error::Domain { t });
        }
        Ok(self.derivative_unchecked(k, t))
    }

    pub fn derivative_unchecked(&self, k: usize, t: f64) -> f64 {
        if k == 0 {
            return self.eval_unchecked(t);
        }
        let r = 2.0 - 2.0 * t;
        let two_k = 2f64.powi(k as i32);
        match self {
            Self::Riesz { s } => {
                let h = s / 2.0;
                let rising: f64 = (0..k).map(|j| h + j as f64).product();
                let v = r.powf(-h - k as f64) * two_k * rising;
                if *s > 0.0 {
                    v
                } else {
                    -v
                }
            }
            Self::Log => {
                let fact: f64 = (1..k).map(|j| j as f64).product();
                fact * (two_k / 2.0) * r.powi(-(k as i32))
            }
            Self::Gauss { sigma } => (2.0 * sigma).powi(k as i32) * (-sigma * r).exp(),
            Self::Poly(p) => (0..k).fold(p.clone(), |q, _| q.derivative()).eval(t),
        }
    }

    /// Samples `f^{(2m-2)}, f^{(2m-1)}, f^{(2m)}` on a uniform grid of
    /// `(-1 + 1e-6, 1 - 1e-6)`. Advisory only: a sample is not a proof.
    pub fn check_sign_conditions(&self, m: usize, grid: usize) -> SignReport {
        assert!(m >= 2 && grid >= 2);
        let eps = 1e-6;
        let lo = -1.0 + eps;
        let step = (2.0 - 2.0 * eps) / (grid - 1) as f64;
        let mut report = SignReport {
            m,
            ok_2m_minus_2: true,
            ok_2m_minus_1: true,
            ok_2m: true,
            strict_2m: true,
        };
        for i in 0..grid {
            let t = lo + step * i as f64;
            let vals = [2 * m - 2, 2 * m - 1, 2 * m].map(|k| self.derivative_unchecked(k, t));
            report.ok_2m_minus_2 &= vals[0] >= 0.0;
            report.ok_2m_minus_1 &= vals[1] >= 0.0;
            report.ok_2m &= vals[2] >= 0.0;
            report.strict_2m &= vals[2] > 0.0;
        }
        report
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SignReport {
    pub m: usize,
    pub ok_2m_minus_2: bool,
    pub ok_2m_minus_1: bool,
    pub ok_2m: bool,
    pub strict_2m: bool,
}

impl SignReport {
    pub fn all_ok(&self) -> bool {
        self.ok_2m_minus_2 && self.ok_2m_minus_1 && self.ok_2m
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Riesz { s } => write!(f, "riesz:s={s}"),
            Self::Log => write!(f, "log"),
            Self::Gauss { sigma } => write!(f, "gauss:sigma={sigma}"),
            Self::Poly(p) => {
                let cs: Vec<String> = if p.is_zero() {
                    vec!["0".into()]
                } else {
                    p.coeffs().iter().map(|c| c.to_string()).collect()
                };
                write!(f, "poly:{}", cs.join(","))
            }
        }
    }
}

/// Grammar: `riesz:s=<real> | log | gauss:sigma=<real> | poly:c0,c1,...`.
impl FromStr for PotentialSpec {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let bad = |reason: &str| Error::PotentialSpec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let (family, args) = match spec.split_once(':') {
            Some((f, a)) => (f.trim(), Some(a.trim())),
            None => (spec.trim(), None),
        };
        let param = |key: &str| -> Result<f64> {
            let args = args.ok_or_else(|| bad(&format!("missing `{key}=`")))?;
            let (k, v) = args
                .split_once('=')
                .ok_or_else(|| bad(&format!("expected `{key}=<value>`")))?;
            if k.trim() != key {
                return Err(bad(&format!("unknown parameter `{}`", k.trim())));
            }
            v.trim().parse().map_err(|_| bad("not a number"))
        };
        match family {
            "riesz" => Self::riesz(param("s")?),
            "gauss" => Self::gauss(param("sigma")?),
            "log" if args.is_none() => Ok(Self::Log),
            "log" => Err(bad("log takes no parameters")),
            "poly" => {
                let args = args.ok_or_else(|| bad("missing coefficients"))?;
                let coeffs = args
                    .split(',')
                    .map(|c| c.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| bad("coefficients must be numbers"))?;
                Ok(Self::Poly(Polynomial::new(coeffs)))
            }
            _ => Err(bad("unknown family")),
        }
    }
}
