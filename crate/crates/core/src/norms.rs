//! Norms on `R^p` invariant under signed permutations of the coordinates.
//!
//! Every built-in norm is a symmetric gauge function of `|x|↓`. The custom
//! table form `ℓ(x) = max_r Σ_i w_{r,i} |x|↓_i` covers all polyhedral
//! symmetric gauges; each row must be non-negative and non-increasing, which
//! is exactly what makes the row functional convex.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::weyl::{group_elements, Group};

#[derive(Debug, Clone, PartialEq)]
pub enum NormSpec {
    L1,
    L2,
    LInf,
    /// Sum of the `k` largest absolute coordinates.
    KyFan(usize),
    /// `max_r Σ_i w_{r,i} |x|↓_i`; rows padded with zeros up to `p`.
    Custom(Vec<Vec<f64>>),
}

impl NormSpec {
    /// The four norms every metric check runs over.
    pub fn builtins() -> Vec<NormSpec> {
        vec![NormSpec::L1, NormSpec::L2, NormSpec::LInf, NormSpec::KyFan(2)]
    }

    pub fn ky_fan(k: usize) -> Result<Self> {
        let n = NormSpec::KyFan(k);
        n.validate()?;
        Ok(n)
    }

    pub fn custom(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = NormSpec::Custom(rows);
        n.validate()?;
        Ok(n)
    }

    /// Structural checks, then a sampled check that values do not change
    /// under signed permutations and that the triangle inequality holds.
    pub fn validate(&self) -> Result<()> {
        match self {
            NormSpec::KyFan(0) => {
                return Err(Error::InvalidNorm("ky-fan order must be at least 1".into()))
            }
            NormSpec::Custom(rows) => {
                if rows.is_empty() || rows.iter().all(|r| r.is_empty()) {
                    return Err(Error::InvalidNorm("custom table has no weights".into()));
                }
                for (i, row) in rows.iter().enumerate() {
                    if row.iter().any(|w| !w.is_finite() || *w < 0.0) {
                        return Err(Error::InvalidNorm(format!(
                            "row {i}: weights must be finite and non-negative"
                        )));
                    }
                    if row.windows(2).any(|w| w[1] > w[0]) {
                        return Err(Error::InvalidNorm(format!(
                            "row {i}: weights must be non-increasing"
                        )));
                    }
                }
                if rows.iter().all(|r| r.first().is_none_or(|&w| w == 0.0)) {
                    return Err(Error::InvalidNorm(
                        "custom table needs a positive leading weight".into(),
                    ));
                }
            }
            _ => {}
        }
        self.sampled_check()
    }

    fn max_len(&self) -> usize {
        match self {
            NormSpec::KyFan(k) => *k,
            NormSpec::Custom(rows) => rows.iter().map(Vec::len).max().unwrap_or(0),
            _ => 1,
        }
    }

    fn sampled_check(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let p = self.max_len().clamp(2, 4);
        let elements = group_elements(p, Group::Signed);
        for _ in 0..32 {
            let x: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let nx = self.eval_unchecked(&x);
            let w = &elements[rng.random_range(0..elements.len())];
            let moved = self.eval_unchecked(&w.apply(&x));
            if (nx - moved).abs() > 1e-12 * nx.max(1.0) {
                return Err(Error::InvalidNorm(format!(
                    "{self} changes under the signed permutation {w}"
                )));
            }
            let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            if self.eval_unchecked(&sum) > nx + self.eval_unchecked(&y) + 1e-12 {
                return Err(Error::InvalidNorm(format!(
                    "{self} violates the triangle inequality"
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("norm of a non-finite vector".into()));
        }
        if let NormSpec::KyFan(0) = self {
            return Err(Error::InvalidNorm("ky-fan order must be at least 1".into()));
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            NormSpec::L1 => x.iter().map(|v| v.abs()).sum(),
            NormSpec::L2 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NormSpec::LInf => x.iter().fold(0.0, |a, v| a.max(v.abs())),
            NormSpec::KyFan(k) => abs_desc(x).iter().take(*k).sum(),
            NormSpec::Custom(rows) => {
                let a = abs_desc(x);
                rows.iter()
                    .map(|r| r.iter().zip(&a).map(|(w, v)| w * v).sum::<f64>())
                    .fold(0.0, f64::max)
            }
        }
    }
}

fn abs_desc(x: &[f64]) -> Vec<f64> {
    let mut a: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    a.sort_by(|u, v| v.total_cmp(u));
    a
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::L1 => f.write_str("l1"),
            NormSpec::L2 => f.write_str("l2"),
            NormSpec::LInf => f.write_str("linf"),
            NormSpec::KyFan(k) => write!(f, "ky-fan:{k}"),
            NormSpec::Custom(rows) => {
                let rows: Vec<String> = rows
                    .iter()
                    .map(|r| r.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(","))
                    .collect();
                write!(f, "custom:{}", rows.join(";"))
            }
        }
    }
}

impl Serialize for NormSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Accepts `l1`, `l2`, `linf` (or `l-infinity`), `ky-fan:K`, and
/// `custom:w11,w12,...;w21,...`.
impl FromStr for NormSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let spec = match lower.as_str() {
            "l1" => NormSpec::L1,
            "l2" => NormSpec::L2,
            "linf" | "l-infinity" | "l-inf" => NormSpec::LInf,
            _ => {
                if let Some(k) = lower.strip_prefix("ky-fan:") {
                    let k = k
                        .parse()
                        .map_err(|_| Error::InvalidNorm(format!("bad ky-fan order in {s:?}")))?;
                    NormSpec::KyFan(k)
                } else if let Some(table) = lower.strip_prefix("custom:") {
                    let rows = table
                        .split(';')
                        .map(|row| {
                            row.split(',')
                                .map(|w| {
                                    w.trim().parse::<f64>().map_err(|_| {
                                        Error::InvalidNorm(format!("bad weight {w:?} in {s:?}"))
                                    })
                                })
                                .collect::<Result<Vec<f64>>>()
                        })
                        .collect::<Result<Vec<_>>>()?;
                    NormSpec::Custom(rows)
                } else {
                    return Err(Error::InvalidNorm(format!("unknown norm {s:?}")));
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}
