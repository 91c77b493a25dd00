//! Seeded generators and the fuzz runner.
//!
//! Trial `k` of a run with seed `s` draws from a ChaCha8 stream seeded with
//! `s` on stream number `k`, so trials can run in any order or concurrently
//! and a single trial can be replayed from `(config, k)` alone.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::cli::format_rows;
use crate::error::{Error, Result};
use crate::grassmann::{jordan_angles, Subspace};
use crate::linalg::svd;
use crate::matrix::{Field, Matrix, C64};
use crate::metrics::{distance, hcurve_between, hcurve_eval, triangle_check};
use crate::noncompact::{
    ball_angles, ball_angles_detailed, ball_distance, lidskii_check, posdef_triangle_check,
    BallPoint, PosDefPoint,
};
use crate::norms::NormSpec;
use crate::weyl::{fan_ky_diagonal_check, majorization_slack, Group, MAX_ENUMERATION_DIM};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Certificate reconstruction error allowed by the fuzz runner.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-7;
/// Angle symmetry `Ψ[L, M] = Ψ[M, L]`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
/// Failing instances kept per check.
const MAX_DUMPS: usize = 20;

pub fn gaussian_matrix(rows: usize, cols: usize, field: Field, rng: &mut impl Rng) -> Matrix {
    let data: Vec<C64> = (0..rows * cols)
        .map(|_| match field {
            Field::Real => C64::new(rng.sample(StandardNormal), 0.0),
            Field::Complex => C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)),
        })
        .collect();
    Matrix::new(rows, cols, field, data).expect("gaussian samples are finite")
}

/// Haar-distributed subspace: span of a Gaussian `(p+q) × p` matrix.
pub fn random_subspace(p: usize, q: usize, field: Field, rng: &mut impl Rng) -> Result<Subspace> {
    if p == 0 || p > q {
        return Err(Error::InvalidConfig(format!("need 1 <= p <= q, got p = {p}, q = {q}")));
    }
    Subspace::from_basis(&gaussian_matrix(p + q, p, field, rng))
}

/// `G G* + 0.1 I` with complex Gaussian `G`.
pub fn random_posdef(n: usize, rng: &mut impl Rng) -> Result<PosDefPoint> {
    let g = gaussian_matrix(n, n, Field::Complex, rng);
    PosDefPoint::new(g.matmul(&g.adjoint()).add(&Matrix::identity(n).scale(0.1)))
}

pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> Matrix {
    gaussian_matrix(n, n, Field::Complex, rng).hermitian_part()
}

/// Symmetrized complex Gaussian scaled to an operator norm drawn uniformly
/// from `[0, 0.95]`.
pub fn random_ball(n: usize, rng: &mut impl Rng) -> Result<BallPoint> {
    let g = gaussian_matrix(n, n, Field::Complex, rng);
    let sym = g.add(&g.transpose());
    let top = svd(&sym)?.largest();
    let radius: f64 = rng.random_range(0.0..=0.95);
    let scale = if top > 0.0 { radius / top } else { 0.0 };
    BallPoint::new(sym.scale(scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Space {
    GrassmannReal,
    GrassmannComplex,
    Posdef,
    HermitianLidskii,
    Ball,
}

impl Space {
    pub const ALL: [Space; 5] = [
        Space::GrassmannReal,
        Space::GrassmannComplex,
        Space::Posdef,
        Space::HermitianLidskii,
        Space::Ball,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Space::GrassmannReal => "grassmann-real",
            Space::GrassmannComplex => "grassmann-complex",
            Space::Posdef => "posdef",
            Space::HermitianLidskii => "hermitian-lidskii",
            Space::Ball => "ball",
        }
    }

    pub fn is_grassmann(self) -> bool {
        matches!(self, Space::GrassmannReal | Space::GrassmannComplex)
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Space::ALL
            .into_iter()
            .find(|sp| sp.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown space {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialConfig {
    pub space: Space,
    /// Subspace dimension (Grassmannians).
    pub p: usize,
    /// Codimension (Grassmannians).
    pub q: usize,
    /// Matrix size (other spaces).
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub norms: Vec<NormSpec>,
    /// Request convex-combination certificates (Grassmannians, `p ≤ 5`).
    pub certificates: bool,
    /// Force `M = L`, the degenerate pair.
    pub coincident: bool,
}

impl TrialConfig {
    pub fn new(space: Space, trials: usize, seed: u64) -> Self {
        Self {
            space,
            p: 3,
            q: 4,
            n: 3,
            trials,
            seed,
            tolerance: DEFAULT_TOLERANCE,
            norms: NormSpec::builtins(),
            certificates: false,
            coincident: false,
        }
    }

    pub fn grassmann(field: Field, p: usize, q: usize, trials: usize, seed: u64) -> Self {
        let space = match field {
            Field::Real => Space::GrassmannReal,
            Field::Complex => Space::GrassmannComplex,
        };
        Self {
            p,
            q,
            ..Self::new(space, trials, seed)
        }
    }

    pub fn square(space: Space, n: usize, trials: usize, seed: u64) -> Self {
        Self {
            n,
            ..Self::new(space, trials, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.space.is_grassmann() {
            if self.p == 0 || self.p > self.q {
                return Err(Error::InvalidConfig(format!(
                    "need 1 <= p <= q, got p = {}, q = {}",
                    self.p, self.q
                )));
            }
            if self.certificates && self.p > MAX_ENUMERATION_DIM {
                return Err(Error::Capability(format!(
                    "certificates enumerate the signed orbit and need p <= {MAX_ENUMERATION_DIM}"
                )));
            }
        } else if self.n == 0 {
            return Err(Error::InvalidConfig("matrix size n must be at least 1".into()));
        }
        for norm in &self.norms {
            norm.validate()?;
        }
        Ok(())
    }

    fn trial_rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }

    fn field(&self) -> Field {
        if self.space == Space::GrassmannComplex {
            Field::Complex
        } else {
            Field::Real
        }
    }
}

/// One check evaluated on one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub check: String,
    /// Margin of the checked inequality; negative means violated.
    pub slack: f64,
    pub tolerance: f64,
    /// Reported but never counted as a failure.
    pub informational: bool,
}

impl CheckOutcome {
    fn new(check: impl Into<String>, slack: f64, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            slack,
            tolerance,
            informational: false,
        }
    }

    fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    pub fn passed(&self) -> bool {
        self.slack >= -self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub checks: Vec<CheckOutcome>,
    /// Inputs as rows in the plain matrix format.
    pub inputs: BTreeMap<String, Vec<String>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureDump {
    pub seed: u64,
    pub trial: usize,
    pub slack: f64,
    pub inputs: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub check: String,
    pub evaluated: usize,
    pub passed: usize,
    pub worst_slack: f64,
    pub tolerance: f64,
    pub informational: bool,
    /// `worst_slack ≥ −tolerance`.
    pub ok: bool,
    pub failures: Vec<FailureDump>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialError {
    pub seed: u64,
    pub trial: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzReport {
    pub config: TrialConfig,
    pub checks: Vec<CheckSummary>,
    pub errors: Vec<TrialError>,
    /// Excluded from serialization so reports are byte-identical per seed.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl FuzzReport {
    /// Every counted check passed and no trial errored.
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.checks.iter().all(|c| c.ok || c.informational)
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.check == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn run_trials(config: &TrialConfig) -> Result<FuzzReport> {
    config.validate()?;
    let start = Instant::now();
    let outcomes: Vec<TrialOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|k| run_trial(config, k))
        .collect();

    let mut summaries: Vec<CheckSummary> = Vec::new();
    let mut errors = Vec::new();
    for outcome in outcomes {
        if let Some(message) = &outcome.error {
            errors.push(TrialError {
                seed: config.seed,
                trial: outcome.trial,
                message: message.clone(),
            });
        }
        for c in &outcome.checks {
            let idx = match summaries.iter().position(|s| s.check == c.check) {
                Some(i) => i,
                None => {
                    summaries.push(CheckSummary {
                        check: c.check.clone(),
                        evaluated: 0,
                        passed: 0,
                        worst_slack: f64::INFINITY,
                        tolerance: c.tolerance,
                        informational: c.informational,
                        ok: true,
                        failures: Vec::new(),
                    });
                    summaries.len() - 1
                }
            };
            let s = &mut summaries[idx];
            s.evaluated += 1;
            // NaN slack compares false and counts as a failure
            if c.passed() {
                s.passed += 1;
            } else if s.failures.len() < MAX_DUMPS {
                s.failures.push(FailureDump {
                    seed: config.seed,
                    trial: outcome.trial,
                    slack: c.slack,
                    inputs: outcome.inputs.clone(),
                });
            }
            if !(c.slack >= s.worst_slack) {
                s.worst_slack = c.slack;
            }
        }
    }
    for s in &mut summaries {
        s.ok = s.worst_slack >= -s.tolerance;
    }
    Ok(FuzzReport {
        config: config.clone(),
        checks: summaries,
        errors,
        wall_time: start.elapsed(),
    })
}

/// Re-runs a single trial; bit-identical to the same trial inside
/// [`run_trials`].
pub fn replay(config: &TrialConfig, trial: usize) -> Result<TrialOutcome> {
    config.validate()?;
    Ok(run_trial(config, trial))
}

fn run_trial(config: &TrialConfig, trial: usize) -> TrialOutcome {
    let mut rng = config.trial_rng(trial);
    let mut out = TrialOutcome {
        trial,
        checks: Vec::new(),
        inputs: BTreeMap::new(),
        error: None,
    };
    let result = match config.space {
        Space::GrassmannReal | Space::GrassmannComplex => grassmann_trial(config, &mut rng, &mut out),
        Space::Posdef => posdef_trial(config, &mut rng, &mut out),
        Space::HermitianLidskii => lidskii_trial(config, &mut rng, &mut out),
        Space::Ball => ball_trial(config, &mut rng, &mut out),
    };
    if let Err(e) = result {
        out.error = Some(e.to_string());
    }
    out
}

fn record(out: &mut TrialOutcome, name: &str, m: &Matrix) {
    out.inputs.insert(name.to_string(), format_rows(m));
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn grassmann_trial(cfg: &TrialConfig, rng: &mut ChaCha8Rng, out: &mut TrialOutcome) -> Result<()> {
    let field = cfg.field();
    let l = random_subspace(cfg.p, cfg.q, field, rng)?;
    let mut m = random_subspace(cfg.p, cfg.q, field, rng)?;
    let n = random_subspace(cfg.p, cfg.q, field, rng)?;
    if cfg.coincident {
        m = l.clone();
    }
    record(out, "L", l.frame());
    record(out, "M", m.frame());
    record(out, "N", n.frame());

    let rep = triangle_check(&l, &m, &n, cfg.certificates)?;
    out.checks.push(CheckOutcome::new("triangle-inclusion", rep.best_slack, cfg.tolerance));
    if cfg.certificates {
        let err = rep.certificate_error().unwrap_or(f64::INFINITY);
        out.checks.push(CheckOutcome::new("certificate", -err, CERTIFICATE_TOLERANCE));
    }

    let lm = jordan_angles(&l, &m)?;
    let ml = jordan_angles(&m, &l)?;
    out.checks.push(CheckOutcome::new(
        "angle-symmetry",
        -max_abs_diff(&lm, &ml),
        SYMMETRY_TOLERANCE,
    ));

    for norm in &cfg.norms {
        let d_lm = distance(&l, &m, norm)?;
        let d_mn = distance(&m, &n, norm)?;
        let d_ln = distance(&l, &n, norm)?;
        out.checks.push(CheckOutcome::new(
            format!("metric-triangle/{norm}"),
            d_lm + d_mn - d_ln,
            cfg.tolerance,
        ));
    }

    // angle additivity along the H-curve from L to N
    if let Ok(curve) = hcurve_between(&l, &n) {
        let mut s: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
        s.sort_by(f64::total_cmp);
        if curve.sufficiently_near(s[0], s[2]) {
            let g: Vec<Subspace> = s
                .iter()
                .map(|&t| hcurve_eval(&curve, t))
                .collect::<Result<_>>()?;
            let a = jordan_angles(&g[0], &g[1])?;
            let b = jordan_angles(&g[1], &g[2])?;
            let c = jordan_angles(&g[0], &g[2])?;
            let defect = (0..cfg.p)
                .map(|j| (a[j] + b[j] - c[j]).abs())
                .fold(0.0, f64::max);
            out.checks.push(CheckOutcome::new("geodesic-additivity", -defect, 1e-9));
        }
    }

    let a = gaussian_matrix(cfg.p, cfg.q, Field::Real, rng);
    record(out, "A", &a);
    let fk = fan_ky_diagonal_check(&a)?;
    out.checks.push(CheckOutcome::new("fan-ky-diagonal", fk.slack, cfg.tolerance));
    Ok(())
}

fn posdef_trial(cfg: &TrialConfig, rng: &mut ChaCha8Rng, out: &mut TrialOutcome) -> Result<()> {
    let l = random_posdef(cfg.n, rng)?;
    let mut m = random_posdef(cfg.n, rng)?;
    let n = random_posdef(cfg.n, rng)?;
    if cfg.coincident {
        m = l.clone();
    }
    record(out, "L", l.matrix());
    record(out, "M", m.matrix());
    record(out, "N", n.matrix());
    let rep = posdef_triangle_check(&l, &m, &n)?;
    out.checks.push(CheckOutcome::new("posdef-inclusion", rep.best_slack, cfg.tolerance));
    let sum = |v: &[f64]| v.iter().sum::<f64>();
    let defect = (sum(&rep.theta) - sum(&rep.phi) - sum(&rep.psi)).abs();
    out.checks.push(CheckOutcome::new("log-det-additivity", -defect, 1e-9));
    // the alternative reading with the hull taken around the (L, M) angles
    let x: Vec<f64> = rep.theta.iter().zip(&rep.phi).map(|(t, f)| t - f).collect();
    let literal = majorization_slack(&x, &rep.phi, Group::PermutationOnly);
    out.checks.push(
        CheckOutcome::new("posdef-inclusion-lm-hull", literal, cfg.tolerance).informational(),
    );
    Ok(())
}

fn lidskii_trial(cfg: &TrialConfig, rng: &mut ChaCha8Rng, out: &mut TrialOutcome) -> Result<()> {
    let x = random_hermitian(cfg.n, rng);
    let mut z = random_hermitian(cfg.n, rng);
    if cfg.coincident {
        z = Matrix::zeros(cfg.n, cfg.n);
    }
    record(out, "X", &x);
    record(out, "Z", &z);
    let r = lidskii_check(&x, &z)?;
    out.checks.push(CheckOutcome::new("lidskii", r.slack, cfg.tolerance));
    Ok(())
}

fn ball_trial(cfg: &TrialConfig, rng: &mut ChaCha8Rng, out: &mut TrialOutcome) -> Result<()> {
    let t = random_ball(cfg.n, rng)?;
    let mut s = random_ball(cfg.n, rng)?;
    let u = random_ball(cfg.n, rng)?;
    if cfg.coincident {
        s = t.clone();
    }
    record(out, "T", t.matrix());
    record(out, "S", s.matrix());
    record(out, "U", u.matrix());
    let det = ball_angles_detailed(&t, &s)?;
    let low = det.lambda_singular_values.first().copied().unwrap_or(1.0);
    out.checks.push(CheckOutcome::new("ball-lambda-lower-bound", low - 1.0, 1e-9));
    let back = ball_angles(&s, &t)?;
    out.checks.push(CheckOutcome::new(
        "ball-symmetry",
        -max_abs_diff(&det.angles, &back),
        1e-8,
    ));
    for norm in &cfg.norms {
        let ts = ball_distance(&t, &s, norm)?;
        let su = ball_distance(&s, &u, norm)?;
        let tu = ball_distance(&t, &u, norm)?;
        out.checks.push(CheckOutcome::new(
            format!("ball-metric-triangle/{norm}"),
            ts + su - tu,
            1e-8,
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_subspace_is_seeded() {
        let a = random_subspace(2, 3, Field::Complex, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = random_subspace(2, 3, Field::Complex, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert!(random_subspace(3, 2, Field::Real, &mut ChaCha8Rng::seed_from_u64(5)).is_err());
        let line = random_subspace(1, 1, Field::Real, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        assert_eq!(line.ambient_dim(), 2);
    }

    #[test]
    fn haar_invariance_of_mean_angle() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        let g = crate::linalg::qr_orthonormalize(&gaussian_matrix(5, 5, Field::Real, &mut rng))
            .unwrap();
        let samples = 10_000;
        let (mut plain, mut moved) = (0.0, 0.0);
        for _ in 0..samples {
            let l = random_subspace(2, 3, Field::Real, &mut rng).unwrap();
            let m = random_subspace(2, 3, Field::Real, &mut rng).unwrap();
            plain += jordan_angles(&l, &m).unwrap()[0];
            let l2 = random_subspace(2, 3, Field::Real, &mut rng).unwrap();
            let m2 = random_subspace(2, 3, Field::Real, &mut rng).unwrap();
            moved += jordan_angles(&l2.transform(&g).unwrap(), &m2.transform(&g).unwrap())
                .unwrap()[0];
        }
        let (a, b) = (plain / samples as f64, moved / samples as f64);
        // Ψ_1 ∈ [0, π/2] so its standard deviation is below π/4
        let stderr = std::f64::consts::FRAC_PI_4 / (samples as f64).sqrt();
        assert!((a - b).abs() < 5.0 * std::f64::consts::SQRT_2 * stderr, "{a} vs {b}");
    }

    #[test]
    fn degenerate_pair_passes_with_zero_slack() {
        let mut cfg = TrialConfig::grassmann(Field::Real, 3, 4, 1, 11);
        cfg.coincident = true;
        let rep = run_trials(&cfg).unwrap();
        assert!(rep.passed());
        let tri = rep.check("triangle-inclusion").unwrap();
        assert_eq!(tri.passed, 1);
        assert!(tri.worst_slack.abs() < 1e-12);
    }

    #[test]
    fn determinism_and_replay() {
        for space in Space::ALL {
            let mut cfg = TrialConfig::new(space, 12, 99);
            cfg.certificates = space.is_grassmann();
            let a = run_trials(&cfg).unwrap();
            let b = run_trials(&cfg).unwrap();
            assert_eq!(a.to_json(), b.to_json());
            assert!(a.passed(), "{space}: {}", a.to_json());
            let one = replay(&cfg, 7).unwrap();
            for c in &one.checks {
                let summary = a.check(&c.check).unwrap();
                assert!(c.slack >= summary.worst_slack);
            }
            assert_eq!(replay(&cfg, 7).unwrap(), one);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = TrialConfig::new(Space::GrassmannReal, 0, 1);
        assert!(run_trials(&cfg).is_err());
        cfg.trials = 1;
        cfg.tolerance = 0.0;
        assert!(run_trials(&cfg).is_err());
        cfg.tolerance = 1e-9;
        cfg.p = 6;
        cfg.q = 6;
        cfg.certificates = true;
        assert!(matches!(run_trials(&cfg), Err(Error::Capability(_))));
        assert_eq!("posdef".parse::<Space>().unwrap(), Space::Posdef);
        assert!("sphere".parse::<Space>().is_err());
    }
}
