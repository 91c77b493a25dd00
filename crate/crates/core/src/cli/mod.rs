//! Command-line front end. Every subcommand prints one JSON document with
//! the fields `command`, `inputs`, `result`, `tolerances` and `version`.
//!
//! Exit codes: 0 success, 1 a mathematical check failed (or the numerics
//! could not be trusted), 2 usage, parse or domain errors.

mod matrix_io;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grassmann::{angles_from_bases, jordan_angles, projector_angles, AngleVector, Subspace};
use crate::harness::{run_trials, Space, TrialConfig};
use crate::linalg::KernelConfig;
use crate::matrix::Matrix;
use crate::metrics::{
    distance, hcurve_between, hcurve_eval, riemannian_distance, triangle_check, TriangleReport,
};
use crate::noncompact::{
    ball_angles_detailed, lidskii_check, posdef_angles, posdef_triangle_check, BallPoint,
    PosDefPoint,
};
use crate::norms::NormSpec;
use crate::weyl::{
    birkhoff_decompose, fan_ky_diagonal_check, quasistochastic_decompose, recombine, ConvexTerm,
    MembershipResult,
};

pub use matrix_io::{format_matrix, format_rows, parse_matrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Report schema version.
pub const REPORT_VERSION: &str = "1";

#[derive(Debug, Parser)]
#[command(
    name = "jordan-angles",
    version,
    about = "Jordan angles, invariant distances and triangle-inclusion certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Tolerances {
    /// Boundary tolerance for membership and metric inequalities.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Convergence tolerance of the factorizations.
    #[arg(long, default_value_t = 1e-12)]
    kernel_tol: f64,
    /// Relative singular-value cutoff for rank decisions on input bases.
    #[arg(long, default_value_t = 1e-10)]
    rank_tol: f64,
    /// Also report angles in degrees.
    #[arg(long)]
    degrees: bool,
}

impl Tolerances {
    fn kernel(&self) -> KernelConfig {
        KernelConfig {
            tolerance: self.kernel_tol,
            rank_threshold: self.rank_tol,
            ..KernelConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("--tol", self.tol),
            ("--kernel-tol", self.kernel_tol),
            ("--rank-tol", self.rank_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    fn to_json(&self) -> Value {
        json!({ "tol": self.tol, "kernel_tol": self.kernel_tol, "rank_tol": self.rank_tol })
    }
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum Route {
    Jordan,
    Projector,
    Gram,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Jordan angles between the column spans of two bases.
    Angles {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, value_enum, default_value = "jordan")]
        route: Route,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Invariant distances ℓ(Ψ[L, M]).
    Distance {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// l1, l2, linf, ky-fan:K or custom:w11,w12;w21,...
        #[arg(long = "norm", default_values = ["l2"])]
        norms: Vec<String>,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// H-curve geodesic from L to M, optionally evaluated at parameters.
    Geodesic {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// Parameters at which to print the frame of the curve.
        #[arg(long = "at", allow_negative_numbers = true)]
        at: Vec<f64>,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Triangle inclusion for the angles of three subspaces.
    Triangle {
        #[arg(long = "l")]
        l: PathBuf,
        #[arg(long = "m")]
        m: PathBuf,
        #[arg(long = "n")]
        n: PathBuf,
        /// Produce a convex-combination certificate (p ≤ 5).
        #[arg(long)]
        certificate: bool,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Birkhoff decomposition of a bistochastic matrix, or the signed
    /// decomposition of a quasistochastic one with --signed.
    Decompose {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        signed: bool,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Diagonal of a real matrix against the orbit hull of its singular values.
    FanKy {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Hyperbolic angles between two positive-definite matrices.
    PosdefAngles {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Triangle inclusion for three positive-definite matrices.
    PosdefTriangle {
        #[arg(long = "l")]
        l: PathBuf,
        #[arg(long = "m")]
        m: PathBuf,
        #[arg(long = "n")]
        n: PathBuf,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Lidskii inclusion λ(X+Z) − λ(X) ∈ conv(S_n · λ(Z)).
    Lidskii {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        z: PathBuf,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Angles (and optional distances) between two points of the symmetric
    /// operator ball.
    BallAngles {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long = "norm")]
        norms: Vec<String>,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Seeded randomized certification run.
    Fuzz {
        #[arg(long, value_parser = parse_space)]
        space: Space,
        #[arg(long, default_value_t = 3)]
        p: usize,
        #[arg(long, default_value_t = 4)]
        q: usize,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long = "norm")]
        norms: Vec<String>,
        #[arg(long)]
        certificates: bool,
        /// Use M = L in every trial.
        #[arg(long)]
        coincident: bool,
        #[command(flatten)]
        tol: Tolerances,
    },
}

fn parse_space(s: &str) -> std::result::Result<Space, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Outcome of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn dispatch<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            };
        }
    };
    match run(cli.command) {
        Ok(report) => Outcome {
            code: report.code,
            stdout: format!("{}\n", serde_json::to_string_pretty(&report.doc).expect("json")),
            stderr: report.note,
        },
        Err(e) => Outcome {
            code: exit_code(&e),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Convergence { .. }
        | Error::NumericalConsistency(_)
        | Error::DegenerateConfiguration(_) => EXIT_CHECK_FAILED,
        _ => EXIT_USAGE,
    }
}

struct Report {
    code: i32,
    doc: Value,
    note: String,
}

#[derive(Serialize)]
struct Document<'a> {
    command: &'a str,
    inputs: Value,
    result: Value,
    tolerances: Value,
    version: Value,
}

fn document(command: &str, inputs: Value, result: Value, tol: &Tolerances) -> Value {
    serde_json::to_value(Document {
        command,
        inputs,
        result,
        tolerances: tol.to_json(),
        version: json!({ "report": REPORT_VERSION, "crate": env!("CARGO_PKG_VERSION") }),
    })
    .expect("json")
}

fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())
    } else {
        std::fs::read_to_string(path)
    }
    .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| match e {
        Error::Parse { line, column, message } => Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn read_subspace(path: &Path, tol: &Tolerances) -> Result<Subspace> {
    Subspace::from_basis_with(&read_matrix(path)?, &tol.kernel())
}

fn parse_norms(specs: &[String]) -> Result<Vec<NormSpec>> {
    specs.iter().map(|s| s.parse()).collect()
}

/// Rounds to 12 significant digits for display.
fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn angle_json(angles: &[f64], tol: &Tolerances) -> Value {
    let rad: Vec<f64> = angles.iter().map(|&a| sig12(a)).collect();
    if tol.degrees {
        let deg: Vec<f64> = angles.iter().map(|&a| sig12(a.to_degrees())).collect();
        json!({ "radians": rad, "degrees": deg })
    } else {
        json!(rad)
    }
}

fn paths(pairs: &[(&str, &Path)]) -> Value {
    let map: serde_json::Map<String, Value> = pairs
        .iter()
        .map(|(k, p)| (k.to_string(), json!(p.display().to_string())))
        .collect();
    Value::Object(map)
}

fn terms_json(terms: &[ConvexTerm]) -> Value {
    json!(terms
        .iter()
        .map(|t| json!({
            "weight": t.weight,
            "permutation": t.element.permutation(),
            "signs": t.element.signs(),
        }))
        .collect::<Vec<_>>())
}

fn membership_json(r: &MembershipResult, inside: bool) -> Value {
    json!({
        "inside": inside,
        "slack": r.slack,
        "certificate": r.certificate.as_deref().map(terms_json),
    })
}

fn triangle_json(rep: &TriangleReport, inside: bool, tol: &Tolerances) -> Value {
    json!({
        "inside": inside,
        "best_slack": rep.best_slack,
        "phi": angle_json(&rep.phi, tol),
        "psi": angle_json(&rep.psi, tol),
        "theta": angle_json(&rep.theta, tol),
        "witness": rep.witness.as_ref().map(|w| json!({
            "permutation": w.permutation(),
            "signs": w.signs(),
        })),
        "witness_point": rep.witness_point(),
        "certificate": rep.certificate.as_deref().map(terms_json),
        "certificate_error": rep.certificate_error(),
        "near_cut_locus": rep.near_cut_locus,
    })
}

fn verdict(inside: bool) -> i32 {
    if inside {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

fn run(command: Command) -> Result<Report> {
    let ok = |doc| Report { code: EXIT_OK, doc, note: String::new() };
    match command {
        Command::Angles { left, right, route, tol } => {
            tol.validate()?;
            let (a, b) = (read_matrix(&left)?, read_matrix(&right)?);
            let angles: AngleVector = match route {
                Route::Gram => angles_from_bases(&a, &b)?,
                Route::Jordan | Route::Projector => {
                    let cfg = tol.kernel();
                    let l = Subspace::from_basis_with(&a, &cfg)?;
                    let m = Subspace::from_basis_with(&b, &cfg)?;
                    if let Route::Jordan = route {
                        jordan_angles(&l, &m)?
                    } else {
                        projector_angles(&l, &m)?
                    }
                }
            };
            let cos: Vec<f64> = angles.iter().map(|a| a.cos()).collect();
            Ok(ok(document(
                "angles",
                paths(&[("left", &left), ("right", &right)]),
                json!({
                    "route": format!("{route:?}").to_lowercase(),
                    "angles": angle_json(&angles, &tol),
                    "cosines": cos,
                }),
                &tol,
            )))
        }
        Command::Distance { left, right, norms, tol } => {
            tol.validate()?;
            let norms = parse_norms(&norms)?;
            let l = read_subspace(&left, &tol)?;
            let m = read_subspace(&right, &tol)?;
            let angles = jordan_angles(&l, &m)?;
            let mut distances = serde_json::Map::new();
            for norm in &norms {
                distances.insert(norm.to_string(), json!(distance(&l, &m, norm)?));
            }
            Ok(ok(document(
                "distance",
                paths(&[("left", &left), ("right", &right)]),
                json!({
                    "angles": angle_json(&angles, &tol),
                    "distances": distances,
                    "riemannian": riemannian_distance(&l, &m)?,
                }),
                &tol,
            )))
        }
        Command::Geodesic { left, right, at, tol } => {
            tol.validate()?;
            let l = read_subspace(&left, &tol)?;
            let m = read_subspace(&right, &tol)?;
            let curve = hcurve_between(&l, &m)?;
            let points = at
                .iter()
                .map(|&s| {
                    hcurve_eval(&curve, s).map(|g| json!({ "s": s, "frame": format_rows(g.frame()) }))
                })
                .collect::<Result<Vec<_>>>()?;
            let end = hcurve_eval(&curve, 1.0)?;
            Ok(ok(document(
                "geodesic",
                paths(&[("left", &left), ("right", &right)]),
                json!({
                    "invariants": angle_json(curve.invariants(), &tol),
                    "e_frame": format_rows(curve.e_frame()),
                    "f_frame": format_rows(curve.f_frame()),
                    "endpoint_error": end.span_distance(&m),
                    "riemannian_length": riemannian_distance(&l, &m)?,
                    "points": points,
                }),
                &tol,
            )))
        }
        Command::Triangle { l, m, n, certificate, tol } => {
            tol.validate()?;
            let (sl, sm, sn) = (
                read_subspace(&l, &tol)?,
                read_subspace(&m, &tol)?,
                read_subspace(&n, &tol)?,
            );
            let rep = triangle_check(&sl, &sm, &sn, certificate)?;
            let inside = rep.best_slack >= -tol.tol;
            Ok(Report {
                code: verdict(inside),
                doc: document(
                    "triangle",
                    paths(&[("l", &l), ("m", &m), ("n", &n)]),
                    triangle_json(&rep, inside, &tol),
                    &tol,
                ),
                note: String::new(),
            })
        }
        Command::Decompose { matrix, signed, tol } => {
            tol.validate()?;
            let a = read_matrix(&matrix)?;
            let terms = if signed {
                quasistochastic_decompose(&a)?
            } else {
                birkhoff_decompose(&a)?
            };
            let err = recombine(&terms, a.rows()).max_abs_diff(&a);
            let limit = if signed { 1e-7 } else { 1e-9 };
            Ok(Report {
                code: verdict(err <= limit),
                doc: document(
                    "decompose",
                    paths(&[("matrix", &matrix)]),
                    json!({
                        "kind": if signed { "quasistochastic" } else { "bistochastic" },
                        "terms": terms_json(&terms),
                        "reconstruction_error": err,
                    }),
                    &tol,
                ),
                note: String::new(),
            })
        }
        Command::FanKy { matrix, tol } => {
            tol.validate()?;
            let a = read_matrix(&matrix)?;
            let r = fan_ky_diagonal_check(&a)?;
            let inside = r.slack >= -tol.tol;
            Ok(Report {
                code: verdict(inside),
                doc: document("fan-ky", paths(&[("matrix", &matrix)]), membership_json(&r, inside), &tol),
                note: String::new(),
            })
        }
        Command::PosdefAngles { left, right, tol } => {
            tol.validate()?;
            let l = PosDefPoint::new(read_matrix(&left)?)?;
            let m = PosDefPoint::new(read_matrix(&right)?)?;
            let angles = posdef_angles(&l, &m)?;
            Ok(ok(document(
                "posdef-angles",
                paths(&[("left", &left), ("right", &right)]),
                json!({ "angles": angle_json(&angles, &tol) }),
                &tol,
            )))
        }
        Command::PosdefTriangle { l, m, n, tol } => {
            tol.validate()?;
            let pl = PosDefPoint::new(read_matrix(&l)?)?;
            let pm = PosDefPoint::new(read_matrix(&m)?)?;
            let pn = PosDefPoint::new(read_matrix(&n)?)?;
            let rep = posdef_triangle_check(&pl, &pm, &pn)?;
            let inside = rep.best_slack >= -tol.tol;
            Ok(Report {
                code: verdict(inside),
                doc: document(
                    "posdef-triangle",
                    paths(&[("l", &l), ("m", &m), ("n", &n)]),
                    triangle_json(&rep, inside, &tol),
                    &tol,
                ),
                note: String::new(),
            })
        }
        Command::Lidskii { x, z, tol } => {
            tol.validate()?;
            let r = lidskii_check(&read_matrix(&x)?, &read_matrix(&z)?)?;
            let inside = r.slack >= -tol.tol;
            Ok(Report {
                code: verdict(inside),
                doc: document("lidskii", paths(&[("x", &x), ("z", &z)]), membership_json(&r, inside), &tol),
                note: String::new(),
            })
        }
        Command::BallAngles { left, right, norms, tol } => {
            tol.validate()?;
            let norms = parse_norms(&norms)?;
            let t = BallPoint::new(read_matrix(&left)?)?;
            let s = BallPoint::new(read_matrix(&right)?)?;
            let det = ball_angles_detailed(&t, &s)?;
            let mut distances = serde_json::Map::new();
            for norm in &norms {
                distances.insert(norm.to_string(), json!(norm.eval(&det.angles)?));
            }
            Ok(ok(document(
                "ball-angles",
                paths(&[("left", &left), ("right", &right)]),
                json!({
                    "angles": angle_json(&det.angles, &tol),
                    "lambda_singular_values": det.lambda_singular_values,
                    "distances": distances,
                }),
                &tol,
            )))
        }
        Command::Fuzz {
            space,
            p,
            q,
            n,
            trials,
            seed,
            norms,
            certificates,
            coincident,
            tol,
        } => {
            tol.validate()?;
            let mut cfg = TrialConfig::new(space, trials, seed);
            cfg.p = p;
            cfg.q = q;
            cfg.n = n;
            cfg.tolerance = tol.tol;
            cfg.certificates = certificates;
            cfg.coincident = coincident;
            if !norms.is_empty() {
                cfg.norms = parse_norms(&norms)?;
            }
            let report = run_trials(&cfg)?;
            let inputs = json!({
                "space": space.name(),
                "p": p,
                "q": q,
                "n": n,
                "trials": trials,
                "seed": seed,
            });
            Ok(Report {
                code: verdict(report.passed()),
                doc: document(
                    "fuzz",
                    inputs,
                    serde_json::to_value(&report).expect("json"),
                    &tol,
                ),
                note: format!("wall time: {:.3}s\n", report.wall_time.as_secs_f64()),
            })
        }
    }
}

/// Entry point for the binary: prints the outcome and returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let out = dispatch(argv);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    out.code
}
