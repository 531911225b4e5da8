//! The `aip` command-line front end.
//!
//! Exit codes: 0 success, 1 internal failure, 2 unreadable or malformed
//! input, 3 degenerate importance weights, 4 violated precondition.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::classical::{centroid_rule, john_rule};
use crate::error::AipError;
use crate::estimator::{convergence_sweep, convergence_sweep_unchecked, estimate_tk, estimate_tk_unit, EstimatorConfig, PointEstimate, SweepRow};
use crate::geometry::{ConvexPolygon, Point};
use crate::haar::{sample_sl2pm, stream_rng};
use crate::symmetry::automorphism_group;
use crate::unimodular::VolumePreservingAffineMap;
use crate::weightfn::UNIT_AREA_TOL;

pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;

/// Linear-part radius and translation box of the random audit maps.
pub const AUDIT_MAP_RADIUS: f64 = 2.0;
pub const AUDIT_TRANSLATION_BOX: f64 = 1.0;

#[derive(Parser, Debug)]
#[command(name = "aip", version, about = "Affine invariant points of convex polygons")]
pub struct Cli {
    /// Worker threads for the estimator.
    #[arg(long, env = "AIP_THREADS", global = true)]
    pub threads: Option<usize>,
    /// Embed the elapsed wall-clock time in the output manifest.
    #[arg(long, global = true)]
    pub record_time: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute an affine invariant point of a body.
    Point(PointArgs),
    /// Sweep `k` and report the distance of `T_k(K)` to the anchor.
    Converge(ConvergeArgs),
    /// Report the affine automorphism group and its fixed set.
    Symmetry {
        body: PathBuf,
    },
    /// Equivariance residuals of point rules under random maps.
    Audit(AuditArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Centroid,
    John,
    Tk,
}

#[derive(Args, Debug, Clone)]
pub struct EstimatorArgs {
    #[arg(long, default_value_t = 8)]
    pub k: u32,
    #[arg(long, default_value_t = 200_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 16.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of R-doubling rounds.
    #[arg(long, default_value_t = 1)]
    pub rounds: u32,
}

impl EstimatorArgs {
    fn config(&self, threads: Option<usize>) -> EstimatorConfig {
        EstimatorConfig {
            k: self.k,
            samples: self.samples,
            radius: self.radius,
            seed: self.seed,
            r_doubling_rounds: self.rounds,
            threads,
            ..Default::default()
        }
    }
}

#[derive(Args, Debug)]
pub struct PointArgs {
    pub body: PathBuf,
    #[arg(long, value_enum, default_value_t = Rule::Centroid)]
    pub rule: Rule,
    /// Anchor `x,y`; defaults to the centroid of the base body.
    #[arg(long, value_parser = parse_point)]
    pub anchor: Option<Point>,
    /// Unit-area reference body `K`; defaults to the body itself.
    #[arg(long)]
    pub base_body: Option<PathBuf>,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
}

#[derive(Args, Debug)]
pub struct ConvergeArgs {
    pub body: PathBuf,
    #[arg(long, value_parser = parse_point)]
    pub anchor: Option<Point>,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    pub ks: Vec<u32>,
    /// Skip the fixed-set check on the anchor.
    #[arg(long)]
    pub unsafe_anchor: bool,
    /// CSV destination; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    /// Directory of polygon JSON files.
    pub bodies: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "centroid,john")]
    pub rules: Vec<Rule>,
    #[arg(long, default_value_t = 20)]
    pub maps: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
}

fn parse_point(s: &str) -> std::result::Result<Point, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected x,y but got {s:?}"));
    }
    let x = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let y = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok(Point::new(x, y))
}

/// Reproducibility record embedded in every output.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub bodies: Vec<String>,
    pub config: serde_json::Value,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl RunManifest {
    fn comment_lines(&self) -> String {
        let text = serde_json::to_string_pretty(self).expect("manifest json");
        text.lines().map(|l| format!("# {l}\n")).collect()
    }
}

/// A failure carrying the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<AipError> for CliError {
    fn from(e: AipError) -> Self {
        let code = match e {
            AipError::Parse(_) | AipError::DegenerateBody(_) => EXIT_PARSE,
            AipError::DegenerateWeights { .. } => EXIT_DEGENERATE,
            AipError::Config(_)
            | AipError::InvalidRadius(_)
            | AipError::SingularMap { .. }
            | AipError::NotUnimodular { .. }
            | AipError::TruncationTooSmall { .. } => EXIT_PRECONDITION,
            AipError::QuadratureFailure(_) | AipError::ConvergenceFailure { .. } => EXIT_INTERNAL,
        };
        CliError { code, message: e.to_string() }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError { code: EXIT_PARSE, message: format!("{}: {e}", path.display()) }
}

pub fn read_body(path: &Path) -> Result<ConvexPolygon, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    ConvexPolygon::from_json_str(&text).map_err(|e| {
        let mut err = CliError::from(e);
        err.message = format!("{}: {}", path.display(), err.message);
        err
    })
}

fn require_unit_area(p: &ConvexPolygon, path: &Path) -> Result<(), CliError> {
    let a = p.area();
    if (a - 1.0).abs() > UNIT_AREA_TOL {
        return Err(CliError {
            code: EXIT_PRECONDITION,
            message: format!("{}: reference body must have unit area, got {a}", path.display()),
        });
    }
    Ok(())
}

fn config_json(cfg: &EstimatorConfig) -> serde_json::Value {
    json!({
        "k": cfg.k,
        "samples": cfg.samples,
        "R": cfg.radius,
        "seed": cfg.seed,
        "r_doubling_rounds": cfg.r_doubling_rounds,
        "threads": cfg.threads,
    })
}

/// Estimate record `{value, std_error, ess, r_stability, k, samples, R, seed}`.
pub fn estimate_json(e: &PointEstimate, cfg: &EstimatorConfig) -> serde_json::Value {
    json!({
        "value": e.value,
        "std_error": e.std_error,
        "ess": e.ess,
        "r_stability": e.r_stability,
        "k": cfg.k,
        "samples": cfg.samples,
        "R": cfg.radius,
        "seed": cfg.seed,
    })
}

/// CSV rows of a convergence sweep, header included.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "value_x", "value_y", "se_x", "se_y", "err_to_v"]).expect("csv");
    for r in rows {
        let e = &r.estimate;
        w.serialize((r.k, e.value[0], e.value[1], e.std_error[0], e.std_error[1], r.err_to_anchor)).expect("csv");
    }
    String::from_utf8(w.into_inner().expect("csv")).expect("utf8")
}

/// One row of an equivariance audit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditRow {
    pub body: String,
    pub rule: Rule,
    pub map: usize,
    pub residual: Option<f64>,
    /// Tolerance the residual is judged against.
    pub tolerance: Option<f64>,
    /// `ok`, or the exit code of the failure.
    pub status: String,
}

impl AuditRow {
    pub fn passed(&self) -> bool {
        matches!((self.residual, self.tolerance), (Some(r), Some(t)) if r <= t)
    }
}

/// Random volume-preserving map: linear part Haar-distributed on `S_2`,
/// translation uniform on `[−1, 1]²`.
pub fn audit_map(seed: u64, index: usize) -> VolumePreservingAffineMap {
    let mut rng = stream_rng(seed, index as u64);
    let m = sample_sl2pm(AUDIT_MAP_RADIUS, &mut rng).expect("valid radius").phi.r;
    let b = AUDIT_TRANSLATION_BOX;
    let x = Point::new(rng.random_range(-b..b), rng.random_range(-b..b));
    VolumePreservingAffineMap::new(m, x)
}

fn map_body(p: &ConvexPolygon, phi: &VolumePreservingAffineMap) -> ConvexPolygon {
    p.apply_affine(&phi.to_affine()).expect("volume-preserving map is invertible")
}

/// Residuals `|P(φK) − φ(P(K))|` for each rule and map. The `tk` rule uses
/// the unit-area normalization of each body as both `K` and `L` with the
/// centroid as anchor, and is judged against `3σ + r_stability`.
pub fn audit(bodies: &[(String, ConvexPolygon)], rules: &[Rule], maps: usize, cfg: &EstimatorConfig) -> Vec<AuditRow> {
    let mut rows = Vec::new();
    for (name, body) in bodies {
        for &rule in rules {
            rows.extend(audit_rule(name, body, rule, maps, cfg));
        }
    }
    rows
}

fn audit_rule(name: &str, body: &ConvexPolygon, rule: Rule, maps: usize, cfg: &EstimatorConfig) -> Vec<AuditRow> {
    let row = |map: usize, outcome: Result<(f64, f64), CliError>| {
        let (residual, tolerance, status) = match outcome {
            Ok((r, t)) => (Some(r), Some(t), "ok".to_string()),
            Err(e) => (None, None, e.code.to_string()),
        };
        AuditRow { body: name.to_string(), rule, map, residual, tolerance, status }
    };
    match rule {
        Rule::Centroid | Rule::John => {
            let (eval, tol) = match rule {
                Rule::Centroid => (centroid_rule(), 1e-10),
                _ => (john_rule(), 1e-5),
            };
            let base = eval.apply(body).map_err(CliError::from);
            (0..maps)
                .map(|j| {
                    let phi = audit_map(cfg.seed, j);
                    let outcome = base.as_ref().map_err(|e| CliError { code: e.code, message: e.message.clone() }).and_then(|p0| {
                        let p1 = eval.apply(&map_body(body, &phi))?;
                        Ok(((p1 - phi.apply(p0)).norm(), tol))
                    });
                    row(j, outcome)
                })
                .collect()
        }
        Rule::Tk => {
            let (unit, _) = body.normalize_to_unit_area();
            let anchor = unit.centroid();
            let base = estimate_tk_unit(&unit, &anchor, &unit, cfg);
            (0..maps)
                .map(|j| {
                    let phi = audit_map(cfg.seed, j);
                    let outcome = match &base {
                        Err(e) => Err(CliError::from(e.clone())),
                        Ok(e0) => {
                            let c = EstimatorConfig { seed: cfg.seed.wrapping_add(1 + j as u64), ..cfg.clone() };
                            estimate_tk_unit(&unit, &anchor, &map_body(&unit, &phi), &c)
                                .map_err(CliError::from)
                                .map(|e1| {
                                    let lam = phi.r.norm();
                                    let residual = (e1.point() - phi.apply(&e0.point())).norm();
                                    let sigma = e1.sigma().hypot(lam * e0.sigma());
                                    (residual, 3.0 * sigma + e1.r_stability + lam * e0.r_stability)
                                })
                        }
                    };
                    row(j, outcome)
                })
                .collect()
        }
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let i = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[i]
}

fn audit_csv(rows: &[AuditRow], rules: &[Rule]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["body", "rule", "map", "residual", "tolerance", "status"]).expect("csv");
    for r in rows {
        let name = format!("{:?}", r.rule).to_lowercase();
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        w.write_record([r.body.clone(), name, r.map.to_string(), opt(r.residual), opt(r.tolerance), r.status.clone()]).expect("csv");
    }
    let mut out = String::from_utf8(w.into_inner().expect("csv")).expect("utf8");
    for rule in rules {
        let mut res: Vec<f64> = rows.iter().filter(|r| r.rule == *rule).filter_map(|r| r.residual).collect();
        if res.is_empty() {
            continue;
        }
        res.sort_by(f64::total_cmp);
        let passed = rows.iter().filter(|r| r.rule == *rule && r.passed()).count();
        let total = rows.iter().filter(|r| r.rule == *rule).count();
        out += &format!(
            "# summary {}: median {:e} p95 {:e} max {:e} within tolerance {passed}/{total}\n",
            format!("{rule:?}").to_lowercase(),
            quantile(&res, 0.5),
            quantile(&res, 0.95),
            res[res.len() - 1],
        );
    }
    out
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError { code: EXIT_INTERNAL, message: format!("{}: {e}", p.display()) }),
        None => {
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError { code: EXIT_INTERNAL, message: e.to_string() })
        }
    }
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

fn run_command(cli: &Cli, start: Instant) -> Result<(), CliError> {
    let manifest = |command: &str, bodies: Vec<String>, config: serde_json::Value| RunManifest {
        command: command.to_string(),
        bodies,
        config,
        version: env!("CARGO_PKG_VERSION"),
        wall_clock_seconds: cli.record_time.then(|| start.elapsed().as_secs_f64()),
    };
    match &cli.command {
        Command::Point(args) => {
            let body = read_body(&args.body)?;
            let mut paths = vec![path_string(&args.body)];
            let out = match args.rule {
                Rule::Centroid | Rule::John => {
                    let rule = if args.rule == Rule::Centroid { centroid_rule() } else { john_rule() };
                    let p = rule.apply(&body)?;
                    let m = manifest("point", paths, json!({"rule": rule.name}));
                    json!({"value": [p.x, p.y], "rule": rule.name, "manifest": m})
                }
                Rule::Tk => {
                    let base_path = args.base_body.clone().unwrap_or_else(|| args.body.clone());
                    let base = read_body(&base_path)?;
                    require_unit_area(&base, &base_path)?;
                    paths.push(path_string(&base_path));
                    let anchor = args.anchor.unwrap_or_else(|| base.centroid());
                    let cfg = args.estimator.config(cli.threads);
                    let e = estimate_tk(&base, &anchor, &body, &cfg)?;
                    let mut config = config_json(&cfg);
                    config["rule"] = json!("tk");
                    config["anchor"] = json!([anchor.x, anchor.y]);
                    let mut out = estimate_json(&e, &cfg);
                    out["manifest"] = serde_json::to_value(manifest("point", paths, config)).expect("json");
                    out
                }
            };
            emit(None, &(serde_json::to_string_pretty(&out).expect("json") + "\n"))
        }
        Command::Converge(args) => {
            let body = read_body(&args.body)?;
            require_unit_area(&body, &args.body)?;
            let anchor = args.anchor.unwrap_or_else(|| body.centroid());
            let cfg = args.estimator.config(cli.threads);
            let rows = if args.unsafe_anchor {
                convergence_sweep_unchecked(&body, &anchor, &args.ks, &cfg)?
            } else {
                convergence_sweep(&body, &anchor, &args.ks, &cfg)?
            };
            let mut config = config_json(&cfg);
            config["anchor"] = json!([anchor.x, anchor.y]);
            config["ks"] = json!(args.ks);
            config["unsafe_anchor"] = json!(args.unsafe_anchor);
            let m = manifest("converge", vec![path_string(&args.body)], config);
            emit(args.output.as_deref(), &(m.comment_lines() + &sweep_csv(&rows)))
        }
        Command::Symmetry { body } => {
            let p = read_body(body)?;
            let mut out = automorphism_group(&p).to_json_value();
            out["manifest"] = serde_json::to_value(manifest("symmetry", vec![path_string(body)], json!({}))).expect("json");
            emit(None, &(serde_json::to_string_pretty(&out).expect("json") + "\n"))
        }
        Command::Audit(args) => {
            let mut files: Vec<PathBuf> = std::fs::read_dir(&args.bodies)
                .map_err(|e| io_error(&args.bodies, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            let mut bodies = Vec::new();
            for f in &files {
                match read_body(f) {
                    Ok(p) => bodies.push((path_string(f), p)),
                    Err(e) => eprintln!("skipping {}", e.message),
                }
            }
            let cfg = args.estimator.config(cli.threads);
            let rows = audit(&bodies, &args.rules, args.maps, &cfg);
            let mut config = config_json(&cfg);
            config["rules"] = json!(args.rules);
            config["maps"] = json!(args.maps);
            let m = manifest("audit", files.iter().map(|f| path_string(f)).collect(), config);
            emit(args.output.as_deref(), &(m.comment_lines() + &audit_csv(&rows, &args.rules)))
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let start = Instant::now();
    let result = run_command(&cli, start);
    if !cli.record_time {
        eprintln!("wall-clock: {:.3}s", start.elapsed().as_secs_f64());
    }
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
