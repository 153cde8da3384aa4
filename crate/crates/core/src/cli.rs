//! Command-line front end: `solve`, `forward`, `validate` and `table3`.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 solver failure,
//! 4 a validation check failed.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::boundary::{forward_images, Boundary};
use crate::cutting_plane::{log_mu_constraint, solve_all, FourResults, ProblemSpec, Program};
use crate::error::{Error, Result};
use crate::fpt::{cdf_at_level, cdf_from_measure, density_at_level, zeta_certificate, ZetaCertificate};
use crate::kernel::log_kernel;
use crate::mc::{mc_conditional_hit, mc_fpt_cdf, McConfig};
use crate::measure::AtomicMeasure;
use crate::representability::{assess, tail_mass_sweep, RepresentabilityReport, DEFAULT_MASS_TOL, DEFAULT_REP_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

const CERTIFICATE_POINTS: usize = 2048;
const FORWARD_TOL: f64 = 1e-13;
const TABLE3_N_LAMBDA: [usize; 3] = [100, 200, 500];

#[derive(Parser, Debug)]
#[command(name = "fpt-images", version, about = "First-passage times of Brownian motion through the inverse method of images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the four programs and write report.json, cuts.csv, curve.csv and cdf.csv
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Time range a..b for the generated boundaries in curve.csv (default 0..t0)
        #[arg(long, value_name = "A..B")]
        emit_forward: Option<String>,
        /// Number of points in curve.csv and cdf.csv
        #[arg(long)]
        points: Option<usize>,
    },
    /// Generate the boundary of a given image measure and its first-passage law
    Forward {
        /// JSON file holding [[theta, weight], ...]
        #[arg(long)]
        measure: PathBuf,
        /// Time range a..b
        #[arg(long, value_name = "A..B")]
        grid: Option<String>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a previous solve against Monte Carlo and write validate.json
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        /// report.json of the solve (default: <out>/report.json)
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Tail-mass sweep over n_lambda in {100, 200, 500}, written to table3.csv
    Table3 {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CommonArgs {
    /// JSON file with any of the options below; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// linear:A,M | sqrt:C | log:C | quadratic:A | tabulated:FILE.csv
    #[arg(long)]
    boundary: Option<String>,
    #[arg(long)]
    t0: Option<f64>,
    /// Evaluation point x0
    #[arg(long, conflicts_with = "x0_offset")]
    x0: Option<f64>,
    /// Evaluation point given as b(t0) - DELTA
    #[arg(long, value_name = "DELTA")]
    x0_offset: Option<f64>,
    /// Number of theta atoms
    #[arg(long)]
    n: Option<usize>,
    /// Length of the theta atom grid
    #[arg(long)]
    l: Option<f64>,
    /// Number of time atoms
    #[arg(long)]
    n_lambda: Option<usize>,
    /// Length of the theta window for time-atom programs
    #[arg(long)]
    l_theta: Option<f64>,
    #[arg(long)]
    k_max: Option<usize>,
    /// Constraint violation tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    paths: Option<usize>,
    /// Monte Carlo steps per unit time
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn merged(self) -> Result<Self> {
        let Some(path) = &self.config else { return Ok(self) };
        let text = fs::read_to_string(path)?;
        let file: CommonArgs = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(CommonArgs {
            config: self.config.clone(),
            boundary: self.boundary.or(file.boundary),
            t0: self.t0.or(file.t0),
            x0: self.x0.or(if self.x0_offset.is_some() { None } else { file.x0 }),
            x0_offset: self.x0_offset.or(if self.x0.is_some() { None } else { file.x0_offset }),
            n: self.n.or(file.n),
            l: self.l.or(file.l),
            n_lambda: self.n_lambda.or(file.n_lambda),
            l_theta: self.l_theta.or(file.l_theta),
            k_max: self.k_max.or(file.k_max),
            tol: self.tol.or(file.tol),
            paths: self.paths.or(file.paths),
            steps: self.steps.or(file.steps),
            seed: self.seed.or(file.seed),
            out: self.out.or(file.out),
        })
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: ProblemSpec,
    pub mc: McConfig,
    pub out: PathBuf,
}

fn resolve(args: CommonArgs, boundary: Option<Boundary>, default_offset: f64) -> Result<RunConfig> {
    let args = args.merged()?;
    let boundary = match (boundary, &args.boundary) {
        (_, Some(text)) => parse_boundary(text)?,
        (Some(b), None) => b,
        (None, None) => return Err(Error::Config("--boundary is required".into())),
    };
    let t0 = args.t0.unwrap_or(1.0);
    if !(t0.is_finite() && t0 > 0.0) {
        return Err(Error::Config(format!("t0 must be positive, got {t0}")));
    }
    if t0 > boundary.horizon() {
        return Err(Error::Config(format!("t0 = {t0} lies beyond the boundary table")));
    }
    let bt0 = boundary.eval(t0)?;
    let x0 = match (args.x0, args.x0_offset) {
        (Some(x), _) => x,
        (None, Some(d)) => bt0 - d,
        (None, None) => bt0 - default_offset,
    };
    let spec = ProblemSpec {
        boundary,
        t0,
        x0,
        n: args.n.unwrap_or(100),
        l: args.l.unwrap_or(5.0),
        n_lambda: args.n_lambda.unwrap_or(100),
        l_theta: args.l_theta.unwrap_or(5.0),
        k_max: args.k_max.unwrap_or(20),
        violation_tol: args.tol.unwrap_or(1e-9),
        scan_points: 2048,
    };
    spec.validate()?;
    let defaults = McConfig::default();
    let mc = McConfig {
        paths: args.paths.unwrap_or(defaults.paths),
        steps: args.steps.unwrap_or(defaults.steps),
        seed: args.seed.unwrap_or(defaults.seed),
        bridge_correction: true,
    };
    mc.validate()?;
    Ok(RunConfig { spec, mc, out: args.out.unwrap_or_else(|| PathBuf::from(".")) })
}

/// Parses `kind:params`, e.g. `linear:1,1`, `sqrt:1`, `tabulated:knots.csv`.
pub fn parse_boundary(text: &str) -> Result<Boundary> {
    let (kind, params) = text.split_once(':').ok_or_else(|| Error::Config(format!("boundary `{text}` needs the form kind:params")))?;
    if kind == "tabulated" {
        return read_knots(Path::new(params));
    }
    let nums = params
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number `{p}` in boundary `{text}`"))))
        .collect::<Result<Vec<f64>>>()?;
    let arity = |k: usize| {
        if nums.len() == k {
            Ok(())
        } else {
            Err(Error::Config(format!("boundary kind `{kind}` takes {k} parameter(s), got {}", nums.len())))
        }
    };
    match kind {
        "linear" => arity(2).and_then(|_| Boundary::linear(nums[0], nums[1])),
        "sqrt" => arity(1).and_then(|_| Boundary::sqrt_shift(nums[0])),
        "log" => arity(1).and_then(|_| Boundary::log_shift(nums[0])),
        "quadratic" => arity(1).and_then(|_| Boundary::quadratic(nums[0])),
        other => Err(Error::Config(format!("unknown boundary kind `{other}`"))),
    }
}

/// Reads a two-column CSV `t,b` with a header row.
fn read_knots(path: &Path) -> Result<Boundary> {
    let mut rdr = csv::Reader::from_path(path)?;
    let knots = rdr.deserialize::<(f64, f64)>().collect::<std::result::Result<Vec<_>, _>>()?;
    Boundary::tabulated(knots)
}

fn parse_range(text: &str) -> Result<(f64, f64)> {
    let bad = || Error::Config(format!("range `{text}` needs the form a..b with a < b"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite() && a >= 0.0 && a < b) {
        return Err(bad());
    }
    Ok((a, b))
}

/// Points `a + (b-a)k/points`, keeping only positive times.
fn time_grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    (0..=points).map(|k| if k == points { b } else { a + (b - a) * k as f64 / points as f64 }).filter(|&t| t > 0.0).collect()
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Solver { .. } | Error::InvalidLp(_) | Error::NonFinite(_) => EXIT_SOLVER,
        _ => EXIT_CONFIG,
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub boundary: String,
    pub spec: ProblemSpec,
    pub d1: f64,
    pub p1: f64,
    pub d2: f64,
    pub p2: f64,
    pub verdict: crate::representability::Verdict,
    pub zeta_d1: ZetaCertificate,
    pub zeta_p2: ZetaCertificate,
    pub assessment: RepresentabilityReport,
    pub results: FourResults,
}

#[derive(Serialize)]
struct CutRow {
    program: String,
    k: usize,
    cut_location: f64,
    violation: f64,
    objective: f64,
}

#[derive(Serialize)]
struct CurveRow {
    t: f64,
    b: f64,
    b_mu1: f64,
    b_mu2: f64,
    r_mu1: f64,
    r_mu2: f64,
}

#[derive(Serialize)]
struct CdfRow {
    t: f64,
    #[serde(rename = "F_mu1")]
    f_mu1: f64,
    #[serde(rename = "F_mu2")]
    f_mu2: f64,
}

#[derive(Serialize)]
struct ForwardRow {
    t: f64,
    b: f64,
    cdf: f64,
    density: f64,
}

fn cmd_solve(cfg: &RunConfig, emit: Option<(f64, f64)>, points: usize) -> Result<SolveReport> {
    let spec = &cfg.spec;
    let b = &spec.boundary;
    let results = solve_all(spec)?;
    let assessment = assess(spec, &results, DEFAULT_REP_TOL, DEFAULT_MASS_TOL)?;
    let zeta_d1 = zeta_certificate(&results.d1.measure, b, spec.t0, CERTIFICATE_POINTS)?;
    let zeta_p2 = zeta_certificate(&results.p2.measure, b, spec.t0, CERTIFICATE_POINTS)?;
    fs::create_dir_all(&cfg.out)?;

    let mut w = csv_writer(&cfg.out.join("cuts.csv"))?;
    for p in Program::ALL {
        for rec in &results.get(p).cut_state.history {
            w.serialize(CutRow {
                program: p.to_string(),
                k: rec.k,
                cut_location: rec.cut_location,
                violation: rec.violation,
                objective: rec.objective,
            })?;
        }
    }
    w.flush()?;

    let (mu1, mu2) = (&results.d1.measure, &results.p2.measure);
    let (a, z) = emit.unwrap_or((0.0, spec.t0));
    let mut w = csv_writer(&cfg.out.join("curve.csv"))?;
    for t in time_grid(a, z, points) {
        let forward = |mu: &AtomicMeasure| if mu.is_empty() { Ok(f64::NAN) } else { forward_images(mu, t, FORWARD_TOL) };
        let (bt, r1, r2) = if t <= b.horizon() {
            (b.eval(t)?, log_mu_constraint(mu1, b, t)?.exp(), log_mu_constraint(mu2, b, t)?.exp())
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        w.serialize(CurveRow { t, b: bt, b_mu1: forward(mu1)?, b_mu2: forward(mu2)?, r_mu1: r1, r_mu2: r2 })?;
    }
    w.flush()?;

    let mut w = csv_writer(&cfg.out.join("cdf.csv"))?;
    for t in time_grid(0.0, spec.t0, points) {
        w.serialize(CdfRow { t, f_mu1: cdf_from_measure(mu1, b, t)?, f_mu2: cdf_from_measure(mu2, b, t)? })?;
    }
    w.flush()?;

    let report = SolveReport {
        boundary: b.label(),
        spec: spec.clone(),
        d1: results.d1.optimal_value,
        p1: results.p1.optimal_value,
        d2: results.d2.optimal_value,
        p2: results.p2.optimal_value,
        verdict: assessment.verdict,
        zeta_d1,
        zeta_p2,
        assessment,
        results,
    };
    write_json(&cfg.out.join("report.json"), &report)?;
    Ok(report)
}

fn cmd_forward(measure: &Path, range: (f64, f64), points: usize, out: &Path) -> Result<usize> {
    let text = fs::read_to_string(measure)?;
    let mu: AtomicMeasure = serde_json::from_str(&text).map_err(|e| Error::InvalidMeasure(format!("{}: {e}", measure.display())))?;
    if mu.is_empty() {
        return Err(Error::InvalidMeasure("measure has no atoms".into()));
    }
    fs::create_dir_all(out)?;
    let mut w = csv_writer(&out.join("curve.csv"))?;
    let mut rows = 0;
    for t in time_grid(range.0, range.1, points) {
        let x = forward_images(&mu, t, FORWARD_TOL)?;
        w.serialize(ForwardRow { t, b: x, cdf: cdf_at_level(&mu, t, x)?, density: density_at_level(&mu, t, x)? })?;
        rows += 1;
    }
    w.flush()?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub boundary: String,
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

fn check(name: String, value: f64, lower: f64, upper: f64) -> Check {
    Check { name, pass: value >= lower && value <= upper, value, lower, upper }
}

fn cmd_validate(report: &SolveReport, mc: &McConfig, out: &Path) -> Result<ValidationReport> {
    let spec = &report.spec;
    let b = &spec.boundary;
    let (mu1, mu2) = (&report.results.d1.measure, &report.results.p2.measure);
    let r_at = |mu: &AtomicMeasure| mu.log_sum(|theta| log_kernel(spec.t0, spec.x0, theta)).exp();
    let mut checks = Vec::new();

    let hit = mc_conditional_hit(b, spec.t0, spec.x0, mc)?;
    checks.push(check(
        "sandwich".into(),
        hit.estimate,
        r_at(mu1) - 3.0 * hit.std_error,
        r_at(mu2) + 3.0 * hit.std_error,
    ));

    let (mu, zeta) = if report.zeta_p2.sup_error_bound() < report.zeta_d1.sup_error_bound() {
        (mu2, &report.zeta_p2)
    } else {
        (mu1, &report.zeta_d1)
    };
    let bound = zeta.sup_error_bound();
    for k in 1..=4 {
        let t = spec.t0 * k as f64 / 4.0;
        let est = mc_fpt_cdf(b, t, mc)?;
        let f = cdf_from_measure(mu, b, t)?;
        let slack = bound + 3.0 * est.std_error;
        checks.push(check(format!("cdf_bound_t{t}"), est.estimate - f, -slack, slack));
    }
    let all_pass = checks.iter().all(|c| c.pass);
    let v = ValidationReport { boundary: report.boundary.clone(), paths: mc.paths, steps: mc.steps, seed: mc.seed, checks, all_pass };
    fs::create_dir_all(out)?;
    write_json(&out.join("validate.json"), &v)?;
    Ok(v)
}

#[derive(Serialize)]
struct Table3Row {
    boundary: String,
    #[serde(rename = "100")]
    n100: f64,
    #[serde(rename = "200")]
    n200: f64,
    #[serde(rename = "500")]
    n500: f64,
}

fn cmd_table3(args: CommonArgs) -> Result<Vec<(String, [f64; 3])>> {
    let args = args.merged()?;
    let boundaries = match &args.boundary {
        Some(text) => vec![parse_boundary(text)?],
        None => vec![Boundary::sqrt_shift(1.0)?, Boundary::log_shift(2.0)?, Boundary::quadratic(1.0)?],
    };
    let mut table = Vec::new();
    let mut out = None;
    for b in boundaries {
        let cfg = resolve(CommonArgs { boundary: None, config: None, ..args.clone() }, Some(b), 0.1)?;
        let rows = tail_mass_sweep(&cfg.spec, &TABLE3_N_LAMBDA)?;
        table.push((cfg.spec.boundary.label(), [rows[0].tail_mass, rows[1].tail_mass, rows[2].tail_mass]));
        out = Some(cfg.out);
    }
    let out = out.unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out)?;
    let mut w = csv_writer(&out.join("table3.csv"))?;
    for (label, m) in &table {
        w.serialize(Table3Row { boundary: label.clone(), n100: m[0], n200: m[1], n500: m[2] })?;
    }
    w.flush()?;
    Ok(table)
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve { common, emit_forward, points } => {
            let cfg = resolve(common, None, 1.0)?;
            let emit = emit_forward.as_deref().map(parse_range).transpose()?;
            let r = cmd_solve(&cfg, emit, points.unwrap_or(200).max(1))?;
            println!("{}: d1 {:.7} p1 {:.7} d2 {:.7} p2 {:.7} -> {}", r.boundary, r.d1, r.p1, r.d2, r.p2, r.verdict);
            Ok(EXIT_OK)
        }
        Command::Forward { measure, grid, points, out } => {
            let range = grid.as_deref().map(parse_range).transpose()?.unwrap_or((0.0, 1.0));
            let out = out.unwrap_or_else(|| PathBuf::from("."));
            let rows = cmd_forward(&measure, range, points.unwrap_or(200).max(1), &out)?;
            println!("wrote {rows} rows to {}", out.join("curve.csv").display());
            Ok(EXIT_OK)
        }
        Command::Validate { common, report } => {
            let spec_args = common.clone().merged()?;
            let out = spec_args.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let path = report.unwrap_or_else(|| out.join("report.json"));
            let text = fs::read_to_string(&path)?;
            let solved: SolveReport = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let cfg = resolve(spec_args, Some(solved.spec.boundary.clone()), 1.0)?;
            let v = cmd_validate(&solved, &cfg.mc, &out)?;
            for c in &v.checks {
                println!("{:<16} {} {:.6e} in [{:.6e}, {:.6e}]", c.name, if c.pass { "pass" } else { "FAIL" }, c.value, c.lower, c.upper);
            }
            Ok(if v.all_pass { EXIT_OK } else { EXIT_VALIDATION })
        }
        Command::Table3 { common } => {
            let table = cmd_table3(common)?;
            println!("{:<16} {:>8} {:>8} {:>8}", "boundary", 100, 200, 500);
            for (label, m) in table {
                println!("{label:<16} {:>8.3} {:>8.3} {:>8.3}", m[0], m[1], m[2]);
            }
            Ok(EXIT_OK)
        }
    }
}

/// Runs the command line given by `args` (including the program name) and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
