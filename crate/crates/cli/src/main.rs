//! Command-line front end: builds problem instances from flags or a
//! plain-text config file, drives the library, and emits deterministic CSV
//! and SVG artifacts.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 numeric error.

use clap::{Args, Parser, Subcommand};
use plaplace_core::eigen::{find_eigenvalue, find_eigenvalues, reconstruct_eigenfunction};
use plaplace_core::error::CoreError;
use plaplace_core::multiplicity::{estimate_d_star, find_solutions, scan_theta, spiral_verify};
use plaplace_core::nonlinearity::{GrowthClass, Nonlinearity};
use plaplace_core::ptrig::{compute_pi_p, PTrigTable};
use plaplace_core::report::{eigen_csv, fmt_f64, phase_portrait_svg, profile_csv, scan_csv, solutions_csv};
use plaplace_core::shooter::{
    energy_trace, integrate_cauchy, pohozaev_residual, Problem, RadialDomain, ShootOpts,
};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

// ---------------------------------------------------------------------------
// Failure handling
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum Failure {
    /// Bad flags, bad config file, bad paths: exit 2.
    Config(String),
    /// The mathematics did not cooperate at runtime: exit 3.
    Numeric(String),
    /// An invariant suite reported a violation: exit 1.
    Verification(String),
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure::Config(msg.into())
    }
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numeric(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Domain(_) => Failure::Config(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

// ---------------------------------------------------------------------------
// Flags
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "plaplace",
    version,
    about = "Shooting-method toolkit for radial p-Laplacian Neumann problems on balls and annuli",
    after_help = "Config file: plain text, one `key = value` per line, `#` starts a comment.\n\
                  Keys mirror the long flags (p, n, r1, r2, kind, q, r, f-table, eta, tol, d,\n\
                  out, svg, kmax, profiles, d-min, d-max, grid, k, out-dir, epsilon).\n\
                  A flag given on the command line overrides the file value.\n\
                  Env: PLAPLACE_THREADS caps the worker count.\n\
                  Exit codes: 0 ok, 1 verification failure, 2 config error, 3 numeric error."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a nonlinearity and print its derived quantities
    CheckF(CheckFArgs),
    /// Integrate one trajectory and emit its profile CSV (and optionally an SVG)
    Shoot(ShootArgs),
    /// Compute radial Neumann eigenvalues (CSV `k,lambda`)
    Eigen(EigenArgs),
    /// Sweep the outer winding angle over a datum grid (CSV `d,thetaR2`)
    Scan(ScanArgs),
    /// Locate all Neumann solutions up to a winding depth
    Solve(SolveArgs),
    /// Run invariant suites: ptrig | energy | eigen | appendix | all
    Verify(VerifyArgs),
    /// Emit a phase-portrait SVG for one trajectory
    Plot(PlotArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Plain-text config file (`key = value`, `#` comments); flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Exponent p > 1 of the p-Laplacian
    #[arg(long)]
    p: Option<f64>,
    /// Space dimension N >= 1
    #[arg(long = "N")]
    n: Option<u32>,
    /// Inner radius (0 selects a ball)
    #[arg(long = "R1")]
    r1: Option<f64>,
    /// Outer radius
    #[arg(long = "R2")]
    r2: Option<f64>,
    /// Domain kind override: `ball` or `annulus` (inferred from R1 otherwise)
    #[arg(long)]
    kind: Option<String>,
    /// Prototype growth power q (p <= r < q)
    #[arg(long)]
    q: Option<f64>,
    /// Prototype dissipation power r (p <= r < q)
    #[arg(long)]
    r: Option<f64>,
    /// Two-column file of (s, f(s)) samples used instead of the prototype
    #[arg(long = "f-table")]
    f_table: Option<PathBuf>,
    /// Threshold eta in (0, 1); computed from the tail quotient when omitted
    #[arg(long)]
    eta: Option<f64>,
    /// Tolerance (meaning depends on the subcommand)
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct CheckFArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ShootArgs {
    #[command(flatten)]
    common: Common,
    /// Initial datum u(R1) = d
    #[arg(long)]
    d: Option<f64>,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a phase-portrait SVG here
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct EigenArgs {
    #[command(flatten)]
    common: Common,
    /// Largest eigenvalue index to compute
    #[arg(long)]
    kmax: Option<u32>,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-index eigenfunction profile CSVs
    #[arg(long)]
    profiles: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    common: Common,
    /// Smallest datum of the log-spaced grid
    #[arg(long = "d-min")]
    d_min: Option<f64>,
    /// Largest datum of the log-spaced grid
    #[arg(long = "d-max")]
    d_max: Option<f64>,
    /// Number of grid points (default 101)
    #[arg(long)]
    grid: Option<usize>,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// Winding depth: solutions with up to k interior crossings per side
    #[arg(long)]
    k: Option<u32>,
    /// Output directory (default: current directory)
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Suite to run: ptrig | energy | eigen | appendix | all
    suite: String,
    /// Winding depth for the appendix suite (default 1)
    #[arg(long)]
    k: Option<u32>,
    /// Boundary-layer fraction for the appendix suite (default 0.1)
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args)]
struct PlotArgs {
    #[command(flatten)]
    common: Common,
    /// Initial datum u(R1) = d
    #[arg(long)]
    d: Option<f64>,
    /// Output SVG path
    #[arg(long)]
    svg: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Config file
// ---------------------------------------------------------------------------

const KNOWN_KEYS: [&str; 21] = [
    "p", "n", "r1", "r2", "kind", "q", "r", "f-table", "eta", "tol", "d", "out", "svg", "kmax",
    "profiles", "d-min", "d-max", "grid", "k", "out-dir", "epsilon",
];

/// Parses `key = value` lines into a map; `#` starts a comment, blank lines
/// are skipped, unknown keys are rejected. Keys are case-insensitive so the
/// file may spell `N = 3` or `R2 = 5` the way the flags do.
fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, Failure> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Failure::config(format!("config line {}: expected `key = value`, got `{raw}`", idx + 1))
        })?;
        let key = key.trim().to_lowercase();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Failure::config(format!(
                "config line {}: unknown key `{key}`",
                idx + 1
            )));
        }
        if value.is_empty() {
            return Err(Failure::config(format!(
                "config line {}: key `{key}` has no value",
                idx + 1
            )));
        }
        map.insert(key, value);
    }
    Ok(map)
}

/// Renders a config map back to its canonical textual form. Parsing the
/// result reproduces the map exactly (the round-trip the config format
/// guarantees).
#[cfg(test)]
fn render_config(map: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    for (k, v) in map {
        out.push_str(&format!("{k} = {v}\n"));
    }
    out
}

struct FileConfig(BTreeMap<String, String>);

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self, Failure> {
        match path {
            None => Ok(FileConfig(BTreeMap::new())),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    Failure::config(format!("cannot read config file {}: {e}", p.display()))
                })?;
                Ok(FileConfig(parse_config_text(&text)?))
            }
        }
    }

    /// Flag value if present, otherwise the parsed file value.
    fn meld<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Failure>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|e| {
                Failure::config(format!("config key `{key}`: cannot parse `{v}`: {e}"))
            }),
        }
    }
}

fn need<T>(v: Option<T>, what: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::config(format!("missing required parameter {what}")))
}

// ---------------------------------------------------------------------------
// Instance building
// ---------------------------------------------------------------------------

/// Fully resolved problem parameters after merging flags over the file.
struct Resolved {
    p: Option<f64>,
    n: Option<u32>,
    r1: Option<f64>,
    r2: Option<f64>,
    kind: Option<String>,
    q: Option<f64>,
    r: Option<f64>,
    f_table: Option<PathBuf>,
    eta: Option<f64>,
    tol: Option<f64>,
}

fn resolve(common: &Common) -> Result<(Resolved, FileConfig), Failure> {
    let file = FileConfig::load(common.config.as_deref())?;
    let resolved = Resolved {
        p: file.meld(common.p, "p")?,
        n: file.meld(common.n, "n")?,
        r1: file.meld(common.r1, "r1")?,
        r2: file.meld(common.r2, "r2")?,
        kind: file.meld(common.kind.clone(), "kind")?,
        q: file.meld(common.q, "q")?,
        r: file.meld(common.r, "r")?,
        f_table: file.meld(common.f_table.clone(), "f-table")?,
        eta: file.meld(common.eta, "eta")?,
        tol: file.meld(common.tol, "tol")?,
    };
    Ok((resolved, file))
}

fn build_domain(c: &Resolved) -> Result<RadialDomain, Failure> {
    let n = need(c.n, "--N")?;
    let r2 = need(c.r2, "--R2")?;
    let r1 = c.r1.unwrap_or(0.0);
    let is_ball = r1 == 0.0;
    match c.kind.as_deref() {
        None => {}
        Some("ball") if !is_ball => {
            return Err(Failure::config(
                "conflicting geometry: kind = ball but R1 > 0 (a ball has R1 = 0)",
            ))
        }
        Some("annulus") if is_ball => {
            return Err(Failure::config(
                "conflicting geometry: kind = annulus but R1 = 0 (an annulus has R1 > 0)",
            ))
        }
        Some("ball") | Some("annulus") => {}
        Some(other) => {
            return Err(Failure::config(format!(
                "unknown domain kind `{other}` (expected `ball` or `annulus`)"
            )))
        }
    }
    let domain = if is_ball {
        RadialDomain::ball(r2, n)
    } else {
        RadialDomain::annulus(r1, r2, n)
    }?;
    Ok(domain)
}

/// Reads a two-column table of `s f(s)` rows (whitespace- or
/// comma-separated; `#` comments).
fn read_f_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read f table {}: {e}", path.display())))?;
    let mut s = Vec::new();
    let mut f = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        if cols.len() != 2 {
            return Err(Failure::config(format!(
                "f table {} line {}: expected two columns, got {}",
                path.display(),
                idx + 1,
                cols.len()
            )));
        }
        for (col, dest) in cols.iter().zip([&mut s, &mut f]) {
            dest.push(col.parse::<f64>().map_err(|e| {
                Failure::config(format!(
                    "f table {} line {}: cannot parse `{col}`: {e}",
                    path.display(),
                    idx + 1
                ))
            })?);
        }
    }
    Ok((s, f))
}

fn build_nonlinearity(c: &Resolved, domain: &RadialDomain) -> Result<Nonlinearity, Failure> {
    let p = need(c.p, "--p")?;
    let growth = if domain.is_ball() {
        GrowthClass::Subcritical
    } else {
        GrowthClass::AnnulusUnrestricted
    };
    if let Some(path) = &c.f_table {
        let (s, f) = read_f_table(path)?;
        Ok(Nonlinearity::from_samples(p, domain.n, &s, &f, c.eta, growth)?)
    } else {
        let q = need(c.q, "--q (or --f-table)")?;
        let r = need(c.r, "--r (or --f-table)")?;
        Ok(Nonlinearity::prototype(p, domain.n, q, r, c.eta, growth)?)
    }
}

fn build_problem(c: &Resolved) -> Result<Problem, Failure> {
    let domain = build_domain(c)?;
    let f = build_nonlinearity(c, &domain)?;
    Ok(Problem::new(domain, f)?)
}

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

fn write_text(path: &Path, content: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() && !dir.exists() {
            std::fs::create_dir_all(dir).map_err(|e| {
                Failure::config(format!("cannot create directory {}: {e}", dir.display()))
            })?;
        }
    }
    std::fs::write(path, content)
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_text(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            lo * (hi / lo).powf(s)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_check_f(args: &CheckFArgs) -> Result<(), Failure> {
    let (c, _) = resolve(&args.common)?;
    // Geometry is optional here: without R2 the check runs in ball mode.
    let p = need(c.p, "--p")?;
    let n = need(c.n, "--N")?;
    let r1 = c.r1.unwrap_or(0.0);
    let is_ball = r1 == 0.0 && c.kind.as_deref() != Some("annulus");
    let growth = if is_ball {
        GrowthClass::Subcritical
    } else {
        GrowthClass::AnnulusUnrestricted
    };
    let f = if let Some(path) = &c.f_table {
        let (s, fv) = read_f_table(path)?;
        Nonlinearity::from_samples(p, n, &s, &fv, c.eta, growth)?
    } else {
        let q = need(c.q, "--q (or --f-table)")?;
        let r = need(c.r, "--r (or --f-table)")?;
        Nonlinearity::prototype(p, n, q, r, c.eta, growth)?
    };
    println!("p        = {}", fmt_f64(f.exps.p));
    println!("p'       = {}", fmt_f64(f.exps.p_conj));
    let p_star = if p < f64::from(n) {
        fmt_f64(f64::from(n) * p / (f64::from(n) - p))
    } else {
        "inf".to_string()
    };
    println!("p*       = {p_star}");
    println!("growth   = {growth:?}");
    println!("eta      = {}", fmt_f64(f.eta()));
    println!("f(1)     = {}", fmt_f64(f.f_hat(1.0)));
    println!("f(1/2)   = {}", fmt_f64(f.f_hat(0.5)));
    println!("f(2)     = {}", fmt_f64(f.f_hat(2.0)));
    println!("F(2)     = {}", fmt_f64(f.big_f_hat(2.0)));
    println!("f*(2)    = {}", fmt_f64(f.f_star(2.0)?));
    println!("admissible");
    Ok(())
}

fn shoot_opts_for(tol: Option<f64>, _domain: &RadialDomain) -> ShootOpts {
    let rtol = tol.unwrap_or(1e-10);
    ShootOpts {
        rtol,
        atol: rtol * 1e-2,
        h_max: None,
        theta_cap: None,
        store_dense: false,
        record_every: 1,
        track_theta: true,
    }
}

fn cmd_shoot(args: &ShootArgs) -> Result<(), Failure> {
    let (c, file) = resolve(&args.common)?;
    let prob = build_problem(&c)?;
    let d = need(file.meld(args.d, "d")?, "--d")?;
    let opts = shoot_opts_for(c.tol, &prob.domain);
    let traj = integrate_cauchy(&prob, d, &opts)?;
    let csv = profile_csv(&prob, &traj);
    let out = file_path_opt(&file, args.out.clone(), "out")?;
    emit(out.as_deref(), &csv)?;
    if let Some(svg_path) = file_path_opt(&file, args.svg.clone(), "svg")? {
        write_text(&svg_path, &phase_portrait_svg(&prob, &traj))?;
    }
    Ok(())
}

fn file_path_opt(
    file: &FileConfig,
    flag: Option<PathBuf>,
    key: &str,
) -> Result<Option<PathBuf>, Failure> {
    file.meld(flag, key)
}

fn cmd_eigen(args: &EigenArgs) -> Result<(), Failure> {
    let (c, file) = resolve(&args.common)?;
    let domain = build_domain(&c)?;
    let p = need(c.p, "--p")?;
    let trig = PTrigTable::new(p)?;
    let kmax = need(file.meld(args.kmax, "kmax")?, "--kmax")?;
    let tol = c.tol.unwrap_or(1e-10);
    let results = find_eigenvalues(&domain, &trig, kmax, tol)?;
    let pairs: Vec<(u32, f64)> = results.iter().map(|r| (r.k, r.lambda)).collect();
    let out = file_path_opt(&file, args.out.clone(), "out")?;
    emit(out.as_deref(), &eigen_csv(&pairs))?;

    if let Some(dir) = file_path_opt(&file, args.profiles.clone(), "profiles")? {
        for res in &results {
            let samples = reconstruct_eigenfunction(&domain, &trig, res.lambda, 256)?;
            let mut csv = String::from("r,u,uprime,theta\n");
            for s in &samples {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_f64(s.r),
                    fmt_f64(s.u),
                    fmt_f64(s.uprime),
                    fmt_f64(s.theta),
                ));
            }
            write_text(&dir.join(format!("eig_{}.csv", res.k)), &csv)?;
        }
    }
    Ok(())
}

fn cmd_scan(args: &ScanArgs) -> Result<(), Failure> {
    let (c, file) = resolve(&args.common)?;
    let prob = build_problem(&c)?;
    let d_min = need(file.meld(args.d_min, "d-min")?, "--d-min")?;
    let d_max = need(file.meld(args.d_max, "d-max")?, "--d-max")?;
    let n = file.meld(args.grid, "grid")?.unwrap_or(101);
    if !(d_min > 0.0 && d_max > d_min) {
        return Err(Failure::config(format!(
            "the scan grid needs 0 < d-min < d-max, got {d_min} and {d_max}"
        )));
    }
    if n < 2 {
        return Err(Failure::config("the scan grid needs at least 2 points"));
    }
    let grid = logspace(d_min, d_max, n);
    let report = scan_theta(&prob, &grid)?;
    let out = file_path_opt(&file, args.out.clone(), "out")?;
    emit(out.as_deref(), &scan_csv(&report))?;
    match report.d_star {
        Some(ds) => eprintln!("descent threshold d* = {}", fmt_f64(ds)),
        None => eprintln!("descent threshold d* not found below the sweep ceiling"),
    }
    if let Some((dh, th)) = report.d_hat {
        eprintln!("angle maximizer d-hat = {} with theta = {}", fmt_f64(dh), fmt_f64(th));
    }
    eprintln!("integer-level brackets: {}", report.brackets.len());
    Ok(())
}

fn cmd_solve(args: &SolveArgs) -> Result<(), Failure> {
    let (c, file) = resolve(&args.common)?;
    let prob = build_problem(&c)?;
    let k = need(file.meld(args.k, "k")?, "--k")?;
    let tol = c.tol.unwrap_or(1e-8);
    let dir = file_path_opt(&file, args.out_dir.clone(), "out-dir")?
        .unwrap_or_else(|| PathBuf::from("."));

    let records = find_solutions(&prob, k, tol)?;
    write_text(&dir.join("solutions.csv"), &solutions_csv(&records))?;
    for rec in &records {
        let name = format!("profile_{}_j{}_{}.csv", rec.side, rec.j, rec.branch);
        write_text(&dir.join(name), &profile_csv(&prob, &rec.trajectory))?;
    }

    // Companion winding scan over both sides of the equilibrium.
    let d_cap = match estimate_d_star(&prob, 1e-3) {
        Ok(v) => v,
        Err(CoreError::NotFound(_)) => 1e4,
        Err(e) => return Err(e.into()),
    };
    let mut grid: Vec<f64> = logspace(1e-3, 1.0 - 1e-3, 128)
        .into_iter()
        .filter(|&d| d < 1.0 - 1e-12)
        .collect();
    grid.extend(
        logspace(1e-6, 1.0, 128)
            .into_iter()
            .map(|g| 1.0 + g * (d_cap - 1.0))
            .filter(|&d| d > 1.0 + 1e-12),
    );
    let report = scan_theta(&prob, &grid)?;
    write_text(&dir.join("scan.csv"), &scan_csv(&report))?;

    println!("records: {}", records.len());
    for rec in &records {
        println!(
            "d = {}  side = {}  branch = {}  j = {}  residual = {}",
            fmt_f64(rec.d),
            rec.side,
            rec.branch,
            rec.j,
            fmt_f64(rec.residual)
        );
    }
    Ok(())
}

fn cmd_plot(args: &PlotArgs) -> Result<(), Failure> {
    let (c, file) = resolve(&args.common)?;
    let prob = build_problem(&c)?;
    let d = need(file.meld(args.d, "d")?, "--d")?;
    let svg_path = need(file_path_opt(&file, args.svg.clone(), "svg")?, "--svg")?;
    let opts = shoot_opts_for(c.tol, &prob.domain);
    let traj = integrate_cauchy(&prob, d, &opts)?;
    write_text(&svg_path, &phase_portrait_svg(&prob, &traj))
}

// ---------------------------------------------------------------------------
// Verify suites
// ---------------------------------------------------------------------------

struct SuiteOutcome {
    checks: u32,
    failures: u32,
}

impl SuiteOutcome {
    fn new() -> Self {
        SuiteOutcome { checks: 0, failures: 0 }
    }
    fn record(&mut self, name: &str, detail: String, pass: bool) {
        self.checks += 1;
        if !pass {
            self.failures += 1;
        }
        println!("{}  {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn suite_ptrig(out: &mut SuiteOutcome) {
    for p in [1.3, 1.5, 2.0, 2.5, 3.0, 4.0] {
        let row = match PTrigTable::new(p) {
            Err(e) => {
                out.record(&format!("ptrig p={p}"), format!("construction failed: {e}"), false);
                continue;
            }
            Ok(t) => t,
        };
        let pc = row.p_conj();
        let mut worst = 0.0f64;
        for i in 0..1000 {
            let phi = row.period() * i as f64 / 1000.0;
            let (cc, ss) = row.cos_sin(phi);
            worst = worst.max((cc.abs().powf(p) + (p - 1.0) * ss.abs().powf(pc) - 1.0).abs());
        }
        out.record(
            &format!("ptrig p={p}"),
            format!("identity defect {worst:.3e} (tolerance 1e-8)"),
            worst <= 1e-8,
        );
    }
    match compute_pi_p(2.0, 1e-12) {
        Ok(v) => {
            let err = (v - std::f64::consts::PI).abs();
            out.record(
                "ptrig half-period(2)",
                format!("|pi_p(2) - pi| = {err:.3e} (tolerance 1e-10)"),
                err <= 1e-10,
            );
        }
        Err(e) => out.record("ptrig half-period(2)", e.to_string(), false),
    }
}

fn suite_energy(out: &mut SuiteOutcome, prob: &Problem) {
    let opts = ShootOpts {
        rtol: 1e-11,
        atol: 1e-13,
        h_max: None,
        theta_cap: None,
        store_dense: true,
        record_every: 1,
        track_theta: false,
    };
    let p = prob.f.exps.p;
    let nf = f64::from(prob.domain.n);
    let n_over_pstar = if p < nf { (nf - p) / p } else { 0.0 };
    for d in [0.5, 2.0, 6.0] {
        let traj = match integrate_cauchy(prob, d, &opts) {
            Ok(t) => t,
            Err(e) => {
                out.record(&format!("energy d={d}"), e.to_string(), false);
                continue;
            }
        };
        let rep = energy_trace(&traj);
        let h0 = rep.snapshots.first().map_or(0.0, |s| s.h);
        let allowed = 1e-7 * (1.0 + h0.abs());
        out.record(
            &format!("energy monotone d={d}"),
            format!("worst upward jump {:.3e} (allowance {allowed:.3e})", rep.max_upward_jump),
            rep.max_upward_jump <= allowed,
        );
        for a in [0.0, 1.0, -1.0, n_over_pstar] {
            match pohozaev_residual(prob, &traj, a) {
                Ok(res) => out.record(
                    &format!("conservation d={d} a={a}"),
                    format!("residual {res:.3e} (tolerance 1e-6)"),
                    res <= 1e-6,
                ),
                Err(e) => out.record(&format!("conservation d={d} a={a}"), e.to_string(), false),
            }
        }
    }
}

fn suite_eigen(out: &mut SuiteOutcome) {
    let domain = match RadialDomain::ball(1.0, 1) {
        Ok(d) => d,
        Err(e) => {
            out.record("eigen 1d domain", e.to_string(), false);
            return;
        }
    };
    for p in [1.5, 2.0, 3.0] {
        let trig = match PTrigTable::new(p) {
            Ok(t) => t,
            Err(e) => {
                out.record(&format!("eigen p={p}"), e.to_string(), false);
                continue;
            }
        };
        // Closed form: lambda_k = (p-1) ((k-1) pi_tilde / L)^p with the
        // classical half-period pi_tilde = 2 pi / (p sin(pi/p)).
        let pi_tilde =
            2.0 * std::f64::consts::PI / (p * (std::f64::consts::PI / p).sin());
        let mut worst = 0.0f64;
        let mut ok = true;
        for kk in 2..=5u32 {
            match find_eigenvalue(&domain, &trig, kk, 1e-9) {
                Ok(res) => {
                    let expected = (p - 1.0) * (f64::from(kk - 1) * pi_tilde).powf(p);
                    let rel = (res.lambda / expected - 1.0).abs();
                    worst = worst.max(rel);
                    ok &= rel <= 1e-6;
                }
                Err(e) => {
                    out.record(&format!("eigen p={p}"), e.to_string(), false);
                    ok = false;
                    break;
                }
            }
        }
        out.record(
            &format!("eigen 1d closed form p={p}"),
            format!("worst relative error {worst:.3e} over k = 2..5 (tolerance 1e-6)"),
            ok,
        );
    }
}

fn suite_appendix(out: &mut SuiteOutcome, prob: &Problem, k: u32, epsilon: f64) {
    let d_grid = logspace(1.5, 200.0, 24);
    let v = match spiral_verify(prob, k, epsilon, &d_grid) {
        Ok(v) => v,
        Err(e) => {
            out.record("appendix spiral", e.to_string(), false);
            return;
        }
    };
    println!("chain:   0 < l-check < m_k <= l* <= M_k < l-hat < 1");
    println!("l-check  = {}", fmt_f64(v.ell_check));
    println!("m_k      = {}", fmt_f64(v.m_k));
    println!("l*       = {}", fmt_f64(v.ell_star));
    println!("M_k      = {}", fmt_f64(v.big_m_k));
    println!("l-hat    = {}", fmt_f64(v.ell_hat));
    println!("delta*   = {}", fmt_f64(v.delta_star));
    println!("R*       = {}", fmt_f64(v.r_star));
    println!("d-tilde  = {}", fmt_f64(v.tilde_d));
    println!("d-hat    = {}", fmt_f64(v.d_hat));
    let chain = 0.0 < v.ell_check
        && v.ell_check < v.m_k
        && v.m_k <= v.ell_star
        && v.ell_star <= v.big_m_k
        && v.big_m_k < v.ell_hat
        && v.ell_hat < 1.0;
    out.record("appendix chain", format!("strict ordering holds: {chain}"), chain);
    out.record(
        "appendix certified radius",
        format!("R* = {:.6e} finite: {}", v.r_star, v.r_star.is_finite()),
        v.r_star.is_finite() && v.r_star > 0.0,
    );
    out.record(
        "appendix sandwich",
        format!("upper spiral dominates along the maximizer: {}", v.sandwich_passed),
        v.sandwich_passed,
    );
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let (c, file) = resolve(&args.common)?;
    let mut out = SuiteOutcome::new();
    let suite = args.suite.as_str();

    // Default instances when the user gives no geometry: the appendix suite
    // uses the fast-diffusion prototype it certifies; the energy suite uses a
    // p = 2 prototype ball.
    let energy_prob = || -> Result<Problem, Failure> {
        if c.p.is_some() {
            build_problem(&c)
        } else {
            let f = Nonlinearity::prototype(2.0, 3, 4.0, 2.0, None, GrowthClass::Subcritical)?;
            Ok(Problem::new(RadialDomain::ball(4.0, 3)?, f)?)
        }
    };
    let appendix_prob = || -> Result<Problem, Failure> {
        if c.p.is_some() {
            build_problem(&c)
        } else {
            let f = Nonlinearity::prototype(1.5, 3, 2.9, 1.5, None, GrowthClass::Subcritical)?;
            Ok(Problem::new(RadialDomain::ball(2.0, 3)?, f)?)
        }
    };
    let k = file.meld(args.k, "k")?.unwrap_or(1);
    let epsilon = file.meld(args.epsilon, "epsilon")?.unwrap_or(0.1);

    match suite {
        "ptrig" => suite_ptrig(&mut out),
        "energy" => suite_energy(&mut out, &energy_prob()?),
        "eigen" => suite_eigen(&mut out),
        "appendix" => suite_appendix(&mut out, &appendix_prob()?, k, epsilon),
        "all" => {
            suite_ptrig(&mut out);
            suite_energy(&mut out, &energy_prob()?);
            suite_eigen(&mut out);
            suite_appendix(&mut out, &appendix_prob()?, k, epsilon);
        }
        other => {
            return Err(Failure::config(format!(
                "unknown suite `{other}` (expected ptrig, energy, eigen, appendix, or all)"
            )))
        }
    }
    println!("{} checks, {} failures", out.checks, out.failures);
    if out.failures > 0 {
        return Err(Failure::Verification(format!(
            "{} of {} checks failed",
            out.failures, out.checks
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Entry
// ---------------------------------------------------------------------------

#[cfg(feature = "parallel")]
fn init_workers() -> Result<(), Failure> {
    if let Ok(raw) = std::env::var("PLAPLACE_THREADS") {
        let n: usize = raw.trim().parse().map_err(|_| {
            Failure::config(format!("PLAPLACE_THREADS must be a positive integer, got `{raw}`"))
        })?;
        if n == 0 {
            return Err(Failure::config("PLAPLACE_THREADS must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(format!("cannot configure worker pool: {e}")))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn init_workers() -> Result<(), Failure> {
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    init_workers()?;
    match &cli.cmd {
        Cmd::CheckF(a) => cmd_check_f(a),
        Cmd::Shoot(a) => cmd_shoot(a),
        Cmd::Eigen(a) => cmd_eigen(a),
        Cmd::Scan(a) => cmd_scan(a),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Plot(a) => cmd_plot(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
