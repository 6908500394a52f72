//! The `shearwave` command line: `shear | solve | verify | continue | sturm`.
//!
//! Exit codes: 0 success, 1 verdict failure, 2 input error, 3 solver failure.

mod args;
mod manifest;

pub use args::{Cli, Command, ContinueArgs, Format, SolveArgs};
pub use manifest::{FileDigest, RunManifest};

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{check_bounds, diagnose, diagnose_audit, BoundInputs, Thresholds};
use crate::shear::{build_asymptotic_state, ShearProfile, NORMALIZATION_TOL};
use crate::sturm::solve_sturm;
use crate::verdict::Verdict;
use crate::waveio::{
    read_family, read_profile, read_wave, write_atomic, write_wave, BranchEntry, BranchLog,
    WaveIoError,
};
use crate::wavesolve::{continue_branch, solve_wave, ContinuationOptions, SolveConfig, WaveError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Verdict(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            Self::Verdict(_) => EXIT_VERDICT,
            Self::Input(_) => EXIT_INPUT,
            Self::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl From<WaveIoError> for CliError {
    fn from(e: WaveIoError) -> Self {
        match e {
            WaveIoError::Wave(w) => w.into(),
            other => Self::Input(other.to_string()),
        }
    }
}

impl From<WaveError> for CliError {
    fn from(e: WaveError) -> Self {
        match e {
            WaveError::Grid(_) | WaveError::Shear(_) | WaveError::SubcriticalSeed { .. } => {
                Self::Input(e.to_string())
            }
            other => Self::Solver(other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SturmConfig {
    pub np: usize,
}

impl Default for SturmConfig {
    fn default() -> Self {
        Self { np: 512 }
    }
}

/// Contents of `--config`; every section is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub solve: SolveConfig,
    #[serde(rename = "continue")]
    pub continuation: ContinuationOptions,
    pub sturm: SturmConfig,
    pub thresholds: Thresholds,
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. A manifest is written to `--out` for every parsed command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.workers {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let start = Instant::now();
    let mut manifest =
        RunManifest::new(argv.iter().map(|a| a.to_string_lossy().into_owned()).collect());
    let result = execute(&cli, &mut manifest);
    let code = match &result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    };
    manifest.exit_code = code;
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    let path = cli.out.join(format!("{}.manifest.json", command_name(&cli.command)));
    if let Err(e) = manifest.write(&path) {
        eprintln!("warning: could not write manifest: {e}");
    }
    code
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Shear { .. } => "shear",
        Command::Solve(_) => "solve",
        Command::Verify { .. } => "verify",
        Command::Continue(_) => "continue",
        Command::Sturm { .. } => "sturm",
    }
}

fn execute(cli: &Cli, manifest: &mut RunManifest) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(p) => {
            manifest.input(p)?;
            let text = crate::waveio::read_text(p)?;
            serde_json::from_str::<Config>(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?
        }
        None => Config::default(),
    };
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Input(format!("{}: {e}", cli.out.display())))?;
    match &cli.command {
        Command::Shear { profile } => cmd_shear(cli, profile, manifest),
        Command::Solve(a) => cmd_solve(cli, &config, a, manifest),
        Command::Verify { wave } => cmd_verify(cli, &config, wave, manifest),
        Command::Continue(a) => cmd_continue(cli, &config, a, manifest),
        Command::Sturm { profile, np, count } => {
            cmd_sturm(cli, profile, np.unwrap_or(config.sturm.np), *count, manifest)
        }
    }
}

fn stem(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    name.strip_suffix(".json").unwrap_or(&name).to_string()
}

fn load_profile(path: &Path, manifest: &mut RunManifest) -> Result<ShearProfile, CliError> {
    manifest.input(path)?;
    Ok(read_profile(path)?)
}

fn write_output(path: &Path, text: &str, manifest: &mut RunManifest) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes())?;
    manifest.output(path)?;
    Ok(())
}

fn csv_text<R: Serialize>(rows: &[R]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShearSummary {
    pub m: f64,
    #[serde(rename = "F")]
    pub froude: f64,
    #[serde(rename = "Lambda")]
    pub lambda_ratio: f64,
    pub lambda_ratio_at_y: f64,
    #[serde(rename = "lambda")]
    pub bernoulli: f64,
    pub lambda_star: f64,
    pub gamma_star: f64,
    pub criticality: String,
    pub upper_bound_applies: bool,
    pub upper_froude_bound: Option<f64>,
    pub min_relative_speed: f64,
}

pub fn shear_summary(profile: &ShearProfile) -> Result<ShearSummary, CliError> {
    let state = build_asymptotic_state(profile, 513).map_err(|e| CliError::Input(e.to_string()))?;
    let f = state.froude;
    let criticality = if (f - 1.0).abs() < 1e-9 {
        "critical (F = 1): no solitary waves".to_string()
    } else if f > 1.0 {
        "supercritical (F > 1): waves of elevation possible".to_string()
    } else {
        "subcritical (F < 1): no waves of elevation".to_string()
    };
    let lam = state.lambda_ratio.value;
    let applies = state.upper_bound_applies();
    Ok(ShearSummary {
        m: state.flux,
        froude: f,
        lambda_ratio: lam,
        lambda_ratio_at_y: state.lambda_ratio.argmax_y,
        bernoulli: state.bernoulli,
        lambda_star: state.lambda_star(),
        gamma_star: state.gamma_star(),
        criticality,
        upper_bound_applies: applies,
        upper_froude_bound: applies.then(|| (1.0 - 0.75 * lam * lam).powf(-0.5)),
        min_relative_speed: state.admissibility.min_relative_speed,
    })
}

fn cmd_shear(cli: &Cli, path: &Path, manifest: &mut RunManifest) -> Result<(), CliError> {
    let profile = load_profile(path, manifest)?;
    manifest.config = serde_json::to_value(&profile).expect("profile serializes");
    let s = shear_summary(&profile)?;
    println!("m        = {:.10}", s.m);
    println!("F        = {:.10}", s.froude);
    println!("Lambda   = {:.10}  (at y = {:.6})", s.lambda_ratio, s.lambda_ratio_at_y);
    println!("lambda   = {:.10}", s.bernoulli);
    println!("lambda*  = {:.10}", s.lambda_star);
    println!("gamma*   = {:.10}", s.gamma_star);
    println!("criticality (Burns condition F = 1): {}", s.criticality);
    match s.upper_froude_bound {
        Some(b) => println!("upper Froude bound applies (Lambda < 2/sqrt 3): F < {b:.10}"),
        None => println!("upper Froude bound not applicable (Lambda >= 2/sqrt 3)"),
    }
    let name = stem(path);
    match cli.format {
        Format::Json => {
            let out = cli.out.join(format!("{name}.shear.json"));
            let text = serde_json::to_string_pretty(&s).expect("summary serializes");
            write_output(&out, &text, manifest)
        }
        Format::Csv => {
            let out = cli.out.join(format!("{name}.shear.csv"));
            write_output(&out, &csv_text(&[s]), manifest)
        }
    }
}

fn solve_config(config: &Config, a: &SolveArgs) -> SolveConfig {
    let mut c = config.solve.clone();
    if let Some(v) = a.np {
        c.np = v;
    }
    if let Some(v) = a.nq {
        c.nq = v;
    }
    if a.half_length.is_some() {
        c.half_length = a.half_length;
    }
    if let Some(v) = a.length_factor {
        c.length_factor = v;
    }
    if let Some(v) = a.sigma {
        c.sigma = v;
    }
    if a.seed_amplitude.is_some() {
        c.seed_amplitude = a.seed_amplitude;
    }
    if a.full_line {
        c.symmetric_half = false;
    }
    if let Some(v) = a.max_iters {
        c.newton.max_iters = v;
    }
    if a.tol.is_some() {
        c.newton.tol = a.tol;
    }
    c
}

/// Refuses critical and (unless asked for) subcritical flows before solving.
pub fn check_froude_policy(froude: f64, subcritical: bool) -> Result<(), CliError> {
    if (froude - 1.0).abs() < 1e-9 {
        return Err(CliError::Input(format!(
            "F = {froude:.12} is critical: the decay eigenvalue is zero and there is no sech^2 seed"
        )));
    }
    if froude < 1.0 && !subcritical {
        return Err(CliError::Input(format!(
            "F = {froude:.6} < 1: solitary waves with sup u < c have F > 1 when they are waves \
             of elevation (lower Froude bound); pass --subcritical to attempt a depression wave"
        )));
    }
    Ok(())
}

struct Solved {
    summary: String,
    outputs: Vec<PathBuf>,
    failures: Vec<String>,
}

fn solve_one(
    cli: &Cli,
    config: &Config,
    solve: &SolveConfig,
    path: &Path,
    subcritical: bool,
) -> Result<Solved, CliError> {
    let profile = read_profile(path)?;
    let froude = crate::shear::compute_froude(&profile).map_err(|e| CliError::Input(e.to_string()))?;
    check_froude_policy(froude, subcritical)?;
    let sol = solve_wave(&profile, solve)?;
    let name = stem(path);
    let wave_path = cli.out.join(format!("{name}.wave.json"));
    write_wave(&sol, &wave_path)?;
    let report = diagnose(&sol).map_err(|e| CliError::Solver(e.to_string()))?;
    let failures = report.failures(&config.thresholds);
    let count = |v: Verdict| {
        report
            .bound_verdicts
            .iter()
            .filter(|b| !b.informational && b.verdict == v)
            .count()
    };
    let summary = format!(
        "{name}: F = {:.6}, max eta = {:.6e}, extremum = {:.6e}, residual = {:.2e}, iterations = {}, \
         bounds: {} hold, {} fail, {} not applicable",
        sol.froude,
        sol.amplitude,
        sol.extremum,
        sol.residual_norm,
        sol.newton_iters,
        count(Verdict::Holds),
        count(Verdict::Fails),
        count(Verdict::NotApplicable)
    );
    Ok(Solved {
        summary,
        outputs: vec![wave_path],
        failures,
    })
}

fn cmd_solve(cli: &Cli, config: &Config, a: &SolveArgs, manifest: &mut RunManifest) -> Result<(), CliError> {
    let solve = solve_config(config, a);
    manifest.config = serde_json::json!({
        "solve": solve,
        "thresholds": config.thresholds,
        "subcritical": a.subcritical,
    });
    for p in &a.profiles {
        manifest.input(p)?;
    }
    let results: Vec<Result<Solved, CliError>> = a
        .profiles
        .par_iter()
        .map(|p| solve_one(cli, config, &solve, p, a.subcritical))
        .collect();
    let mut worst: Option<CliError> = None;
    for (p, r) in a.profiles.iter().zip(results) {
        match r {
            Ok(s) => {
                println!("{}", s.summary);
                for o in &s.outputs {
                    manifest.output(o)?;
                }
                if !s.failures.is_empty() {
                    let e = CliError::Verdict(format!(
                        "{}: failed checks: {}",
                        p.display(),
                        s.failures.join(", ")
                    ));
                    eprintln!("{e}");
                    worst = pick_worse(worst, e);
                }
            }
            Err(e) => {
                let e = match e {
                    CliError::Input(m) => CliError::Input(format!("{}: {m}", p.display())),
                    CliError::Solver(m) => CliError::Solver(format!("{}: {m}", p.display())),
                    v => v,
                };
                worst = pick_worse(worst, e);
            }
        }
    }
    worst.map_or(Ok(()), Err)
}

fn pick_worse(a: Option<CliError>, b: CliError) -> Option<CliError> {
    match a {
        Some(a) if a.code() >= b.code() => {
            if a.code() > EXIT_VERDICT || b.code() == EXIT_VERDICT {
                eprintln!("error: {b}");
            }
            Some(a)
        }
        Some(a) => {
            eprintln!("error: {a}");
            Some(b)
        }
        None => Some(b),
    }
}

fn cmd_verify(cli: &Cli, config: &Config, path: &Path, manifest: &mut RunManifest) -> Result<(), CliError> {
    manifest.input(path)?;
    manifest.config = serde_json::json!({ "thresholds": config.thresholds });
    let (report, conversion) = match read_wave(path) {
        Ok(loaded) => {
            let report = diagnose(&loaded.solution).map_err(|e| CliError::Solver(e.to_string()))?;
            (report, loaded.conversion)
        }
        Err(WaveIoError::Quarantined { solution, min_hp, .. }) => {
            eprintln!("warning: min h_p = {min_hp:.3e} <= 0; report covers an unvalidated field");
            (diagnose_audit(&solution), None)
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(c) = &conversion {
        println!(
            "converted from (u, v, eta): flux mismatch {:.2e}, u residual {:.2e}, v residual {:.2e}, equation residual {:.2e}",
            c.flux_mismatch, c.u_residual, c.v_residual, c.equation_residual
        );
    }
    let name = stem(path);
    let name = name.strip_suffix(".wave").unwrap_or(&name).to_string();
    let json_path = cli.out.join(format!("{name}.report.json"));
    let csv_path = cli.out.join(format!("{name}.report.csv"));
    write_output(&json_path, &report.to_json(), manifest)?;
    write_output(&csv_path, &report.to_csv(&config.thresholds), manifest)?;
    for row in report.rows(&config.thresholds) {
        println!(
            "{:<56} {:>24.16e} {:>24.16e} {:>12.3e}  {}",
            row.name, row.lhs, row.rhs, row.residual, row.verdict
        );
    }
    if report.unvalidated {
        println!("unvalidated field");
    }
    let failures = report.failures(&config.thresholds);
    if failures.is_empty() {
        println!("verify: all applicable checks pass");
        Ok(())
    } else {
        Err(CliError::Verdict(format!("failed checks: {}", failures.join(", "))))
    }
}

fn continuation_options(config: &Config, a: &ContinueArgs) -> ContinuationOptions {
    let mut o = config.continuation.clone();
    if let Some(v) = a.steps {
        o.max_points = v;
    }
    if let Some(v) = a.ds {
        o.ds = v;
        o.ds_max = o.ds_max.max(v);
    }
    if let Some(v) = a.np {
        o.np = v;
    }
    if let Some(v) = a.nq {
        o.nq = v;
    }
    if let Some(v) = a.length_factor {
        o.length_factor = v;
    }
    if let Some(v) = a.stagnation_margin {
        o.stagnation_margin = v;
    }
    o
}

/// One row of the sweep table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub froude: f64,
    pub amplitude: f64,
    pub relative_amplitude: f64,
    pub sup_u_over_c: f64,
    pub speed_margin: f64,
    /// Smallest margin over the applicable bounds (positive when all hold).
    pub bound_margin: f64,
    pub bounds_hold: bool,
    pub newton_iters: usize,
}

fn cmd_continue(cli: &Cli, config: &Config, a: &ContinueArgs, manifest: &mut RunManifest) -> Result<(), CliError> {
    manifest.input(&a.family)?;
    let family = read_family(&a.family)?;
    let integral = family
        .normalization_integral()
        .map_err(|e| CliError::Input(e.to_string()))?;
    if (integral - 1.0).abs() > NORMALIZATION_TOL {
        return Err(CliError::Input(format!(
            "U* is not normalized: g * integral of dy/U*^2 = {integral:.12} (must be 1 within {NORMALIZATION_TOL:e})"
        )));
    }
    let opts = continuation_options(config, a);
    let sigma = a.sigma.unwrap_or(0.0);
    manifest.config = serde_json::json!({ "continue": opts, "from": a.from, "sigma": sigma });
    let branch = continue_branch(&family, a.from, sigma, &opts)?;

    let log_path = cli.out.join(format!("{}.jsonl", a.name));
    let mut log = BranchLog::create(&log_path)?;
    log.append(&BranchEntry::Header {
        family: family.clone(),
        sigma,
        lambda_ratio: branch.lambda_ratio,
    })?;
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for (k, p) in branch.points.iter().enumerate() {
        let entry = log.append_point(p)?;
        if let BranchEntry::Point { file, .. } = &entry {
            manifest.output(&cli.out.join(file))?;
        }
        let verdicts = check_bounds(&BoundInputs::from_solution(&p.solution, None));
        let applicable: Vec<_> = verdicts
            .iter()
            .filter(|v| !v.informational && v.verdict != Verdict::NotApplicable)
            .collect();
        let bound_margin = applicable.iter().map(|v| v.margin()).fold(f64::INFINITY, f64::min);
        let bounds_hold = applicable.iter().all(|v| v.holds());
        if !bounds_hold {
            violations.push(k);
        }
        println!(
            "{k:>3}  F = {:.8}  max eta/d = {:.6e}  sup u/c = {:.6}  margin = {:.4}  iterations = {}",
            p.froude,
            p.amplitude / family.d,
            p.sup_u_over_c,
            p.speed_margin,
            p.iterations
        );
        rows.push(SweepRow {
            froude: p.froude,
            amplitude: p.amplitude,
            relative_amplitude: p.amplitude / family.d,
            sup_u_over_c: p.sup_u_over_c,
            speed_margin: p.speed_margin,
            bound_margin,
            bounds_hold,
            newton_iters: p.iterations,
        });
    }
    log.append(&BranchEntry::Endpoint {
        endpoint: branch.endpoint,
    })?;
    manifest.output(&log_path)?;
    let csv_path = cli.out.join(format!("{}.csv", a.name));
    write_output(&csv_path, &csv_text(&rows), manifest)?;
    let endpoint = serde_json::to_value(branch.endpoint).expect("endpoint serializes");
    println!("endpoint: {}", endpoint.as_str().unwrap_or("unknown"));
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verdict(format!("bounds fail at branch points {violations:?}")))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumOutput {
    #[serde(rename = "F")]
    pub froude: f64,
    pub mu: Vec<f64>,
    pub mu1: f64,
    pub mu2: f64,
    pub s1: Option<f64>,
    pub robin_residual: f64,
    pub subcritical: bool,
    pub p: Vec<f64>,
    pub phi1: Vec<f64>,
}

#[derive(Serialize)]
struct PhiRow {
    p: f64,
    phi1: f64,
}

#[derive(Serialize)]
struct MuRow {
    index: usize,
    mu: f64,
}

fn cmd_sturm(cli: &Cli, path: &Path, np: usize, count: usize, manifest: &mut RunManifest) -> Result<(), CliError> {
    let profile = load_profile(path, manifest)?;
    manifest.config = serde_json::json!({ "np": np, "count": count });
    let state = build_asymptotic_state(&profile, np).map_err(|e| CliError::Input(e.to_string()))?;
    let spec = solve_sturm(&state, count.max(2)).map_err(|e| CliError::Solver(e.to_string()))?;
    let out = SpectrumOutput {
        froude: state.froude,
        mu: spec.mu.clone(),
        mu1: spec.mu1(),
        mu2: spec.mu2(),
        s1: spec.s1,
        robin_residual: spec.robin_residual,
        subcritical: spec.mu1() < 0.0,
        p: (0..state.np).map(|j| state.p(j)).collect(),
        phi1: spec.phi1.clone(),
    };
    println!("mu1 = {:.12e}", out.mu1);
    println!("mu2 = {:.12e}", out.mu2);
    match out.s1 {
        Some(s) => println!("s1  = {s:.12e}"),
        None => println!("s1  = undefined"),
    }
    if out.subcritical {
        println!("warning: mu1 < 0, the flow is subcritical (F = {:.6} < 1) and has no decaying long-wave mode", out.froude);
    }
    let name = stem(path);
    match cli.format {
        Format::Json => {
            let p = cli.out.join(format!("{name}.sturm.json"));
            let text = serde_json::to_string_pretty(&out).expect("spectrum serializes");
            write_output(&p, &text, manifest)
        }
        Format::Csv => {
            let rows: Vec<PhiRow> = out
                .p
                .iter()
                .zip(&out.phi1)
                .map(|(&p, &phi1)| PhiRow { p, phi1 })
                .collect();
            write_output(&cli.out.join(format!("{name}.sturm.csv")), &csv_text(&rows), manifest)?;
            let mus: Vec<MuRow> = out
                .mu
                .iter()
                .enumerate()
                .map(|(k, &mu)| MuRow { index: k + 1, mu })
                .collect();
            write_output(
                &cli.out.join(format!("{name}.eigenvalues.csv")),
                &csv_text(&mus),
                manifest,
            )
        }
    }
}
