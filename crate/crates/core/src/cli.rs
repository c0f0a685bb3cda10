//! The `eta-hessian` command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error,
//! 3 precondition failed, 4 Newton or continuation failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::flatcase::{self, BuiltinFlatRhs, DomainGrid, DomainShape, FlatError};
use crate::format::{to_json_line, to_json_pretty, write_atomic};
use crate::geometry::{self, surface_jet, GridMode, RadialField, Resolution, SphereGrid};
use crate::newton::max_abs;
use crate::solver::{
    self, continue_to_target, homotopy_f, validate_conditions, BuiltinRhs, HomotopyRun,
    NewtonSettings, PrescribedData, SolverError, TSchedule,
};
use crate::symm::SpectrumVector;
use crate::verify::{estimate_report, MonitorParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_FAILURE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "eta-hessian",
    version,
    about = "Curvature equations for star-shaped hypersurfaces and flat domains"
)]
pub struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve on a sphere grid by continuation from the unit sphere.
    SolveSurface(RunArgs),
    /// Solve the Dirichlet problem on a flat domain.
    SolveFlat(RunArgs),
    /// Evaluate estimate monitors on a stored surface.
    Verify(VerifyArgs),
    /// Brute-force checks of the symmetric-function kernels.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dot-path override such as `grid.sizes.0=128` (value parsed as JSON when possible).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Surface CSV written by `solve-surface`.
    #[arg(long)]
    pub surface: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// σ_m by subset enumeration.
    Sigma {
        #[arg(required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
        #[arg(long)]
        m: usize,
    },
    /// Gårding cone membership by enumeration of σ_1..σ_k.
    Cone {
        #[arg(required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
        #[arg(long)]
        k: usize,
    },
    /// `σ_k^{1/k}` with finite-difference gradient and Hessian.
    Grad {
        #[arg(required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
    },
}

#[derive(Debug, Clone)]
enum CliError {
    Config(String),
    Precondition {
        message: String,
        details: Option<Value>,
    },
    Failure {
        message: String,
        details: Option<Value>,
    },
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Precondition { .. } => EXIT_PRECONDITION,
            CliError::Failure { .. } => EXIT_FAILURE,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn status(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config_error",
            CliError::Precondition { .. } => "precondition_failed",
            CliError::Failure { .. } => "failed",
            CliError::Io(_) => "io_error",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Io(m) => m,
            CliError::Precondition { message, .. } | CliError::Failure { message, .. } => message,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Surface run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    /// `"curved"` when present.
    #[serde(default)]
    pub geometry: Option<String>,
    pub n: usize,
    pub k: usize,
    pub grid: GridConfig,
    pub f: BuiltinRhs,
    pub r1: f64,
    pub r2: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub newton: NewtonSettings,
    #[serde(default)]
    pub t_schedule: TSchedule,
    #[serde(default)]
    pub monitors: MonitorParams,
    /// Rays sampled by the barrier and monotonicity check.
    #[serde(default = "default_samples")]
    pub condition_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub verbosity: Option<String>,
}

fn default_epsilon() -> f64 {
    0.01
}
fn default_samples() -> usize {
    64
}
fn default_beta() -> f64 {
    4.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub mode: GridMode,
    /// `[n_lon, n_lat]` for full-2d, `[n_theta]` for axisym-1d.
    pub sizes: Vec<usize>,
}

impl GridConfig {
    pub fn resolution(&self) -> Result<Resolution, String> {
        match (self.mode, self.sizes.as_slice()) {
            (GridMode::Full2d, &[n_lon, n_lat]) => Ok(Resolution::Full2d { n_lon, n_lat }),
            (GridMode::Axisym1d, &[n_theta]) => Ok(Resolution::Axisym1d { n_theta }),
            (GridMode::Full2d, _) => Err("grid.sizes must be [n_lon, n_lat] for full-2d".into()),
            (GridMode::Axisym1d, _) => Err("grid.sizes must be [n_theta] for axisym-1d".into()),
        }
    }
}

/// Flat run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatConfig {
    /// Must be `"flat"`.
    pub geometry: String,
    pub n: usize,
    pub k: usize,
    pub domain: DomainShape,
    pub h: f64,
    pub f: BuiltinFlatRhs,
    #[serde(default)]
    pub newton: NewtonSettings,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub verbosity: Option<String>,
}

/// Sets `path` (dot separated, numeric segments index arrays) to `value`.
pub fn apply_override(root: &mut Value, path: &str, value: Value) -> Result<(), String> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("bad override key `{path}`"));
    }
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        if let Value::Array(items) = cur {
            let idx: usize = part
                .parse()
                .map_err(|_| format!("override `{path}`: `{part}` is not an array index"))?;
            let len = items.len();
            let slot = items.get_mut(idx).ok_or_else(|| {
                format!("override `{path}`: index {idx} out of range ({len} items)")
            })?;
            if last {
                *slot = value;
                return Ok(());
            }
            cur = slot;
            continue;
        }
        if !cur.is_object() {
            *cur = Value::Object(Default::default());
        }
        let map = cur.as_object_mut().expect("object ensured above");
        if last {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        cur = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

fn parse_override(spec: &str) -> Result<(String, Value), String> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| format!("override `{spec}` must look like key=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.trim().to_string(), value))
}

/// Reads a JSON config, applies overrides and deserializes it, naming the key path on errors.
fn load_config<T: DeserializeOwned>(path: &Path, overrides: &[String]) -> Result<T, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for spec in overrides {
        let (key, v) = parse_override(spec).map_err(CliError::Config)?;
        apply_override(&mut value, &key, v).map_err(CliError::Config)?;
    }
    serde_path_to_error::deserialize(value).map_err(|e| {
        CliError::Config({
            let at = e.path().to_string();
            if at == "." {
                e.into_inner().to_string()
            } else {
                format!("at `{at}`: {}", e.into_inner())
            }
        })
    })
}

fn init_logging(verbosity: Option<&str>) {
    let mut b = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"));
    if let Some(level) = verbosity {
        b.parse_filters(level);
    }
    let _ = b.try_init();
}

fn prepare_out(cli_out: &Option<PathBuf>, cfg_out: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    let out = cli_out
        .clone()
        .or_else(|| cfg_out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
    Ok(out)
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<(), CliError> {
    let p = dir.join(name);
    write_atomic(&p, contents).map_err(|e| io_err(&p, e))
}

fn write_status(dir: &Path, result: &Result<(), CliError>) -> Result<(), CliError> {
    let status = match result {
        Ok(()) => json!({ "status": "converged", "exit_code": EXIT_OK }),
        Err(e) => {
            let mut v =
                json!({ "status": e.status(), "exit_code": e.exit_code(), "message": e.message() });
            if let CliError::Precondition {
                details: Some(d), ..
            }
            | CliError::Failure {
                details: Some(d), ..
            } = e
            {
                v["details"] = d.clone();
            }
            v
        }
    };
    write_file(dir, "status.json", to_json_pretty(&status).as_bytes())
}

struct SurfaceSetup {
    grid: SphereGrid,
    data: PrescribedData,
    run: HomotopyRun,
}

fn surface_setup(cfg: &SurfaceConfig) -> Result<SurfaceSetup, CliError> {
    if let Some(g) = &cfg.geometry {
        if g != "curved" {
            return Err(CliError::Config(format!(
                "at `geometry`: expected \"curved\", got {g:?}"
            )));
        }
    }
    if cfg.n < 2 {
        return Err(CliError::Config(format!(
            "at `n`: need n >= 2, got {}",
            cfg.n
        )));
    }
    if cfg.k == 0 || cfg.k > cfg.n {
        return Err(CliError::Config(format!(
            "at `k`: need 1 <= k <= n = {}, got {}",
            cfg.n, cfg.k
        )));
    }
    cfg.f
        .validate()
        .map_err(|e| CliError::Config(format!("at `f`: {e}")))?;
    let res = cfg
        .grid
        .resolution()
        .map_err(|e| CliError::Config(format!("at `grid`: {e}")))?;
    let grid =
        SphereGrid::build(cfg.n, res).map_err(|e| CliError::Config(format!("at `grid`: {e}")))?;
    let data = PrescribedData::new(Arc::new(cfg.f.clone()), cfg.r1, cfg.r2)
        .map_err(|e| CliError::Config(format!("at `r1`/`r2`: {e}")))?;
    homotopy_f(&data, cfg.n, cfg.k, cfg.epsilon, 0.0)
        .map_err(|e| CliError::Config(format!("at `epsilon`: {e}")))?;
    let s = cfg.t_schedule;
    if !(s.dt_min > 0.0 && s.dt_min <= s.dt0 && s.dt0 <= s.dt_max && s.dt_max <= 1.0) {
        return Err(CliError::Config(
            "at `t_schedule`: need 0 < dt_min <= dt0 <= dt_max <= 1".into(),
        ));
    }
    if !(cfg.newton.tol > 0.0) || cfg.newton.max_iter == 0 {
        return Err(CliError::Config(
            "at `newton`: need tol > 0 and max_iter >= 1".into(),
        ));
    }
    if cfg.condition_samples == 0 {
        return Err(CliError::Config(
            "at `condition_samples`: must be positive".into(),
        ));
    }
    Ok(SurfaceSetup {
        grid,
        data,
        run: HomotopyRun::new(cfg.epsilon, cfg.t_schedule, cfg.newton, cfg.monitors),
    })
}

fn solver_failure(e: SolverError) -> CliError {
    match e {
        SolverError::Config(m) => CliError::Config(m),
        SolverError::Precondition(m) => CliError::Precondition {
            message: m,
            details: None,
        },
        SolverError::Geometry(g) => CliError::Failure {
            message: g.to_string(),
            details: None,
        },
        SolverError::Newton(n) => CliError::Failure {
            message: n.to_string(),
            details: None,
        },
        SolverError::Stuck {
            t, dt, ref cause, ..
        } => CliError::Failure {
            message: e.to_string(),
            details: Some(
                json!({ "kind": "continuation_stuck", "t": t, "dt": dt, "cause": cause }),
            ),
        },
    }
}

fn trace_lines(run: &HomotopyRun) -> String {
    run.trace.iter().map(|r| to_json_line(r) + "\n").collect()
}

fn surface_csv(grid: &SphereGrid, rho: &RadialField, k: usize) -> Result<Vec<u8>, CliError> {
    let jet = surface_jet(grid, rho).map_err(|e| CliError::Failure {
        message: e.to_string(),
        details: None,
    })?;
    let mut buf = Vec::new();
    geometry::write_surface_csv(&mut buf, grid, &jet, k)
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(buf)
}

fn solve_surface(cfg: &SurfaceConfig, out: &Path) -> Result<(), CliError> {
    let setup = surface_setup(cfg)?;
    let (grid, data) = (&setup.grid, &setup.data);
    let conditions = validate_conditions(data, cfg.n, cfg.k, cfg.condition_samples, cfg.seed);
    let cond_json = serde_json::to_value(&conditions).expect("report serializes");
    if !conditions.passed {
        let report = json!({ "status": "precondition_failed", "conditions": cond_json });
        write_file(out, "report.json", to_json_pretty(&report).as_bytes())?;
        return Err(CliError::Precondition {
            message: conditions.failures().join("; "),
            details: Some(json!({ "conditions": cond_json })),
        });
    }
    if conditions.monotonicity_degenerate {
        log::warn!("radial monotonicity holds only with equality somewhere; the solution need not be unique");
    }

    match continue_to_target(grid, data, setup.run, cfg.k) {
        Ok((rho, run)) => {
            write_file(out, "trace.jsonl", trace_lines(&run).as_bytes())?;
            write_file(out, "surface.csv", &surface_csv(grid, &rho, cfg.k)?)?;
            let last = run.trace.last().expect("trace holds t = 0 and t = 1");
            let newton_total: usize = run.trace.iter().map(|r| r.newton_iterations).sum();
            let report = json!({
                "status": "converged",
                "n": cfg.n,
                "k": cfg.k,
                "grid": cfg.grid,
                "conditions": cond_json,
                "non_unique": conditions.monotonicity_degenerate,
                "accepted_steps": run.trace.len(),
                "newton_iterations": newton_total,
                "max_residual": last.max_residual,
                "final": last.report,
            });
            write_file(out, "report.json", to_json_pretty(&report).as_bytes())
        }
        Err(SolverError::Stuck {
            t,
            dt,
            cause,
            last,
            run,
        }) => {
            write_file(out, "trace.jsonl", trace_lines(&run).as_bytes())?;
            write_file(out, "surface.csv", &surface_csv(grid, &last, cfg.k)?)?;
            let report = json!({ "status": "stuck", "t": t, "dt": dt, "cause": cause, "conditions": cond_json });
            write_file(out, "report.json", to_json_pretty(&report).as_bytes())?;
            Err(solver_failure(SolverError::Stuck {
                t,
                dt,
                cause,
                last,
                run,
            }))
        }
        Err(e) => Err(solver_failure(e)),
    }
}

fn flat_failure(e: FlatError) -> CliError {
    match e {
        FlatError::Config(m) => CliError::Config(m),
        FlatError::Precondition(m) => CliError::Precondition {
            message: m,
            details: None,
        },
        other => CliError::Failure {
            message: other.to_string(),
            details: None,
        },
    }
}

fn solve_flat(cfg: &FlatConfig, out: &Path) -> Result<(), CliError> {
    if cfg.geometry != "flat" {
        return Err(CliError::Config(format!(
            "at `geometry`: expected \"flat\", got {:?}",
            cfg.geometry
        )));
    }
    if cfg.k == 0 || cfg.k > cfg.n {
        return Err(CliError::Config(format!(
            "at `k`: need 1 <= k <= n = {}, got {}",
            cfg.n, cfg.k
        )));
    }
    cfg.f
        .validate()
        .map_err(|e| CliError::Config(format!("at `f`: {e}")))?;
    if !(cfg.beta > 0.0) {
        return Err(CliError::Config("at `beta`: must be positive".into()));
    }
    let grid = DomainGrid::build(cfg.n, cfg.domain.clone(), cfg.h).map_err(|e| match e {
        FlatError::Config(m) => CliError::Config(format!("at `domain`: {m}")),
        other => flat_failure(other),
    })?;
    let (state, rep) = flatcase::dirichlet_solve(&grid, &cfg.f, cfg.k, &cfg.newton, cfg.beta)
        .map_err(flat_failure)?;
    let mut csv = Vec::new();
    flatcase::write_flat_csv(&mut csv, &grid, &state, &cfg.f, cfg.k)
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_file(out, "flat.csv", &csv)?;
    let report = json!({
        "status": "converged",
        "n": cfg.n,
        "k": cfg.k,
        "h": cfg.h,
        "domain": cfg.domain,
        "interior_nodes": grid.len(),
        "newton": rep.newton,
        "max_residual": rep.max_residual,
        "pogorelov_beta": rep.pogorelov_beta,
        "pogorelov": rep.pogorelov,
        "max_hessian": rep.max_hessian,
        "max_phi": rep.max_phi,
        "maximum_principle_ok": rep.maximum_principle_ok,
    });
    write_file(out, "report.json", to_json_pretty(&report).as_bytes())
}

fn verify_surface(cfg: &SurfaceConfig, surface: &Path) -> Result<Value, CliError> {
    let setup = surface_setup(cfg)?;
    let file = fs::File::open(surface).map_err(|e| io_err(surface, e))?;
    let rho = geometry::read_surface_rho(std::io::BufReader::new(file), &setup.grid)
        .map_err(|e| CliError::Config(format!("{}: {e}", surface.display())))?;
    let jet = surface_jet(&setup.grid, &rho).map_err(|e| CliError::Precondition {
        message: e.to_string(),
        details: None,
    })?;
    let residual =
        solver::residual(&setup.grid, &rho, &setup.data, cfg.k).map_err(solver_failure)?;
    let report =
        estimate_report(&jet, setup.data.f.as_ref(), cfg.k, &cfg.monitors).map_err(|e| {
            CliError::Precondition {
                message: e.to_string(),
                details: None,
            }
        })?;
    let h = setup.grid.spacing();
    let contained = report.rho_min >= cfg.r1 - 2.0 * h && report.rho_max <= cfg.r2 + 2.0 * h;
    Ok(json!({
        "status": "verified",
        "max_residual": max_abs(&residual),
        "rho_within_barriers": contained,
        "estimates": report,
    }))
}

/// σ_m by enumerating all m-subsets.
pub fn enumerate_sigma(values: &[f64], m: usize) -> f64 {
    let n = values.len();
    if m > n {
        return 0.0;
    }
    let mut total = 0.0;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize == m {
            total += (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| values[i])
                .product::<f64>();
        }
    }
    total
}

const ORACLE_MAX_N: usize = 12;

fn oracle(cmd: &OracleCommand) -> Result<String, CliError> {
    let check = |values: &[f64]| {
        if values.len() > ORACLE_MAX_N {
            Err(CliError::Config(format!(
                "enumeration is limited to {ORACLE_MAX_N} entries"
            )))
        } else {
            Ok(())
        }
    };
    match cmd {
        OracleCommand::Sigma { values, m } => {
            check(values)?;
            Ok(format!("{}", enumerate_sigma(values, *m)))
        }
        OracleCommand::Cone { values, k } => {
            check(values)?;
            if *k == 0 || *k > values.len() {
                return Err(CliError::Config(format!(
                    "--k must lie in 1..={}",
                    values.len()
                )));
            }
            let inside = (1..=*k).all(|m| enumerate_sigma(values, m) > 0.0);
            Ok(if inside { "inside" } else { "outside" }.to_string())
        }
        OracleCommand::Grad { values, k, step } => {
            check(values)?;
            let spec = SpectrumVector::new(values.clone(), *k)
                .map_err(|e| CliError::Config(e.to_string()))?;
            spec.check_cone().map_err(|e| CliError::Precondition {
                message: e.to_string(),
                details: None,
            })?;
            let kf = *k as f64;
            let g = |v: &[f64]| enumerate_sigma(v, *k).powf(1.0 / kf);
            let n = values.len();
            let h = *step;
            let shifted = |i: usize, a: f64, j: usize, b: f64| {
                let mut v = values.clone();
                v[i] += a;
                v[j] += b;
                g(&v)
            };
            let gradient: Vec<f64> = (0..n)
                .map(|i| (shifted(i, h, i, 0.0) - shifted(i, -h, i, 0.0)) / (2.0 * h))
                .collect();
            let hessian: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            (shifted(i, h, j, h) - shifted(i, h, j, -h) - shifted(i, -h, j, h)
                                + shifted(i, -h, j, -h))
                                / (4.0 * h * h)
                        })
                        .collect()
                })
                .collect();
            let out = json!({ "value": g(values), "gradient": gradient, "hessian": hessian });
            Ok(to_json_pretty(&out))
        }
    }
}

/// Prints to stdout, ignoring a closed pipe.
fn print_line(s: &str) {
    use std::io::Write as _;
    let _ = writeln!(std::io::stdout(), "{s}");
}

fn run_command(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::SolveSurface(args) => {
            run_with_out::<SurfaceConfig>(args, solve_surface)
        }
        Command::SolveFlat(args) => {
            run_with_out::<FlatConfig>(args, solve_flat)
        }
        Command::Verify(args) => {
            let cfg = load_config::<SurfaceConfig>(&args.run.config, &args.run.overrides);
            match cfg {
                Err(e) => Err(e),
                Ok(cfg) => {
                    init_logging(cfg.verbosity.as_deref());
                    verify_surface(&cfg, &args.surface).and_then(|report| {
                        let text = to_json_pretty(&report);
                        print_line(&text);
                        match args.run.out.as_ref().or(cfg.out.as_ref()) {
                            Some(_) => {
                                let out = prepare_out(&args.run.out, &cfg.out)?;
                                write_file(&out, "verify.json", text.as_bytes())
                            }
                            None => Ok(()),
                        }
                    })
                }
            }
        }
        Command::Oracle { which } => oracle(which).map(|s| print_line(&s)),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

trait RunConfigOut {
    fn out(&self) -> &Option<PathBuf>;
    fn verbosity(&self) -> Option<&str>;
}

impl RunConfigOut for SurfaceConfig {
    fn out(&self) -> &Option<PathBuf> {
        &self.out
    }
    fn verbosity(&self) -> Option<&str> {
        self.verbosity.as_deref()
    }
}

impl RunConfigOut for FlatConfig {
    fn out(&self) -> &Option<PathBuf> {
        &self.out
    }
    fn verbosity(&self) -> Option<&str> {
        self.verbosity.as_deref()
    }
}

fn run_with_out<T: DeserializeOwned + RunConfigOut>(
    args: &RunArgs,
    body: impl FnOnce(&T, &Path) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let cfg: T = match load_config(&args.config, &args.overrides) {
        Ok(c) => c,
        Err(err) => {
            // a status file is still useful when the output directory is known
            if let Some(dir) = &args.out {
                if fs::create_dir_all(dir).is_ok() {
                    let _ = write_status(dir, &Err(err.clone()));
                }
            }
            return Err(err);
        }
    };
    init_logging(cfg.verbosity());
    let out = prepare_out(&args.out, cfg.out())?;
    let result = body(&cfg, &out);
    write_status(&out, &result)?;
    result
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            log::debug!("thread pool already configured: {e}");
        }
    }
    run_command(&cli)
}
