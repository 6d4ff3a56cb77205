//! Command-line front end.
//!
//! Every command reads one JSON config (see [`RunConfig`]) and accepts flag
//! overrides; flags win over file values. Results go to standard output as
//! JSON with 17 significant digits, diagnostics to standard error.
//!
//! Exit codes: 0 success, 1 numerical failure (non-convergence or blow-up),
//! 2 invalid input.

use crate::format::to_json_string;
use crate::integrator::{IntegrationError, SeasonalSystem, State};
use crate::params::{self, ModelParameters, RawParameters, Schedule, Species};
use crate::scalar;
use crate::stability;
use crate::sweep::{self, GridSpec, SweepTarget};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// Contents of a config file. Exactly one of `parameters` (with `schedule`)
/// or `raw_parameters` must be present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<ModelParameters>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_parameters: Option<RawParameters>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<State>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<usize>,
    /// Keep every n-th integration step in trajectory output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub species: Option<Species>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<SweepTarget>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<IntegrationError> for CliError {
    fn from(e: IntegrationError) -> Self {
        match e {
            IntegrationError::InvalidInput(msg) => CliError::Invalid(msg),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "seasonal-graze", version, about = "Seasonal grazing competition model: thresholds, stability and region maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Default)]
struct Common {
    /// JSON config file.
    #[arg(long, short)]
    config: PathBuf,
    /// Override the dry-season end (nondimensional).
    #[arg(long)]
    tau1: Option<f64>,
    /// Override the grazing onset (nondimensional).
    #[arg(long)]
    tau2: Option<f64>,
    /// Output path (CSV for `simulate`, file prefix for `sweep`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the critical times tau1*, tau1**, tau2*, tau2**.
    Thresholds(Common),
    /// Print the region label with thresholds and multipliers.
    Classify(Common),
    /// Integrate from an initial state and write the trajectory CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        periods: Option<usize>,
        #[arg(long)]
        u0: Option<f64>,
        #[arg(long)]
        v0: Option<f64>,
        #[arg(long)]
        stride: Option<usize>,
    },
    /// Fixed point of a scalar season map, or of the 2D period map with --orbit.
    FixedPoint {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_species)]
        species: Option<Species>,
        /// Locate a periodic orbit of the two-species system instead.
        #[arg(long)]
        orbit: bool,
        #[arg(long)]
        u0: Option<f64>,
        #[arg(long)]
        v0: Option<f64>,
    },
    /// Closed-form Floquet multipliers with a monodromy cross-check.
    Multipliers(Common),
    /// Classify a grid of cells and write `<out>.csv` and `<out>.json`.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Grid resolution as NxM.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
        /// Simulate this many cells to cross-check their labels.
        #[arg(long)]
        audit: Option<usize>,
        #[arg(long, value_parser = parse_target)]
        target: Option<SweepTarget>,
    },
}

fn parse_species(s: &str) -> Result<Species, String> {
    match s {
        "u" | "U" => Ok(Species::U),
        "v" | "V" => Ok(Species::V),
        _ => Err(format!("expected u or v, got {s}")),
    }
}

fn parse_target(s: &str) -> Result<SweepTarget, String> {
    match s {
        "competition" => Ok(SweepTarget::Competition),
        "u" => Ok(SweepTarget::U),
        "v" => Ok(SweepTarget::V),
        _ => Err(format!("expected competition, u or v, got {s}")),
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected NxM, got {s}"))?;
    let n = a.trim().parse::<usize>().map_err(|e| format!("bad grid width {a}: {e}"))?;
    let m = b.trim().parse::<usize>().map_err(|e| format!("bad grid height {b}: {e}"))?;
    Ok((n, m))
}

/// Parses a config, naming the offending key on failure.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." || path.is_empty() {
            CliError::Invalid(format!("config: {inner}"))
        } else {
            CliError::Invalid(format!("config key `{path}`: {inner}"))
        }
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Resolves the nondimensional parameter set and schedule of a config,
/// applying the `tau1`/`tau2` overrides, and validates the result.
pub fn resolve_model(
    config: &RunConfig,
    tau1: Option<f64>,
    tau2: Option<f64>,
) -> Result<(ModelParameters, Schedule, Vec<String>), CliError> {
    let (params, mut schedule) = match (&config.parameters, &config.raw_parameters) {
        (Some(p), None) => {
            let s = config
                .schedule
                .ok_or_else(|| CliError::Invalid("config key `schedule` is required with `parameters`".into()))?;
            (*p, s)
        }
        (None, Some(raw)) => {
            if config.schedule.is_some() {
                return Err(CliError::Invalid(
                    "config key `schedule` conflicts with `raw_parameters`, which carries its own phase times".into(),
                ));
            }
            params::rescale(raw).map_err(|e| CliError::Invalid(e.to_string()))?
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Invalid("config has both `parameters` and `raw_parameters`; give exactly one".into()))
        }
        (None, None) => return Err(CliError::Invalid("config needs `parameters` or `raw_parameters`".into())),
    };
    if let Some(t) = tau1 {
        schedule.tau1 = t;
    }
    if let Some(t) = tau2 {
        schedule.tau2 = t;
    }
    let report = params::validate(&params, &schedule);
    if !report.is_valid() {
        return Err(CliError::Invalid(format!("invalid model: {}", report.violations.join("; "))));
    }
    Ok((params, schedule, report.warnings))
}

/// Runs the CLI with explicit output streams and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{rendered}") } else { write!(err, "{rendered}") };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let text = to_json_string(value).map_err(|e| CliError::Invalid(format!("serialization failed: {e}")))?;
    writeln!(out, "{text}").map_err(|e| CliError::Invalid(format!("cannot write output: {e}")))
}

fn warn(err: &mut dyn Write, warnings: &[String]) {
    for w in warnings {
        let _ = writeln!(err, "warning: {w}");
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Thresholds(common) => {
            let (p, s, warnings) = setup(&common)?;
            warn(err, &warnings);
            emit(out, &stability::thresholds(&p, &s))
        }
        Command::Classify(common) => {
            let (p, s, warnings) = setup(&common)?;
            warn(err, &warnings);
            emit(out, &stability::classify(&p, &s))
        }
        Command::Simulate { common, periods, u0, v0, stride } => {
            let config = load_config(&common.config)?;
            let (p, s, warnings) = resolve_model(&config, common.tau1, common.tau2)?;
            warn(err, &warnings);
            let start = initial_state(&config, u0, v0)?;
            let periods = periods
                .or(config.periods)
                .ok_or_else(|| CliError::Invalid("simulate needs `periods` (config or --periods)".into()))?;
            let stride = stride.or(config.stride).unwrap_or(1);
            let path = common.out.or(config.output).unwrap_or_else(|| PathBuf::from("trajectory.csv"));
            cmd_simulate(&p, &s, start, periods, stride, &path, out)
        }
        Command::FixedPoint { common, species, orbit, u0, v0 } => {
            let config = load_config(&common.config)?;
            let (p, s, warnings) = resolve_model(&config, common.tau1, common.tau2)?;
            warn(err, &warnings);
            if orbit {
                let start = initial_state(&config, u0, v0)?;
                cmd_orbit(&p, &s, start, out)
            } else {
                let species = species.or(config.species).unwrap_or(Species::U);
                cmd_fixed_point(&p, &s, species, out)
            }
        }
        Command::Multipliers(common) => {
            let (p, s, warnings) = setup(&common)?;
            warn(err, &warnings);
            cmd_multipliers(&p, &s, out)
        }
        Command::Sweep { common, grid, audit, target } => {
            let config = load_config(&common.config)?;
            let (p, s, warnings) = resolve_model(&config, common.tau1, common.tau2)?;
            warn(err, &warnings);
            let mut spec = config.grid.unwrap_or_else(|| GridSpec::schedule_plane(s.period, 200));
            if let Some((n1, n2)) = grid {
                spec.n1 = n1;
                spec.n2 = n2;
            }
            let target = target.or(config.target).unwrap_or_default();
            let audit = audit.or(config.audit).unwrap_or(0);
            let prefix = common.out.or(config.output).unwrap_or_else(|| PathBuf::from("regions"));
            cmd_sweep(&p, &s, &spec, target, audit, &prefix, out)
        }
    }
}

fn setup(common: &Common) -> Result<(ModelParameters, Schedule, Vec<String>), CliError> {
    let config = load_config(&common.config)?;
    resolve_model(&config, common.tau1, common.tau2)
}

fn initial_state(config: &RunConfig, u0: Option<f64>, v0: Option<f64>) -> Result<State, CliError> {
    let base = config.initial_state;
    let u = u0.or(base.map(|s| s.u));
    let v = v0.or(base.map(|s| s.v));
    match (u, v) {
        (Some(u), Some(v)) if u >= 0.0 && v >= 0.0 && u.is_finite() && v.is_finite() => Ok(State::new(u, v)),
        (Some(u), Some(v)) => Err(CliError::Invalid(format!("initial state ({u}, {v}) must be non-negative"))),
        _ => Err(CliError::Invalid("an initial state is required (`initial_state` or --u0/--v0)".into())),
    }
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    parameters: ModelParameters,
    schedule: Schedule,
    initial_state: State,
    periods: usize,
    samples: usize,
    final_state: State,
    output: &'a str,
}

pub fn cmd_simulate(
    params: &ModelParameters,
    schedule: &Schedule,
    start: State,
    periods: usize,
    stride: usize,
    path: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let trajectory = SeasonalSystem::new(*params, *schedule).simulate(start, periods, stride)?;
    let file = fs::File::create(path).map_err(|e| CliError::Invalid(format!("cannot create {}: {e}", path.display())))?;
    trajectory
        .write_csv(std::io::BufWriter::new(file))
        .map_err(|e| CliError::Invalid(format!("cannot write {}: {e}", path.display())))?;
    emit(
        out,
        &SimulationSummary {
            parameters: *params,
            schedule: *schedule,
            initial_state: start,
            periods,
            samples: trajectory.samples.len(),
            final_state: trajectory.final_state(),
            output: &path.display().to_string(),
        },
    )
}

#[derive(Serialize)]
struct FixedPointReport {
    species: Species,
    label: scalar::ScalarLabel,
    fixed_point: Option<f64>,
    multiplier_at_zero: f64,
    degenerate: bool,
    map: scalar::MobiusGrowthMap,
}

pub fn cmd_fixed_point(params: &ModelParameters, schedule: &Schedule, species: Species, out: &mut dyn Write) -> Result<(), CliError> {
    let regime = scalar::scalar_classify(params, schedule, species);
    emit(
        out,
        &FixedPointReport {
            species,
            label: regime.label,
            fixed_point: regime.fixed_point,
            multiplier_at_zero: regime.multiplier_at_zero,
            degenerate: regime.degenerate,
            map: scalar::period_map(params, schedule, species),
        },
    )
}

#[derive(Serialize)]
struct OrbitReport {
    start: State,
    /// `null` when the orbit tends to the origin.
    fixed_point: Option<State>,
    iterations: Option<usize>,
}

pub fn cmd_orbit(params: &ModelParameters, schedule: &Schedule, start: State, out: &mut dyn Write) -> Result<(), CliError> {
    let orbit = SeasonalSystem::new(*params, *schedule).find_periodic_orbit(start)?;
    emit(
        out,
        &OrbitReport {
            start,
            fixed_point: orbit.as_ref().map(|o| o.fixed_point),
            iterations: orbit.as_ref().map(|o| o.iterations),
        },
    )
}

#[derive(Serialize)]
struct MonodromyReport {
    at: State,
    matrix: crate::integrator::Monodromy,
    /// Real eigenvalues in decreasing order, or `null` for a complex pair.
    eigenvalues: Option<[f64; 2]>,
}

#[derive(Serialize)]
struct MultiplierReport {
    #[serde(flatten)]
    multipliers: stability::Multipliers,
    exponents: stability::Exponents,
    monodromy: Vec<MonodromyReport>,
}

pub fn cmd_multipliers(params: &ModelParameters, schedule: &Schedule, out: &mut dyn Write) -> Result<(), CliError> {
    let system = SeasonalSystem::new(*params, *schedule);
    let mut points = vec![State::ORIGIN];
    if let Some(x0) = scalar::scalar_classify(params, schedule, Species::U).fixed_point {
        points.push(State::new(x0, 0.0));
    }
    if let Some(y0) = scalar::scalar_classify(params, schedule, Species::V).fixed_point {
        points.push(State::new(0.0, y0));
    }
    let mut monodromy = Vec::new();
    for at in points {
        let matrix = system.monodromy(at)?;
        monodromy.push(MonodromyReport { at, matrix, eigenvalues: matrix.eigenvalues().real().map(|(a, b)| [a, b]) });
    }
    emit(
        out,
        &MultiplierReport {
            multipliers: stability::multipliers(params, schedule),
            exponents: stability::exponents(params, schedule),
            monodromy,
        },
    )
}

/// `<prefix>.csv` and `<prefix>.json`; a trailing `.csv` or `.json` on the
/// prefix is dropped.
pub fn sweep_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let base = match prefix.extension().and_then(|e| e.to_str()) {
        Some("csv") | Some("json") => prefix.with_extension(""),
        _ => prefix.to_path_buf(),
    };
    let name = base.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "regions".into());
    (base.with_file_name(format!("{name}.csv")), base.with_file_name(format!("{name}.json")))
}

pub fn cmd_sweep(
    params: &ModelParameters,
    schedule: &Schedule,
    spec: &GridSpec,
    target: SweepTarget,
    audit: usize,
    prefix: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let grid = sweep::sweep_regions_for(params, schedule, spec, target).map_err(|e| CliError::Invalid(e.to_string()))?;
    let records = sweep::audit(&grid, params, schedule, audit).map_err(|e| CliError::Invalid(e.to_string()))?;
    let (csv_path, json_path) = sweep_paths(prefix);
    let mut sidecar = grid.sidecar(params, schedule);
    sidecar["target"] = serde_json::to_value(target).expect("target serializes");
    if audit > 0 {
        sidecar["audit"] = serde_json::to_value(&records).expect("audit serializes");
    }
    let write = |path: &Path, text: String| {
        fs::write(path, text).map_err(|e| CliError::Invalid(format!("cannot write {}: {e}", path.display())))
    };
    write(&csv_path, grid.to_csv())?;
    let sidecar_text = to_json_string(&sidecar).map_err(|e| CliError::Invalid(e.to_string()))?;
    write(&json_path, sidecar_text)?;
    let mismatches = records.iter().filter(|r| r.consistent == Some(false)).count();
    emit(
        out,
        &serde_json::json!({
            "grid": [spec.n1, spec.n2],
            "counts": grid.counts(),
            "csv": csv_path.display().to_string(),
            "sidecar": json_path.display().to_string(),
            "audited": records.len(),
            "audit_mismatches": mismatches,
        }),
    )
}
