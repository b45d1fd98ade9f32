//! Command implementations shared by the `steer` and `braidc` binaries.

pub mod config;

use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use steering_core::braid::{brute_force_search, mitm_search, GateTarget, Metric, MitmConfig, SearchResult};
use steering_core::circuits::{bob_test_states, prepare_mixed_family, prepare_pure_family, simulate, pure_family_circuit};
use steering_core::delta::{
    convergence_study, ion_bound, optimize_delta, sweep, theta_grid, write_convergence_csv,
    write_sweep_csv, Family, IonStateModel,
};
use steering_core::quantum::{conditional_state, MeasurementSetting, TwoQubitState};

use crate::config::{env_overrides, ConfigError, Settings};

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1.
    Io(anyhow::Error),
    /// Exit 2.
    Config(String),
    /// Exit 3: the output was written but a numerical check failed.
    Convergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Convergence(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(e) => write!(f, "I/O error: {e:#}"),
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Convergence(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<steering_core::Error> for CliError {
    fn from(e: steering_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "steer", version, about = "All-versus-nothing EPR steering bounds and braid compilation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// `key = value` settings file (keys: n, restarts, tol, seed, grid_resolution, ...)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Exponent of the l_n relaxation (even)
    #[arg(long, global = true)]
    pub n: Option<u32>,
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub hidden_states: Option<usize>,
    #[arg(long, global = true)]
    pub grid_resolution: Option<usize>,
    #[arg(long, global = true)]
    pub oracle_samples: Option<usize>,
    /// Include wall-clock times in reports (breaks byte-identical output)
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    Pure,
    Mixed,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Pure => Family::Pure,
            FamilyArg::Mixed => Family::Mixed,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum IonModelArg {
    Werner,
    FidelitySearch,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Δ over a grid of angles, as CSV
    Sweep {
        #[arg(long, value_enum, default_value = "pure")]
        family: FamilyArg,
        #[arg(long, default_value_t = 65)]
        points: usize,
        /// Single angle; only valid with --points 1
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        theta_min: f64,
        #[arg(long, default_value_t = FRAC_PI_2)]
        theta_max: f64,
        /// Also run the grid oracle at every point
        #[arg(long)]
        oracle: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Δ at one angle, as a JSON report
    Delta {
        #[arg(long, value_enum, default_value = "pure")]
        family: FamilyArg,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        oracle: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Δ as a function of the exponent n, as CSV
    Converge {
        #[arg(long, value_enum, default_value = "pure")]
        family: FamilyArg,
        /// Angles to study (repeatable); defaults to a grid of --points
        #[arg(long)]
        theta: Vec<f64>,
        #[arg(long, default_value_t = 65)]
        points: usize,
        /// Comma-separated even exponents; defaults to 20, 22, ..., 120
        #[arg(long, value_delimiter = ',')]
        n_values: Vec<u32>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Braid word approximating U_theta, as JSON
    Braid(BraidArgs),
    /// Simulate the preparation circuits and compare with the target states
    VerifyCircuits {
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Δ for candidate models of the noisy trapped-ion Bell state
    IonBound {
        #[arg(long, value_enum, default_value = "werner")]
        model: IonModelArg,
        #[arg(long, default_value_t = 0.993)]
        visibility: f64,
        #[arg(long, default_value_t = 0.993)]
        fidelity: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct BraidArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long)]
    pub max_len: usize,
    /// Meet-in-the-middle search with halves of max-len/2 letters
    #[arg(long)]
    pub mitm: bool,
    /// Minimize the plain spectral distance instead of the phase-invariant one
    #[arg(long)]
    pub strict_phase: bool,
    #[arg(long)]
    pub bucket_tol: Option<f64>,
    #[arg(long)]
    pub memory_mb: Option<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Io(anyhow::Error::new(e).context(format!("cannot create {}", p.display())))
        })?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn io_err(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Io(e.into())
}

fn write_json(path: Option<&Path>, value: &serde_json::Value) -> Result<(), CliError> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(io_err)?;
    writeln!(out).map_err(io_err)?;
    out.flush().map_err(io_err)
}

/// Settings from defaults, file, environment and global flags.
pub fn resolve_settings(g: &GlobalArgs) -> Result<Settings, CliError> {
    let mut s = Settings::load(g.config.as_deref(), env_overrides(std::env::vars()))?;
    let o = &mut s.optimizer;
    if let Some(v) = g.n {
        o.n_exponent = v;
    }
    if let Some(v) = g.restarts {
        o.restarts = v;
    }
    if let Some(v) = g.tol {
        o.tol = v;
    }
    if let Some(v) = g.hidden_states {
        o.hidden_states = v;
    }
    if let Some(v) = g.seed {
        o.seed = v;
        s.oracle.seed = v;
    }
    if let Some(v) = g.grid_resolution {
        s.oracle.resolution = v;
    }
    if let Some(v) = g.oracle_samples {
        s.oracle.samples = v;
    }
    s.validate()?;
    Ok(s)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let settings = resolve_settings(&cli.global)?;
    let timing = cli.global.timing;
    match cli.command {
        Command::Sweep {
            family,
            points,
            theta,
            theta_min,
            theta_max,
            oracle,
            output,
        } => {
            let thetas = match theta {
                Some(t) if points == 1 => vec![t],
                Some(_) => {
                    return Err(CliError::Config("--theta requires --points 1".into()));
                }
                None => theta_grid(points, theta_min, theta_max),
            };
            let oracle_cfg = oracle.then_some(&settings.oracle);
            let reports = sweep(family.into(), &thetas, &settings.optimizer, oracle_cfg)?;
            let mut out = open_output(output.as_deref())?;
            write_sweep_csv(&reports, &mut out).map_err(io_err)?;
            out.flush().map_err(io_err)?;
            let failed: Vec<String> = reports
                .iter()
                .filter(|r| !r.converged)
                .map(|r| format!("{:.6}", r.theta))
                .collect();
            if !failed.is_empty() {
                return Err(CliError::Convergence(format!(
                    "no restart converged at theta = {}",
                    failed.join(", ")
                )));
            }
            Ok(())
        }
        Command::Delta {
            family,
            theta,
            oracle,
            output,
        } => {
            let mut report = optimize_delta(theta, family.into(), &settings.optimizer)?;
            if oracle {
                report.oracle_delta = Some(
                    steering_core::delta::grid_oracle_family(theta, family.into(), &settings.oracle)?
                        .delta,
                );
            }
            if !timing {
                report.wall_time = None;
            }
            write_json(output.as_deref(), &serde_json::to_value(&report).map_err(io_err)?)?;
            if !report.converged {
                return Err(CliError::Convergence(format!("no restart converged at theta = {theta}")));
            }
            Ok(())
        }
        Command::Converge {
            family,
            theta,
            points,
            n_values,
            output,
        } => {
            let thetas = if theta.is_empty() {
                theta_grid(points, 0.0, FRAC_PI_2)
            } else {
                theta
            };
            let ns = if n_values.is_empty() {
                (20..=120).step_by(2).collect()
            } else {
                n_values
            };
            let mut rows = Vec::new();
            for t in thetas {
                rows.extend(convergence_study(t, family.into(), &ns, &settings.optimizer)?);
            }
            let mut out = open_output(output.as_deref())?;
            write_convergence_csv(&rows, &mut out).map_err(io_err)?;
            out.flush().map_err(io_err)
        }
        Command::Braid(args) => {
            let mut args = args;
            if args.bucket_tol.is_none() {
                args.bucket_tol = Some(settings.bucket_tol);
            }
            if args.memory_mb.is_none() {
                args.memory_mb = Some(settings.memory_mb);
            }
            run_braid(&args)
        }
        Command::VerifyCircuits { points, output } => run_verify_circuits(points, output.as_deref()),
        Command::IonBound {
            model,
            visibility,
            fidelity,
            output,
        } => {
            let model = match model {
                IonModelArg::Werner => IonStateModel::Werner { visibility },
                IonModelArg::FidelitySearch => IonStateModel::FidelitySearch { fidelity },
            };
            let report = ion_bound(model, &settings.optimizer)?;
            write_json(output.as_deref(), &serde_json::to_value(&report).map_err(io_err)?)
        }
    }
}

/// The braid search selected by the flags.
pub fn braid_search(args: &BraidArgs) -> SearchResult {
    let target = GateTarget::u_theta(args.theta);
    let metric = if args.strict_phase {
        Metric::Strict
    } else {
        Metric::PhaseInvariant
    };
    if args.mitm {
        let cfg = MitmConfig {
            half_length: args.max_len / 2,
            bucket_tol: args.bucket_tol.unwrap_or(1e-2),
            memory_budget_bytes: args.memory_mb.unwrap_or(1024) << 20,
        };
        mitm_search(&target, &cfg, metric)
    } else {
        brute_force_search(&target, args.max_len, metric)
    }
}

/// `{word, distance, distance_strict, length}`; `distance` is always the
/// phase-invariant one.
pub fn braid_json(r: &SearchResult) -> serde_json::Value {
    json!({
        "word": r.word,
        "distance": r.distance_phase,
        "distance_strict": r.distance_strict,
        "length": r.word.len(),
    })
}

pub fn run_braid(args: &BraidArgs) -> Result<(), CliError> {
    if !args.theta.is_finite() {
        return Err(CliError::Config(format!("theta = {}", args.theta)));
    }
    let r = braid_search(args);
    log::info!(
        "scored {} words; best length {} at distance {:e}",
        r.words_scored,
        r.word.len(),
        r.distance
    );
    write_json(args.output.as_deref(), &braid_json(&r))
}

const CIRCUIT_TOL: f64 = 1e-12;

fn run_verify_circuits(points: usize, output: Option<&Path>) -> Result<(), CliError> {
    let thetas = theta_grid(points, 0.0, FRAC_PI_2);
    let mut pure_dev: f64 = 0.0;
    let mut mixed_dev: f64 = 0.0;
    let mut conditional_dev: f64 = 0.0;
    let settings = [MeasurementSetting::z(), MeasurementSetting::x()];
    for &t in &thetas {
        let pure = TwoQubitState::pure_family(t)?;
        let prepared = prepare_pure_family(t)?;
        pure_dev = pure_dev.max(max_entry(&(prepared.matrix() - pure.matrix())));
        let mixed = TwoQubitState::mixed_family(t)?;
        mixed_dev = mixed_dev.max(max_entry(&(prepare_mixed_family(t)?.matrix() - mixed.matrix())));
        for s in &settings {
            for a in 0..2 {
                let lhs = *conditional_state(&pure, s, a).matrix();
                let rhs = *conditional_state(&prepared, s, a).matrix();
                conditional_dev = conditional_dev.max(max_entry(&(lhs - rhs)));
            }
        }
        bob_test_states(t)?;
        let v = simulate(&pure_family_circuit(t), "00")?;
        if (v.norm() - 1.0).abs() > CIRCUIT_TOL {
            return Err(CliError::Convergence(format!("circuit output not normalized at {t}")));
        }
    }
    let pass = pure_dev <= CIRCUIT_TOL && mixed_dev <= CIRCUIT_TOL && conditional_dev <= CIRCUIT_TOL;
    write_json(
        output,
        &json!({
            "points": points,
            "pure_max_deviation": pure_dev,
            "mixed_max_deviation": mixed_dev,
            "conditional_max_deviation": conditional_dev,
            "tolerance": CIRCUIT_TOL,
            "pass": pass,
        }),
    )?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Convergence("circuit states deviate from targets".into()))
    }
}

fn max_entry<'a>(entries: impl IntoIterator<Item = &'a steering_core::C64>) -> f64 {
    entries.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}
