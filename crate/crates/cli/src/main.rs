//! `quasih`: curves, sweeps, entanglement reports, self-verification and
//! Dyson-map demos for the quasi-Hermitian oscillator-bath model.
//!
//! Exit codes: 0 success, 1 verification failure, 2 config error, 3 I/O error.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quasih_core::dyson::DemoChoice;
use quasih_core::model::ModelParams;
use quasih_core::verify::Suite;
use thiserror::Error;

use crate::commands::CurveOptions;
use crate::config::{Format, ScenarioConfig};
use crate::output::Unit;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) | CliError::Numeric(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "quasih", version, about = "Quasi-Hermitian oscillator-bath simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// JSON scenario file.
    #[arg(long)]
    config: PathBuf,
    /// Output file (default: `output.path` from the config, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `grid.samples`.
    #[arg(long)]
    samples: Option<usize>,
    /// Overrides `unitary.seed` when `unitary.mode` is `random`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Overrides `output.format` (default: from the file extension, else csv).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Report entropies in bits instead of nats.
    #[arg(long)]
    bits: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time series of p, q and both entropies.
    Evolve(CurveArgs),
    /// One curve block per value of the config's `sweep` section.
    Sweep(CurveArgs),
    /// Disentanglement times, averaged states and concurrences (JSON).
    Entanglement(ScenarioArgs),
    /// Run the seeded invariant suites and print a JSON summary.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover a target Hermitian generator from a time-dependent Dyson map.
    DysonDemo {
        #[arg(value_enum)]
        choice: ChoiceArg,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        /// Number of sampling intervals on `[0, t_end]`.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Take model parameters from this scenario (default: ν = g = 1, κ = 0.6, N = 1, x = 1).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    All,
    Dynamics,
    Analytics,
    Dyson,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Dynamics => Suite::Dynamics,
            SuiteArg::Analytics => Suite::Analytics,
            SuiteArg::Dyson => Suite::Dyson,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ChoiceArg {
    #[value(name = "h_zero", alias = "h-zero")]
    HZero,
    #[value(name = "constant_A", alias = "constant-a")]
    ConstantA,
    #[value(name = "time_dep_A", alias = "time-dep-a")]
    TimeDepA,
}

impl From<ChoiceArg> for DemoChoice {
    fn from(c: ChoiceArg) -> Self {
        match c {
            ChoiceArg::HZero => DemoChoice::HZero,
            ChoiceArg::ConstantA => DemoChoice::ConstantA,
            ChoiceArg::TimeDepA => DemoChoice::TimeDepA,
        }
    }
}

/// Load, apply overrides, validate.
fn scenario(args: &ScenarioArgs) -> Result<config::Scenario, CliError> {
    let mut cfg = ScenarioConfig::load(&args.config)?;
    if let Some(n) = args.samples {
        cfg.grid.samples = Some(n);
    }
    if let (Some(seed), config::UnitaryConfig::Random { seed: s }) = (args.seed, &mut cfg.unitary) {
        *s = seed;
    }
    cfg.validate()
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evolve(a) => {
            let s = scenario(&a.scenario)?;
            commands::evolve(&s, &curve_options(&a))
        }
        Command::Sweep(a) => {
            let s = scenario(&a.scenario)?;
            if s.config.sweep.is_none() {
                return Err(CliError::Config("sweep: the config has no `sweep` section".into()));
            }
            commands::sweep(&s, &curve_options(&a))
        }
        Command::Entanglement(a) => {
            let s = scenario(&a)?;
            commands::entanglement(&s, a.out.as_deref())
        }
        Command::Verify { suite, seed, out } => commands::verify(suite.into(), seed, out.as_deref()),
        Command::DysonDemo { choice, t_end, samples, config, out } => {
            let params = match config {
                Some(path) => {
                    let m = ScenarioConfig::load(&path)?.model;
                    ModelParams::diagonal(m.nu, m.g, m.kappa, m.n_bath, m.x)
                        .map_err(|e| CliError::Config(format!("model: {e}")))?
                }
                None => ModelParams::diagonal(1.0, 1.0, 0.6, 1, 1.0).expect("default parameters are valid"),
            };
            commands::dyson_demo(choice.into(), &params, t_end, samples, out.as_deref())
        }
    }
}

fn curve_options(a: &CurveArgs) -> CurveOptions<'_> {
    CurveOptions {
        out: a.scenario.out.as_deref(),
        format: a.format,
        unit: if a.bits { Unit::Bits } else { Unit::Nats },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("quasih: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
