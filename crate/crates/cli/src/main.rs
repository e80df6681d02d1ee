//! `levyx`: runs expansion tasks from a JSON config and writes CSV.
//!
//! Exit status is 0 on success, 2 for configuration or I/O problems and 3
//! when a numerical step fails; the message goes to standard error.

mod config;
mod output;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use levyx_core::LevyxError;

use crate::output::Provenance;
use crate::tasks::Job;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Output(String),
    #[error("numerical error: {0}")]
    Numerical(LevyxError),
}

impl From<LevyxError> for CliError {
    fn from(e: LevyxError) -> Self {
        match e {
            LevyxError::Config(msg) => CliError::Config(msg),
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PayoffArg {
    Put,
    Call,
    /// Digital put `1{S_T < K}`.
    Digital,
    /// Pays one on survival.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Task {
    /// Density slice `p^{(n)}(y)` by order.
    Density,
    /// Prices by order for one or more strikes.
    Price,
    /// Implied vols of the partial sums over a strike grid.
    Smile,
    /// Survival probabilities over maturities.
    Survival,
    /// Yields `-ln S / (T-t)` of the partial sums over maturities.
    Yields,
    /// Sup-norm differences between consecutive density orders.
    TableDensity,
    /// JDCEV exact yields and the gaps of the three-term expansion.
    TableYields,
    /// Small-time convergence slopes by order.
    RateStudy,
    /// Monte Carlo confidence bands next to the expansion.
    McCheck,
}

impl Task {
    fn name(self) -> &'static str {
        match self {
            Task::Density => "density",
            Task::Price => "price",
            Task::Smile => "smile",
            Task::Survival => "survival",
            Task::Yields => "yields",
            Task::TableDensity => "table-density",
            Task::TableYields => "table-yields",
            Task::RateStudy => "rate-study",
            Task::McCheck => "mc-check",
        }
    }

    fn default_output(self) -> &'static str {
        match self {
            Task::Density => "density.csv",
            Task::Price => "price.csv",
            Task::Smile => "smile.csv",
            Task::Survival => "survival.csv",
            Task::Yields => "yield_curve.csv",
            Task::TableDensity => "density_convergence.csv",
            Task::TableYields => "yields.csv",
            Task::RateStudy => "rate_study.csv",
            Task::McCheck => "mc_check.csv",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "levyx",
    version,
    about = "Expansion pricing for defaultable local Levy-type models"
)]
struct Cli {
    #[command(subcommand)]
    task: Task,
    /// Run config or bare model document (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Expansion order N.
    #[arg(long, global = true)]
    orders: Option<usize>,
    #[arg(long, global = true, value_enum)]
    payoff: Option<PayoffArg>,
    /// Strike(s), comma separated.
    #[arg(long = "K", global = true, value_delimiter = ',')]
    strikes: Option<Vec<f64>>,
    /// Output CSV path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Leave the timestamp line out of the CSV header.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("LEVYX_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("LEVYX_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<PathBuf, CliError> {
    configure_threads()?;
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let loaded = config::load(&path)?;
    let run = &loaded.run;
    let order = match cli.task {
        Task::TableDensity => cli.orders.unwrap_or(4),
        Task::TableYields => 2,
        _ => cli.orders.unwrap_or(run.order),
    };
    if cli.task == Task::TableDensity && order == 0 {
        return Err(CliError::Config("table-density needs --orders of at least 1".into()));
    }
    let job = Job {
        loaded: &loaded,
        order,
        payoff: cli.payoff,
        strikes: cli.strikes,
        seed: cli.seed.unwrap_or(run.monte_carlo.seed),
    };
    let table = match cli.task {
        Task::Density => tasks::density(&job),
        Task::Price => tasks::price(&job),
        Task::Smile => tasks::smile(&job),
        Task::Survival => tasks::survival(&job),
        Task::Yields => tasks::yields(&job),
        Task::TableDensity => tasks::table_density(&job),
        Task::TableYields => tasks::table_yields(&job),
        Task::RateStudy => tasks::rate_study_task(&job),
        Task::McCheck => tasks::mc_check(&job),
    }?;
    let out = cli
        .out
        .or_else(|| run.output.clone())
        .unwrap_or_else(|| PathBuf::from(cli.task.default_output()));
    let provenance = Provenance {
        task: cli.task.name(),
        model_json: loaded.document.canonical_json(),
        scheme: if cli.task == Task::TableYields {
            "jdcev_exact".into()
        } else {
            run.scheme.describe(run.x)
        },
        order,
        quadrature: run.quadrature,
        seed: (cli.task == Task::McCheck).then_some(job.seed),
        timestamp: !cli.no_timestamp,
    };
    output::write(&out, &provenance, &table)?;
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(path) => {
            eprintln!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("levyx: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
