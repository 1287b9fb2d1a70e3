//! `techlev` command-line pipeline: measure a corpus, derive release chains
//! and change metrics, run the statistics and draw the figures.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod svg;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use commands::plot::Kind;
use commands::stats::Which;
use config::ToolConfig;
use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "techlev", version, about = "Technical leverage of library releases")]
pub struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for all inputs and outputs of the pipeline stages.
    #[arg(long, global = true, value_name = "DIR")]
    pub output: Option<PathBuf>,
    /// Omit the generation timestamp from SVG files.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Worker threads for measurement.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measure own and dependency sizes; writes instances.csv, exclusions.csv.
    Measure {
        #[arg(long, value_name = "PATH")]
        manifest: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        vuln_db: Option<PathBuf>,
    },
    /// Split release chains and compute change metrics.
    Analyze,
    /// Statistical reports over changes.csv.
    Stats {
        #[command(subcommand)]
        which: StatsCommand,
    },
    /// SVG figure plus the data behind it.
    Plot {
        #[arg(value_enum)]
        kind: PlotKind,
    },
    /// Every stage in order.
    All,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum StatsCommand {
    Regress,
    Odds,
    Kde,
    Correlation,
    Payoff {
        /// Use this exponent instead of the fitted leverage coefficients.
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum PlotKind {
    KdeTheta,
    LeverageScatter,
    MaxLevVulns,
}

impl From<PlotKind> for Kind {
    fn from(k: PlotKind) -> Self {
        match k {
            PlotKind::KdeTheta => Kind::KdeTheta,
            PlotKind::LeverageScatter => Kind::LeverageScatter,
            PlotKind::MaxLevVulns => Kind::MaxLevVulns,
        }
    }
}

impl From<StatsCommand> for Which {
    fn from(c: StatsCommand) -> Self {
        match c {
            StatsCommand::Regress => Which::Regress,
            StatsCommand::Odds => Which::Odds,
            StatsCommand::Kde => Which::Kde,
            StatsCommand::Correlation => Which::Correlation,
            StatsCommand::Payoff { beta } => Which::Payoff { beta },
        }
    }
}

fn resolve_config(cli: &Cli, env: &BTreeMap<String, String>) -> Result<ToolConfig> {
    let mut config = ToolConfig::load(cli.config.as_deref(), env)?;
    if let Some(out) = &cli.output {
        config.output_dir = out.clone();
    }
    if let Command::Measure { manifest, vuln_db } = &cli.command {
        if let Some(m) = manifest {
            config.manifest_path = Some(m.clone());
        }
        if let Some(v) = vuln_db {
            config.vuln_db_path = Some(v.clone());
        }
    }
    Ok(config)
}

fn dispatch(cli: &Cli, config: &ToolConfig) -> Result<()> {
    match &cli.command {
        Command::Measure { .. } => commands::measure::run(config),
        Command::Analyze => commands::analyze::run(config),
        Command::Stats { which } => commands::stats::run(config, (*which).into()),
        Command::Plot { kind } => commands::plot::run(config, (*kind).into(), cli.deterministic),
        Command::All => {
            commands::measure::run(config)?;
            commands::analyze::run(config)?;
            commands::stats::run_all(config)?;
            Kind::ALL
                .into_iter()
                .try_for_each(|k| commands::plot::run(config, k, cli.deterministic))
        }
    }
}

pub fn execute(cli: &Cli, env: &BTreeMap<String, String>) -> Result<()> {
    let config = resolve_config(cli, env)?;
    match cli.jobs {
        Some(0) => Err(CliError::Config("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))?
            .install(|| dispatch(cli, &config)),
        None => dispatch(cli, &config),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
/// Diagnostics go to standard error; statistics failures also print a JSON
/// line on standard output.
pub fn run<I, T>(args: I, env: &BTreeMap<String, String>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli, env) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("techlev: {e}");
            if let Some(report) = e.machine_report() {
                println!("{report}");
            }
            e.exit_code()
        }
    }
}
