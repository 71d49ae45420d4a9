mod commands;
mod config;
mod error;
mod figure;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use reliability_core::experiment::TransformSelection;

use crate::error::{CliError, CliResult};

/// Simulation and estimation of association-based reliability coefficients.
#[derive(Debug, Parser)]
#[command(name = "reliability", version, about)]
struct Cli {
    /// JSON configuration (or a manifest from a previous run).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads (defaults to the number of logical cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Latent-score condition(s); overrides the configuration.
    #[arg(long, global = true, value_enum)]
    transform: Option<Transform>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Transform {
    Raw,
    Percentile,
    Both,
}

impl From<Transform> for TransformSelection {
    fn from(t: Transform) -> Self {
        match t {
            Transform::Raw => TransformSelection::Raw,
            Transform::Percentile => TransformSelection::Percentile,
            Transform::Both => TransformSelection::Both,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw item banks, latent traits, responses and EAP scores (replication 0).
    Simulate {
        /// Test length; defaults to every entry of m_grid.
        #[arg(long)]
        m: Option<usize>,
        /// Sample size; defaults to n_mc.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Evaluate the coefficient battery on a scores file or one simulated replication.
    Estimate {
        /// CSV with observed_1, observed_2, latent_1, latent_2 columns.
        #[arg(long)]
        scores: Option<PathBuf>,
        /// Test length to simulate when no scores file is given.
        #[arg(long)]
        m: Option<usize>,
        /// Replication index to simulate.
        #[arg(long, default_value_t = 0)]
        rep: usize,
    },
    /// Run the test-length sweep and write the aggregate table and figure.
    Experiment,
    /// Render the figure from an aggregate table.
    Figure {
        /// Aggregate CSV produced by `experiment`.
        aggregate: PathBuf,
        /// SVG path; defaults to figure.svg in the output directory.
        svg: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let loaded = config::load(cli.config.as_deref())?;
    let transform = cli.transform.map(TransformSelection::from);
    let work = || -> CliResult<()> {
        match cli.command {
            Command::Simulate { m, n } => {
                let mut cfg = loaded.clone();
                cfg.master_seed = cli.seed.unwrap_or(cfg.master_seed);
                cfg.latent_transform = transform.unwrap_or(cfg.latent_transform);
                commands::simulate(&cfg, m, n, &cli.out)
            }
            Command::Estimate { scores, m, rep } => {
                let mut cfg = loaded.clone();
                cfg.master_seed = cli.seed.unwrap_or(cfg.master_seed);
                cfg.latent_transform = transform.unwrap_or(cfg.latent_transform);
                if scores.is_some() {
                    cfg.smoother
                        .validate()
                        .map_err(|e| CliError::Config(e.to_string()))?;
                }
                commands::estimate(
                    &cfg,
                    commands::EstimateArgs {
                        scores: scores.as_deref(),
                        m,
                        rep,
                        out: &cli.out,
                    },
                )
            }
            Command::Experiment => {
                let cfg = config::resolve(loaded.clone(), cli.seed, transform)?;
                commands::experiment(&cfg, &cli.out)
            }
            Command::Figure { aggregate, svg } => commands::figure(&aggregate, svg, &cli.out),
        }
    };
    match cli.workers {
        Some(0) => Err(CliError::Config("--workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(work),
        None => work(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
