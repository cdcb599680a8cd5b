mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use uabs_hetnet::radio::IcicMode;

use config::{ModelChoice, Overrides, Preset, RunConfig};

/// Monte-Carlo simulator and optimizer for UAV-assisted public-safety HetNets.
#[derive(Debug, Parser)]
#[command(name = "uabs-hetnet", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
    /// Master seed. Every random stream is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads. Defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, env = "UABS_HETNET_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    model: Option<ModelChoice>,
    /// ICIC mode: none, eicic or feicic.
    #[arg(long, global = true)]
    mode: Option<IcicMode>,
    /// Monte-Carlo drops per cell.
    #[arg(long, global = true)]
    drops: Option<usize>,
    /// UABS counts, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    n_uabs: Option<Vec<usize>>,
    /// Destroyed MBS fractions, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    destroy: Option<Vec<f64>>,
    #[arg(long, global = true)]
    generations: Option<usize>,
    #[arg(long, global = true)]
    population: Option<usize>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate layouts and path-loss CDFs for every drop.
    Scenario,
    /// 5pSE against CRE bias for every ICIC mode, hex deployment.
    Sweep {
        /// CRE biases in dB, comma separated.
        #[arg(long, value_delimiter = ',')]
        taus: Option<Vec<f64>>,
    },
    /// GA placement and ICIC optimization on one drop.
    Optimize {
        #[arg(long, default_value_t = 0)]
        drop: usize,
    },
    /// Hex placement with an exhaustive ICIC grid search on one drop.
    Hexsearch {
        #[arg(long, default_value_t = 0)]
        drop: usize,
    },
    /// Score a layout file under fixed ICIC parameters.
    Evaluate {
        #[arg(long)]
        layout: PathBuf,
        /// JSON file with tau_db, alpha, rho_db, rho_prime_db, beta.
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        fading_seed: u64,
    },
    /// Hex and GA over the full experiment matrix, with runtimes.
    Bench,
}

fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    if let Some(n) = g.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    let taus_db = match &cli.command {
        Command::Sweep { taus } => taus.clone(),
        _ => None,
    };
    let flags = Overrides {
        preset: g.preset,
        path_loss: g.model,
        out_dir: g.out_dir,
        verbosity: g.verbose,
        seed: g.seed,
        mode: g.mode,
        drops: g.drops,
        n_uabs: g.n_uabs,
        destroy: g.destroy,
        generations: g.generations,
        population: g.population,
        taus_db,
    };
    let cfg = RunConfig::load(g.config.as_deref(), &flags)?;
    match cli.command {
        Command::Scenario => commands::scenario(&cfg),
        Command::Sweep { .. } => commands::sweep(&cfg),
        Command::Optimize { drop } => commands::optimize(&cfg, drop),
        Command::Hexsearch { drop } => commands::hexsearch(&cfg, drop),
        Command::Evaluate {
            layout,
            params,
            fading_seed,
        } => commands::evaluate(&cfg, &layout, &params, fading_seed),
        Command::Bench => commands::bench(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
