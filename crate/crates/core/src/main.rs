//! Command-line front end; every verb is a thin wrapper over [`cmbf::cli`].

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};
use cmbf::cli::{self, ExperimentConfig};
use cmbf::Result;

#[derive(Debug, Parser)]
#[command(name = "cmbf", version, about = "Risk-aware coordinated multicell beamforming experiments")]
struct Args {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `run.out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Dump every conic problem under `<out>/conic`.
    #[arg(long, global = true)]
    dump_conic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the resolved config, channels, training archive and held-out set.
    Gen,
    /// Stochastic ADMM trace against the centralized oracle.
    Converge,
    /// Held-out cost against the mean renewable output.
    SweepRes {
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Held-out cost distribution per confidence level.
    SweepTheta {
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Min-CVaR and Min-Cost against the antenna count.
    SweepNt {
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<usize>>,
    },
    /// Min-CVaR and Min-Cost against the SINR target.
    SweepSinr {
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Centralized sample-average solve only.
    Oracle,
    /// Every experiment listed under `run.experiments`.
    Run,
}

fn execute(args: Args) -> Result<()> {
    let Some(path) = &args.config else {
        return Err(cmbf::Error::Config("--config <path> is required".into()));
    };
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = args.seed {
        cfg.run.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.run.out = out;
    }
    cfg.run.dump_conic |= args.dump_conic;
    match args.command {
        Command::Gen => println!("{}", cli::run_gen(&cfg)?),
        Command::Converge => println!("{}", cli::run_convergence(&cfg)?),
        Command::SweepRes { values } => {
            print!("{}", cli::run_res_sweep(&cfg, &values.unwrap_or(cfg.sweep.res_means.clone()))?)
        }
        Command::SweepTheta { values } => {
            print!("{}", cli::run_theta_cdf(&cfg, &values.unwrap_or(cfg.sweep.thetas.clone()))?)
        }
        Command::SweepNt { values } => {
            print!("{}", cli::run_nt_sweep(&cfg, &values.unwrap_or(cfg.sweep.antennas.clone()))?)
        }
        Command::SweepSinr { values } => {
            print!("{}", cli::run_sinr_sweep(&cfg, &values.unwrap_or(cfg.sweep.sinr_targets.clone()))?)
        }
        Command::Oracle => println!("{}", cli::run_oracle(&cfg)?),
        Command::Run => cli::run_listed(&cfg, std::io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, cmbf::Error::Config(_)) {
                eprintln!("\n{}", Args::command().render_usage());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
