mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{RunContext, Failure};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "ctarget", version, about = "Coherent targeting along kicked-rotor heteroclinic orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find and verify the optimal control orbit.
    Orbit(Common),
    /// Propagate a packet along the orbit and export states, contours and a summary.
    Propagate(Common),
    /// Targeting error over a list of dimensions and schemes.
    Sweep(Common),
    /// Wigner densities and contours along the propagated trace.
    Wigner(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// Orbit file, overriding the config.
    #[arg(long)]
    orbit: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (common, command): (&Common, fn(&RunContext) -> Result<(), Failure>) = match &cli.command {
        Command::Orbit(c) => (c, commands::cmd_orbit),
        Command::Propagate(c) => (c, commands::cmd_propagate),
        Command::Sweep(c) => (c, commands::cmd_sweep),
        Command::Wigner(c) => (c, commands::cmd_wigner),
    };
    let config = RunConfig::load(&common.config).map_err(Failure::Config)?;
    let ctx = RunContext::new(config, common.out.clone(), common.orbit.clone())?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.workers {
        if n == 0 {
            return Err(Failure::Config(anyhow::anyhow!("--workers must be at least 1")));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::Numerical(anyhow::anyhow!("starting worker pool: {e}")))?;
    pool.install(|| command(&ctx))?;
    eprintln!("outputs in {}", commands::output_dir(&ctx).display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
