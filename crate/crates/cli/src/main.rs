use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nullwave_cli::commands;
use nullwave_cli::config::{RunConfig, SweepConfig};
use nullwave_cli::sweep::generic_sweep;
use nullwave_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "nullwave", version, about = "Null-coordinate evolution of a weakly null coupled wave system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (overrides the config; 0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a configuration and write radiation, slice and energy files.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Switch the nonlinear sources off.
        #[arg(long)]
        linear: bool,
    },
    /// Asymptotic constants and identity checks of a run directory.
    Constants { dir: PathBuf },
    /// Profile residuals on the stored slices of a run directory.
    Residuals { dir: PathBuf },
    /// Growth-law fits of the flat-slice norms of a run directory.
    Energies { dir: PathBuf },
    /// Observed order from three runs at h, h/2, h/4.
    Convergence {
        #[arg(num_args = 3, required = true)]
        dirs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random small-data sweep of c1 and c2.
    GenericSweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evolve and run every analysis on the result.
    Report {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        linear: bool,
    },
}

fn load_run(config: &PathBuf, linear: bool, threads: Option<usize>) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(config)?;
    if linear {
        cfg.physics.sources = false;
    }
    if let Some(t) = threads {
        cfg.threads = t;
    }
    Ok(cfg)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    let threads = cli.threads;
    match cli.command {
        Command::Evolve { config, out, linear } => {
            let cfg = load_run(&config, linear, threads)?;
            let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
            let (meta, _) = commands::with_threads(cfg.threads, || commands::evolve(&cfg, &dir))??;
            print_json(&meta.status)?;
            if meta.partial {
                return Err(CliError::Usage(format!("run diverged; partial output in {}", dir.display())));
            }
        }
        Command::Constants { dir } => {
            let r = commands::with_threads(threads.unwrap_or(0), || commands::constants(&dir))??;
            print_json(&r.identity)?;
        }
        Command::Residuals { dir } => {
            let (rows, _) = commands::with_threads(threads.unwrap_or(0), || commands::residuals(&dir))??;
            println!("{} residual rows", rows.len());
        }
        Command::Energies { dir } => print_json(&commands::energies(&dir)?)?,
        Command::Convergence { dirs, out } => print_json(&commands::convergence(&dirs, out.as_deref())?)?,
        Command::GenericSweep { config, out, seed } => {
            let mut cfg = SweepConfig::load(&config)?;
            if let Some(t) = threads {
                cfg.threads = t;
            }
            let seed = seed.unwrap_or(cfg.seed);
            let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
            let (_, report) = commands::with_threads(cfg.threads, || generic_sweep(&cfg, seed, Some(&dir)))??;
            print_json(&report)?;
        }
        Command::Report { config, out, linear } => {
            let cfg = load_run(&config, linear, threads)?;
            let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
            let meta = commands::with_threads(cfg.threads, || commands::report(&cfg, &dir))??;
            print_json(&meta.status)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
