//! `longread` command-line driver.

mod commands;
mod config;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "longread", version, about = "Longitudinal transmon readout simulations")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "LONGREAD_WORKERS")]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    plot: Option<Toggle>,
    /// Override a config key, e.g. `--set resonator.omega_r=10.5`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, Subcommand)]
enum Command {
    /// Branch analysis and modular spectrum of one parameter point.
    Spectrum,
    /// Critical photon numbers over a 2-D parameter grid.
    NcritMap,
    /// Stochastic readout and assignment error.
    Readout,
    /// Classical driven-pendulum sections and deviation curves.
    Classical,
    /// Exact dispersive shifts and second-order energies.
    SwReport,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::NcritMap => "ncrit-map",
            Command::Readout => "readout",
            Command::Classical => "classical",
            Command::SwReport => "sw-report",
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = config::load(cli.config.as_deref(), &cli.set)?;
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(p) = cli.plot {
        cfg.plot = matches!(p, Toggle::On);
    }
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global()
            .context("starting worker pool")?;
    }
    let mut out = output::OutDir::create(&cfg.out)?;
    match cli.command {
        Command::Spectrum => commands::spectrum(&cfg, &mut out)?,
        Command::NcritMap => commands::ncrit_map(&cfg, &mut out)?,
        Command::Readout => commands::readout(&cfg, &mut out)?,
        Command::Classical => commands::classical(&cfg, &mut out)?,
        Command::SwReport => commands::sw_report(&cfg, &mut out)?,
    }
    out.finish(cli.command.name(), &cfg)?;
    log::info!("wrote {}", cfg.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
