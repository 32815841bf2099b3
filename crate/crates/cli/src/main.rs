//! Experiment CLI: canned figures and config-file sweeps over the
//! cooperative-uplink link-performance models.

mod config;
mod experiment;
mod figures;
mod output;

use clap::{Args, Parser, Subcommand};
use config::SweepConfig;
use experiment::{run_experiment, CliError, IoOptions};
use figures::FigureId;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "clusterlink",
    about = "Link-performance curves for phase-coherent IoT cluster uplinks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce a canned figure (fig3..fig9).
    Figure {
        /// Figure id: fig3, fig4, fig5, fig6, fig7, fig8 or fig9.
        id: String,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Run a sweep described by a TOML config file.
    Sweep {
        /// Path to the sweep configuration.
        config: PathBuf,
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Args)]
struct IoArgs {
    /// Monte Carlo sample count override.
    #[arg(long)]
    samples: Option<u64>,
    /// Base seed; every output is a pure function of it. Overrides a sweep
    /// config's own seed when given.
    #[arg(long)]
    seed: Option<u64>,
    /// Skip simulation; simulated columns fill only from cache hits.
    #[arg(long)]
    analytic_only: bool,
    /// Directory for cached Monte Carlo runs (default: <out-dir>/cache).
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Output directory for CSV/SVG/meta files.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

impl IoArgs {
    fn options(&self) -> IoOptions {
        IoOptions {
            out_dir: self.out_dir.clone(),
            cache_dir: self.cache_dir.clone().unwrap_or_else(|| self.out_dir.join("cache")),
            analytic_only: self.analytic_only,
        }
    }
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Figure { id, io } => {
            let fig = FigureId::parse(&id).ok_or_else(|| {
                CliError::Config(config::ConfigError(format!(
                    "figure id: unknown id {id:?}; expected fig3..fig9"
                )))
            })?;
            let samples = io.samples.unwrap_or_else(|| fig.default_samples());
            let seed = io.seed.unwrap_or(1);
            let opts = io.options();
            figures::run_figure(fig, samples, seed, &opts)?;
            eprintln!("wrote {}.csv / .svg / .meta.txt under {}", fig.name(), opts.out_dir.display());
            Ok(())
        }
        Command::Sweep { config, io } => {
            let cfg = SweepConfig::load(&config)?;
            let mut exp = cfg.into_experiment()?;
            if let Some(n) = io.samples {
                exp.samples = n;
            }
            if let Some(seed) = io.seed {
                exp.seed = seed;
            }
            let opts = io.options();
            std::fs::create_dir_all(&opts.out_dir)?;
            let table = run_experiment(&exp, &opts)?;
            output::write_csv(&opts.out_dir.join("sweep.csv"), &exp, &table)?;
            output::write_svg(&opts.out_dir.join("sweep.svg"), &exp, &table)?;
            output::write_meta(&opts.out_dir.join("sweep.meta.txt"), &exp, &[])?;
            eprintln!("wrote sweep.csv / .svg / .meta.txt under {}", opts.out_dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
