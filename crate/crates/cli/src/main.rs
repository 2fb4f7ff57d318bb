//! `mrrbf`: train, evaluate and inspect M-rRBF networks from JSON run configs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mrrbf::preprocess::Scaling;
use mrrbf::GridShape;

use mrrbf_cli::commands;
use mrrbf_cli::config::{Failure, LoadedConfig};

#[derive(Parser)]
#[command(
    name = "mrrbf",
    version,
    about = "Context-relevant self-organizing maps via multilayered rRBF networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Config file plus overrides shared by every subcommand.
#[derive(Args)]
struct Common {
    /// Run config (JSON). Relative data paths resolve against its directory.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Number of training epochs (t_end).
    #[arg(long)]
    epochs: Option<usize>,
    /// Hidden grids, e.g. `10x10` or `10x10,5x5`.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<GridShape>>,
    /// Use features as loaded, without scaling.
    #[arg(long)]
    no_normalize: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a network; write the learning curve, model and maps.
    Train(Common),
    /// Error rate of a saved model on the config's dataset.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Model file; defaults to `<out-dir>/model.json`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Stratified k-fold cross-validation.
    Crossval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
    },
    /// rRBF against a plain SOM with a sigmoid readout on the same data.
    CompareSom(Common),
    /// Map JSON and SVG for the layers of a saved model.
    ExportMap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<PathBuf>,
        /// 1-based layer; all layers when absent.
        #[arg(long)]
        layer: Option<usize>,
    },
}

fn load(common: &Common) -> Result<LoadedConfig, Failure> {
    let mut config = LoadedConfig::read(&common.config)?;
    let run = &mut config.run;
    if let Some(seed) = common.seed {
        run.seed = seed;
    }
    if let Some(dir) = &common.out_dir {
        run.out_dir = Some(dir.clone());
    }
    if let Some(epochs) = common.epochs {
        run.t_end = Some(epochs);
    }
    if let Some(grids) = &common.grid {
        run.grids = grids.iter().map(ToString::to_string).collect();
    }
    if common.no_normalize {
        run.scaling = Some(Scaling::None);
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Train(common) => commands::train(&load(&common)?),
        Command::Eval { common, model } => commands::eval(&load(&common)?, model),
        Command::Crossval { common, k } => {
            let config = load(&common)?;
            let k = k.or(config.run.k).unwrap_or(10);
            commands::crossval(&config, k)
        }
        Command::CompareSom(common) => commands::compare(&load(&common)?),
        Command::ExportMap { common, model, layer } => commands::export_map(&load(&common)?, model, layer),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
