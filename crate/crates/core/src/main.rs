use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qimaging::error::{Error, Result};
use qimaging::workbench::{
    run, run_heatmap, run_metrics, run_reconstruct, run_sweep, run_synthesize, ExperimentConfig, SweepParameter,
    OUTPUT_ROOT_VAR,
};

/// Inverse obstacle scattering workbench.
#[derive(Parser)]
#[command(name = "qimaging", version)]
struct Cli {
    /// Root for relative output directories.
    #[arg(long, global = true, env = OUTPUT_ROOT_VAR)]
    out_root: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config (TOML).
    config: PathBuf,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    directions: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize, reconstruct and score in one go.
    Run(ConfigArgs),
    /// Write the far-field (and Cauchy) data of an experiment.
    Synthesize(ConfigArgs),
    /// Reconstruct from previously synthesized data.
    Reconstruct(ConfigArgs),
    /// Score stored reconstructions.
    Metrics(ConfigArgs),
    /// Jaccard indices over a range of one parameter.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// alpha, delta or n.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Convert a field file to a PGM image.
    Heatmap {
        field: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn load(args: &ConfigArgs) -> Result<ExperimentConfig> {
    let text =
        std::fs::read_to_string(&args.config).map_err(|e| Error::Config(format!("{}: {e}", args.config.display())))?;
    let mut cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    if let Some(v) = args.k {
        cfg.k = v;
    }
    if let Some(v) = args.directions {
        cfg.directions = v;
    }
    if let Some(v) = args.noise {
        cfg.noise = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.q {
        cfg.q = v;
    }
    if let Some(v) = &args.output {
        cfg.output = v.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<PathBuf> {
    let root = cli.out_root.as_deref();
    match cli.command {
        Command::Run(a) => run(&load(&a)?, root),
        Command::Synthesize(a) => run_synthesize(&load(&a)?, root),
        Command::Reconstruct(a) => run_reconstruct(&load(&a)?, root),
        Command::Metrics(a) => run_metrics(&load(&a)?, root),
        Command::Sweep { config, param, values } => {
            let p: SweepParameter = param.parse()?;
            run_sweep(&load(&config)?, root, p, &values)
        }
        Command::Heatmap { field, output } => run_heatmap(&field, output.as_deref().map(Path::new)),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
