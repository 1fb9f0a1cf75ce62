use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qmuq::harness::{self, Experiment, ExperimentConfig};

/// Output directory override; `--out` still wins.
const OUT_ENV: &str = "QMUQ_OUT_DIR";

#[derive(Parser)]
#[command(name = "qmuq", version, about = "Shot-noise uncertainty experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Override the base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: $QMUQ_OUT_DIR, then the config's out_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; results are identical for every value.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// List the available experiments.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for e in Experiment::ALL {
                println!("{:<18} {}", e.name(), e.description());
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            seed,
            out,
            jobs,
        } => match run(config, seed, out, jobs) {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error kind={} message={:?}", e.kind(), e.to_string());
                ExitCode::FAILURE
            }
        },
    }
}

fn run(config: PathBuf, seed: Option<u64>, out: Option<PathBuf>, jobs: usize) -> qmuq::Result<Vec<PathBuf>> {
    let mut cfg = ExperimentConfig::load(&config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = out
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| cfg.out_dir.clone());
    harness::run_to_dir(&cfg, jobs, &dir)
}
