use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use paetex_harness::{oracle, output, run_experiment, ExperimentConfig, RunError};

const THREADS_VAR: &str = "PAETEX_THREADS";

#[derive(Parser)]
#[command(name = "paetex", version, about = "Texture-mode elastography experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config or a previous run's manifest.json.
    Run {
        config: PathBuf,
        /// Write outputs here instead of the configured directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Print reference values of an oracle suite (psf, fha, wave, all).
    Oracle { suite: String },
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, ExitCode> {
    ExperimentConfig::load(path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Ok(v) = std::env::var(THREADS_VAR) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("warning: cannot set thread count: {e}");
                }
            }
            _ => {
                eprintln!("error: {THREADS_VAR} must be a positive integer, got {v:?}");
                return ExitCode::from(1);
            }
        }
    }

    match Cli::parse().command {
        Command::Validate { config } => match load(&config) {
            Ok(cfg) => {
                println!(
                    "ok: {} mode(s), {} deformation(s), {} lambda value(s)",
                    cfg.modes.len(),
                    cfg.deformations.len(),
                    cfg.lambda_grid().len()
                );
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run { config, output_dir } => {
            let mut cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            match run_experiment(&cfg) {
                Ok(runs) => {
                    let mut failed = false;
                    for run in &runs {
                        println!("[{}] best values over lambda", run.name);
                        for (mode, v) in output::table_best(&run.report) {
                            println!(
                                "  {mode:<12} AAE {:.4}  AEE {:.4}  AEErel {:.4}  warping {:.4}",
                                v[0], v[1], v[2], v[3]
                            );
                        }
                        for (mode, msg) in &run.failures {
                            failed = true;
                            eprintln!("  {mode}: FAILED: {msg}");
                        }
                    }
                    println!("outputs in {}", cfg.output_dir.display());
                    if failed {
                        ExitCode::from(2)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(RunError::Config(e)) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Oracle { suite } => match oracle::run_suite(&suite) {
            Some(lines) => {
                for l in lines {
                    println!("{l}");
                }
                ExitCode::SUCCESS
            }
            None => {
                eprintln!(
                    "error: unknown suite {suite:?}; expected one of {}, all",
                    oracle::SUITES.join(", ")
                );
                ExitCode::from(1)
            }
        },
    }
}
