//! `fde-lab`: config-driven experiments verifying the near-extinction
//! asymptotics of fast diffusion on bounded domains.
//!
//! Exit codes: 0 all checks pass, 1 at least one check failed,
//! 2 configuration or numerical error (no outputs are written).

mod config;
mod experiments;
mod report;
mod sweep;

use clap::{Parser, Subcommand};
use config::{load_config, Experiment};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "fde-lab", version, about = "Numerical laboratory for fast diffusion near extinction")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a single experiment from a JSON config
    Run {
        /// Path to the JSON experiment configuration
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's `out`)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run an experiment over a list of values for one numeric key
    Sweep {
        /// Path to the JSON experiment configuration
        #[arg(long)]
        config: PathBuf,
        /// Config key to vary (e.g. m, c, n, seed)
        #[arg(long)]
        key: String,
        /// Comma-separated list of values
        #[arg(long)]
        values: String,
        /// Output directory (overrides the config's `out`)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List available experiments and their theorem anchors
    List,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run { config, out } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return 2;
                }
            };
            let out_dir = out
                .or_else(|| cfg.out.clone().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out").join(cfg.experiment.name()));
            let start = Instant::now();
            match experiments::run_experiment(&cfg) {
                Ok((rep, tables)) => {
                    let wall = start.elapsed().as_secs_f64();
                    if let Err(e) = report::write_outputs(&out_dir, &rep, &tables, wall) {
                        eprintln!("error: cannot write {}: {e}", out_dir.display());
                        return 2;
                    }
                    for c in &rep.checks {
                        let status = if c.pass { "PASS" } else { "FAIL" };
                        println!("[{status}] {} ({}): {:.6e} — {}", c.name, c.anchor, c.value, c.bound);
                    }
                    let status = if rep.pass { "PASS" } else { "FAIL" };
                    println!("[{status}] {} — report written to {}", rep.experiment, out_dir.display());
                    if rep.pass {
                        0
                    } else {
                        1
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            }
        }
        Cmd::Sweep { config, key, values, out } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return 2;
                }
            };
            let out_dir = out
                .or_else(|| cfg.out.clone().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out").join(format!("{}-sweep", cfg.experiment.name())));
            let vals: Vec<String> = values
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            sweep::run_sweep(&cfg, &key, &vals, &out_dir)
        }
        Cmd::List => {
            for e in Experiment::ALL {
                println!("{:<18} anchors: {}", e.name(), e.anchors().join(", "));
            }
            0
        }
    }
}
