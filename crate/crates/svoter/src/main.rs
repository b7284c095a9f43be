//! `svoter <suite> [--config <path>] [--seed <u64>] [--replicas <n>]
//! [--out <dir>] [--threads <n>]`
//!
//! Exit codes: 0 all metrics pass, 1 any acceptance failure, 2
//! configuration error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::Parser;
use svoter::config::{ExperimentConfig, Suite};

#[derive(Parser, Debug)]
#[command(
    name = "svoter",
    about = "Stubborn voter model experiment suites",
    version
)]
struct Cli {
    /// Suite to run: duality, consensus, martingale, stationary,
    /// excursion, entrance, coupling, coalescence-scaling, coming-down,
    /// extremes, lineage-convergence
    suite: String,
    /// JSON config file; unset fields take the suite's defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, decimal or 0x-hex (overrides the config file)
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
    /// Replica count (overrides the config file)
    #[arg(long)]
    replicas: Option<u64>,
    /// Output directory for CSV and JSON artifacts
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (SVOTER_THREADS is the fallback)
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let suite = match Suite::from_str(&cli.suite) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!(
                "available suites: {}",
                Suite::ALL.map(|s| s.name()).join(", ")
            );
            return ExitCode::from(2);
        }
    };
    let mut config = match &cli.config {
        Some(path) => match ExperimentConfig::load(path, suite) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::new(suite),
    };
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    if let Some(replicas) = cli.replicas {
        config.replicas = Some(replicas);
    }
    if let Some(out) = cli.out {
        config.out_dir = Some(out);
    }
    if let Some(threads) = cli.threads {
        config.threads = Some(threads);
    }

    let report = match svoter::run_suite(&config) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    println!(
        "suite {} finished in {:.2}s (seed {:#x})",
        report.suite, report.wall_clock_secs, report.config.master_seed
    );
    for line in report.summary_lines() {
        println!("  {line}");
    }
    if report.pass {
        println!("result: PASS");
        ExitCode::SUCCESS
    } else {
        println!("result: FAIL");
        ExitCode::from(1)
    }
}
