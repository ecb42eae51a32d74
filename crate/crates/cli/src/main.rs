use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use ym2_cli::{exit_code, mc_rows_to_csv, output_path, rows_to_csv, run_compare, run_compute, run_mc, write_atomic, Scenario};
use ym2_core::diagram_engine::DEFAULT_BUDGET;
use ym2_core::EngineConfig;

#[derive(Parser)]
#[command(name = "ym2", version, about = "Wilson-loop λ-series for 2D Yang–Mills in axial gauges")]
struct Cli {
    /// Worker threads (falls back to YM2_THREADS, then all cores).
    #[arg(long, global = true, env = "YM2_THREADS")]
    threads: Option<usize>,
    /// Cap on the estimated number of chord-diagram shapes per evaluation.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Series coefficients per gauge, order and lattice size, as CSV.
    Compute {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-order agreement across gauges; exit 1 on disagreement.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        /// Second scenario whose gauges are compared against the first.
        #[arg(long)]
        against: Option<PathBuf>,
    },
    /// Monte-Carlo estimates against the ax series, as CSV.
    Mc {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("configuring the thread pool")?;
    }
    let cfg = EngineConfig { budget: cli.budget };
    match cli.command {
        Command::Compute { scenario, out } => {
            let s = Scenario::load(&scenario)?;
            let path = output_path(out.as_deref(), &s)?;
            let rows = run_compute(&s, &cfg)?;
            write_atomic(&path, &rows_to_csv(&rows))?;
            Ok(true)
        }
        Command::Compare { scenario, against } => {
            let s = Scenario::load(&scenario)?;
            let other = against.as_deref().map(Scenario::load).transpose()?;
            let report = run_compare(&s, other.as_ref(), &cfg)?;
            println!("{report}");
            Ok(report.pass())
        }
        Command::Mc { scenario, out } => {
            let s = Scenario::load(&scenario)?;
            let path = output_path(out.as_deref(), &s)?;
            let rows = run_mc(&s, &cfg)?;
            write_atomic(&path, &mc_rows_to_csv(&rows))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
