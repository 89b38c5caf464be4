//! `tdqmc`: run relaxations, α scans and reference calculations from JSON
//! configuration files, and export figure data as CSV.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::ConfigError;

#[derive(Parser)]
#[command(name = "tdqmc", version, about = "Ground states of bosonic quantum dots by time-dependent quantum Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output directory (defaults to the config's `output_dir`, then `out/<name>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the run seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 for one per core.
    #[arg(long, env = "TDQMC_THREADS", default_value_t = 0)]
    threads: usize,
}

#[derive(Args, Clone)]
struct WithConfig {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// One relaxation: result.json and energy_trace.csv.
    Run(WithConfig),
    /// Relaxations over the config's α list: alpha_scan.csv and result.json.
    Scan(WithConfig),
    /// Exact reference on the configuration-space grid: oracle.json.
    Oracle(WithConfig),
    /// α scan and reference side by side: compare.json and compare.csv.
    Compare {
        #[command(flatten)]
        args: WithConfig,
        /// Join an existing scan result.json instead of running the scan.
        #[arg(long, requires = "oracle_result")]
        scan_result: Option<PathBuf>,
        /// Join an existing oracle.json instead of recomputing it.
        #[arg(long, requires = "scan_result")]
        oracle_result: Option<PathBuf>,
    },
    /// Interaction potential curves for a = 0 and a = 3: fig1.csv.
    Fig1(Common),
    /// Paired walker coordinates of a converged run: scatter.csv.
    Fig2Scatter(WithConfig),
    /// Sweep over particle number and screening: fig3.csv and fig3.json.
    Fig3(WithConfig),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Run(a) | Command::Scan(a) | Command::Oracle(a) | Command::Fig2Scatter(a) | Command::Fig3(a) => {
            a.common.clone()
        }
        Command::Compare { args, .. } => args.common.clone(),
        Command::Fig1(c) => c.clone(),
    };
    if common.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(common.threads)
            .build_global()
        {
            eprintln!("error: cannot configure {} threads: {e}", common.threads);
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Run(a) => commands::run(&a.config, &a.common),
        Command::Scan(a) => commands::scan(&a.config, &a.common),
        Command::Oracle(a) => commands::oracle(&a.config, &a.common),
        Command::Compare {
            args,
            scan_result,
            oracle_result,
        } => commands::compare(&args.config, &args.common, scan_result.zip(oracle_result)),
        Command::Fig1(c) => commands::fig1(&c),
        Command::Fig2Scatter(a) => commands::fig2_scatter(&a.config, &a.common),
        Command::Fig3(a) => commands::fig3(&a.config, &a.common),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = exit_code(&err);
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}

/// 2 for bad input, 3 for numerical failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<tdqmc::Error>() {
            return match e {
                tdqmc::Error::Config(_) | tdqmc::Error::Invalid(_) => 2,
                _ => 3,
            };
        }
    }
    3
}
