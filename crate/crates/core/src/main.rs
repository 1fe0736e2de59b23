use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gpsvmc::cli;

#[derive(Parser)]
#[command(name = "gpsvmc", version, about = "Gaussian process state variational Monte Carlo")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimize the configured model and write a trace and checkpoint.
    Run { config: PathBuf },
    /// One run per grid point, e.g. `--grid "M=1,2;variant=ar-gps,gps;seed=1,2"`.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        grid: String,
    },
    /// Exact ground-state energy of the configured system.
    Ed { config: PathBuf },
    /// Histogram of `n` samples as CSV on stdout.
    Sample {
        config: PathBuf,
        #[arg(long)]
        n: usize,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = match args.cmd {
        Cmd::Run { config } => cli::run_vmc(config).map(|s| println!("{}", s.line())),
        Cmd::Sweep { config, grid } => cli::run_sweep(config, &grid).map(|rows| {
            println!("{}", cli::SWEEP_HEADER);
            for r in rows {
                println!("{}", r.csv_row());
            }
        }),
        Cmd::Ed { config } => cli::ed(config).map(|r| {
            println!("key,e0,provenance");
            println!("{}", r.csv_row());
        }),
        Cmd::Sample { config, n } => cli::sample(config, n).map(|h| print!("{}", h.to_csv())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
