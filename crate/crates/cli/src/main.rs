//! `gsd`: design, scan, simulate and verify two-look group-sequential
//! non-inferiority trials with a binary endpoint.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "gsd", version, about = "Group-sequential design for binary non-inferiority trials")]
struct Cli {
    /// Cap on worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Path to the TOML config (or a JSON report produced with --json).
    #[arg(long)]
    pub config: PathBuf,
    /// Emit a machine-readable JSON document instead of the text report.
    #[arg(long)]
    pub json: bool,
    /// Write output to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve critical values and per-arm N for the configured power.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Also report integer (ceiling) sample sizes.
        #[arg(long)]
        ceil: bool,
    },
    /// Solve critical values and power for a fixed per-arm N.
    Power {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ceil: bool,
        /// Fixed quantity, `n=<v>`; defaults to `schedule.n` from the config.
        #[arg(long)]
        fix: Option<String>,
    },
    /// Solve one design per (psi, rho_e) grid point and emit CSV.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Interim fraction grid `start:end:step`.
        #[arg(long, default_value = "0.3:0.8:0.05")]
        psi: String,
        /// Efficacy spending exponent grid `start:end:step`.
        #[arg(long, default_value = "0.5:3:0.25")]
        rho: String,
        /// `power=<v>` or `n=<v>`; defaults to the config's power, else its N.
        #[arg(long)]
        fix: Option<String>,
    },
    /// Patient-level simulation compared against the analytic characteristics.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Z-statistic trajectories as patients accrue, as CSV.
    Trajectories {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long, default_value_t = 800)]
        max_n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Internal consistency checks of the solved design.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Draws for the Monte Carlo cross-check of each probability.
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(4);
        }
    }
    let result = match cli.command {
        Command::Solve { common, ceil } => commands::solve(&common, ceil),
        Command::Power { common, ceil, fix } => commands::power(&common, ceil, fix.as_deref()),
        Command::Scan { common, psi, rho, fix } => commands::scan(&common, &psi, &rho, fix.as_deref()),
        Command::Simulate { common, trials, seed } => commands::simulate(&common, trials, seed),
        Command::Trajectories {
            common,
            count,
            max_n,
            seed,
        } => commands::trajectories(&common, count, max_n, seed),
        Command::Verify { common, trials, seed } => commands::verify(&common, trials, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
