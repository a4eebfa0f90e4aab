use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mav_cli::{cmd_analyze, cmd_detect, cmd_ingest, cmd_mav, cmd_report, CliError, MavArgs};

/// Maximal arbitrage value between an AMM pool and a centralized exchange.
#[derive(Parser)]
#[command(name = "mav", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for all outputs.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Load, validate and align swap logs and CEX bars.
    Ingest(RunArgs),
    /// Find misalignment episodes and summarize MAV per day.
    Detect(RunArgs),
    /// Cluster and regress the episodes found by `detect`.
    Analyze(RunArgs),
    /// Run ingest, detect and analyze in one go.
    Report(RunArgs),
    /// MAV of a single constant-product pool.
    Mav {
        #[arg(long)]
        reserve_x: f64,
        #[arg(long)]
        reserve_y: f64,
        #[arg(long)]
        p_cex: f64,
        #[arg(long, default_value_t = 8.0)]
        fee_bps: f64,
        /// Also run the grid search and print the relative gap.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 1_000_000)]
        grid: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Ingest(a) => cmd_ingest(&a.config, &a.out, &mut stdout).map(drop),
        Command::Detect(a) => cmd_detect(&a.config, &a.out, &mut stdout).map(drop),
        Command::Analyze(a) => cmd_analyze(&a.config, &a.out, &mut stdout).map(drop),
        Command::Report(a) => cmd_report(&a.config, &a.out, &mut stdout),
        Command::Mav {
            reserve_x,
            reserve_y,
            p_cex,
            fee_bps,
            verify,
            grid,
        } => cmd_mav(
            &MavArgs {
                reserve_x,
                reserve_y,
                p_cex,
                fee_bps,
                verify,
                grid,
            },
            &mut stdout,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mav: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
