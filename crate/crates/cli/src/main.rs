use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use invharm_cli::commands::{self, Options, TableArgs};
use invharm_cli::exit;
use invharm_core::ConventionFlags;

#[derive(Parser, Debug)]
#[command(name = "invharm", version, about = "Charged inverse-harmonic oscillator: solve, verify and cross-check")]
struct Cli {
    /// Run configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides [output] dir; INVHARM_OUT is the fallback).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Force convention flags instead of scanning, e.g. s=-1,h=1/2,branch=+.
    #[arg(long, global = true, value_name = "FLAGS", allow_hyphen_values = true)]
    flags: Option<ConventionFlags>,
    /// Only report errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the chain and write trajectory, field and summary.
    Solve,
    /// Run the residual refinement ladder.
    Verify,
    /// Propagate the analytic initial slice with Crank-Nicolson and compare.
    Oracle,
    /// Rank the eight exponent conventions.
    Scan,
    /// Tabulate J, N and the Wronskian defect.
    BesselTable {
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2.5,7")]
        orders: Vec<f64>,
        #[arg(long, default_value_t = 0.2)]
        x_min: f64,
        #[arg(long, default_value_t = 40.0)]
        x_max: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::PARSE as u8 } else { 0 });
        }
    };
    let opts = Options { config: cli.config, out: cli.out, flags: cli.flags };
    let result = match cli.command {
        Command::Solve => commands::solve(&opts),
        Command::Verify => commands::verify(&opts),
        Command::Oracle => commands::oracle(&opts),
        Command::Scan => commands::scan(&opts),
        Command::BesselTable { orders, x_min, x_max, points } => {
            commands::bessel_table(&opts, &TableArgs { orders, x_min, x_max, points })
        }
    };
    match result {
        Ok(lines) => {
            if !cli.quiet {
                for l in lines {
                    println!("{l}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
