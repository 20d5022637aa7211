use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use hopfbalance::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).with_context(|| format!("{} failed", command_name(&cli))) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<hopfbalance::Error>().map_or(5, |e| e.exit_code());
            ExitCode::from(code as u8)
        }
    }
}

fn command_name(cli: &Cli) -> &'static str {
    use hopfbalance::cli::Command::*;
    match cli.command {
        Hopf(_) => "hopf",
        Coeffs(_) => "coeffs",
        Classify(_) => "classify",
        Compare(_) => "compare",
    }
}
