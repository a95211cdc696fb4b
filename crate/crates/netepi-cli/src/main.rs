//! `netepi` command-line front end.
//!
//! Exit status is 0 on success, 1 on a runtime failure and 2 on a usage
//! error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod analyze;
mod common;
mod compare;
mod generate;
mod indicators;
mod ode;
mod simulate;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use common::Provenance;

#[derive(Debug, Parser)]
#[command(name = "netepi", version, about = "Epidemics on random graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random graph as an edge list.
    Generate(generate::GenerateArgs),
    /// Simulate SIR/SEIR epidemics and summarize final sizes.
    Simulate(simulate::SimulateArgs),
    /// Integrate a deterministic limit system.
    Ode(ode::OdeArgs),
    /// Growth rate, R0 and control effort for a contact model.
    Indicators(indicators::IndicatorsArgs),
    /// Describe the structure of a contact graph.
    Analyze(analyze::AnalyzeArgs),
    /// Distances between simulated and reference trajectories.
    Compare(compare::CompareArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let args: Vec<String> = std::env::args().skip(1).collect();
    let prov = Provenance::new(&args);
    let result = match &cli.command {
        Command::Generate(a) => generate::run(a, prov),
        Command::Simulate(a) => simulate::run(a, prov),
        Command::Ode(a) => ode::run(a, prov),
        Command::Indicators(a) => indicators::run(a, prov),
        Command::Analyze(a) => analyze::run(a, prov),
        Command::Compare(a) => compare::run(a, prov).and_then(|ok| {
            if ok {
                Ok(())
            } else {
                Err(anyhow::anyhow!("some columns exceed the threshold"))
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
