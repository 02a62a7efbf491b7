//! `riskshard`: evaluate measures, build allocations, compute SCRs and run
//! the exhaustive oracle on scenario files.

mod commands;
mod failure;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use failure::Failure;

#[derive(Parser, Debug)]
#[command(
    name = "riskshard",
    version,
    about = "Risk sharing for distortion and V@R-type measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate each measure on the scenarios with both evaluators.
    Eval(Inputs),
    /// Split the scenario position among the measures and check the total.
    Allocate(AllocateArgs),
    /// Solvency capital of a balance sheet, standalone and across a network.
    Scr(ScrArgs),
    /// Exhaustive minimum over grid splits between two measures.
    Oracle(OracleArgs),
    /// Run the invariant suite on built-in fixtures.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
struct Inputs {
    /// `value,probability` CSV; values are losses.
    #[arg(long)]
    scenarios: PathBuf,
    /// One measure config or a JSON array of them.
    #[arg(long)]
    measures: PathBuf,
    /// Directory for report files; created if missing.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum StrategyName {
    Main,
    VarType,
    Escape,
    SurplusEscape,
    Naive,
}

#[derive(Args, Debug)]
struct AllocateArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Construction to use; picked from the measures when omitted.
    #[arg(long, value_enum)]
    strategy: Option<StrategyName>,
    /// Withdrawal for the escape constructions.
    #[arg(long)]
    m: Option<f64>,
}

#[derive(Args, Debug)]
struct ScrArgs {
    /// `{"A0": ..., "L0": ..., "scenarios": [{"E1": ..., "p": ...}]}`.
    #[arg(long = "balance-sheet")]
    balance_sheet: PathBuf,
    #[arg(long)]
    measures: PathBuf,
    /// Network construction when several measures are given.
    #[arg(long, value_enum)]
    strategy: Option<StrategyName>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Grid step for the first entity's values.
    #[arg(long, default_value_t = 0.25)]
    grid: f64,
    /// How far the grid reaches beyond the range of X.
    #[arg(long, default_value_t = 6.0)]
    bound: f64,
    /// Equiprobable cells; defaults to the coarsest split with at least 4.
    #[arg(long)]
    cells: Option<usize>,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Eval(a) => commands::eval(&a.scenarios, &a.measures, a.out.as_deref()),
        Command::Allocate(a) => commands::allocate(
            &a.inputs.scenarios,
            &a.inputs.measures,
            a.strategy,
            a.m,
            a.inputs.out.as_deref(),
        ),
        Command::Scr(a) => commands::scr(
            &a.balance_sheet,
            &a.measures,
            a.strategy,
            a.m,
            a.out.as_deref(),
        ),
        Command::Oracle(a) => commands::oracle(
            &a.inputs.scenarios,
            &a.inputs.measures,
            a.grid,
            a.bound,
            a.cells,
            a.inputs.out.as_deref(),
        ),
        Command::Selftest(a) => selftest::run(a.seed, a.out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { failure::INPUT } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
