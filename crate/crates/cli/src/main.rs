//! `heardof`: build delivered predicates, extract strategies, compute
//! heard-of predicates and check the characterization results.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heardof::StrategyFamily;

#[derive(Parser)]
#[command(name = "heardof", version, about = "Delivered predicates, strategies and heard-of predicates at small scope")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an expression and describe the delivered predicate.
    Build(BuildArgs),
    /// Minimal oblivious or conservative strategy of a predicate.
    MinStrategy(StrategyArgs),
    /// Heard-of predicate generated by a strategy on a predicate.
    ComputeHo(HeardOfArgs),
    /// Check a named claim on one or two predicates.
    Check(CheckArgs),
    /// Check one row of the crash/recovery table.
    Table1(TableArgs),
    /// Compare the interleaving oracle with the per-receiver computation.
    Oracle(HeardOfArgs),
    /// Print or validate an execution as `deliver r k j` / `next j` / `stop` lines.
    Trace(TraceArgs),
}

#[derive(Args, Clone)]
pub struct Common {
    /// Number of processes.
    #[arg(long)]
    pub n: usize,
    /// Number of rounds considered.
    #[arg(long)]
    pub horizon: usize,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
    /// Write the output to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Lift the size guards.
    #[arg(long)]
    pub force: bool,
}

#[derive(Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub common: Common,
    /// Predicate expression, e.g. "crash1@1 ~> total".
    #[arg(long)]
    pub expr: String,
    /// List every member collection.
    #[arg(long)]
    pub explicit: bool,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    Obliv,
    Cons,
}

impl From<FamilyArg> for StrategyFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Obliv => StrategyFamily::Oblivious,
            FamilyArg::Cons => StrategyFamily::Conservative,
        }
    }
}

#[derive(Args)]
pub struct StrategyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub expr: String,
    #[arg(long, value_enum, default_value = "obliv")]
    pub family: FamilyArg,
}

#[derive(Args)]
pub struct HeardOfArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub expr: String,
    /// Use the minimal strategy of this family.
    #[arg(long, value_enum, conflicts_with = "strategy")]
    pub family: Option<FamilyArg>,
    /// Read the strategy from a JSON file instead.
    #[arg(long)]
    pub strategy: Option<PathBuf>,
    /// List every heard-of collection.
    #[arg(long)]
    pub explicit: bool,
}

#[derive(Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    /// Claim name, e.g. oblivious-heard-of.
    #[arg(long)]
    pub theorem: String,
    #[arg(long)]
    pub expr: String,
    /// Second operand, for claims about binary operators.
    #[arg(long)]
    pub expr2: Option<String>,
}

#[derive(Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub common: Common,
    /// Row id, e.g. crash1, recoverF, crashF-after.
    #[arg(long)]
    pub row: String,
    /// F for the rows with F crashes.
    #[arg(long, default_value_t = 2)]
    pub faults: usize,
    /// First crash round for the crash-after rows.
    #[arg(long, default_value_t = 2)]
    pub round: usize,
}

#[derive(Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub common: Common,
    /// Print the standard execution of a member of this predicate
    /// with every message delivered in its own round.
    #[arg(long, required_unless_present = "file", conflicts_with = "file")]
    pub expr: Option<String>,
    /// Position of the member in canonical order.
    #[arg(long, default_value_t = 0)]
    pub member: usize,
    /// Validate the execution in this file instead.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(a) => commands::build(&a),
        Command::MinStrategy(a) => commands::min_strategy(&a),
        Command::ComputeHo(a) => commands::compute_ho(&a),
        Command::Check(a) => commands::check(&a),
        Command::Table1(a) => commands::table1(&a),
        Command::Oracle(a) => commands::oracle(&a),
        Command::Trace(a) => commands::trace(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
