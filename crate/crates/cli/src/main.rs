//! `tghyper`: train, evaluate, and inspect tag-guided hypernetwork tree
//! encoders from the command line.
//!
//! Every subcommand is deterministic given its flags and seeds: re-running
//! reproduces outputs bit-exactly, except for the wall-clock `seconds`
//! field in metrics logs.
//!
//! Exit codes: 0 success, 1 failed check, 2 usage or configuration error,
//! 3 malformed data or checkpoint.

mod errors;
mod eval_cmd;
mod gen_toy;
mod grad_check_cmd;
mod import_ptb;
mod inspect_cmd;
mod train_cmd;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "tghyper",
    version,
    about = "Tag-guided hypernetwork composition over binary constituency trees",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic tag-rule diagnostic corpus
    GenToy(gen_toy::GenToyArgs),
    /// Convert an n-ary treebank into the canonical binary line format
    ImportPtb(import_ptb::ImportPtbArgs),
    /// Train a model from a TOML config plus --set overrides
    Train(train_cmd::TrainArgs),
    /// Evaluate a checkpoint on a data file
    Eval(eval_cmd::EvalArgs),
    /// Rank hypernetwork scale-signal dimensions by tag-pair dominance
    InspectZ(inspect_cmd::InspectZArgs),
    /// Verify analytic gradients against finite differences
    GradCheck(grad_check_cmd::GradCheckArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenToy(args) => gen_toy::run(args),
        Command::ImportPtb(args) => import_ptb::run(args),
        Command::Train(args) => train_cmd::run(args),
        Command::Eval(args) => eval_cmd::run(args),
        Command::InspectZ(args) => inspect_cmd::run(args),
        Command::GradCheck(args) => grad_check_cmd::run(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
