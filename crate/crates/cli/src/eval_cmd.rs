//! `eval`: score a checkpoint on a data file.

use crate::errors::CliError;
use clap::Args;
use std::path::PathBuf;
use tghyper::models::load_checkpoint;
use tghyper::training::evaluate;
use tghyper::treebank::load_eval_data;

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Data file in the checkpoint's task format
    #[arg(long)]
    pub data: PathBuf,
}

pub fn run(args: EvalArgs) -> Result<(), CliError> {
    let model = load_checkpoint(&args.checkpoint)?;
    let examples = load_eval_data(
        &args.data,
        model.meta.task,
        &model.words,
        &model.tags,
        model.meta.num_classes,
    )?;
    let report = evaluate(&model, &examples);
    println!(
        "accuracy: {} ({}/{})",
        report.accuracy, report.correct, report.total
    );
    println!("mean loss: {}", report.mean_loss);
    Ok(())
}
