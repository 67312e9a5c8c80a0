//! `inspect-z`: collect the hypernetwork's scale signals over a corpus and
//! rank dimensions by how strongly one (left tag, right tag) pair dominates
//! them.
//!
//! Outputs: a JSON ranking summary (stdout, or `--summary FILE`) and an
//! optional per-node TSV dump (`--dump FILE`) with one column per signal
//! dimension.

use crate::errors::{write_text, CliError};
use clap::Args;
use std::path::PathBuf;
use tghyper::inspect::{analyze, dump_rows_tsv};
use tghyper::models::load_checkpoint;
use tghyper::treebank::load_eval_data;

#[derive(Args)]
pub struct InspectZArgs {
    /// Checkpoint of a hyper variant (static variants have no signals)
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Corpus to collect signals over
    #[arg(long)]
    pub data: PathBuf,
    /// Tag pairs kept per dimension
    #[arg(long, default_value_t = 5)]
    pub top_k: usize,
    /// Smallest group size admitted to the ranking
    #[arg(long, default_value_t = 1)]
    pub min_count: usize,
    /// Write the per-node TSV dump here
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// Write the JSON ranking summary here instead of stdout
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

pub fn run(args: InspectZArgs) -> Result<(), CliError> {
    let model = load_checkpoint(&args.checkpoint)?;
    if !model.meta.variant.is_hyper() {
        return Err(CliError::Usage(format!(
            "inspect-z: {} is a static variant and produces no scale signals",
            model.meta.variant
        )));
    }
    let examples = load_eval_data(
        &args.data,
        model.meta.task,
        &model.words,
        &model.tags,
        model.meta.num_classes,
    )?;
    let report = analyze(&model, &examples, args.top_k, args.min_count)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    if let Some(path) = &args.dump {
        let tsv =
            dump_rows_tsv(&model, &examples).map_err(|e| CliError::Usage(e.to_string()))?;
        write_text(path, &tsv)?;
        println!("z dump written to {}", path.display());
    }
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match &args.summary {
        Some(path) => {
            write_text(path, &json)?;
            println!("summary written to {}", path.display());
        }
        None if args.dump.is_none() => println!("{json}"),
        None => {}
    }
    if args.summary.is_some() || args.dump.is_some() {
        match report.dims.first().and_then(|d| d.top.first().map(|g| (d, g))) {
            Some((d, g)) => println!(
                "max separation: {:.4}σ on dimension {} (top pair {} / {})",
                d.separation, d.dim, g.left_tag, g.right_tag
            ),
            None => println!("no signal rows collected"),
        }
    }
    Ok(())
}
