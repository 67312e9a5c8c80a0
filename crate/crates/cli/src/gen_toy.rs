//! `gen-toy`: write a synthetic diagnostic corpus whose label is decided by
//! a simple tag (or word) rule, split 8/1/1 into train/dev/test.

use crate::errors::CliError;
use clap::Args;
use std::path::PathBuf;
use tghyper::treebank::{gen_toy_corpus, write_raw_file, RawExample, RawTree, ToyRule, ToySpec};

#[derive(Args)]
pub struct GenToyArgs {
    /// Directory for train.txt / dev.txt / test.txt (created if missing)
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Labeling rule: "tag" (left-child tag majority) or "word"
    #[arg(long, default_value = "tag")]
    pub rule: String,
    /// Total examples across all three splits (8/1/1 split)
    #[arg(long, default_value_t = 1250)]
    pub size: usize,
    /// Tag alphabet size
    #[arg(long, default_value_t = 8)]
    pub tags: usize,
    /// Word alphabet size
    #[arg(long, default_value_t = 6)]
    pub words: usize,
    /// Minimum tree depth in edges
    #[arg(long, default_value_t = 3)]
    pub depth_min: usize,
    /// Maximum tree depth in edges
    #[arg(long, default_value_t = 6)]
    pub depth_max: usize,
    /// Number of root classes
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

pub fn run(args: GenToyArgs) -> Result<(), CliError> {
    let rule = ToyRule::parse(&args.rule).ok_or_else(|| {
        CliError::Usage(format!(
            "--rule: unknown value {:?} (expected tag or word)",
            args.rule
        ))
    })?;
    let spec = ToySpec {
        rule,
        size: args.size,
        num_tags: args.tags,
        num_words: args.words,
        depth_min: args.depth_min,
        depth_max: args.depth_max,
        num_classes: args.classes,
    };
    let data = gen_toy_corpus(&spec, args.seed).map_err(|e| CliError::Usage(e.to_string()))?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out_dir.display())))?;
    for (name, split) in [
        ("train.txt", &data.train),
        ("dev.txt", &data.dev),
        ("test.txt", &data.test),
    ] {
        let path = args.out_dir.join(name);
        let examples: Vec<RawExample> = split
            .iter()
            .map(|t: &RawTree| RawExample::Single(t.clone()))
            .collect();
        write_raw_file(&path, &examples)?;
        println!("wrote {} examples to {}", split.len(), path.display());
    }
    Ok(())
}
