//! `import-ptb`: read an n-ary treebank, binarize every tree, and write the
//! canonical one-example-per-line file, optionally with a JSON-lines
//! export for external tooling.

use crate::errors::{write_text, CliError};
use clap::Args;
use serde_json::{json, Value};
use std::path::PathBuf;
use tghyper::treebank::{
    binarize, read_raw_file, write_raw_file, BinarizeDirection, RawExample, RawKind, RawTree,
};
use tghyper::Task;

#[derive(Args)]
pub struct ImportPtbArgs {
    /// Input file: one s-expression per line (classify) or
    /// tree<TAB>tree<TAB>label lines (match)
    #[arg(long)]
    pub input: PathBuf,
    /// Canonical binary-tree output file
    #[arg(long)]
    pub output: PathBuf,
    /// classify or match
    #[arg(long, default_value = "classify")]
    pub task: String,
    /// Where extra children fold: right or left
    #[arg(long, default_value = "right")]
    pub binarize: String,
    /// Also write a JSON-lines export here
    #[arg(long)]
    pub jsonl: Option<PathBuf>,
}

pub fn run(args: ImportPtbArgs) -> Result<(), CliError> {
    let task = Task::parse(&args.task).ok_or_else(|| {
        CliError::Usage(format!(
            "--task: unknown value {:?} (expected classify or match)",
            args.task
        ))
    })?;
    let dir = BinarizeDirection::parse(&args.binarize).ok_or_else(|| {
        CliError::Usage(format!(
            "--binarize: unknown value {:?} (expected right or left)",
            args.binarize
        ))
    })?;
    let raw = read_raw_file(&args.input, task)?;
    let binarized: Vec<RawExample> = raw
        .iter()
        .map(|e| match e {
            RawExample::Single(t) => RawExample::Single(binarize(t, dir)),
            RawExample::Pair(a, b, l) => RawExample::Pair(binarize(a, dir), binarize(b, dir), *l),
        })
        .collect();
    write_raw_file(&args.output, &binarized)?;
    println!(
        "wrote {} examples to {}",
        binarized.len(),
        args.output.display()
    );
    if let Some(path) = &args.jsonl {
        let mut out = String::new();
        for e in &binarized {
            out.push_str(&example_json(e).to_string());
            out.push('\n');
        }
        write_text(path, &out)?;
        println!("wrote JSON lines to {}", path.display());
    }
    Ok(())
}

fn example_json(example: &RawExample) -> Value {
    match example {
        RawExample::Single(t) => json!({ "kind": "single", "tree": tree_json(t) }),
        RawExample::Pair(a, b, l) => json!({
            "kind": "pair",
            "first": tree_json(a),
            "second": tree_json(b),
            "label": l,
        }),
    }
}

fn tree_json(tree: &RawTree) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("tag".to_string(), Value::from(tree.tag.clone()));
    if let Some(label) = tree.label {
        obj.insert("label".to_string(), Value::from(label));
    }
    match &tree.kind {
        RawKind::Word(w) => {
            obj.insert("word".to_string(), Value::from(w.clone()));
        }
        RawKind::Children(children) => {
            obj.insert(
                "children".to_string(),
                Value::from(children.iter().map(tree_json).collect::<Vec<Value>>()),
            );
        }
    }
    Value::Object(obj)
}
