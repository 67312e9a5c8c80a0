//! Treebank ingestion: s-expressions, binarization, vocabularies, indexed
//! corpora, pretrained embeddings, and the synthetic diagnostic corpus.

mod binarize;
mod corpus;
mod embeddings;
mod sexpr;
mod toy;
mod vocab;

pub use binarize::{binarize, BinarizeDirection};
pub use corpus::{
    derive_num_classes, index_tree, index_tree_interning, load_eval_data, load_single_file,
    load_training_data, read_raw_file, write_raw_file, Example, LoadedData, LoadedFile,
    RawExample, Tree, TreeKind,
};
pub use embeddings::load_embeddings;
pub use sexpr::{parse_sexpr, ParseError, RawKind, RawTree};
pub use toy::{gen_toy_corpus, ToyData, ToyError, ToyRule, ToySpec};
pub use vocab::Vocab;

use std::path::PathBuf;
use thiserror::Error;

/// User-facing data errors: anything wrong with a treebank file or its
/// contents.  Carries enough context (path, line) to act on.
#[derive(Debug, Error)]
pub enum TreebankError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Parse {
        path: PathBuf,
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("{path}:{line}: {message}")]
    Data {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
}
