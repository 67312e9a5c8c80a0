//! Tag-guided hypernetwork composition over binary constituency trees.
//!
//! The crate is organized bottom-up:
//!
//! * [`tensor`] / [`tape`] / [`params`] / [`gradcheck`] — a small reverse-mode
//!   autodiff engine over dense 1-D/2-D `f64` tensors.  Each tree gets a fresh
//!   tape; the tape records the forward computation and replays it backwards.
//! * [`treebank`] — s-expression parsing, binarization, vocabularies,
//!   embedding files, and the synthetic diagnostic corpus generator.
//! * [`models`] — the six encoder variants (RecNN, TreeLSTM, their tag-guided
//!   hypernetwork extensions, and the tag-blind ablations), parameter
//!   construction, and checkpointing.
//! * [`training`] — output heads, losses, dropout, AdaGrad, the training
//!   loop, and evaluation.
//! * [`inspect`] — extraction and ranking of the per-dimension scale signals
//!   produced by the hypernetwork.

pub mod gradcheck;
pub mod inspect;
pub mod models;
pub mod params;
pub mod tape;
pub mod tensor;
pub mod training;
pub mod treebank;

use serde::{Deserialize, Serialize};

/// What the output layer predicts: a class for a single tree, or a class for
/// a pair of trees (e.g. relatedness buckets).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    /// One tree in, one distribution over classes out.
    Classify,
    /// Two trees in, one distribution over classes out.
    Match,
}

impl Task {
    pub fn parse(s: &str) -> Option<Task> {
        match s.to_ascii_lowercase().as_str() {
            "classify" => Some(Task::Classify),
            "match" => Some(Task::Match),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Task::Classify => "classify",
            Task::Match => "match",
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
