//! Output heads and per-example losses, built on the tape.
//!
//! Classification reads a node's hidden state through a linear layer; the
//! loss sums softmax cross-entropy over every labeled node of the tree
//! (phrase-level supervision included when present).  Matching combines two
//! root states into pair features — elementwise product and absolute
//! difference — passes them through one ReLU layer, and classifies that.
//!
//! Under a training dropout context, every hidden state entering a head is
//! masked independently; in eval mode the heads are deterministic.

use crate::models::{ModelMeta, TreeStates};
use crate::params::ParamSet;
use crate::tape::{Tape, ValueId};
use crate::training::dropout::DropoutCtx;
use crate::treebank::Example;
use crate::Task;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LossError {
    #[error("tree has no labeled nodes, so no loss is defined")]
    NoLabels,
}

fn head_input(tape: &mut Tape, h: ValueId, dropout: &mut DropoutCtx) -> ValueId {
    match dropout.out_mask(tape.value(h).len()) {
        Some(m) => tape.mask_mul(h, m),
        None => h,
    }
}

/// Class logits for one node's hidden state (classification head).
pub fn classify_logits(
    meta: &ModelMeta,
    set: &ParamSet,
    tape: &mut Tape,
    h: ValueId,
    dropout: &mut DropoutCtx,
) -> ValueId {
    assert!(
        meta.task == Task::Classify,
        "classification head requested from a {} model",
        meta.task
    );
    let x = head_input(tape, h, dropout);
    let w = tape.param(set, meta.ids.cls_w);
    let b = tape.param(set, meta.ids.cls_b);
    let lin = tape.matvec(w, x);
    tape.add(lin, b)
}

/// Class logits for a pair of root states (matching head).
pub fn pair_logits(
    meta: &ModelMeta,
    set: &ParamSet,
    tape: &mut Tape,
    first: ValueId,
    second: ValueId,
    dropout: &mut DropoutCtx,
) -> ValueId {
    assert!(
        meta.task == Task::Match,
        "matching head requested from a {} model",
        meta.task
    );
    let prod = tape.mul(first, second);
    let diff = tape.sub(first, second);
    let dist = tape.abs(diff);
    let feat = tape.concat(&[prod, dist]);
    let w = tape.param(set, meta.ids.mlp_w.unwrap());
    let b = tape.param(set, meta.ids.mlp_b.unwrap());
    let lin = tape.matvec(w, feat);
    let pre = tape.add(lin, b);
    let hidden = tape.relu(pre);
    let x = head_input(tape, hidden, dropout);
    let cw = tape.param(set, meta.ids.cls_w);
    let cb = tape.param(set, meta.ids.cls_b);
    let clin = tape.matvec(cw, x);
    tape.add(clin, cb)
}

/// Summed cross-entropy over every labeled node of one encoded tree.
pub fn tree_loss(
    meta: &ModelMeta,
    set: &ParamSet,
    tape: &mut Tape,
    states: &TreeStates,
    dropout: &mut DropoutCtx,
) -> Result<ValueId, LossError> {
    let mut total: Option<ValueId> = None;
    for i in 0..states.len() {
        let Some(label) = states.info[i].label else {
            continue;
        };
        let h = states.nodes[i].h;
        let logits = classify_logits(meta, set, tape, h, dropout);
        let ce = tape.softmax_cross_entropy(logits, label);
        total = Some(match total {
            Some(t) => tape.add(t, ce),
            None => ce,
        });
    }
    total.ok_or(LossError::NoLabels)
}

/// Loss of one example: encodes its tree(s) and applies the task head.
pub fn example_loss(
    meta: &ModelMeta,
    set: &ParamSet,
    tape: &mut Tape,
    example: &Example,
    dropout: &mut DropoutCtx,
) -> Result<ValueId, LossError> {
    match example {
        Example::Single { tree } => {
            let states = crate::models::forward(meta, set, tape, tree, dropout);
            tree_loss(meta, set, tape, &states, dropout)
        }
        Example::Pair {
            first,
            second,
            label,
        } => {
            let a = crate::models::forward(meta, set, tape, first, dropout);
            let b = crate::models::forward(meta, set, tape, second, dropout);
            let logits = pair_logits(meta, set, tape, a.root_h(), b.root_h(), dropout);
            Ok(tape.softmax_cross_entropy(logits, *label))
        }
    }
}
