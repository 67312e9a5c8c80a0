//! Extraction of recurrent-term scale signals for inspection.
//!
//! Runs the encoder in eval mode (no dropout, no backward pass) and exports
//! one row per inner node: the exact scale vector applied to the recurrent
//! term of the main composition, together with the node's tag, its
//! children's tags, its phrase span, and its tree path.  Rows follow
//! post-order, root last.

use super::{Model, Variant};
use crate::tape::Tape;
use crate::tensor::Tensor;
use crate::training::dropout::DropoutCtx;
use crate::treebank::Tree;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("variant {0} has no scale signals; use a tag-guided or tag-blind hyper variant")]
    Static(Variant),
}

/// The recurrent-term scale signal at one inner node.
#[derive(Clone, Debug)]
pub struct ZRow {
    /// Root-to-node path as `L`/`R` steps; empty at the root.
    pub path: String,
    /// Leaf span `[start, end)` in sentence positions.
    pub span: (usize, usize),
    pub tag: usize,
    pub left_tag: usize,
    pub right_tag: usize,
    pub z_rec: Tensor,
}

/// Collects the recurrent-term scale signal of every inner node,
/// post-order.  A tree with `n` leaves yields exactly `n - 1` rows.
pub fn collect_zsignals(model: &Model, tree: &Tree) -> Result<Vec<ZRow>, SignalError> {
    if !model.meta.variant.is_hyper() {
        return Err(SignalError::Static(model.meta.variant));
    }
    let mut tape = Tape::new();
    let mut dropout = DropoutCtx::eval();
    let states = super::forward(&model.meta, &model.params, &mut tape, tree, &mut dropout);

    let mut rows = Vec::new();
    for (state, info) in states.nodes.iter().zip(states.info.iter()) {
        let (Some(l), Some(r)) = (info.left, info.right) else {
            continue;
        };
        let scale = state
            .scale
            .expect("hyper variant inner node must carry scale signals");
        rows.push(ZRow {
            path: info.path.clone(),
            span: info.span,
            tag: info.tag,
            left_tag: states.info[l].tag,
            right_tag: states.info[r].tag,
            z_rec: tape.value(scale.recurrent).clone(),
        });
    }
    Ok(rows)
}
