//! The six tree encoders and their parameter inventories.
//!
//! Two static baselines compose children with shared weights:
//!
//! * `RecNN` — `h = tanh(U [h_l; h_r] + b)`
//! * `TreeLSTM` — a binary TreeLSTM with two forget gates
//!
//! The tag-guided variants put a small hypernetwork of the same shape next
//! to the main network.  It reads tag embeddings, head words, and child
//! states (fused into one input), and emits per-dimension *scale signals*
//! that modulate the main composition's terms — so the effective weights
//! change with the syntactic environment while staying rank-preserving and
//! cheap.  The `DC-` ablations are the same machinery with the tag table
//! frozen at zero: what remains is what plain composition could learn alone.

mod build;
mod checkpoint;
mod forward;
mod signals;

pub use build::ModelSpec;
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError};
pub use forward::{forward, NodeInfo, NodeState, ScaleIds, TreeStates};
pub use signals::{collect_zsignals, SignalError, ZRow};

use crate::params::{ParamId, ParamSet};
use crate::treebank::Vocab;
use crate::Task;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Recnn,
    TreeLstm,
    TgHRecnn,
    TgHTreeLstm,
    DcRecnn,
    DcTreeLstm,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Recnn,
        Variant::TreeLstm,
        Variant::TgHRecnn,
        Variant::TgHTreeLstm,
        Variant::DcRecnn,
        Variant::DcTreeLstm,
    ];

    /// Case-insensitive, so both the canonical lowercase names and the
    /// display spellings (`TG-HTreeLSTM`) are accepted.
    pub fn parse(s: &str) -> Option<Variant> {
        match s.to_ascii_lowercase().as_str() {
            "recnn" => Some(Variant::Recnn),
            "treelstm" => Some(Variant::TreeLstm),
            "tg-hrecnn" => Some(Variant::TgHRecnn),
            "tg-htreelstm" => Some(Variant::TgHTreeLstm),
            "dc-recnn" => Some(Variant::DcRecnn),
            "dc-treelstm" => Some(Variant::DcTreeLstm),
            _ => None,
        }
    }

    /// The lowercase identifier accepted by [`Variant::parse`].
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Recnn => "recnn",
            Variant::TreeLstm => "treelstm",
            Variant::TgHRecnn => "tg-hrecnn",
            Variant::TgHTreeLstm => "tg-htreelstm",
            Variant::DcRecnn => "dc-recnn",
            Variant::DcTreeLstm => "dc-treelstm",
        }
    }

    /// TreeLSTM cell rather than plain tanh composition.
    pub fn is_lstm(&self) -> bool {
        matches!(
            self,
            Variant::TreeLstm | Variant::TgHTreeLstm | Variant::DcTreeLstm
        )
    }

    /// Carries the hypernetwork side (tag-guided or its tag-blind ablation).
    pub fn is_hyper(&self) -> bool {
        matches!(
            self,
            Variant::TgHRecnn | Variant::TgHTreeLstm | Variant::DcRecnn | Variant::DcTreeLstm
        )
    }

    /// Ablation with the tag embedding table frozen at zero.
    pub fn is_tag_blind(&self) -> bool {
        matches!(self, Variant::DcRecnn | Variant::DcTreeLstm)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Recnn => "RecNN",
            Variant::TreeLstm => "TreeLSTM",
            Variant::TgHRecnn => "TG-HRecNN",
            Variant::TgHTreeLstm => "TG-HTreeLSTM",
            Variant::DcRecnn => "DC-RecNN",
            Variant::DcTreeLstm => "DC-TreeLSTM",
        })
    }
}

/// How tag-side and semantic-side inputs combine into the hypernetwork
/// input (hyper variants only; ignored by the static baselines).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fusion {
    /// One linear layer over the concatenation of everything.
    Concat,
    /// Separate projections of the tag side and the semantic side, combined
    /// multiplicatively.
    Multi,
}

impl Fusion {
    pub fn parse(s: &str) -> Option<Fusion> {
        match s.to_ascii_lowercase().as_str() {
            "concat" => Some(Fusion::Concat),
            "multi" => Some(Fusion::Multi),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Fusion::Concat => "concat",
            Fusion::Multi => "multi",
        }
    }
}

impl std::fmt::Display for Fusion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Layer widths.  `scale_len` (the length of each scale signal) is derived:
/// it matches the main pre-activation, `5*hidden` for LSTM cells and
/// `hidden` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    /// Word embedding width.
    pub word_dim: usize,
    /// Main hidden state width.
    pub hidden_dim: usize,
    /// Hypernetwork hidden state width.
    pub hyper_dim: usize,
    /// Fused hypernetwork input width.
    pub fused_dim: usize,
    /// Tag embedding width.
    pub tag_dim: usize,
}

impl Dims {
    /// The full-scale defaults used by the provided configs.
    pub fn defaults() -> Dims {
        Dims {
            word_dim: 300,
            hidden_dim: 150,
            hyper_dim: 50,
            fused_dim: 100,
            tag_dim: 50,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("word_dim", self.word_dim),
            ("hidden_dim", self.hidden_dim),
            ("hyper_dim", self.hyper_dim),
            ("fused_dim", self.fused_dim),
            ("tag_dim", self.tag_dim),
        ] {
            if v == 0 {
                return Err(format!("{name} must be positive"));
            }
        }
        Ok(())
    }

    /// Rows of the main pre-activation / scale signals.
    pub fn scale_len(&self, variant: Variant) -> usize {
        if variant.is_lstm() {
            5 * self.hidden_dim
        } else {
            self.hidden_dim
        }
    }

    /// Rows of the hypernetwork pre-activation.
    pub fn hyper_rows(&self, variant: Variant) -> usize {
        if variant.is_lstm() {
            5 * self.hyper_dim
        } else {
            self.hyper_dim
        }
    }
}

/// Handles to every registered parameter.  `None` fields do not exist for
/// the chosen variant/task.
#[derive(Clone, Copy, Debug)]
pub struct ParamIds {
    pub word_emb: ParamId,
    pub tag_emb: Option<ParamId>,
    /// Static leaf transform of the plain-composition family.
    pub leaf_w: Option<ParamId>,
    pub leaf_b: Option<ParamId>,
    /// Input-side weights of the LSTM family (used at leaves).
    pub main_w: Option<ParamId>,
    pub main_u: ParamId,
    /// Static bias; hyper variants replace it with the bias scale signal.
    pub main_b: Option<ParamId>,
    pub hyper_w: Option<ParamId>,
    pub hyper_u: Option<ParamId>,
    pub hyper_b: Option<ParamId>,
    /// Scale-signal projections: input-term, recurrent-term, bias.
    pub scale_in_w: Option<ParamId>,
    pub scale_in_b: Option<ParamId>,
    pub scale_rec_w: Option<ParamId>,
    pub scale_rec_b: Option<ParamId>,
    pub scale_bias_w: Option<ParamId>,
    pub scale_bias_b: Option<ParamId>,
    pub headlex_w: Option<ParamId>,
    pub headlex_b: Option<ParamId>,
    pub fuse_w: Option<ParamId>,
    pub fuse_tag_w: Option<ParamId>,
    pub fuse_sem_w: Option<ParamId>,
    pub fuse_b: Option<ParamId>,
    /// Pair-feature layer of the match head.
    pub mlp_w: Option<ParamId>,
    pub mlp_b: Option<ParamId>,
    pub cls_w: ParamId,
    pub cls_b: ParamId,
}

/// Everything the forward pass and the heads need to know, minus the
/// parameter values themselves.
#[derive(Clone, Debug)]
pub struct ModelMeta {
    pub variant: Variant,
    pub fusion: Fusion,
    pub task: Task,
    pub dims: Dims,
    pub num_classes: usize,
    /// Hidden width of the match head's feature layer.
    pub mlp_dim: usize,
    pub ids: ParamIds,
}

/// A complete model: metadata, vocabularies, and parameters.
#[derive(Clone, Debug)]
pub struct Model {
    pub meta: ModelMeta,
    pub words: Vocab,
    pub tags: Vocab,
    pub params: ParamSet,
}

/// Small widths shared by tests across the crate.
#[cfg(test)]
pub(crate) fn test_dims() -> Dims {
    Dims {
        word_dim: 4,
        hidden_dim: 3,
        hyper_dim: 2,
        fused_dim: 3,
        tag_dim: 2,
    }
}

/// A ready-to-build small model description shared by tests across the
/// crate: 5 words and 4 tags (plus the unknown entries), 3 classes, seed 1.
#[cfg(test)]
pub(crate) fn test_spec(variant: Variant, fusion: Fusion, task: Task) -> ModelSpec {
    let mut words = Vocab::new();
    for i in 0..5 {
        words.intern(&format!("w{i}"));
    }
    let mut tags = Vocab::new();
    for i in 0..4 {
        tags.intern(&format!("T{i}"));
    }
    ModelSpec {
        variant,
        fusion,
        task,
        dims: test_dims(),
        num_classes: 3,
        mlp_dim: None,
        words,
        tags,
        word_init: None,
        seed: 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(Variant::parse(v.name()), Some(v));
        }
        assert_eq!(Variant::parse("bogus"), None);
    }

    #[test]
    fn variant_flags() {
        assert!(!Variant::Recnn.is_lstm() && !Variant::Recnn.is_hyper());
        assert!(Variant::TreeLstm.is_lstm() && !Variant::TreeLstm.is_hyper());
        assert!(Variant::TgHRecnn.is_hyper() && !Variant::TgHRecnn.is_lstm());
        assert!(Variant::TgHTreeLstm.is_hyper() && Variant::TgHTreeLstm.is_lstm());
        assert!(Variant::DcRecnn.is_tag_blind() && Variant::DcRecnn.is_hyper());
        assert!(Variant::DcTreeLstm.is_tag_blind() && Variant::DcTreeLstm.is_lstm());
    }

    #[test]
    fn scale_len_follows_the_cell() {
        let d = Dims {
            word_dim: 4,
            hidden_dim: 6,
            hyper_dim: 3,
            fused_dim: 5,
            tag_dim: 2,
        };
        assert_eq!(d.scale_len(Variant::TgHRecnn), 6);
        assert_eq!(d.scale_len(Variant::TgHTreeLstm), 30);
        assert_eq!(d.hyper_rows(Variant::TgHRecnn), 3);
        assert_eq!(d.hyper_rows(Variant::DcTreeLstm), 15);
    }

    #[test]
    fn dims_validate_rejects_zero() {
        let mut d = Dims::defaults();
        assert!(d.validate().is_ok());
        d.fused_dim = 0;
        assert!(d.validate().unwrap_err().contains("fused_dim"));
    }
}
