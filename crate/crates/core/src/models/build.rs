//! Parameter construction and initialization.
//!
//! Registration order (and therefore RNG consumption) is fixed, and the tag
//! table is always drawn even when it is about to be zeroed for a tag-blind
//! ablation — so a `DC-` model built from seed `s` has bitwise-identical
//! parameters to its `TG-` counterpart from the same seed, apart from the
//! zeroed tags.  Tests rely on this to show the ablation is exactly "the
//! same model minus tags".
//!
//! Scale-signal projections start at `W = 0` with bias one (input/recurrent)
//! or zero (bias signal), so a freshly built hyper model computes the same
//! function as its static counterpart with a zero bias.

use super::{Dims, Fusion, Model, ModelMeta, ParamIds, Variant};
use crate::params::ParamSet;
use crate::tensor::Tensor;
use crate::treebank::Vocab;
use crate::Task;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const INIT_RANGE: f64 = 0.05;

/// Everything needed to build a fresh [`Model`].
pub struct ModelSpec {
    pub variant: Variant,
    pub fusion: Fusion,
    pub task: Task,
    pub dims: Dims,
    pub num_classes: usize,
    /// Hidden width of the match head; defaults to `dims.hidden_dim`.
    pub mlp_dim: Option<usize>,
    pub words: Vocab,
    pub tags: Vocab,
    /// Pretrained word table (shape `[words.len(), word_dim]`); random when
    /// absent.
    pub word_init: Option<Tensor>,
    pub seed: u64,
}

impl Model {
    pub fn build(spec: ModelSpec) -> Model {
        spec.dims
            .validate()
            .unwrap_or_else(|e| panic!("model build: {e}"));
        assert!(
            spec.num_classes >= 2,
            "model build: need at least 2 classes, got {}",
            spec.num_classes
        );
        let d = spec.dims;
        let v = spec.variant;
        let mlp_dim = spec.mlp_dim.unwrap_or(d.hidden_dim);
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut set = ParamSet::new();

        let uniform = |set: &mut ParamSet, name: &str, shape: &[usize], rng: &mut ChaCha8Rng| {
            set.register(name, Tensor::uniform(shape, -INIT_RANGE, INIT_RANGE, rng))
        };
        let zeros =
            |set: &mut ParamSet, name: &str, shape: &[usize]| set.register(name, Tensor::zeros(shape));
        let ones =
            |set: &mut ParamSet, name: &str, shape: &[usize]| set.register(name, Tensor::full(shape, 1.0));

        // Word embeddings.
        let word_emb = match spec.word_init {
            Some(init) => {
                assert!(
                    init.shape() == [spec.words.len(), d.word_dim],
                    "model build: word table shape {:?} does not match vocab {} x dim {}",
                    init.shape(),
                    spec.words.len(),
                    d.word_dim
                );
                set.register("word_emb", init)
            }
            None => uniform(&mut set, "word_emb", &[spec.words.len(), d.word_dim], &mut rng),
        };

        // Tag embeddings: drawn for every hyper variant to keep the RNG
        // stream aligned, then zeroed and frozen for the tag-blind ablation.
        let tag_emb = v.is_hyper().then(|| {
            let id = uniform(&mut set, "tag_emb", &[spec.tags.len(), d.tag_dim], &mut rng);
            if v.is_tag_blind() {
                set.get_mut(id).value.fill(0.0);
                set.set_fixed(id, true);
            }
            id
        });

        // Main composition.
        let (leaf_w, leaf_b) = if v.is_lstm() {
            (None, None)
        } else {
            (
                Some(uniform(&mut set, "leaf_w", &[d.hidden_dim, d.word_dim], &mut rng)),
                Some(zeros(&mut set, "leaf_b", &[d.hidden_dim])),
            )
        };
        let rows = d.scale_len(v);
        let main_w = v
            .is_lstm()
            .then(|| uniform(&mut set, "main_w", &[rows, d.word_dim], &mut rng));
        let main_u = uniform(&mut set, "main_u", &[rows, 2 * d.hidden_dim], &mut rng);
        let main_b = (!v.is_hyper()).then(|| zeros(&mut set, "main_b", &[rows]));

        // Hypernetwork, scale projections, head lexicalization, fusion.
        let mut hyper = HyperIds::default();
        if v.is_hyper() {
            let hrows = d.hyper_rows(v);
            hyper.hyper_w = Some(uniform(&mut set, "hyper_w", &[hrows, d.fused_dim], &mut rng));
            hyper.hyper_u = Some(uniform(&mut set, "hyper_u", &[hrows, 2 * d.hyper_dim], &mut rng));
            hyper.hyper_b = Some(zeros(&mut set, "hyper_b", &[hrows]));

            if v.is_lstm() {
                hyper.scale_in_w = Some(zeros(&mut set, "scale_in_w", &[rows, d.hyper_dim]));
                hyper.scale_in_b = Some(ones(&mut set, "scale_in_b", &[rows]));
            }
            hyper.scale_rec_w = Some(zeros(&mut set, "scale_rec_w", &[rows, d.hyper_dim]));
            hyper.scale_rec_b = Some(ones(&mut set, "scale_rec_b", &[rows]));
            hyper.scale_bias_w = Some(zeros(&mut set, "scale_bias_w", &[rows, d.hyper_dim]));
            hyper.scale_bias_b = Some(zeros(&mut set, "scale_bias_b", &[rows]));

            hyper.headlex_w = Some(uniform(
                &mut set,
                "headlex_w",
                &[d.word_dim, 3 * d.tag_dim + 2 * d.word_dim],
                &mut rng,
            ));
            hyper.headlex_b = Some(zeros(&mut set, "headlex_b", &[d.word_dim]));

            let sem = d.word_dim + 2 * d.hidden_dim;
            match spec.fusion {
                Fusion::Concat => {
                    hyper.fuse_w = Some(uniform(
                        &mut set,
                        "fuse_w",
                        &[d.fused_dim, 3 * d.tag_dim + sem],
                        &mut rng,
                    ));
                }
                Fusion::Multi => {
                    hyper.fuse_tag_w =
                        Some(uniform(&mut set, "fuse_tag_w", &[d.fused_dim, 3 * d.tag_dim], &mut rng));
                    hyper.fuse_sem_w =
                        Some(uniform(&mut set, "fuse_sem_w", &[d.fused_dim, sem], &mut rng));
                }
            }
            hyper.fuse_b = Some(zeros(&mut set, "fuse_b", &[d.fused_dim]));
        }

        // Output head.
        let (mlp_w, mlp_b, cls_in) = match spec.task {
            Task::Classify => (None, None, d.hidden_dim),
            Task::Match => (
                Some(uniform(&mut set, "mlp_w", &[mlp_dim, 2 * d.hidden_dim], &mut rng)),
                Some(zeros(&mut set, "mlp_b", &[mlp_dim])),
                mlp_dim,
            ),
        };
        let cls_w = uniform(&mut set, "cls_w", &[spec.num_classes, cls_in], &mut rng);
        let cls_b = zeros(&mut set, "cls_b", &[spec.num_classes]);

        let ids = ParamIds {
            word_emb,
            tag_emb,
            leaf_w,
            leaf_b,
            main_w,
            main_u,
            main_b,
            hyper_w: hyper.hyper_w,
            hyper_u: hyper.hyper_u,
            hyper_b: hyper.hyper_b,
            scale_in_w: hyper.scale_in_w,
            scale_in_b: hyper.scale_in_b,
            scale_rec_w: hyper.scale_rec_w,
            scale_rec_b: hyper.scale_rec_b,
            scale_bias_w: hyper.scale_bias_w,
            scale_bias_b: hyper.scale_bias_b,
            headlex_w: hyper.headlex_w,
            headlex_b: hyper.headlex_b,
            fuse_w: hyper.fuse_w,
            fuse_tag_w: hyper.fuse_tag_w,
            fuse_sem_w: hyper.fuse_sem_w,
            fuse_b: hyper.fuse_b,
            mlp_w,
            mlp_b,
            cls_w,
            cls_b,
        };
        Model {
            meta: ModelMeta {
                variant: v,
                fusion: spec.fusion,
                task: spec.task,
                dims: d,
                num_classes: spec.num_classes,
                mlp_dim,
                ids,
            },
            words: spec.words,
            tags: spec.tags,
            params: set,
        }
    }
}

#[derive(Default)]
struct HyperIds {
    hyper_w: Option<crate::params::ParamId>,
    hyper_u: Option<crate::params::ParamId>,
    hyper_b: Option<crate::params::ParamId>,
    scale_in_w: Option<crate::params::ParamId>,
    scale_in_b: Option<crate::params::ParamId>,
    scale_rec_w: Option<crate::params::ParamId>,
    scale_rec_b: Option<crate::params::ParamId>,
    scale_bias_w: Option<crate::params::ParamId>,
    scale_bias_b: Option<crate::params::ParamId>,
    headlex_w: Option<crate::params::ParamId>,
    headlex_b: Option<crate::params::ParamId>,
    fuse_w: Option<crate::params::ParamId>,
    fuse_tag_w: Option<crate::params::ParamId>,
    fuse_sem_w: Option<crate::params::ParamId>,
    fuse_b: Option<crate::params::ParamId>,
}
