//! Shared helpers for the integration suites: small random models, parameter
//! randomization, and random binary trees.

#![allow(dead_code)] // each test binary uses a different subset

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tghyper::models::{Dims, Fusion, Model, ModelSpec, Variant};
use tghyper::treebank::{Tree, TreeKind, Vocab};
use tghyper::Task;

/// Non-unk token counts; vocabularies have one extra `<unk>` row at index 0.
pub const NUM_WORDS: usize = 6;
pub const NUM_TAGS: usize = 4;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_vocab(prefix: &str, n: usize) -> Vocab {
    let mut v = Vocab::new();
    for i in 0..n {
        v.intern(&format!("{prefix}{i}"));
    }
    v
}

/// Every dimension drawn from 1..=4 — deliberately unequal most of the time
/// so a transposed shape or a crossed wire blows up instead of cancelling.
pub fn random_dims(rng: &mut ChaCha8Rng) -> Dims {
    Dims {
        word_dim: rng.random_range(1..=4),
        hidden_dim: rng.random_range(1..=4),
        hyper_dim: rng.random_range(1..=4),
        fused_dim: rng.random_range(1..=4),
        tag_dim: rng.random_range(1..=4),
    }
}

pub fn build_model(
    variant: Variant,
    fusion: Fusion,
    task: Task,
    dims: Dims,
    num_classes: usize,
    seed: u64,
) -> Model {
    Model::build(ModelSpec {
        variant,
        fusion,
        task,
        dims,
        num_classes,
        mlp_dim: None,
        words: small_vocab("w", NUM_WORDS),
        tags: small_vocab("T", NUM_TAGS),
        word_init: None,
        seed,
    })
}

/// Overwrites every non-fixed parameter with fresh uniform noise.  The build
/// initializes near zero (and pins the scale projections to the identity
/// point); tests want parameters that actually exercise the nonlinearities.
pub fn randomize_params(model: &mut Model, rng: &mut ChaCha8Rng, range: f64) {
    for (_, p) in model.params.iter_mut() {
        if p.fixed {
            continue;
        }
        for v in p.value.data_mut() {
            *v = rng.random_range(-range..range);
        }
    }
}

/// A random binary tree with exactly `leaves` leaves.  Tags and words are
/// drawn uniformly from the non-unk range; each node carries a label with
/// probability `label_prob`, and the root always carries one.
pub fn random_tree(
    rng: &mut ChaCha8Rng,
    leaves: usize,
    num_classes: usize,
    label_prob: f64,
) -> Tree {
    assert!(leaves >= 1);
    let mut t = subtree(rng, leaves, num_classes, label_prob);
    if t.label.is_none() {
        t.label = Some(rng.random_range(0..num_classes));
    }
    t
}

fn subtree(rng: &mut ChaCha8Rng, leaves: usize, num_classes: usize, label_prob: f64) -> Tree {
    let tag = rng.random_range(1..=NUM_TAGS);
    let label = if rng.random::<f64>() < label_prob {
        Some(rng.random_range(0..num_classes))
    } else {
        None
    };
    let kind = if leaves == 1 {
        TreeKind::Leaf {
            word: rng.random_range(1..=NUM_WORDS),
        }
    } else {
        let left_n = rng.random_range(1..leaves);
        TreeKind::Inner {
            left: Box::new(subtree(rng, left_n, num_classes, label_prob)),
            right: Box::new(subtree(rng, leaves - left_n, num_classes, label_prob)),
        }
    };
    Tree { tag, label, kind }
}

/// All ten runnable variant × fusion combinations.  The static encoders have
/// no fusion stage, so they appear once each.
pub fn all_combos() -> Vec<(Variant, Fusion)> {
    let mut out = vec![
        (Variant::Recnn, Fusion::Concat),
        (Variant::TreeLstm, Fusion::Concat),
    ];
    for v in [
        Variant::TgHRecnn,
        Variant::TgHTreeLstm,
        Variant::DcRecnn,
        Variant::DcTreeLstm,
    ] {
        for f in [Fusion::Concat, Fusion::Multi] {
            out.push((v, f));
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch: {} vs {}", a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
