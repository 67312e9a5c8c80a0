//! Reduction identity: a tag-guided model whose scale projections are pinned
//! to the identity point (zero weights; unit input/recurrent offsets; the
//! static bias in the bias slot) must reproduce its static counterpart
//! node-for-node, no matter what the hypernetwork side contains.

mod common;

use common::*;
use rand::Rng;
use tghyper::models::{forward, Fusion, Model, Variant};
use tghyper::tape::Tape;
use tghyper::training::DropoutCtx;
use tghyper::Task;

/// Parameters shared verbatim between a static encoder and its tag-guided
/// extension (the extension replaces the composition bias with a generated
/// one, so `main_b` is excluded).
const SHARED: [&str; 7] = [
    "word_emb", "leaf_w", "leaf_b", "main_w", "main_u", "cls_w", "cls_b",
];

fn copy_param(src: &Model, dst: &mut Model, name: &str) {
    let sid = src.params.id(name).expect("source parameter exists");
    let did = dst.params.id(name).expect("destination parameter exists");
    let v = src.params.value(sid).clone();
    dst.params.get_mut(did).value = v;
}

fn fill_param(dst: &mut Model, name: &str, x: f64) {
    if let Some(id) = dst.params.id(name) {
        dst.params.get_mut(id).value.fill(x);
    }
}

/// Pins `tg`'s scale projections so every generated signal is constant:
/// input and recurrent scales 1, generated bias equal to `stat`'s `main_b`.
fn pin_to_static_point(stat: &Model, tg: &mut Model) {
    for name in ["scale_in_w", "scale_rec_w", "scale_bias_w"] {
        fill_param(tg, name, 0.0);
    }
    for name in ["scale_in_b", "scale_rec_b"] {
        fill_param(tg, name, 1.0);
    }
    let b = stat.params.id("main_b").expect("static model has a bias");
    let bias = stat.params.value(b).clone();
    let dst = tg.params.id("scale_bias_b").expect("tag-guided bias offset");
    tg.params.get_mut(dst).value = bias;
}

fn static_twin_of(variant: Variant) -> Variant {
    if variant.is_lstm() {
        Variant::TreeLstm
    } else {
        Variant::Recnn
    }
}

#[test]
fn pinned_tag_guided_models_equal_their_static_counterparts() {
    let hyper_variants = [
        Variant::TgHRecnn,
        Variant::TgHTreeLstm,
        Variant::DcRecnn,
        Variant::DcTreeLstm,
    ];
    for (ci, variant) in hyper_variants.into_iter().enumerate() {
        for fusion in [Fusion::Concat, Fusion::Multi] {
            let mut r = rng(0x3D + ci as u64);
            let dims = random_dims(&mut r);
            let num_classes = 3;

            let mut stat = build_model(
                static_twin_of(variant),
                Fusion::Concat,
                Task::Classify,
                dims,
                num_classes,
                21,
            );
            randomize_params(&mut stat, &mut r, 0.8);

            // The tag-guided model starts from *different* random noise
            // everywhere — including the whole hypernetwork side — so any
            // agreement below can only come from the pinned scale path.
            let mut tg = build_model(variant, fusion, Task::Classify, dims, num_classes, 22);
            randomize_params(&mut tg, &mut r, 0.8);
            for name in SHARED {
                if stat.params.id(name).is_some() && tg.params.id(name).is_some() {
                    copy_param(&stat, &mut tg, name);
                }
            }
            pin_to_static_point(&stat, &mut tg);

            for t in 0..50 {
                let leaves = r.random_range(1..=7);
                let tree = random_tree(&mut r, leaves, num_classes, 0.0);

                let mut tape_s = Tape::new();
                let mut drop_s = DropoutCtx::eval();
                let ss = forward(&stat.meta, &stat.params, &mut tape_s, &tree, &mut drop_s);
                let mut tape_t = Tape::new();
                let mut drop_t = DropoutCtx::eval();
                let ts = forward(&tg.meta, &tg.params, &mut tape_t, &tree, &mut drop_t);

                assert_eq!(ss.len(), ts.len());
                for i in 0..ss.len() {
                    let hs = tape_s.value(ss.nodes[i].h).data().to_vec();
                    let ht = tape_t.value(ts.nodes[i].h).data().to_vec();
                    let d = max_abs_diff(&hs, &ht);
                    assert!(
                        d <= 1e-12,
                        "{variant}/{fusion:?} tree {t} node {i}: h differs by {d:e}"
                    );
                    if let (Some(cs), Some(ct)) = (ss.nodes[i].c, ts.nodes[i].c) {
                        let d = max_abs_diff(
                            tape_s.value(cs).data(),
                            tape_t.value(ct).data(),
                        );
                        assert!(
                            d <= 1e-12,
                            "{variant}/{fusion:?} tree {t} node {i}: c differs by {d:e}"
                        );
                    }
                }
            }
        }
    }
}

/// A freshly built tag-guided model sits at the static point with a zero
/// generated bias: it must equal the static twin with shared weights copied
/// over and its bias zeroed.
#[test]
fn fresh_tag_guided_build_is_the_static_model_with_zero_bias() {
    for variant in [Variant::TgHRecnn, Variant::TgHTreeLstm] {
        let mut r = rng(0xF1E5);
        let dims = random_dims(&mut r);
        let tg = build_model(variant, Fusion::Concat, Task::Classify, dims, 3, 5);

        let mut stat = build_model(
            static_twin_of(variant),
            Fusion::Concat,
            Task::Classify,
            dims,
            3,
            6,
        );
        for name in SHARED {
            if tg.params.id(name).is_some() && stat.params.id(name).is_some() {
                copy_param(&tg, &mut stat, name);
            }
        }
        fill_param(&mut stat, "main_b", 0.0);

        for t in 0..10 {
            let leaves = r.random_range(1..=6);
            let tree = random_tree(&mut r, leaves, 3, 0.0);
            let mut tape_s = Tape::new();
            let mut drop_s = DropoutCtx::eval();
            let ss = forward(&stat.meta, &stat.params, &mut tape_s, &tree, &mut drop_s);
            let mut tape_t = Tape::new();
            let mut drop_t = DropoutCtx::eval();
            let ts = forward(&tg.meta, &tg.params, &mut tape_t, &tree, &mut drop_t);
            for i in 0..ss.len() {
                let d = max_abs_diff(
                    tape_s.value(ss.nodes[i].h).data(),
                    tape_t.value(ts.nodes[i].h).data(),
                );
                assert!(d <= 1e-12, "{variant} tree {t} node {i}: h differs by {d:e}");
            }
        }
    }
}
