//! Finite-difference verification of the full loss gradient for every
//! variant × fusion combination, both tasks, and training-mode dropout, plus
//! a negative control proving the checker can fail.

mod common;

use common::*;
use rand::Rng;
use tghyper::gradcheck::grad_check;
use tghyper::models::Model;
use tghyper::tape::Tape;
use tghyper::tensor::Tensor;
use tghyper::training::{example_loss, DropoutCtx};
use tghyper::treebank::Example;
use tghyper::Task;

fn random_example(r: &mut rand_chacha::ChaCha8Rng, task: Task, num_classes: usize) -> Example {
    match task {
        Task::Classify => {
            let leaves = r.random_range(2..=6);
            Example::Single {
                tree: random_tree(r, leaves, num_classes, 0.4),
            }
        }
        Task::Match => {
            let (n1, n2) = (r.random_range(1..=4), r.random_range(1..=4));
            Example::Pair {
                first: random_tree(r, n1, num_classes, 0.0),
                second: random_tree(r, n2, num_classes, 0.0),
                label: r.random_range(0..num_classes),
            }
        }
    }
}

fn check(model: &mut Model, example: &Example, dropout_seed: Option<u64>, ctx: &str) {
    let meta = model.meta.clone();
    let report = grad_check(
        &mut model.params,
        |set| {
            let mut tape = Tape::new();
            let mut dropout = match dropout_seed {
                Some(s) => DropoutCtx::train(0.4, 0.25, s),
                None => DropoutCtx::eval(),
            };
            let loss = example_loss(&meta, set, &mut tape, example, &mut dropout)
                .expect("examples are labeled");
            (tape, loss)
        },
        1e-4,
        1e-4,
    )
    .expect("loss is deterministic");
    assert!(report.passed(), "{ctx}: worst {:?}", report.worst());
}

#[test]
fn every_combination_passes_finite_difference_checks() {
    for (ci, (variant, fusion)) in all_combos().into_iter().enumerate() {
        for seed in 0..2u64 {
            let mut r = rng(0x6AD + 100 * ci as u64 + seed);
            let dims = random_dims(&mut r);
            let num_classes = 3;
            let mut model = build_model(variant, fusion, Task::Classify, dims, num_classes, seed);
            randomize_params(&mut model, &mut r, 0.5);
            let example = random_example(&mut r, Task::Classify, num_classes);
            check(
                &mut model,
                &example,
                None,
                &format!("{variant}/{fusion:?} seed {seed}"),
            );
        }
    }
}

#[test]
fn match_task_gradients_check_out() {
    use tghyper::models::{Fusion, Variant};
    for (variant, fusion) in [
        (Variant::Recnn, Fusion::Concat),
        (Variant::TgHTreeLstm, Fusion::Concat),
        (Variant::DcTreeLstm, Fusion::Multi),
    ] {
        let mut r = rng(0x9A7C);
        let dims = random_dims(&mut r);
        let mut model = build_model(variant, fusion, Task::Match, dims, 3, 8);
        randomize_params(&mut model, &mut r, 0.5);
        let example = random_example(&mut r, Task::Match, 3);
        check(&mut model, &example, None, &format!("{variant}/{fusion:?} match"));
    }
}

/// Dropout masks are constants of the loss once the seed is pinned, so the
/// check must still pass with training-mode dropout active.
#[test]
fn gradients_flow_through_training_dropout_masks() {
    use tghyper::models::{Fusion, Variant};
    for (variant, fusion) in [
        (Variant::TgHTreeLstm, Fusion::Concat),
        (Variant::TgHRecnn, Fusion::Multi),
        (Variant::TreeLstm, Fusion::Concat),
    ] {
        let mut r = rng(0xD80);
        let dims = random_dims(&mut r);
        let mut model = build_model(variant, fusion, Task::Classify, dims, 2, 15);
        randomize_params(&mut model, &mut r, 0.5);
        let example = random_example(&mut r, Task::Classify, 2);
        check(
            &mut model,
            &example,
            Some(0xBEEF),
            &format!("{variant}/{fusion:?} with dropout"),
        );
    }
}

/// Detached-subgraph guard: after accumulating gradients from a handful of
/// examples, the set of zero-gradient parameters must be exactly the set
/// the algebra predicts, on at least 99% of seeds.
///
/// Two classes of legitimate zeros exist.  A single tree can make the
/// head-selection gate inert on that instance (two sibling leaves with the
/// same word), which accumulating over several trees washes out.  And under
/// the tag-blind ablation with multiplicative fusion the zeros are
/// *structural*: the tag half of the fused product is identically zero, so
/// the product annihilates the semantic half as well, the fused input
/// degenerates to `relu(fuse_b)`, and the head-selection path has no effect
/// at all — `headlex_*` and both fusion tables must stay at zero gradient.
/// Everything else must be live; the seeds are fixed, so the count is
/// deterministic.
#[test]
fn zero_gradient_parameters_are_exactly_the_predicted_ones() {
    use tghyper::models::Fusion;
    let dims = tghyper::models::Dims {
        word_dim: 4,
        hidden_dim: 3,
        hyper_dim: 3,
        fused_dim: 8,
        tag_dim: 3,
    };
    for (ci, (variant, fusion)) in all_combos().into_iter().enumerate() {
        let expect_dead: &[&str] = if variant.is_tag_blind() && fusion == Fusion::Multi {
            &["fuse_sem_w", "fuse_tag_w", "headlex_b", "headlex_w"]
        } else {
            &[]
        };
        const SEEDS: usize = 50;
        let mut clean = 0usize;
        for seed in 0..SEEDS as u64 {
            let mut r = rng(0xF10A + 100 * ci as u64 + seed);
            let mut model = build_model(variant, fusion, Task::Classify, dims, 3, seed);
            randomize_params(&mut model, &mut r, 0.6);
            for _ in 0..3 {
                let leaves = r.random_range(3..=7);
                let tree = random_tree(&mut r, leaves, 3, 0.5);
                let mut tape = Tape::new();
                let mut dropout = DropoutCtx::eval();
                let loss = example_loss(
                    &model.meta,
                    &model.params,
                    &mut tape,
                    &Example::Single { tree },
                    &mut dropout,
                )
                .unwrap();
                tape.backward(loss);
                tape.add_param_grads(&mut model.params);
            }
            let mut dead: Vec<&str> = model
                .params
                .iter()
                .filter(|(_, p)| p.grad.max_abs() == 0.0)
                .map(|(_, p)| p.name())
                .collect();
            dead.sort_unstable();
            if dead == expect_dead {
                clean += 1;
            } else {
                eprintln!(
                    "{variant}/{fusion:?} seed {seed}: dead {dead:?}, expected {expect_dead:?}"
                );
            }
        }
        assert!(
            clean * 100 >= 99 * SEEDS,
            "{variant}/{fusion:?}: predicted live/dead split held on only {clean}/{SEEDS} seeds"
        );
    }
}

/// Negative control: a loss term routed around the tape (a constant copy of
/// `cls_b`) makes the numeric gradient disagree with the analytic one, and
/// the checker must say so, naming the severed parameter.
#[test]
fn a_severed_gradient_path_is_caught() {
    use tghyper::models::{Fusion, Variant};
    let mut r = rng(0xBAD);
    let dims = random_dims(&mut r);
    let num_classes = 3;
    let mut model = build_model(
        Variant::TgHTreeLstm,
        Fusion::Concat,
        Task::Classify,
        dims,
        num_classes,
        19,
    );
    randomize_params(&mut model, &mut r, 0.5);
    let example = random_example(&mut r, Task::Classify, num_classes);
    let meta = model.meta.clone();
    let cls_b = model.params.id("cls_b").unwrap();

    let report = grad_check(
        &mut model.params,
        |set| {
            let mut tape = Tape::new();
            let mut dropout = DropoutCtx::eval();
            let loss = example_loss(&meta, set, &mut tape, &example, &mut dropout).unwrap();
            // Re-enter one parameter as a plain constant: its contribution
            // to the loss is real, but the backward sweep cannot see it.
            let frozen = tape.constant(set.value(cls_b).clone());
            let ones = tape.constant(Tensor::matrix(1, num_classes, vec![1.0; num_classes]));
            let extra = tape.matvec(ones, frozen);
            let total = tape.add(loss, extra);
            (tape, total)
        },
        1e-4,
        1e-4,
    )
    .unwrap();
    assert!(!report.passed(), "the corrupted loss slipped through");
    let names: Vec<&str> = report.failures().map(|p| p.name.as_str()).collect();
    assert_eq!(names, vec!["cls_b"], "exactly the severed parameter fails");
}
