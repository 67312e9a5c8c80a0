//! The epoch loop: minibatched AdaGrad with early stopping on dev accuracy.
//!
//! Each example gets a fresh tape and its own dropout stream (seeded from
//! the run's RNG, so a run is reproducible end to end).  Losses are scaled
//! by `1/batch` before the backward pass, gradients accumulate across the
//! batch, and one optimizer step follows per batch.  The best-dev parameter
//! snapshot is restored before returning, so the trained model is the model
//! the records call best.

use super::adagrad::AdaGrad;
use super::config::OptimSettings;
use super::dropout::DropoutCtx;
use super::loss::{classify_logits, example_loss, pair_logits, LossError};
use crate::models::Model;
use crate::tape::Tape;
use crate::tensor::Tensor;
use crate::treebank::Example;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Mean per-example loss over this epoch's training passes (dropout
    /// active, phrase-level labels included).
    pub train_loss: f64,
    /// Root-prediction accuracy on the training set after the epoch's
    /// updates, eval mode.
    pub train_acc: f64,
    /// Mean evaluation loss on the dev set (root / pair cross-entropy).
    pub dev_loss: f64,
    pub dev_acc: f64,
    /// Best dev accuracy up to and including this epoch.
    pub best_dev_acc: f64,
    /// Wall-clock duration of the epoch, evaluations included.  The one
    /// non-deterministic field of a training record.
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub history: Vec<EpochRecord>,
    /// 1-based epoch whose parameters the model now holds.
    pub best_epoch: usize,
    pub best_dev_acc: f64,
    pub stopped_early: bool,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EvalReport {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
    /// Mean cross-entropy of the scored prediction (the root label for
    /// classification, the pair label for matching).
    pub mean_loss: f64,
}

/// Runs one example in eval mode and returns the predicted class together
/// with the cross-entropy of the scored prediction.
fn predict_with_loss(model: &Model, example: &Example) -> (usize, f64) {
    let mut tape = Tape::new();
    let mut ctx = DropoutCtx::eval();
    let logits = match example {
        Example::Single { tree } => {
            let states = crate::models::forward(&model.meta, &model.params, &mut tape, tree, &mut ctx);
            classify_logits(&model.meta, &model.params, &mut tape, states.root_h(), &mut ctx)
        }
        Example::Pair { first, second, .. } => {
            let a = crate::models::forward(&model.meta, &model.params, &mut tape, first, &mut ctx);
            let b = crate::models::forward(&model.meta, &model.params, &mut tape, second, &mut ctx);
            pair_logits(&model.meta, &model.params, &mut tape, a.root_h(), b.root_h(), &mut ctx)
        }
    };
    let pred = argmax(tape.value(logits).data());
    let ce = tape.softmax_cross_entropy(logits, gold_label(example));
    (pred, tape.value(ce).at(0))
}

/// Predicted class of one example, eval mode.
pub fn predict(model: &Model, example: &Example) -> usize {
    predict_with_loss(model, example).0
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn gold_label(example: &Example) -> usize {
    match example {
        Example::Single { tree } => tree
            .label
            .expect("evaluation tree carries a root label"),
        Example::Pair { label, .. } => *label,
    }
}

/// Root-prediction accuracy and mean loss over a set of examples, eval
/// mode.
pub fn evaluate(model: &Model, examples: &[Example]) -> EvalReport {
    let mut correct = 0;
    let mut loss_sum = 0.0;
    for ex in examples {
        let (pred, loss) = predict_with_loss(model, ex);
        correct += usize::from(pred == gold_label(ex));
        loss_sum += loss;
    }
    let total = examples.len();
    let per_example = |x: f64| if total == 0 { 0.0 } else { x / total as f64 };
    EvalReport {
        correct,
        total,
        accuracy: per_example(correct as f64),
        mean_loss: per_example(loss_sum),
    }
}

/// Trains in place and leaves the best-dev parameters in the model.
pub fn train(
    model: &mut Model,
    train_set: &[Example],
    dev_set: &[Example],
    optim: &OptimSettings,
) -> Result<TrainOutcome, LossError> {
    assert!(!train_set.is_empty(), "train: empty training set");
    assert!(!dev_set.is_empty(), "train: empty dev set");
    let meta = model.meta.clone();
    model
        .params
        .set_fixed(meta.ids.word_emb, !optim.fine_tune_embeddings);

    let opt = AdaGrad::new(optim.lr, optim.l2);
    let mut rng = ChaCha8Rng::seed_from_u64(optim.seed);
    let mut history = Vec::new();
    let mut best: Option<Vec<Tensor>> = None;
    let mut best_dev = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    let mut since_best = 0;
    let mut stopped_early = false;

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=optim.epochs {
        let started = Instant::now();
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(optim.batch_size) {
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let mut tape = Tape::new();
                let mut ctx = DropoutCtx::train(optim.p_drop, optim.p_rec, rng.random());
                let loss = example_loss(&meta, &model.params, &mut tape, &train_set[i], &mut ctx)?;
                loss_sum += tape.value(loss).at(0);
                let scaled = tape.scale(loss, scale);
                tape.backward(scaled);
                tape.add_param_grads(&mut model.params);
            }
            opt.step(&mut model.params);
        }

        let train_eval = evaluate(model, train_set);
        let dev = evaluate(model, dev_set);
        if dev.accuracy > best_dev {
            best_dev = dev.accuracy;
            best_epoch = epoch;
            since_best = 0;
            best = Some(model.params.iter().map(|(_, p)| p.value.clone()).collect());
        } else {
            since_best += 1;
        }
        history.push(EpochRecord {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            train_acc: train_eval.accuracy,
            dev_loss: dev.mean_loss,
            dev_acc: dev.accuracy,
            best_dev_acc: best_dev,
            seconds: started.elapsed().as_secs_f64(),
        });
        if since_best >= optim.patience {
            stopped_early = true;
            break;
        }
    }

    let snapshot = best.expect("at least one epoch ran");
    for ((_, p), value) in model.params.iter_mut().zip(snapshot) {
        p.value = value;
    }
    Ok(TrainOutcome {
        history,
        best_epoch,
        best_dev_acc: best_dev,
        stopped_early,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Dims, Fusion, Model, ModelSpec, Variant};
    use crate::treebank::{gen_toy_corpus, ToyRule, ToySpec};
    use crate::treebank::{index_tree, RawTree, Vocab};
    use crate::Task;

    fn toy_sets(size: usize, seed: u64) -> (Vocab, Vocab, Vec<Example>, Vec<Example>) {
        let spec = ToySpec {
            rule: ToyRule::TagMajority,
            size,
            num_tags: 4,
            num_words: 8,
            depth_min: 2,
            depth_max: 3,
            num_classes: 2,
        };
        let data = gen_toy_corpus(&spec, seed).unwrap();
        let mut words = Vocab::new();
        let mut tags = Vocab::new();
        for w in spec.word_alphabet() {
            words.intern(&w);
        }
        for t in spec.tag_alphabet() {
            tags.intern(&t);
        }
        let index = |set: &[RawTree]| -> Vec<Example> {
            set.iter()
                .map(|r| Example::Single {
                    tree: index_tree(r, &words, &tags).unwrap(),
                })
                .collect()
        };
        let train = index(&data.train);
        let dev = index(&data.dev);
        (words, tags, train, dev)
    }

    fn small_model(variant: Variant, words: Vocab, tags: Vocab, seed: u64) -> Model {
        Model::build(ModelSpec {
            variant,
            fusion: Fusion::Concat,
            task: Task::Classify,
            dims: Dims {
                word_dim: 4,
                hidden_dim: 4,
                hyper_dim: 3,
                fused_dim: 4,
                tag_dim: 3,
            },
            num_classes: 2,
            mlp_dim: None,
            words,
            tags,
            word_init: None,
            seed,
        })
    }

    fn quick_optim() -> OptimSettings {
        OptimSettings {
            lr: 0.1,
            l2: 0.0,
            batch_size: 8,
            epochs: 3,
            p_drop: 0.25,
            p_rec: 0.1,
            patience: 100,
            seed: 5,
            fine_tune_embeddings: true,
        }
    }

    #[test]
    fn same_seed_same_run() {
        let (words, tags, train_set, dev_set) = toy_sets(40, 11);
        let optim = quick_optim();
        let run = || {
            let mut m = small_model(Variant::TgHTreeLstm, words.clone(), tags.clone(), 2);
            let out = train(&mut m, &train_set, &dev_set, &optim).unwrap();
            (out, m)
        };
        let (out_a, model_a) = run();
        let (out_b, model_b) = run();
        assert_eq!(out_a.history.len(), out_b.history.len());
        for (a, b) in out_a.history.iter().zip(&out_b.history) {
            assert_eq!(a.train_loss.to_bits(), b.train_loss.to_bits());
            assert_eq!(a.dev_acc, b.dev_acc);
        }
        for ((_, p), (_, q)) in model_a.params.iter().zip(model_b.params.iter()) {
            assert_eq!(p.value, q.value, "param {} diverged", p.name());
        }
    }

    #[test]
    fn returned_model_is_the_best_dev_snapshot() {
        let (words, tags, train_set, dev_set) = toy_sets(40, 3);
        let mut optim = quick_optim();
        optim.epochs = 5;
        let mut m = small_model(Variant::Recnn, words, tags, 1);
        let out = train(&mut m, &train_set, &dev_set, &optim).unwrap();
        assert_eq!(out.history.len(), 5);
        let report = evaluate(&m, &dev_set);
        assert_eq!(report.accuracy, out.best_dev_acc);
        assert!(out.best_epoch >= 1 && out.best_epoch <= 5);
        let recorded_best = out
            .history
            .iter()
            .map(|r| r.dev_acc)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(recorded_best, out.best_dev_acc);
    }

    #[test]
    fn tiny_corpus_is_memorized() {
        let (words, tags, train_set, _) = toy_sets(40, 7);
        let small: Vec<Example> = train_set.into_iter().take(8).collect();
        let mut optim = quick_optim();
        optim.epochs = 300;
        optim.p_drop = 0.0;
        optim.p_rec = 0.0;
        optim.patience = 300;
        let mut m = small_model(Variant::Recnn, words, tags, 1);
        let out = train(&mut m, &small, &small, &optim).unwrap();
        assert_eq!(
            out.best_dev_acc, 1.0,
            "did not memorize 8 examples in 300 epochs"
        );
    }

    #[test]
    fn frozen_embeddings_do_not_move() {
        let (words, tags, train_set, dev_set) = toy_sets(40, 13);
        let mut optim = quick_optim();
        optim.fine_tune_embeddings = false;
        let mut m = small_model(Variant::TreeLstm, words, tags, 4);
        let before = m.params.value(m.meta.ids.word_emb).clone();
        train(&mut m, &train_set, &dev_set, &optim).unwrap();
        assert_eq!(m.params.value(m.meta.ids.word_emb), &before);
    }

    #[test]
    fn tag_blind_table_stays_zero_through_training() {
        let (words, tags, train_set, dev_set) = toy_sets(40, 17);
        let mut m = small_model(Variant::DcTreeLstm, words, tags, 4);
        train(&mut m, &train_set, &dev_set, &quick_optim()).unwrap();
        let id = m.meta.ids.tag_emb.unwrap();
        assert_eq!(m.params.value(id).max_abs(), 0.0);
        assert!(m.params.get(id).fixed);
    }

    #[test]
    fn patience_stops_the_run() {
        let (words, tags, train_set, dev_set) = toy_sets(40, 19);
        let mut optim = quick_optim();
        optim.epochs = 50;
        optim.patience = 2;
        let mut m = small_model(Variant::Recnn, words, tags, 3);
        let out = train(&mut m, &train_set, &dev_set, &optim).unwrap();
        if out.stopped_early {
            assert!(out.history.len() < 50);
            let n = out.history.len();
            assert_eq!(out.history[n - 1].best_dev_acc, out.best_dev_acc);
            assert!(n >= out.best_epoch + 2);
        }
    }

    /// Saving, loading, and evaluating must agree bit-for-bit with
    /// evaluating the in-memory model, and repeated evaluation is pure.
    #[test]
    fn evaluation_survives_a_checkpoint_round_trip() {
        use crate::models::{load_checkpoint, save_checkpoint};
        let (words, tags, train_set, dev_set) = toy_sets(40, 23);
        let mut m = small_model(Variant::TgHTreeLstm, words, tags, 6);
        let mut optim = quick_optim();
        optim.epochs = 3;
        train(&mut m, &train_set, &dev_set, &optim).unwrap();

        let before = evaluate(&m, &dev_set);
        assert_eq!(before.accuracy, evaluate(&m, &dev_set).accuracy);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_checkpoint(&m, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        let after = evaluate(&loaded, &dev_set);
        assert_eq!(before.correct, after.correct);
        assert_eq!(before.total, after.total);
        assert_eq!(before.accuracy.to_bits(), after.accuracy.to_bits());
    }
}
