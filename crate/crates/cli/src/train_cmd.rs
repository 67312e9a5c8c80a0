//! `train`: run the epoch loop from a TOML config plus `--set` overrides.
//!
//! Writes an optional checkpoint and an optional metrics log (two JSON
//! lines per epoch, one per split).  With `cv_folds >= 2` the train file is
//! split into folds deterministically and each fold is held out in turn.

use crate::errors::{write_text, CliError};
use clap::Args;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::path::{Path, PathBuf};
use tghyper::models::{save_checkpoint, Model, ModelSpec};
use tghyper::tensor::Tensor;
use tghyper::training::{evaluate, train, EpochRecord, TrainConfig, TrainOutcome, ValidConfig};
use tghyper::treebank::{
    load_embeddings, load_eval_data, load_single_file, load_training_data, Example, Vocab,
};

#[derive(Args)]
pub struct TrainArgs {
    /// TOML config file; defaults apply when omitted
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one config key, e.g. --set lr=0.1 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

pub fn run(args: TrainArgs) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => TrainConfig::from_file(path).map_err(CliError::Usage)?,
        None => TrainConfig::default(),
    };
    for kv in &args.set {
        let (key, value) = kv.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("--set {kv:?}: expected key=value"))
        })?;
        config
            .set_field(key.trim(), value.trim())
            .map_err(CliError::Usage)?;
    }
    let valid = config
        .validate()
        .map_err(|errors| CliError::Usage(errors.join("\n")))?;
    if config.train.is_empty() {
        return Err(CliError::Usage(
            "train: a training data path is required".to_string(),
        ));
    }
    if valid.cv_folds >= 2 {
        return run_cv(&config, &valid);
    }
    if config.dev.is_empty() {
        return Err(CliError::Usage(
            "dev: a dev data path is required (or set cv_folds)".to_string(),
        ));
    }

    let data = load_training_data(Path::new(&config.train), Path::new(&config.dev), valid.task)?;
    println!(
        "loaded {} train / {} dev examples ({} classes, {} words, {} tags)",
        data.train.len(),
        data.dev.len(),
        data.num_classes,
        data.words.len(),
        data.tags.len()
    );
    let word_init = load_word_init(&config, &valid, &data.words)?;
    let mut model = Model::build(ModelSpec {
        variant: valid.variant,
        fusion: valid.fusion,
        task: valid.task,
        dims: valid.dims,
        num_classes: data.num_classes,
        mlp_dim: valid.mlp_dim,
        words: data.words.clone(),
        tags: data.tags.clone(),
        word_init,
        seed: valid.optim.seed,
    });
    println!(
        "model: {} / {} fusion, task {}, {} parameters",
        model.meta.variant,
        model.meta.fusion.name(),
        model.meta.task,
        model.params.total_elems()
    );

    let outcome = train(&mut model, &data.train, &data.dev, &valid.optim)
        .map_err(|e| CliError::Data(e.to_string()))?;
    print_history(&outcome);

    if !config.checkpoint.is_empty() {
        save_checkpoint(&model, Path::new(&config.checkpoint))?;
        println!("checkpoint written to {}", config.checkpoint);
    }
    if !config.metrics.is_empty() {
        write_text(
            Path::new(&config.metrics),
            &metrics_lines(&outcome.history, None),
        )?;
        println!("metrics written to {}", config.metrics);
    }
    println!(
        "best dev accuracy: {} (epoch {})",
        outcome.best_dev_acc, outcome.best_epoch
    );
    if !config.test.is_empty() {
        let test = load_eval_data(
            Path::new(&config.test),
            valid.task,
            &model.words,
            &model.tags,
            model.meta.num_classes,
        )?;
        let report = evaluate(&model, &test);
        println!(
            "test accuracy: {} ({}/{})",
            report.accuracy, report.correct, report.total
        );
    }
    Ok(())
}

fn run_cv(config: &TrainConfig, valid: &ValidConfig) -> Result<(), CliError> {
    let folds = valid.cv_folds;
    if !config.dev.is_empty() || !config.test.is_empty() {
        println!("cross-validation: dev/test paths are ignored; folds come from the train file");
    }
    let file = load_single_file(Path::new(&config.train), valid.task)?;
    if file.examples.len() < folds {
        return Err(CliError::Usage(format!(
            "cv_folds: {folds} folds need at least {folds} examples, the train file has {}",
            file.examples.len()
        )));
    }
    println!(
        "loaded {} examples ({} classes, {} words, {} tags) for {}-fold cross-validation",
        file.examples.len(),
        file.num_classes,
        file.words.len(),
        file.tags.len(),
        folds
    );
    let word_init = load_word_init(config, valid, &file.words)?;

    let mut order: Vec<usize> = (0..file.examples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(valid.optim.seed);
    order.shuffle(&mut rng);

    let mut best_accs = Vec::with_capacity(folds);
    let mut all_metrics = String::new();
    for fold in 0..folds {
        let mut train_set: Vec<Example> = Vec::new();
        let mut dev_set: Vec<Example> = Vec::new();
        for (pos, &idx) in order.iter().enumerate() {
            if pos % folds == fold {
                dev_set.push(file.examples[idx].clone());
            } else {
                train_set.push(file.examples[idx].clone());
            }
        }
        let mut optim = valid.optim;
        optim.seed = valid.optim.seed.wrapping_add(fold as u64);
        let mut model = Model::build(ModelSpec {
            variant: valid.variant,
            fusion: valid.fusion,
            task: valid.task,
            dims: valid.dims,
            num_classes: file.num_classes,
            mlp_dim: valid.mlp_dim,
            words: file.words.clone(),
            tags: file.tags.clone(),
            word_init: word_init.clone(),
            seed: optim.seed,
        });
        let outcome = train(&mut model, &train_set, &dev_set, &optim)
            .map_err(|e| CliError::Data(e.to_string()))?;
        println!(
            "fold {fold}: best dev accuracy {} (epoch {}, {} train / {} held out)",
            outcome.best_dev_acc,
            outcome.best_epoch,
            train_set.len(),
            dev_set.len()
        );
        if !config.checkpoint.is_empty() {
            let path = fold_path(&config.checkpoint, fold);
            save_checkpoint(&model, &path)?;
            println!("checkpoint written to {}", path.display());
        }
        all_metrics.push_str(&metrics_lines(&outcome.history, Some(fold)));
        best_accs.push(outcome.best_dev_acc);
    }
    if !config.metrics.is_empty() {
        write_text(Path::new(&config.metrics), &all_metrics)?;
        println!("metrics written to {}", config.metrics);
    }
    let n = best_accs.len() as f64;
    let mean = best_accs.iter().sum::<f64>() / n;
    let var = best_accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    println!(
        "cv mean dev accuracy: {:.4} ± {:.4} over {} folds",
        mean,
        var.sqrt(),
        folds
    );
    Ok(())
}

/// Loads the pretrained word table when the config names one; `None` lets
/// the model builder draw a random table.
fn load_word_init(
    config: &TrainConfig,
    valid: &ValidConfig,
    words: &Vocab,
) -> Result<Option<Tensor>, CliError> {
    if config.embeddings.is_empty() {
        return Ok(None);
    }
    // Decorrelated from the model-build stream, which uses the seed as is.
    let mut rng = ChaCha8Rng::seed_from_u64(valid.optim.seed ^ 0x9E37_79B9_7F4A_7C15);
    let (table, found) = load_embeddings(
        Path::new(&config.embeddings),
        words,
        valid.dims.word_dim,
        &mut rng,
    )?;
    println!(
        "embeddings: {found}/{} vocabulary rows found in {}",
        words.len(),
        config.embeddings
    );
    Ok(Some(table))
}

fn print_history(outcome: &TrainOutcome) {
    for r in &outcome.history {
        println!(
            "epoch {:>3} | train loss {:.4} acc {:.4} | dev loss {:.4} acc {:.4} | best {:.4}",
            r.epoch, r.train_loss, r.train_acc, r.dev_loss, r.dev_acc, r.best_dev_acc
        );
    }
    if outcome.stopped_early {
        println!("stopped early after {} epochs", outcome.history.len());
    }
}

/// Two JSON lines per epoch, one per split; `seconds` (shared by the two
/// lines) is the only field that varies between identical runs.
fn metrics_lines(history: &[EpochRecord], fold: Option<usize>) -> String {
    let mut out = String::new();
    for r in history {
        for (split, loss, accuracy) in [
            ("train", r.train_loss, r.train_acc),
            ("dev", r.dev_loss, r.dev_acc),
        ] {
            let mut record = json!({
                "epoch": r.epoch,
                "split": split,
                "loss": loss,
                "accuracy": accuracy,
                "seconds": r.seconds,
            });
            if let Some(f) = fold {
                record["fold"] = f.into();
            }
            out.push_str(&record.to_string());
            out.push('\n');
        }
    }
    out
}

/// `runs/model.json` → `runs/model.fold3.json`.
fn fold_path(path: &str, fold: usize) -> PathBuf {
    let p = Path::new(path);
    let stem = p
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("checkpoint");
    let name = match p.extension().and_then(|s| s.to_str()) {
        Some(ext) => format!("{stem}.fold{fold}.{ext}"),
        None => format!("{stem}.fold{fold}"),
    };
    p.with_file_name(name)
}
