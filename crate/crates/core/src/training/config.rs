//! Training configuration: a flat TOML file plus `key=value` overrides.
//!
//! The file carries strings and numbers only; [`TrainConfig::validate`]
//! turns them into typed settings and reports every problem at once, each
//! message naming the offending field.  Unknown fields are rejected at
//! parse time, so typos fail loudly instead of silently running defaults.

use crate::models::{Dims, Fusion, Variant};
use crate::Task;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Numeric knobs the epoch loop needs.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OptimSettings {
    pub lr: f64,
    pub l2: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub p_drop: f64,
    pub p_rec: f64,
    /// Epochs without a dev improvement before stopping early.
    pub patience: usize,
    pub seed: u64,
    pub fine_tune_embeddings: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub task: String,
    pub variant: String,
    #[serde(default = "d_fusion")]
    pub fusion: String,

    #[serde(default = "d_word_dim")]
    pub word_dim: usize,
    #[serde(default = "d_hidden_dim")]
    pub hidden_dim: usize,
    #[serde(default = "d_hyper_dim")]
    pub hyper_dim: usize,
    #[serde(default = "d_fused_dim")]
    pub fused_dim: usize,
    #[serde(default = "d_tag_dim")]
    pub tag_dim: usize,
    /// Hidden width of the match head; 0 means "use hidden_dim".
    #[serde(default)]
    pub mlp_dim: usize,

    #[serde(default)]
    pub train: String,
    #[serde(default)]
    pub dev: String,
    #[serde(default)]
    pub test: String,
    /// Pretrained word vectors in `word v1 v2 ...` lines; empty for random
    /// initialization.
    #[serde(default)]
    pub embeddings: String,
    #[serde(default)]
    pub checkpoint: String,
    /// Epoch-by-epoch records are written here when non-empty.
    #[serde(default)]
    pub metrics: String,

    #[serde(default = "d_lr")]
    pub lr: f64,
    #[serde(default = "d_l2")]
    pub l2: f64,
    #[serde(default = "d_batch_size")]
    pub batch_size: usize,
    #[serde(default = "d_epochs")]
    pub epochs: usize,
    #[serde(default = "d_p_drop")]
    pub p_drop: f64,
    #[serde(default = "d_p_rec")]
    pub p_rec: f64,
    #[serde(default = "d_patience")]
    pub patience: usize,
    #[serde(default = "d_seed")]
    pub seed: u64,
    #[serde(default = "d_fine_tune")]
    pub fine_tune_embeddings: bool,
    /// When at least 2, the train file is split into this many folds and
    /// each is held out in turn; 0 runs a plain train/dev session.
    #[serde(default)]
    pub cv_folds: usize,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig::from_toml_str("task = \"classify\"\nvariant = \"recnn\"\n")
            .expect("minimal config parses")
    }
}

fn d_fusion() -> String {
    "concat".to_string()
}
fn d_word_dim() -> usize {
    300
}
fn d_hidden_dim() -> usize {
    150
}
fn d_hyper_dim() -> usize {
    50
}
fn d_fused_dim() -> usize {
    100
}
fn d_tag_dim() -> usize {
    50
}
fn d_lr() -> f64 {
    0.05
}
fn d_l2() -> f64 {
    3e-5
}
fn d_batch_size() -> usize {
    50
}
fn d_epochs() -> usize {
    100
}
fn d_p_drop() -> f64 {
    0.5
}
fn d_p_rec() -> f64 {
    0.25
}
fn d_patience() -> usize {
    25
}
fn d_seed() -> u64 {
    1
}
fn d_fine_tune() -> bool {
    true
}

/// The typed view of a config that passed validation.
#[derive(Clone, Debug)]
pub struct ValidConfig {
    pub task: Task,
    pub variant: Variant,
    pub fusion: Fusion,
    pub dims: Dims,
    pub mlp_dim: Option<usize>,
    pub optim: OptimSettings,
    /// 0 for a plain train/dev run, otherwise the number of folds.
    pub cv_folds: usize,
}

impl TrainConfig {
    pub fn from_toml_str(text: &str) -> Result<TrainConfig, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn from_file(path: &Path) -> Result<TrainConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        TrainConfig::from_toml_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Applies one `key=value` override; `key` is a field name as written
    /// in the file.
    pub fn set_field(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("{key}: cannot parse {value:?}"))
        }
        match key {
            "task" => self.task = value.to_string(),
            "variant" => self.variant = value.to_string(),
            "fusion" => self.fusion = value.to_string(),
            "word_dim" => self.word_dim = num(key, value)?,
            "hidden_dim" => self.hidden_dim = num(key, value)?,
            "hyper_dim" => self.hyper_dim = num(key, value)?,
            "fused_dim" => self.fused_dim = num(key, value)?,
            "tag_dim" => self.tag_dim = num(key, value)?,
            "mlp_dim" => self.mlp_dim = num(key, value)?,
            "train" => self.train = value.to_string(),
            "dev" => self.dev = value.to_string(),
            "test" => self.test = value.to_string(),
            "embeddings" => self.embeddings = value.to_string(),
            "checkpoint" => self.checkpoint = value.to_string(),
            "metrics" => self.metrics = value.to_string(),
            "lr" => self.lr = num(key, value)?,
            "l2" => self.l2 = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "p_drop" => self.p_drop = num(key, value)?,
            "p_rec" => self.p_rec = num(key, value)?,
            "patience" => self.patience = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "fine_tune_embeddings" => self.fine_tune_embeddings = num(key, value)?,
            "cv_folds" => self.cv_folds = num(key, value)?,
            other => return Err(format!("unknown config field {other:?}")),
        }
        Ok(())
    }

    /// Checks every field and returns the typed settings, or every error.
    pub fn validate(&self) -> Result<ValidConfig, Vec<String>> {
        let mut errors = Vec::new();
        let task = Task::parse(&self.task);
        if task.is_none() {
            errors.push(format!(
                "task: unknown value {:?} (expected classify or match)",
                self.task
            ));
        }
        let variant = Variant::parse(&self.variant);
        if variant.is_none() {
            let names: Vec<&str> = Variant::ALL.iter().map(|v| v.name()).collect();
            errors.push(format!(
                "variant: unknown value {:?} (expected one of {})",
                self.variant,
                names.join(", ")
            ));
        }
        let fusion = Fusion::parse(&self.fusion);
        if fusion.is_none() {
            errors.push(format!(
                "fusion: unknown value {:?} (expected concat or multi)",
                self.fusion
            ));
        }
        let dims = Dims {
            word_dim: self.word_dim,
            hidden_dim: self.hidden_dim,
            hyper_dim: self.hyper_dim,
            fused_dim: self.fused_dim,
            tag_dim: self.tag_dim,
        };
        if let Err(e) = dims.validate() {
            errors.push(e);
        }
        if !self.lr.is_finite() || self.lr <= 0.0 {
            errors.push(format!("lr: must be positive, got {}", self.lr));
        }
        if !self.l2.is_finite() || self.l2 < 0.0 {
            errors.push(format!("l2: must be non-negative, got {}", self.l2));
        }
        if self.batch_size == 0 {
            errors.push("batch_size: must be at least 1".to_string());
        }
        if self.epochs == 0 {
            errors.push("epochs: must be at least 1".to_string());
        }
        for (name, v) in [("p_drop", self.p_drop), ("p_rec", self.p_rec)] {
            if !(0.0..1.0).contains(&v) {
                errors.push(format!("{name}: must be in [0, 1), got {v}"));
            }
        }
        if self.cv_folds == 1 {
            errors.push("cv_folds: must be 0 (off) or at least 2".to_string());
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        Ok(ValidConfig {
            task: task.unwrap(),
            variant: variant.unwrap(),
            fusion: fusion.unwrap(),
            dims,
            mlp_dim: (self.mlp_dim != 0).then_some(self.mlp_dim),
            cv_folds: self.cv_folds,
            optim: OptimSettings {
                lr: self.lr,
                l2: self.l2,
                batch_size: self.batch_size,
                epochs: self.epochs,
                p_drop: self.p_drop,
                p_rec: self.p_rec,
                patience: self.patience,
                seed: self.seed,
                fine_tune_embeddings: self.fine_tune_embeddings,
            },
        })
    }
}
