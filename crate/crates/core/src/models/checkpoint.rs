//! Model persistence.
//!
//! A checkpoint is one JSON document holding the model description
//! (variant, fusion, task, widths, class count), both vocabularies as plain
//! token lists, and every parameter tensor by name.  Values round-trip
//! bit-exactly: the serializer emits shortest-round-trip decimal for `f64`.
//! Optimizer accumulators are deliberately not persisted — a checkpoint is
//! a model, not a training session.
//!
//! Loading rebuilds the model from the stored description and then
//! overwrites every parameter by name, so a checkpoint is valid only if it
//! covers the rebuilt parameter inventory exactly (no missing names, no
//! strays, no shape drift).

use super::{Dims, Fusion, Model, ModelSpec, Variant};
use crate::tensor::Tensor;
use crate::treebank::Vocab;
use crate::Task;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

const FORMAT: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: u32,
    variant: String,
    fusion: String,
    task: String,
    dims: Dims,
    num_classes: usize,
    mlp_dim: usize,
    words: Vec<String>,
    tags: Vec<String>,
    params: Vec<SavedParam>,
}

#[derive(Serialize, Deserialize)]
struct SavedParam {
    name: String,
    fixed: bool,
    value: Tensor,
}

pub fn save_checkpoint(model: &Model, path: &Path) -> Result<(), CheckpointError> {
    let disp = path.display().to_string();
    let invalid = |message: String| CheckpointError::Invalid {
        path: disp.clone(),
        message,
    };
    let mut params = Vec::with_capacity(model.params.len());
    for (_, p) in model.params.iter() {
        if !p.value.is_finite() {
            return Err(invalid(format!(
                "parameter {} contains non-finite values; refusing to save",
                p.name()
            )));
        }
        params.push(SavedParam {
            name: p.name().to_string(),
            fixed: p.fixed,
            value: p.value.clone(),
        });
    }
    let file = CheckpointFile {
        format: FORMAT,
        variant: model.meta.variant.name().to_string(),
        fusion: model.meta.fusion.name().to_string(),
        task: model.meta.task.name().to_string(),
        dims: model.meta.dims,
        num_classes: model.meta.num_classes,
        mlp_dim: model.meta.mlp_dim,
        words: model.words.tokens().to_vec(),
        tags: model.tags.tokens().to_vec(),
        params,
    };
    let json = serde_json::to_string(&file).map_err(|source| CheckpointError::Json {
        path: disp.clone(),
        source,
    })?;
    std::fs::write(path, json).map_err(|source| CheckpointError::Io { path: disp, source })
}

pub fn load_checkpoint(path: &Path) -> Result<Model, CheckpointError> {
    let disp = path.display().to_string();
    let invalid = |message: String| CheckpointError::Invalid {
        path: disp.clone(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|source| CheckpointError::Io {
        path: disp.clone(),
        source,
    })?;
    let file: CheckpointFile =
        serde_json::from_str(&text).map_err(|source| CheckpointError::Json {
            path: disp.clone(),
            source,
        })?;

    if file.format != FORMAT {
        return Err(invalid(format!(
            "unsupported checkpoint format {} (expected {FORMAT})",
            file.format
        )));
    }
    let variant = Variant::parse(&file.variant)
        .ok_or_else(|| invalid(format!("unknown variant {:?}", file.variant)))?;
    let fusion = Fusion::parse(&file.fusion)
        .ok_or_else(|| invalid(format!("unknown fusion {:?}", file.fusion)))?;
    let task = Task::parse(&file.task)
        .ok_or_else(|| invalid(format!("unknown task {:?}", file.task)))?;
    let words = Vocab::from_tokens(file.words).map_err(|e| invalid(format!("word list: {e}")))?;
    let tags = Vocab::from_tokens(file.tags).map_err(|e| invalid(format!("tag list: {e}")))?;
    file.dims
        .validate()
        .map_err(|e| invalid(format!("widths: {e}")))?;

    let mut model = Model::build(ModelSpec {
        variant,
        fusion,
        task,
        dims: file.dims,
        num_classes: file.num_classes,
        mlp_dim: Some(file.mlp_dim),
        words,
        tags,
        word_init: None,
        seed: 0,
    });

    let mut covered = vec![false; model.params.len()];
    for saved in file.params {
        let id = model
            .params
            .id(&saved.name)
            .ok_or_else(|| invalid(format!("unknown parameter {:?}", saved.name)))?;
        if covered[id.0] {
            return Err(invalid(format!("duplicate parameter {:?}", saved.name)));
        }
        covered[id.0] = true;
        let param = model.params.get_mut(id);
        if param.value.shape() != saved.value.shape() {
            return Err(invalid(format!(
                "parameter {:?} has shape {:?}, expected {:?}",
                saved.name,
                saved.value.shape(),
                param.value.shape()
            )));
        }
        if !saved.value.is_finite() {
            return Err(invalid(format!(
                "parameter {:?} contains non-finite values",
                saved.name
            )));
        }
        param.value = saved.value;
        param.fixed = saved.fixed;
    }
    if let Some((id, _)) = model.params.iter().find(|(id, _)| !covered[id.0]) {
        return Err(invalid(format!(
            "parameter {:?} missing from checkpoint",
            model.params.get(id).name()
        )));
    }
    Ok(model)
}
