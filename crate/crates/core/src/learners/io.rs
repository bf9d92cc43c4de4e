//! Model files.
//!
//! A model file is a pretty-printed JSON document:
//!
//! ```text
//! {
//!   "format": "candor-model",
//!   "version": 1,
//!   "kind": "logreg" | "svm" | "dtree" | "rforest" | "gbt" | "mlp",
//!   "hyperparams": {"kind": .., "params": {name: value, ..}},
//!   "fingerprint": {"descriptor": "hashed:dim=64:seed=7", "dim": 64},
//!   "train_seed": 7,
//!   "standardizer": {"mean": [..], "scale": [..]} | null,
//!   "params": {"<kind>": {..learned parameters..}}
//! }
//! ```
//!
//! Floats are written in shortest round-trip form and parsed with correct
//! rounding, so a reloaded model predicts bit-identically.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::TrainedModel;

pub const FORMAT: &str = "candor-model";
pub const VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("not a model file: {0}")]
    Format(String),
    #[error("unsupported model format version {found} (this build reads version {VERSION})")]
    Version { found: u64 },
    #[error("model file has no featurizer fingerprint")]
    MissingFingerprint,
    #[error("malformed model file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
struct Envelope<M> {
    format: String,
    version: u64,
    #[serde(flatten)]
    model: M,
}

pub fn to_string(model: &TrainedModel) -> String {
    let env = Envelope {
        format: FORMAT.to_string(),
        version: VERSION,
        model,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("model serialize");
    s.push('\n');
    s
}

pub fn from_str(text: &str) -> Result<TrainedModel, ModelIoError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ModelIoError::Parse(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| ModelIoError::Format("top level is not an object".into()))?;
    match obj.get("format").and_then(Value::as_str) {
        Some(FORMAT) => {}
        other => return Err(ModelIoError::Format(format!("format tag {other:?}"))),
    }
    let version = obj
        .get("version")
        .and_then(Value::as_u64)
        .ok_or_else(|| ModelIoError::Format("missing version".into()))?;
    if version != VERSION {
        return Err(ModelIoError::Version { found: version });
    }
    if obj.get("fingerprint").is_none_or(Value::is_null) {
        return Err(ModelIoError::MissingFingerprint);
    }
    let env: Envelope<TrainedModel> = serde_json::from_value(value).map_err(|e| ModelIoError::Parse(e.to_string()))?;
    Ok(env.model)
}

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<(), ModelIoError> {
    std::fs::write(path, to_string(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<TrainedModel, ModelIoError> {
    from_str(&std::fs::read_to_string(path)?)
}
