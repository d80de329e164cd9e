use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::classifier::{Classifier, ModelSpec};
use super::encoder::ToyEncoder;
use super::tokenizer::Tokenizer;
use super::{ModelError, Parameterized};

pub const CHECKPOINT_VERSION: u32 = 1;

/// JSON container for a trained model: spec (shapes and seed), vocabulary
/// and every parameter array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub spec: ModelSpec,
    pub tokenizer: Tokenizer,
    pub model: Classifier<ToyEncoder>,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl Checkpoint {
    pub fn new(spec: ModelSpec, tokenizer: Tokenizer, model: Classifier<ToyEncoder>) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            spec,
            tokenizer,
            model,
            metadata: BTreeMap::new(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let path = path.as_ref();
        let json = serde_json::to_string(self).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        std::fs::write(path, json).map_err(|e| ModelError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Checkpoint::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let mut ck: Checkpoint = serde_json::from_str(text).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(ModelError::Checkpoint(format!(
                "unsupported version {} (expected {CHECKPOINT_VERSION})",
                ck.version
            )));
        }
        ck.tokenizer.rebuild_index();
        let expected = Classifier::new(&ck.spec).num_params();
        if ck.model.num_params() != expected || ck.model.head != ck.spec.head {
            return Err(ModelError::Checkpoint("parameter shapes do not match the spec".into()));
        }
        Ok(ck)
    }
}
