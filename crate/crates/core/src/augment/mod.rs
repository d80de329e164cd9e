//! Derived training sets: bias schedules, embedding substitution, repetition
//! balancing and subtask-C pairs.

mod balance;
mod bias;
mod pair;
mod substitute;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusError, Label};

pub use balance::{
    balance_by_heuristic, balance_by_repetition, balance_labels_with, heuristic_targets, repeat_to_size,
    repetition_copy, BalanceKey, HeuristicTargets,
};
pub use bias::{build_bias_schedule, BiasSchedule};
pub use pair::{apply_swap, half_swap_mask, pair_swap_half, PairDataset, PairRecord};
pub use substitute::{embedding_substitute, substitution_copy, SubstitutionConfig, SubstitutionOutcome};

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("non-sarcastic pool exhausted at step {step}: needs {needed} records, pool holds {available}")]
    PoolExhausted { step: usize, needed: usize, available: usize },
    #[error("record `{0}` appears in more than one pool")]
    PoolOverlap(String),
    #[error("invalid pool: {0}")]
    InvalidPool(String),
    #[error("label `{0}` has no instances")]
    ZeroInstances(Label),
    #[error("no {0} records to balance")]
    EmptyClass(String),
    #[error("record `{0}` has no rephrase")]
    MissingRephrase(String),
    #[error("input dataset is empty")]
    EmptyInput,
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Sidecar written next to an augmented dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AugmentManifest {
    pub operation: String,
    pub seed: u64,
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub counters: BTreeMap<String, usize>,
    pub outputs: Vec<String>,
}

impl AugmentManifest {
    pub fn new(operation: impl Into<String>, seed: u64) -> Self {
        AugmentManifest {
            operation: operation.into(),
            seed,
            ..Default::default()
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable parameter"));
        self
    }

    pub fn counter(mut self, key: &str, value: usize) -> Self {
        self.counters.insert(key.to_string(), value);
        self
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, json + "\n").map_err(|e| CorpusError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}
