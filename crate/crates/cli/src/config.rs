//! JSON experiment config.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sarcasm_core::corpus::{Language, Source, Stratify};
use sarcasm_core::model::{HeadKind, HierarchicalConfig, LossKind};
use sarcasm_core::preprocess::PreprocessType;
use sarcasm_core::train::{SweepAxis, TrainConfig};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subtask {
    AEn,
    AAr,
    BEn,
    CEn,
    CAr,
}

impl Subtask {
    pub fn language(self) -> Language {
        match self {
            Subtask::AAr | Subtask::CAr => Language::Ar,
            _ => Language::En,
        }
    }

    pub fn head(self) -> HeadKind {
        match self {
            Subtask::AEn | Subtask::AAr => HeadKind::BinarySoftmax,
            Subtask::BEn => HeadKind::MultilabelSigmoid,
            Subtask::CEn | Subtask::CAr => HeadKind::PairSoftmax,
        }
    }

    pub fn is_pair(self) -> bool {
        self.head() == HeadKind::PairSoftmax
    }

    pub fn stratify(self) -> Stratify {
        match self {
            Subtask::AEn | Subtask::AAr => Stratify::Sarcastic,
            _ => Stratify::None,
        }
    }

    fn default_loss(self) -> LossKind {
        match self.head() {
            HeadKind::MultilabelSigmoid => LossKind::Bce,
            _ => LossKind::Ce,
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_preprocess() -> PreprocessType {
    PreprocessType::II
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub subtask: Subtask,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub data: DataConfig,
    #[serde(default = "default_preprocess")]
    pub preprocess_type: PreprocessType,
    #[serde(default)]
    pub augment: AugmentConfig,
    #[serde(default)]
    pub model: ModelConfig,
    pub train: TrainBlock,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// Training release (CSV).
    pub train: PathBuf,
    /// Held-out test release (CSV).
    #[serde(default)]
    pub test: Option<PathBuf>,
    /// Share of `train` kept for training; the rest is validation.
    #[serde(default)]
    pub train_fraction: Option<f64>,
}

/// CSV file merged in as an external pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub source: Option<Source>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Sarcastic rows of these files are merged whole.
    pub sarcastic_pools: Vec<PoolConfig>,
    /// Non-sarcastic rows of this file are drawn `increment` per step.
    pub ns_pool: PoolConfig,
    pub increment: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_steps() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorsConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub expected_dim: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstitutionBlock {
    pub copies_per_record: usize,
    #[serde(default)]
    pub max_generated: Option<usize>,
    #[serde(default)]
    pub also_rephrase: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepetitionBlock {
    /// Target size; defaults to the size of the embedding-augmented set.
    #[serde(default)]
    pub total: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceMode {
    SarcasticClass,
    Labels,
    LabelsEmbedding,
    Heuristic,
}

impl BalanceMode {
    pub fn suffix(self) -> &'static str {
        match self {
            BalanceMode::SarcasticClass => "Balanced",
            BalanceMode::Labels => "UR",
            BalanceMode::LabelsEmbedding => "UW",
            BalanceMode::Heuristic => "EB",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentConfig {
    #[serde(default = "yes")]
    pub include_original: bool,
    #[serde(default)]
    pub schedule: Option<ScheduleConfig>,
    /// Pools merged with the train split into `Ext-NB`.
    #[serde(default)]
    pub external: Vec<PoolConfig>,
    #[serde(default)]
    pub vectors: Option<VectorsConfig>,
    #[serde(default)]
    pub substitution: Option<SubstitutionBlock>,
    #[serde(default)]
    pub repetition: Option<RepetitionBlock>,
    #[serde(default)]
    pub balance: Vec<BalanceMode>,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            include_original: true,
            schedule: None,
            external: Vec::new(),
            vectors: None,
            substitution: None,
            repetition: None,
            balance: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    #[serde(default = "default_min_count")]
    pub min_count: usize,
    #[serde(default)]
    pub hierarchical: Option<HierarchicalConfig>,
}

fn default_dim() -> usize {
    32
}
fn default_layers() -> usize {
    2
}
fn default_max_len() -> usize {
    64
}
fn default_min_count() -> usize {
    1
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            dim: default_dim(),
            layers: default_layers(),
            max_len: default_max_len(),
            min_count: default_min_count(),
            hierarchical: None,
        }
    }
}

fn default_batch_size() -> usize {
    32
}
fn default_momentum() -> f64 {
    0.9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainBlock {
    pub learning_rate: f64,
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub loss: Option<LossKind>,
    #[serde(default = "default_momentum")]
    pub momentum: f64,
    #[serde(default)]
    pub clip_norm: Option<f64>,
    /// Augmented dataset trained on when the sweep axis is not `dataset`.
    #[serde(default)]
    pub dataset: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    /// Numbers or strings. An empty list on the dataset axis means every
    /// augmented dataset.
    #[serde(default)]
    pub values: Vec<serde_json::Value>,
}

impl SweepConfig {
    pub fn string_values(&self) -> Result<Vec<String>, CliError> {
        self.values
            .iter()
            .map(|v| match v {
                serde_json::Value::String(s) => Ok(s.clone()),
                serde_json::Value::Number(n) => Ok(n.to_string()),
                other => Err(CliError::Config(format!("sweep value {other} is neither a number nor a string"))),
            })
            .collect()
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    /// Reads and validates a config; relative paths are resolved against the
    /// config file's directory. Missing file is an input error, anything
    /// unparsable a config error.
    pub fn load(path: &Path) -> Result<(ExperimentConfig, Vec<u8>), CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig = serde_json::from_slice(&bytes)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok((cfg, bytes))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        fix(&mut self.data.train);
        if let Some(t) = &mut self.data.test {
            fix(t);
        }
        if let Some(s) = &mut self.augment.schedule {
            s.sarcastic_pools.iter_mut().for_each(|p| fix(&mut p.path));
            fix(&mut s.ns_pool.path);
        }
        self.augment.external.iter_mut().for_each(|p| fix(&mut p.path));
        if let Some(v) = &mut self.augment.vectors {
            fix(&mut v.path);
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_err(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if let Some(f) = self.data.train_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(config_err(format!("data.train_fraction must lie in (0, 1), got {f}")));
            }
        }
        let m = &self.model;
        if m.dim == 0 || m.layers == 0 || m.max_len < 2 || m.min_count == 0 {
            return Err(config_err("model needs dim, layers, min_count >= 1 and max_len >= 2"));
        }
        if let Some(h) = m.hierarchical {
            if h.hidden_size == 0 || h.attention_size == Some(0) {
                return Err(config_err("model.hierarchical sizes must be at least 1"));
            }
        }
        let loss = self.loss();
        let fits = match self.subtask.head() {
            HeadKind::MultilabelSigmoid => loss == LossKind::Bce,
            _ => loss != LossKind::Bce,
        };
        if !fits {
            return Err(config_err(format!("{loss:?} loss does not fit subtask {:?}", self.subtask)));
        }
        let a = &self.augment;
        if a.schedule.is_some() && !matches!(self.subtask, Subtask::AEn | Subtask::AAr) {
            return Err(config_err("augment.schedule is only defined for subtask A"));
        }
        if let Some(s) = &a.schedule {
            if s.increment == 0 || s.steps == 0 {
                return Err(config_err("augment.schedule needs increment and steps >= 1"));
            }
        }
        let needs_vectors = a.substitution.is_some() || a.balance.contains(&BalanceMode::LabelsEmbedding);
        if needs_vectors && a.vectors.is_none() {
            return Err(config_err("embedding augmentation needs augment.vectors"));
        }
        if let Some(s) = a.substitution {
            if s.copies_per_record == 0 {
                return Err(config_err("augment.substitution.copies_per_record must be at least 1"));
            }
        }
        if let Some(r) = a.repetition {
            if r.total.is_none() && a.substitution.is_none() {
                return Err(config_err("augment.repetition needs a total when there is no substitution block"));
            }
        }
        for (i, mode) in a.balance.iter().enumerate() {
            if a.balance[..i].contains(mode) {
                return Err(config_err(format!("balance mode {mode:?} listed twice")));
            }
            let label_mode = *mode != BalanceMode::SarcasticClass;
            if label_mode && self.subtask != Subtask::BEn {
                return Err(config_err(format!("balance mode {mode:?} needs label annotations (subtask b_en)")));
            }
        }
        if let Some(s) = &self.sweep {
            let values = s.string_values()?;
            if values.is_empty() && s.axis != SweepAxis::Dataset {
                return Err(config_err("sweep.values may only be empty on the dataset axis"));
            }
            if s.axis == SweepAxis::HiddenSize && m.hierarchical.is_none() {
                return Err(config_err("a hidden_size sweep needs model.hierarchical"));
            }
        }
        self.train_config(DEFAULT_SEED)
            .validate()
            .map_err(|e| config_err(e.to_string()))
    }

    pub fn loss(&self) -> LossKind {
        self.train.loss.unwrap_or(self.subtask.default_loss())
    }

    pub fn train_fraction(&self) -> f64 {
        self.data.train_fraction.unwrap_or(match self.subtask {
            Subtask::AEn | Subtask::AAr => 0.6,
            _ => 0.7,
        })
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.train.learning_rate,
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            loss: self.loss(),
            seed,
            preprocess_type: self.preprocess_type,
            momentum: self.train.momentum,
            clip_norm: self.train.clip_norm,
        }
    }
}
