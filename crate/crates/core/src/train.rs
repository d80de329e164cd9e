//! Mini-batch training with best-validation checkpointing, and
//! one-axis hyperparameter sweeps.

use std::str::FromStr;

use log::{debug, info};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::PairDataset;
use crate::corpus::{Dataset, LabelVector};
use crate::eval::{self, EvalError, MetricsReport};
use crate::model::{
    decode_multilabel, ClassWeights, Classifier, EncoderBackend, Example, HeadKind, LossKind, ModelError, ModelSpec,
    Parameterized, Target, Tokenizer,
};
use crate::preprocess::PreprocessType;
use crate::rng;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("training diverged at epoch {epoch}, batch {batch} (loss {loss})")]
    Divergence { epoch: usize, batch: usize, loss: f64 },
    #[error("{0} set is empty")]
    EmptyData(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn default_batch_size() -> usize {
    32
}

fn default_momentum() -> f64 {
    0.9
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    pub loss: LossKind,
    pub seed: u64,
    pub preprocess_type: PreprocessType,
    #[serde(default = "default_momentum")]
    pub momentum: f64,
    /// Rescale each batch gradient to at most this L2 norm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_norm: Option<f64>,
}

impl TrainConfig {
    pub fn new(learning_rate: f64, epochs: usize, loss: LossKind, seed: u64) -> Self {
        TrainConfig {
            learning_rate,
            epochs,
            batch_size: default_batch_size(),
            loss,
            seed,
            preprocess_type: PreprocessType::II,
            momentum: default_momentum(),
            clip_norm: None,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(TrainError::Config(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(TrainError::Config("batch_size must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(TrainError::Config(format!("momentum must lie in [0, 1), got {}", self.momentum)));
        }
        if let Some(c) = self.clip_norm {
            if !(c.is_finite() && c > 0.0) {
                return Err(TrainError::Config(format!("clip_norm must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_metric: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<E> {
    /// Parameters from the best validation epoch.
    pub model: Classifier<E>,
    pub trace: Vec<EpochRecord>,
    /// 1-based epoch the parameters come from.
    pub best_epoch: usize,
}

/// Head-appropriate metrics: F1-sarcastic for the binary head, macro-F1 and
/// per-label scores for the multi-label head, accuracy for pairs.
pub fn evaluate<E: EncoderBackend>(model: &Classifier<E>, data: &[Example]) -> Result<MetricsReport, TrainError> {
    if data.is_empty() {
        return Err(TrainError::EmptyData("evaluation"));
    }
    let mut report = MetricsReport::default();
    match model.head {
        HeadKind::BinarySoftmax => {
            let mut pred = Vec::with_capacity(data.len());
            let mut gold = Vec::with_capacity(data.len());
            for ex in data {
                let p = model.forward_binary(&ex.tokens)?;
                pred.push(p[1] > p[0]);
                gold.push(class_of(ex)? == 1);
            }
            report.f1_sarcastic = Some(eval::f1_positive(&pred, &gold)?);
        }
        HeadKind::PairSoftmax => {
            let mut pred = Vec::with_capacity(data.len());
            let mut gold = Vec::with_capacity(data.len());
            for ex in data {
                let p = model.probabilities(&ex.tokens);
                pred.push(u8::from(p[1] > p[0]));
                gold.push(class_of(ex)? as u8);
            }
            report.pair_accuracy = Some(eval::pair_accuracy(&pred, &gold)?);
        }
        HeadKind::MultilabelSigmoid => {
            let mut pred = Vec::with_capacity(data.len());
            let mut gold = Vec::with_capacity(data.len());
            for ex in data {
                pred.push(decode_multilabel(&model.forward_multilabel(&ex.tokens)?));
                let Target::Labels(bits) = ex.target else {
                    return Err(TrainError::Config("multi-label head needs label targets".into()));
                };
                gold.push(LabelVector::from_array(bits));
            }
            report.macro_f1 = Some(eval::macro_f1(&pred, &gold)?);
            report.per_label = eval::per_label_metrics(&pred, &gold)?;
        }
    }
    Ok(report)
}

/// Binary examples; class 1 is sarcastic. Records without a sarcastic flag
/// are skipped.
pub fn binary_examples(ds: &Dataset, tok: &Tokenizer) -> Vec<Example> {
    ds.iter()
        .filter_map(|r| {
            r.sarcastic.map(|s| Example {
                tokens: tok.encode(&r.text),
                target: Target::Class(usize::from(s)),
            })
        })
        .collect()
}

/// Multi-label examples from the records that carry labels.
pub fn multilabel_examples(ds: &Dataset, tok: &Tokenizer) -> Vec<Example> {
    ds.iter()
        .filter_map(|r| {
            r.labels.map(|l| Example {
                tokens: tok.encode(&r.text),
                target: Target::Labels(l.to_array()),
            })
        })
        .collect()
}

pub fn pair_examples(pairs: &PairDataset, tok: &Tokenizer) -> Vec<Example> {
    pairs
        .pairs
        .iter()
        .map(|p| Example {
            tokens: tok.encode_pair(&p.text_a, &p.text_b),
            target: Target::Class(usize::from(p.label)),
        })
        .collect()
}

fn class_of(ex: &Example) -> Result<usize, TrainError> {
    match ex.target {
        Target::Class(c) => Ok(c),
        Target::Labels(_) => Err(TrainError::Config("softmax head needs class targets".into())),
    }
}

fn main_metric(report: &MetricsReport) -> f64 {
    report.main_metric().map_or(0.0, |(_, v)| v)
}

fn class_weights(train: &[Example], loss: LossKind) -> Result<ClassWeights, TrainError> {
    if loss != LossKind::WeightedCe {
        return Ok(ClassWeights::uniform());
    }
    let mut counts = [0usize; 2];
    for ex in train {
        counts[class_of(ex)?.min(1)] += 1;
    }
    Ok(ClassWeights::from_counts(counts[0], counts[1])?)
}

/// Mini-batch gradient descent with momentum for `cfg.epochs` epochs,
/// returning the parameters of the best validation epoch (earliest on ties).
pub fn train_model<E: EncoderBackend>(
    mut model: Classifier<E>,
    train: &[Example],
    val: &[Example],
    cfg: &TrainConfig,
) -> Result<TrainOutcome<E>, TrainError> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(TrainError::EmptyData("training"));
    }
    if val.is_empty() {
        return Err(TrainError::EmptyData("validation"));
    }
    let weights = class_weights(train, cfg.loss)?;
    let mut params = model.to_flat();
    let mut velocity = vec![0.0; params.len()];
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, Classifier<E>)> = None;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng::rng_for(cfg.seed, &format!("train/epoch/{epoch}")));
        let mut loss_sum = 0.0;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<Example> = chunk.iter().map(|&i| train[i].clone()).collect();
            let mut grad = model.zeros_like();
            let loss = model.loss_and_grad(&batch, cfg.loss, &weights, &mut grad)?;
            let mut g = grad.to_flat();
            if !loss.is_finite() || g.iter().any(|x| !x.is_finite()) {
                return Err(TrainError::Divergence { epoch, batch: b + 1, loss });
            }
            if let Some(max) = cfg.clip_norm {
                let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > max {
                    g.iter_mut().for_each(|x| *x *= max / norm);
                }
            }
            for ((p, v), gi) in params.iter_mut().zip(&mut velocity).zip(&g) {
                *v = cfg.momentum * *v + gi;
                *p -= cfg.learning_rate * *v;
            }
            model.set_flat(&params);
            loss_sum += loss * batch.len() as f64;
        }
        let train_loss = loss_sum / train.len() as f64;
        let val_metric = main_metric(&evaluate(&model, val)?);
        debug!("epoch {epoch}: train loss {train_loss:.6}, val {val_metric:.4}");
        trace.push(EpochRecord {
            epoch,
            train_loss,
            val_metric,
        });
        if best.as_ref().is_none_or(|(m, _, _)| val_metric > *m) {
            best = Some((val_metric, epoch, model.clone()));
        }
    }
    let (_, best_epoch, model) = best.expect("at least one epoch");
    info!("best epoch {best_epoch} of {}", cfg.epochs);
    Ok(TrainOutcome {
        model,
        trace,
        best_epoch,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    LearningRate,
    Epochs,
    HiddenSize,
    Dataset,
    PreprocessType,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::LearningRate => "learning_rate",
            SweepAxis::Epochs => "epochs",
            SweepAxis::HiddenSize => "hidden_size",
            SweepAxis::Dataset => "dataset",
            SweepAxis::PreprocessType => "preprocess_type",
        }
    }

    fn is_numeric(self) -> bool {
        matches!(self, SweepAxis::LearningRate | SweepAxis::Epochs | SweepAxis::HiddenSize)
    }
}

impl FromStr for SweepAxis {
    type Err = TrainError;

    fn from_str(s: &str) -> Result<Self, TrainError> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "learning_rate" | "lr" => Ok(SweepAxis::LearningRate),
            "epochs" => Ok(SweepAxis::Epochs),
            "hidden_size" => Ok(SweepAxis::HiddenSize),
            "dataset" => Ok(SweepAxis::Dataset),
            "preprocess_type" => Ok(SweepAxis::PreprocessType),
            other => Err(TrainError::Config(format!("unknown sweep axis `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<String>,
    pub base: TrainConfig,
}

/// Data and model shape for one sweep run.
#[derive(Debug, Clone)]
pub struct RunData {
    pub spec: ModelSpec,
    pub train: Vec<Example>,
    pub val: Vec<Example>,
    pub test: Vec<Example>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: String,
    pub val_metric: f64,
    /// Absent when the run had no test examples.
    pub test_metric: Option<f64>,
    pub seed: u64,
    pub trace: Vec<EpochRecord>,
    pub val_report: MetricsReport,
    pub test_report: Option<MetricsReport>,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Model spec and best-epoch parameters of the flagged row.
    pub best_model: Option<(ModelSpec, Classifier)>,
}

impl SweepTable {
    pub fn best_row(&self) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.best)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["axis", "value", "val_metric", "test_metric", "seed", "best"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.axis.name().to_string(),
                r.value.clone(),
                format!("{:.6}", r.val_metric),
                r.test_metric.map(|m| format!("{m:.6}")).unwrap_or_default(),
                r.seed.to_string(),
                r.best.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

fn parse_axis_value<T: FromStr>(axis: SweepAxis, value: &str) -> Result<T, TrainError> {
    value
        .trim()
        .parse()
        .map_err(|_| TrainError::Config(format!("`{value}` is not a valid {} value", axis.name())))
}

/// One [`train_model`] run per axis value with every other setting held.
/// `data` supplies the examples and model shape for a value (it receives
/// the run's config, so it can honour the preprocessing type). Numeric axes
/// are reported in ascending order, others in the given order; the row with
/// the highest validation metric is flagged (earliest on ties).
pub fn sweep<F>(spec: &SweepSpec, mut data: F) -> Result<SweepTable, TrainError>
where
    F: FnMut(&str, &TrainConfig) -> Result<RunData, TrainError>,
{
    if spec.values.is_empty() {
        return Err(TrainError::Config("sweep needs at least one value".into()));
    }
    for (i, v) in spec.values.iter().enumerate() {
        if spec.values[..i].contains(v) {
            return Err(TrainError::Config(format!("duplicate sweep value `{v}`")));
        }
    }
    spec.base.validate()?;

    let mut values = spec.values.clone();
    if spec.axis.is_numeric() {
        let mut keyed = values
            .into_iter()
            .map(|v| parse_axis_value::<f64>(spec.axis, &v).map(|k| (k, v)))
            .collect::<Result<Vec<_>, _>>()?;
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
        values = keyed.into_iter().map(|(_, v)| v).collect();
    }

    let mut rows = Vec::with_capacity(values.len());
    let mut kept: Option<(f64, ModelSpec, Classifier)> = None;
    for value in values {
        let mut cfg = spec.base;
        match spec.axis {
            SweepAxis::LearningRate => cfg.learning_rate = parse_axis_value(spec.axis, &value)?,
            SweepAxis::Epochs => cfg.epochs = parse_axis_value(spec.axis, &value)?,
            SweepAxis::PreprocessType => {
                cfg.preprocess_type = value
                    .parse()
                    .map_err(|_| TrainError::Config(format!("unknown preprocessing type `{value}`")))?
            }
            SweepAxis::HiddenSize | SweepAxis::Dataset => {}
        }
        let mut run = data(&value, &cfg)?;
        if spec.axis == SweepAxis::HiddenSize {
            let h = run
                .spec
                .hierarchical
                .as_mut()
                .ok_or_else(|| TrainError::Config("hidden_size sweep needs a hierarchical model".into()))?;
            h.hidden_size = parse_axis_value(spec.axis, &value)?;
        }
        info!("sweep {}={value}", spec.axis.name());
        let outcome = train_model(Classifier::new(&run.spec), &run.train, &run.val, &cfg)?;
        let val_metric = outcome.trace[outcome.best_epoch - 1].val_metric;
        let val_report = evaluate(&outcome.model, &run.val)?;
        let test_report = if run.test.is_empty() {
            None
        } else {
            Some(evaluate(&outcome.model, &run.test)?)
        };
        if kept.as_ref().is_none_or(|(m, _, _)| val_metric > *m) {
            kept = Some((val_metric, run.spec, outcome.model));
        }
        rows.push(SweepRow {
            axis: spec.axis,
            value,
            val_metric,
            test_metric: test_report.as_ref().map(main_metric),
            seed: cfg.seed,
            trace: outcome.trace,
            val_report,
            test_report,
            best: false,
        });
    }
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.val_metric > rows[best].val_metric {
            best = i;
        }
    }
    rows[best].best = true;
    Ok(SweepTable {
        rows,
        best_model: kept.map(|(_, spec, model)| (spec, model)),
    })
}
