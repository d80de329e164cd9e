//! Subtask metrics and report tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Label, LabelVector};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("prediction count {pred} differs from gold count {gold}")]
    LengthMismatch { pred: usize, gold: usize },
    #[error("nothing to evaluate")]
    Empty,
}

fn check_lengths(pred: usize, gold: usize) -> Result<(), EvalError> {
    if pred != gold {
        return Err(EvalError::LengthMismatch { pred, gold });
    }
    if pred == 0 {
        return Err(EvalError::Empty);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn from_predictions(pred: &[bool], gold: &[bool]) -> Result<Self, EvalError> {
        check_lengths(pred.len(), gold.len())?;
        let mut c = ConfusionCounts::default();
        for (&p, &g) in pred.iter().zip(gold) {
            c.record(p, g);
        }
        Ok(c)
    }

    pub fn record(&mut self, pred: bool, gold: bool) {
        match (pred, gold) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// `2PR / (P + R)`, or 0 when `P + R = 0`.
    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = ConfusionCounts;

    fn add(self, o: ConfusionCounts) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// F1 of the positive (sarcastic) class.
pub fn f1_positive(pred: &[bool], gold: &[bool]) -> Result<f64, EvalError> {
    Ok(ConfusionCounts::from_predictions(pred, gold)?.f1())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub label: Label,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn label_confusion(pred: &[LabelVector], gold: &[LabelVector]) -> Result<[ConfusionCounts; 6], EvalError> {
    check_lengths(pred.len(), gold.len())?;
    let mut out = [ConfusionCounts::default(); 6];
    for (p, g) in pred.iter().zip(gold) {
        for l in Label::ALL {
            out[l.index()].record(p.get(l), g.get(l));
        }
    }
    Ok(out)
}

pub fn per_label_metrics(pred: &[LabelVector], gold: &[LabelVector]) -> Result<Vec<LabelMetrics>, EvalError> {
    let counts = label_confusion(pred, gold)?;
    Ok(Label::ALL
        .iter()
        .map(|&l| {
            let c = counts[l.index()];
            LabelMetrics {
                label: l,
                precision: c.precision(),
                recall: c.recall(),
                f1: c.f1(),
            }
        })
        .collect())
}

/// Unweighted mean of the six per-label F1 scores; a label absent from both
/// predictions and gold scores 0.
pub fn macro_f1(pred: &[LabelVector], gold: &[LabelVector]) -> Result<f64, EvalError> {
    let counts = label_confusion(pred, gold)?;
    Ok(counts.iter().map(ConfusionCounts::f1).sum::<f64>() / 6.0)
}

/// Fraction of pairs whose predicted sarcastic position matches gold.
pub fn pair_accuracy(pred: &[u8], gold: &[u8]) -> Result<f64, EvalError> {
    check_lengths(pred.len(), gold.len())?;
    let hits = pred.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(hits as f64 / pred.len() as f64)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1_sarcastic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub macro_f1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_label: Vec<LabelMetrics>,
}

impl MetricsReport {
    /// The subtask's official metric: F1-sarcastic, then macro-F1, then pair
    /// accuracy, whichever is present first.
    pub fn main_metric(&self) -> Option<(&'static str, f64)> {
        self.f1_sarcastic
            .map(|v| ("f1_sarcastic", v))
            .or(self.macro_f1.map(|v| ("macro_f1", v)))
            .or(self.pair_accuracy.map(|v| ("pair_accuracy", v)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub run: String,
    pub dataset: String,
    pub preprocess_type: String,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
    /// Index of the row with the highest main metric (earliest on ties).
    pub best: usize,
}

const CSV_HEADER: [&str; 6] = ["run", "dataset", "preprocess_type", "metric_name", "value", "best"];

impl ReportTable {
    /// Aligned plain-text table; the best row is marked with `*`.
    pub fn to_text(&self) -> String {
        let cells: Vec<[String; 5]> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let (name, value) = r.report.main_metric().unwrap_or(("-", f64::NAN));
                [
                    format!("{}{}", r.run, if i == self.best { " *" } else { "" }),
                    r.dataset.clone(),
                    r.preprocess_type.clone(),
                    name.to_string(),
                    format!("{value:.4}"),
                ]
            })
            .collect();
        let mut widths: [usize; 5] = std::array::from_fn(|i| CSV_HEADER[i].len());
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, row: &[&str]| {
            let padded: Vec<String> = row.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", padded.join("  ").trim_end());
        };
        line(&mut out, &CSV_HEADER[..5]);
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        let _ = writeln!(out, "{}", rule.join("  "));
        for row in &cells {
            line(&mut out, &row.iter().map(String::as_str).collect::<Vec<_>>());
        }
        out
    }

    /// One CSV row per run with its main metric and a best-row flag.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for (i, r) in self.rows.iter().enumerate() {
            let (name, value) = r.report.main_metric().unwrap_or(("", f64::NAN));
            w.write_record([
                r.run.as_str(),
                &r.dataset,
                &r.preprocess_type,
                name,
                &format!("{value:.6}"),
                if i == self.best { "true" } else { "false" },
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

pub fn build_report_table(runs: Vec<ReportRow>) -> Result<ReportTable, EvalError> {
    if runs.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, r) in runs.iter().enumerate() {
        if let Some((_, v)) = r.report.main_metric() {
            if v > best_value {
                best = i;
                best_value = v;
            }
        }
    }
    Ok(ReportTable { rows: runs, best })
}
