use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::record::{Dataset, Dialect, Label};

/// Rounds to one decimal place.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        round1(100.0 * part as f64 / whole as f64)
    }
}

/// Summary counts in the shape of the dataset description tables.
///
/// Class percentages are over records with a known sarcastic flag; label
/// percentages are over label occurrences; dialect percentages are over
/// records with a dialect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub name: String,
    pub total: usize,
    pub sarcastic: usize,
    pub non_sarcastic: usize,
    pub sarcastic_pct: f64,
    pub non_sarcastic_pct: f64,
    pub label_counts: BTreeMap<Label, usize>,
    pub label_pct: BTreeMap<Label, f64>,
    pub dialect_counts: BTreeMap<Dialect, usize>,
    pub dialect_pct: BTreeMap<Dialect, f64>,
    /// Whitespace word count -> number of tweets.
    pub word_count_histogram: BTreeMap<usize, usize>,
}

pub fn dataset_stats(ds: &Dataset) -> StatsSummary {
    let sarcastic = ds.iter().filter(|r| r.sarcastic == Some(true)).count();
    let non_sarcastic = ds.iter().filter(|r| r.sarcastic == Some(false)).count();
    let flagged = sarcastic + non_sarcastic;

    let counts = ds.label_counts();
    let occurrences: usize = counts.iter().sum();
    let label_counts: BTreeMap<Label, usize> =
        Label::ALL.iter().map(|&l| (l, counts[l.index()])).collect();
    let label_pct = label_counts
        .iter()
        .map(|(&l, &c)| (l, pct(c, occurrences)))
        .collect();

    let mut dialect_counts: BTreeMap<Dialect, usize> = BTreeMap::new();
    for d in ds.iter().filter_map(|r| r.dialect) {
        *dialect_counts.entry(d).or_default() += 1;
    }
    let with_dialect: usize = dialect_counts.values().sum();
    let dialect_pct = dialect_counts
        .iter()
        .map(|(&d, &c)| (d, pct(c, with_dialect)))
        .collect();

    let mut word_count_histogram = BTreeMap::new();
    for r in ds {
        *word_count_histogram
            .entry(r.text.split_whitespace().count())
            .or_default() += 1;
    }

    StatsSummary {
        name: ds.name.clone(),
        total: ds.len(),
        sarcastic,
        non_sarcastic,
        sarcastic_pct: pct(sarcastic, flagged),
        non_sarcastic_pct: pct(non_sarcastic, flagged),
        label_counts,
        label_pct,
        dialect_counts,
        dialect_pct,
        word_count_histogram,
    }
}
