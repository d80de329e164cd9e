use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::AugmentError;
use crate::corpus::{AugmentationMethod, AugmentationProvenance, Dataset, Label, Source, TweetRecord};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceKey {
    SarcasticClass,
    Labels,
}

/// Per-label repetition ceilings from the sarcasm count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeuristicTargets {
    pub irony: usize,
    pub satire: usize,
    pub understatement: usize,
    pub overstatement: usize,
    pub rhetorical_question: usize,
}

impl HeuristicTargets {
    /// Coefficient `k` in `target = s * (1 + k / sqrt(c))`.
    pub fn coefficient(label: Label) -> Option<f64> {
        match label {
            Label::Sarcasm => None,
            Label::Irony => Some(1.0),
            Label::Satire => Some(2.0),
            Label::Understatement => Some(3.0),
            Label::Overstatement => Some(1.5),
            Label::RhetoricalQuestion => Some(1.2),
        }
    }

    pub fn get(&self, label: Label) -> Option<usize> {
        match label {
            Label::Sarcasm => None,
            Label::Irony => Some(self.irony),
            Label::Satire => Some(self.satire),
            Label::Understatement => Some(self.understatement),
            Label::Overstatement => Some(self.overstatement),
            Label::RhetoricalQuestion => Some(self.rhetorical_question),
        }
    }
}

/// Evaluates the five repetition formulas. `counts` are pre-balancing label
/// counts indexed by [`Label::index`]; each target is rounded to the nearest
/// integer and never falls below its own pre-count.
pub fn heuristic_targets(counts: &[usize; 6], sarcasm_count: usize) -> Result<HeuristicTargets, AugmentError> {
    if sarcasm_count == 0 {
        return Err(AugmentError::ZeroInstances(Label::Sarcasm));
    }
    let target = |label: Label| -> Result<usize, AugmentError> {
        let c = counts[label.index()];
        if c == 0 {
            return Err(AugmentError::ZeroInstances(label));
        }
        let k = HeuristicTargets::coefficient(label).expect("non-sarcasm label");
        let s = sarcasm_count as f64;
        let t = (s * (1.0 + k / (c as f64).sqrt())).round() as usize;
        Ok(t.max(c))
    };
    Ok(HeuristicTargets {
        irony: target(Label::Irony)?,
        satire: target(Label::Satire)?,
        understatement: target(Label::Understatement)?,
        overstatement: target(Label::Overstatement)?,
        rhetorical_question: target(Label::RhetoricalQuestion)?,
    })
}

/// Plain duplicate of `parent` with a `~rep{n}` id suffix.
pub fn repetition_copy(parent: &TweetRecord, n: usize) -> TweetRecord {
    let mut r = parent.clone();
    r.id = format!("{}~rep{n}", parent.id);
    r.source = Source::Augmented;
    r.provenance = Some(AugmentationProvenance {
        method: AugmentationMethod::Repetition,
        parent_id: parent.id.clone(),
        replaced: Vec::new(),
        rephrase_replaced: Vec::new(),
    });
    r
}

struct Duplicator {
    records: Vec<TweetRecord>,
    next: usize,
}

impl Duplicator {
    fn new(ds: &Dataset) -> Self {
        Duplicator {
            records: ds.records().to_vec(),
            next: 0,
        }
    }

    fn push_copy(&mut self, parent: &TweetRecord) {
        self.records.push(repetition_copy(parent, self.next));
        self.next += 1;
    }
}

fn labels_of(r: &TweetRecord) -> Vec<Label> {
    r.labels.map(|v| v.labels().collect()).unwrap_or_default()
}

/// Sarcasm is handled last; the other labels keep their canonical order.
fn label_order() -> impl Iterator<Item = Label> {
    Label::ALL
        .into_iter()
        .filter(|l| *l != Label::Sarcasm)
        .chain(std::iter::once(Label::Sarcasm))
}

/// Draws label carriers and passes them to `copy` until every label with a
/// target reaches it.
///
/// `caps[l]` is the level label `l` should not exceed when avoidable. A draw
/// for label `l` prefers carriers whose other labels are all below their
/// caps and falls back to any carrier of `l`, so multi-label records can
/// overshoot only when no single-purpose carrier exists.
fn oversample_labels<F>(
    ds: &Dataset,
    targets: [Option<usize>; 6],
    caps: [usize; 6],
    seed: u64,
    mut copy: F,
) -> Result<Vec<TweetRecord>, AugmentError>
where
    F: FnMut(&TweetRecord) -> TweetRecord,
{
    let mut counts = ds.label_counts();
    let mut out: Vec<TweetRecord> = Vec::new();
    for label in label_order() {
        let Some(target) = targets[label.index()] else { continue };
        let carriers: Vec<&TweetRecord> = ds.iter().filter(|r| r.has_label(label)).collect();
        if carriers.is_empty() {
            return Err(AugmentError::ZeroInstances(label));
        }
        let mut rng = rng::rng_for(seed, &format!("balance/{label}"));
        while counts[label.index()] < target {
            let preferred: Vec<&TweetRecord> = carriers
                .iter()
                .copied()
                .filter(|r| {
                    labels_of(r)
                        .into_iter()
                        .all(|l| l == label || counts[l.index()] < caps[l.index()])
                })
                .collect();
            let pool = if preferred.is_empty() { &carriers } else { &preferred };
            let parent = *pool.choose(&mut rng).expect("non-empty carriers");
            let added = copy(parent);
            for l in labels_of(&added) {
                counts[l.index()] += 1;
            }
            out.push(added);
        }
    }
    Ok(out)
}

/// Oversamples minority classes (or labels) by duplicating seeded-random
/// records until each reaches the largest count.
pub fn balance_by_repetition(ds: &Dataset, key: BalanceKey, seed: u64) -> Result<Dataset, AugmentError> {
    if ds.is_empty() {
        return Err(AugmentError::EmptyInput);
    }
    let name = format!("{}-balanced", ds.name);
    match key {
        BalanceKey::SarcasticClass => {
            let s: Vec<&TweetRecord> = ds.iter().filter(|r| r.sarcastic == Some(true)).collect();
            let ns: Vec<&TweetRecord> = ds.iter().filter(|r| r.sarcastic == Some(false)).collect();
            if s.is_empty() || ns.is_empty() {
                let missing = if s.is_empty() { "sarcastic" } else { "non-sarcastic" };
                return Err(AugmentError::EmptyClass(missing.into()));
            }
            let target = s.len().max(ns.len());
            let mut dup = Duplicator::new(ds);
            for (class_name, class) in [("sarcastic", &s), ("non_sarcastic", &ns)] {
                let mut rng = rng::rng_for(seed, &format!("balance/{class_name}"));
                for _ in class.len()..target {
                    let parent = *class.choose(&mut rng).expect("non-empty class");
                    dup.push_copy(parent);
                }
            }
            Ok(Dataset::new(name, ds.language, dup.records)?)
        }
        BalanceKey::Labels => {
            balance_labels_with(ds, seed, |parent, n| Some(repetition_copy(parent, n))).map(|mut d| {
                d.name = name;
                d
            })
        }
    }
}

/// Label balancing where the filler records come from `make_copy` instead
/// of plain duplication (e.g. embedding-substitution copies). `make_copy`
/// receives the parent and a running copy number and may decline a parent
/// by returning `None`, in which case a plain duplicate is used.
pub fn balance_labels_with<F>(ds: &Dataset, seed: u64, mut make_copy: F) -> Result<Dataset, AugmentError>
where
    F: FnMut(&TweetRecord, usize) -> Option<TweetRecord>,
{
    if ds.is_empty() {
        return Err(AugmentError::EmptyInput);
    }
    let counts = ds.label_counts();
    if let Some(l) = Label::ALL.into_iter().find(|l| counts[l.index()] == 0) {
        return Err(AugmentError::ZeroInstances(l));
    }
    let max = *counts.iter().max().expect("six labels");
    let mut n = 0usize;
    let added = oversample_labels(ds, [Some(max); 6], [max; 6], seed, |parent| {
        let r = make_copy(parent, n).unwrap_or_else(|| repetition_copy(parent, n));
        n += 1;
        r
    })?;
    let mut records = ds.records().to_vec();
    records.extend(added);
    Ok(Dataset::new(format!("{}-balanced", ds.name), ds.language, records)?)
}

/// Duplicates carriers of each non-sarcasm label until the label count
/// reaches its heuristic target. Sarcasm is never a target; duplicating a
/// multi-label record can push other labels past their targets.
pub fn balance_by_heuristic(ds: &Dataset, targets: &HeuristicTargets, seed: u64) -> Result<Dataset, AugmentError> {
    if ds.is_empty() {
        return Err(AugmentError::EmptyInput);
    }
    let counts = ds.label_counts();
    let per_label = Label::ALL.map(|l| targets.get(l));
    let caps = Label::ALL.map(|l| targets.get(l).unwrap_or(counts[l.index()]));
    let mut n = 0;
    let added = oversample_labels(ds, per_label, caps, seed, |parent| {
        n += 1;
        repetition_copy(parent, n - 1)
    })?;
    let mut records = ds.records().to_vec();
    records.extend(added);
    Ok(Dataset::new(format!("{}-heuristic", ds.name), ds.language, records)?)
}

/// Duplicates seeded-random records until the dataset holds `total` records.
pub fn repeat_to_size(ds: &Dataset, total: usize, seed: u64) -> Result<Dataset, AugmentError> {
    if ds.is_empty() {
        return Err(AugmentError::EmptyInput);
    }
    if total < ds.len() {
        return Err(AugmentError::Config(format!(
            "target size {total} is below the current size {}",
            ds.len()
        )));
    }
    let mut dup = Duplicator::new(ds);
    let mut rng = rng::rng_for(seed, "repeat");
    let parents: Vec<&TweetRecord> = ds.iter().collect();
    for _ in ds.len()..total {
        let parent = *parents.choose(&mut rng).expect("non-empty");
        dup.push_copy(parent);
    }
    Ok(Dataset::new(format!("{}-repetition", ds.name), ds.language, dup.records)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LabelVector, Language};

    fn binary(s: usize, ns: usize) -> Dataset {
        let recs = (0..s + ns)
            .map(|i| TweetRecord::new(format!("r{i}"), format!("t{i}"), Source::Original).with_sarcastic(i < s))
            .collect();
        Dataset::new("b", Language::En, recs).unwrap()
    }

    fn labelled(counts: [usize; 6]) -> Dataset {
        let mut recs = Vec::new();
        for l in Label::ALL {
            for i in 0..counts[l.index()] {
                recs.push(
                    TweetRecord::new(format!("{l}{i}"), format!("{l} {i}"), Source::Original)
                        .with_sarcastic(true)
                        .with_labels(LabelVector::from_labels(&[l])),
                );
            }
        }
        Dataset::new("m", Language::En, recs).unwrap()
    }

    #[test]
    fn duplicates_minority_class_to_max() {
        let out = balance_by_repetition(&binary(3, 9), BalanceKey::SarcasticClass, 1).unwrap();
        assert_eq!(out.sarcastic_count(), 9);
        assert_eq!(out.len(), 18);
        let dup = out.records().iter().find(|r| r.id.contains("~rep")).unwrap();
        assert_eq!(dup.provenance.as_ref().unwrap().method, AugmentationMethod::Repetition);
    }

    #[test]
    fn balanced_input_is_unchanged() {
        let ds = binary(5, 5);
        let out = balance_by_repetition(&ds, BalanceKey::SarcasticClass, 1).unwrap();
        assert_eq!(out.records(), ds.records());
    }

    #[test]
    fn missing_label_is_an_error() {
        let ds = labelled([3, 2, 0, 1, 1, 1]);
        assert!(matches!(
            balance_by_repetition(&ds, BalanceKey::Labels, 1),
            Err(AugmentError::ZeroInstances(Label::Satire))
        ));
    }

    #[test]
    fn single_label_balancing_is_exact() {
        let out = balance_by_repetition(&labelled([10, 4, 2, 1, 3, 5]), BalanceKey::Labels, 4).unwrap();
        assert_eq!(out.label_counts(), [10; 6]);
    }

    #[test]
    fn perfect_square_targets() {
        let mut counts = [0; 6];
        counts[Label::Satire.index()] = 4;
        counts[Label::Understatement.index()] = 9;
        counts[Label::Irony.index()] = 1;
        counts[Label::Overstatement.index()] = 1;
        counts[Label::RhetoricalQuestion.index()] = 1;
        let t = heuristic_targets(&counts, 100).unwrap();
        assert_eq!(t.satire, 200);
        assert_eq!(t.understatement, 200);
        assert_eq!(t.irony, 200);
        assert_eq!(t.overstatement, 250);
        assert_eq!(t.rhetorical_question, 220);
    }

    #[test]
    fn paper_irony_example() {
        let mut counts = [1; 6];
        counts[Label::Irony.index()] = 268;
        assert_eq!(heuristic_targets(&counts, 672).unwrap().irony, 713);
    }

    #[test]
    fn targets_never_below_precount_and_zero_count_errors() {
        let mut counts = [5; 6];
        counts[Label::Irony.index()] = 1000;
        assert_eq!(heuristic_targets(&counts, 10).unwrap().irony, 1000);
        counts[Label::Satire.index()] = 0;
        assert!(matches!(heuristic_targets(&counts, 10), Err(AugmentError::ZeroInstances(Label::Satire))));
    }

    #[test]
    fn heuristic_doubles_single_label_counts() {
        let ds = labelled([4, 4, 4, 4, 4, 4]);
        let t = HeuristicTargets {
            irony: 8,
            satire: 8,
            understatement: 8,
            overstatement: 8,
            rhetorical_question: 8,
        };
        let out = balance_by_heuristic(&ds, &t, 2).unwrap();
        // Independent recount of the output.
        let mut recount = [0usize; 6];
        for r in out.iter() {
            for l in r.labels.unwrap().labels() {
                recount[l.index()] += 1;
            }
        }
        assert_eq!(recount, [4, 8, 8, 8, 8, 8]);
    }

    #[test]
    fn heuristic_targets_equal_counts_is_identity() {
        let ds = labelled([4, 3, 2, 2, 2, 2]);
        let t = HeuristicTargets {
            irony: 3,
            satire: 2,
            understatement: 2,
            overstatement: 2,
            rhetorical_question: 2,
        };
        assert_eq!(balance_by_heuristic(&ds, &t, 1).unwrap().records(), ds.records());
    }

    #[test]
    fn repeat_to_size_grows_exactly() {
        let out = repeat_to_size(&binary(3, 3), 10, 1).unwrap();
        assert_eq!(out.len(), 10);
        assert!(repeat_to_size(&binary(3, 3), 2, 1).is_err());
    }
}
