use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::record::Dataset;
use super::CorpusError;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratify {
    Sarcastic,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub stratify_on: Stratify,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, stratify_on: Stratify, seed: u64) -> Self {
        SplitSpec {
            train_fraction,
            stratify_on,
            seed,
        }
    }
}

// 0.29 * 100 evaluates to 28.999999999999996.
fn floor_quota(x: f64) -> usize {
    (x + 1e-9).floor() as usize
}

/// Splits `ds` into train and validation partitions.
///
/// The train side holds `floor(fraction * n)` records. With stratification
/// every class receives the floor of its own quota and the leftover slots go
/// to the classes with the largest fractional remainders, so class
/// proportions match the whole set to within one record per class.
/// Both outputs keep the input's record order.
pub fn split_train_val(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset), CorpusError> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(CorpusError::Split(format!(
            "train_fraction {} outside (0, 1)",
            spec.train_fraction
        )));
    }
    if ds.is_empty() {
        return Err(CorpusError::Split("cannot split an empty dataset".into()));
    }

    let n = ds.len();
    let n_train = floor_quota(spec.train_fraction * n as f64);

    // Strata keyed by class; `None` (unknown flag) is its own stratum.
    let mut strata: BTreeMap<Option<bool>, Vec<usize>> = BTreeMap::new();
    for (i, r) in ds.records().iter().enumerate() {
        let key = match spec.stratify_on {
            Stratify::Sarcastic => r.sarcastic,
            Stratify::None => None,
        };
        strata.entry(key).or_default().push(i);
    }

    let mut quotas: Vec<(Option<bool>, usize, f64)> = strata
        .iter()
        .map(|(k, idx)| {
            let exact = spec.train_fraction * idx.len() as f64;
            let whole = floor_quota(exact);
            (*k, whole, (exact - whole as f64).max(0.0))
        })
        .collect();
    let assigned: usize = quotas.iter().map(|q| q.1).sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| {
        quotas[b]
            .2
            .total_cmp(&quotas[a].2)
            .then_with(|| strata[&quotas[b].0].len().cmp(&strata[&quotas[a].0].len()))
    });
    for &q in order.iter().cycle().take(n_train.saturating_sub(assigned)) {
        quotas[q].1 += 1;
    }

    let mut in_train = vec![false; n];
    for (key, quota, _) in &quotas {
        let mut idx = strata[key].clone();
        let purpose = format!("split/{key:?}");
        idx.shuffle(&mut rng::rng_for(spec.seed, &purpose));
        for &i in idx.iter().take(*quota) {
            in_train[i] = true;
        }
    }

    let mut train = Vec::with_capacity(n_train);
    let mut val = Vec::with_capacity(n - n_train);
    for (r, &t) in ds.records().iter().zip(&in_train) {
        if t {
            train.push(r.clone());
        } else {
            val.push(r.clone());
        }
    }
    Ok((
        Dataset::new(format!("{}-train", ds.name), ds.language, train)?,
        Dataset::new(format!("{}-val", ds.name), ds.language, val)?,
    ))
}
