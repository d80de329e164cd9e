use std::collections::HashSet;

use rand::seq::SliceRandom;

use super::AugmentError;
use crate::corpus::{AugmentationMethod, AugmentationProvenance, Dataset, TweetRecord};
use crate::rng;

/// Recipe for the sarcasm-biased B0..B(steps-1) training sets.
#[derive(Debug, Clone)]
pub struct BiasSchedule {
    /// Original train split, merged whole.
    pub base_pool: Dataset,
    /// External sarcastic-only pools, merged whole.
    pub sarcastic_pools: Vec<Dataset>,
    /// Non-sarcastic pool drawn from in `increment` steps.
    pub ns_pool: Dataset,
    pub increment: usize,
    pub steps: usize,
    pub seed: u64,
}

impl BiasSchedule {
    fn validate(&self) -> Result<(), AugmentError> {
        if self.increment == 0 || self.steps == 0 {
            return Err(AugmentError::Config(
                "bias schedule needs increment >= 1 and steps >= 1".into(),
            ));
        }
        for pool in &self.sarcastic_pools {
            if let Some(r) = pool.iter().find(|r| !r.is_sarcastic()) {
                return Err(AugmentError::InvalidPool(format!(
                    "sarcastic pool `{}` holds non-sarcastic record `{}`",
                    pool.name, r.id
                )));
            }
        }
        if let Some(r) = self.ns_pool.iter().find(|r| r.sarcastic != Some(false)) {
            return Err(AugmentError::InvalidPool(format!(
                "non-sarcastic pool `{}` holds record `{}` not flagged non-sarcastic",
                self.ns_pool.name, r.id
            )));
        }
        let mut seen = HashSet::new();
        let all = std::iter::once(&self.base_pool)
            .chain(&self.sarcastic_pools)
            .chain(std::iter::once(&self.ns_pool));
        for pool in all {
            for r in pool {
                if !seen.insert(r.id.as_str()) {
                    return Err(AugmentError::PoolOverlap(r.id.clone()));
                }
            }
        }
        Ok(())
    }
}

fn merged(r: &TweetRecord) -> TweetRecord {
    let mut r = r.clone();
    r.provenance = Some(AugmentationProvenance {
        method: AugmentationMethod::ExternalMerge,
        parent_id: r.id.clone(),
        replaced: Vec::new(),
        rephrase_replaced: Vec::new(),
    });
    r
}

/// Builds `B_k = base ∪ sarcastic pools ∪ first k*increment records of a
/// seeded shuffle of the non-sarcastic pool`, for k in `0..steps`.
///
/// Every `B_k` is contained in `B_{k+1}`; each output is shuffled.
pub fn build_bias_schedule(spec: &BiasSchedule) -> Result<Vec<Dataset>, AugmentError> {
    spec.validate()?;
    let needed_last = spec.increment * (spec.steps - 1);
    if needed_last > spec.ns_pool.len() {
        let step = spec.ns_pool.len() / spec.increment + 1;
        return Err(AugmentError::PoolExhausted {
            step,
            needed: step * spec.increment,
            available: spec.ns_pool.len(),
        });
    }

    let mut ns: Vec<&TweetRecord> = spec.ns_pool.iter().collect();
    ns.shuffle(&mut rng::rng_for(spec.seed, "bias/ns"));

    let mut fixed: Vec<TweetRecord> = spec.base_pool.records().to_vec();
    for pool in &spec.sarcastic_pools {
        fixed.extend(pool.iter().map(merged));
    }

    (0..spec.steps)
        .map(|k| {
            let mut records = fixed.clone();
            records.extend(ns[..k * spec.increment].iter().map(|r| merged(r)));
            records.shuffle(&mut rng::rng_for(spec.seed, &format!("bias/order/{k}")));
            Ok(Dataset::new(format!("B{k}"), spec.base_pool.language, records)?)
        })
        .collect()
}
