use serde::{Deserialize, Serialize};

use super::layers::{sigmoid_scalar, softmax};
use super::ModelError;

/// Probabilities are clamped into `[PROB_EPS, 1 - PROB_EPS]` before taking
/// logs.
pub const PROB_EPS: f64 = 1e-12;

fn clamped_ln(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS).ln()
}

/// Per-class weights for the binary loss, index 0 non-sarcastic and index 1
/// sarcastic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights(pub [f64; 2]);

impl ClassWeights {
    pub fn uniform() -> Self {
        ClassWeights([1.0, 1.0])
    }

    /// `w_NS = 1/#NS`, `w_S = 1/#S`.
    pub fn from_counts(non_sarcastic: usize, sarcastic: usize) -> Result<Self, ModelError> {
        if non_sarcastic == 0 || sarcastic == 0 {
            return Err(ModelError::ZeroClassCount);
        }
        Ok(ClassWeights([1.0 / non_sarcastic as f64, 1.0 / sarcastic as f64]))
    }

    pub fn weight(&self, class: usize) -> f64 {
        self.0[class]
    }
}

/// Mean `-ln p_target` over the batch.
pub fn cross_entropy(probs: &[[f64; 2]], targets: &[usize]) -> f64 {
    weighted_cross_entropy(probs, targets, &ClassWeights::uniform())
}

/// `sum w (-ln p) / sum w` over the batch.
pub fn weighted_cross_entropy(probs: &[[f64; 2]], targets: &[usize], weights: &ClassWeights) -> f64 {
    assert_eq!(probs.len(), targets.len(), "one target per sample");
    let mut num = 0.0;
    let mut den = 0.0;
    for (p, &t) in probs.iter().zip(targets) {
        let w = weights.weight(t);
        num += w * -clamped_ln(p[t]);
        den += w;
    }
    num / den
}

/// Mean binary cross-entropy over the six labels.
pub fn multilabel_bce(probs: &[f64; 6], target: &[bool; 6]) -> f64 {
    probs
        .iter()
        .zip(target)
        .map(|(&p, &y)| if y { -clamped_ln(p) } else { -clamped_ln(1.0 - p) })
        .sum::<f64>()
        / 6.0
}

/// `-ln softmax(z)[target]` scaled by `scale`, and its gradient in `z`.
pub(crate) fn softmax_ce_from_logits(z: &[f64], target: usize, scale: f64) -> (f64, Vec<f64>) {
    let p = softmax(z);
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    let loss = scale * (lse - z[target]);
    let grad = p
        .iter()
        .enumerate()
        .map(|(j, &pj)| scale * (pj - if j == target { 1.0 } else { 0.0 }))
        .collect();
    (loss, grad)
}

/// Mean sigmoid BCE over labels, from logits, scaled by `scale`.
pub(crate) fn sigmoid_bce_from_logits(z: &[f64], target: &[bool; 6], scale: f64) -> (f64, Vec<f64>) {
    let n = z.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(z.len());
    for (&zj, &y) in z.iter().zip(target) {
        let y = if y { 1.0 } else { 0.0 };
        // softplus(z) - y z
        loss += zj.max(0.0) + (-zj.abs()).exp().ln_1p() - y * zj;
        grad.push(scale * (sigmoid_scalar(zj) - y) / n);
    }
    (scale * loss / n, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn table_five_weights() {
        let w = ClassWeights::from_counts(100, 25).unwrap();
        assert_abs_diff_eq!(w.0[0], 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(w.0[1], 0.04, epsilon = 1e-15);
        assert!(ClassWeights::from_counts(0, 3).is_err());
    }

    #[test]
    fn single_sample_is_weight_free() {
        let w = ClassWeights::from_counts(75, 25).unwrap();
        assert_abs_diff_eq!(weighted_cross_entropy(&[[0.5, 0.5]], &[1], &w), 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn bce_limits() {
        assert_abs_diff_eq!(multilabel_bce(&[0.5; 6], &[true, false, true, false, false, true]), 2f64.ln(), epsilon = 1e-12);
        let y = [true, false, false, true, false, false];
        let p = y.map(|b| if b { 1.0 } else { 0.0 });
        assert!(multilabel_bce(&p, &y) < 1e-11);
    }

    #[test]
    fn logit_forms_agree_with_probability_forms() {
        let z = [0.3, -1.2];
        let (l, _) = softmax_ce_from_logits(&z, 1, 1.0);
        let p = softmax(&z);
        assert_abs_diff_eq!(l, cross_entropy(&[[p[0], p[1]]], &[1]), epsilon = 1e-12);
        let z6 = [0.1, -0.4, 2.0, -3.0, 0.0, 0.7];
        let y = [true, false, true, false, true, false];
        let (l, _) = sigmoid_bce_from_logits(&z6, &y, 1.0);
        let p: Vec<f64> = z6.iter().map(|&v| sigmoid_scalar(v)).collect();
        assert_abs_diff_eq!(l, multilabel_bce(&p.try_into().unwrap(), &y), epsilon = 1e-12);
    }
}
