use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sarcasm_core::model::{cross_entropy, multilabel_bce, weighted_cross_entropy, ClassWeights};

fn random_batch(rng: &mut ChaCha8Rng) -> (Vec<[f64; 2]>, Vec<usize>) {
    let n = rng.gen_range(1..64);
    let probs = (0..n)
        .map(|_| {
            let p = rng.gen_range(1e-6..1.0 - 1e-6);
            [1.0 - p, p]
        })
        .collect();
    let targets = (0..n).map(|_| rng.gen_range(0..2)).collect();
    (probs, targets)
}

#[test]
fn weighted_ce_with_equal_counts_is_plain_ce() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let (probs, targets) = random_batch(&mut rng);
        let c = rng.gen_range(1..10_000);
        let w = ClassWeights::from_counts(c, c).unwrap();
        let plain = cross_entropy(&probs, &targets);
        let oracle = probs.iter().zip(&targets).map(|(p, &t)| -p[t].ln()).sum::<f64>() / probs.len() as f64;
        assert!((weighted_cross_entropy(&probs, &targets, &w) - plain).abs() < 1e-10);
        assert!((plain - oracle).abs() < 1e-10);
    }
}

#[test]
fn bce_at_one_half_is_ln_two() {
    for bits in 0..64u32 {
        let target: [bool; 6] = std::array::from_fn(|i| bits >> i & 1 == 1);
        assert!((multilabel_bce(&[0.5; 6], &target) - std::f64::consts::LN_2).abs() <= 1e-12);
    }
}

proptest! {
    #[test]
    fn weighted_ce_is_a_weighted_mean(seed in any::<u64>(), ns in 1usize..500, s in 1usize..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (probs, targets) = random_batch(&mut rng);
        let w = ClassWeights::from_counts(ns, s).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for (p, &t) in probs.iter().zip(&targets) {
            num += w.weight(t) * -p[t].ln();
            den += w.weight(t);
        }
        prop_assert!((weighted_cross_entropy(&probs, &targets, &w) - num / den).abs() < 1e-10);
    }
}
