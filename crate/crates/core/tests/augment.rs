use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sarcasm_core::augment::*;
use sarcasm_core::corpus::{AugmentationMethod, Dataset, Label, LabelVector, Language, Source, TweetRecord};
use sarcasm_core::synthetic::{ext_nb_like, BiasPlan};

const TABLE3_TOTALS: [usize; 10] = [4578, 4723, 4868, 5013, 5158, 5303, 5448, 5593, 5738, 5883];
const TABLE3_S_PCT: [u32; 10] = [66, 64, 62, 60, 59, 57, 55, 54, 53, 51];
const TABLE8_TOTALS: [usize; 10] = [4850, 5052, 5254, 5456, 5658, 5860, 6062, 6264, 6466, 6668];

fn ids(ds: &Dataset) -> BTreeSet<String> {
    ds.iter().map(|r| r.id.clone()).collect()
}

fn s_pct(ds: &Dataset) -> f64 {
    100.0 * ds.sarcastic_count() as f64 / ds.len() as f64
}

#[test]
fn english_schedule_tracks_table_3() {
    let bs = build_bias_schedule(&BiasPlan::english().schedule(7).unwrap()).unwrap();
    assert_eq!(bs.len(), 10);
    let mut pct_hits = 0;
    for (k, b) in bs.iter().enumerate() {
        assert_eq!(b.len(), 4588 + 145 * k);
        assert!(b.len().abs_diff(TABLE3_TOTALS[k]) <= 15, "B{k}: {}", b.len());
        if s_pct(b).round() as u32 == TABLE3_S_PCT[k] {
            pct_hits += 1;
        }
    }
    assert!(pct_hits >= 8, "{pct_hits}/10 S% matches");
}

#[test]
fn arabic_schedule_tracks_table_8() {
    let bs = build_bias_schedule(&BiasPlan::arabic().schedule(7).unwrap()).unwrap();
    for (k, b) in bs.iter().enumerate() {
        assert_eq!(b.len(), 4853 + 202 * k);
        assert!(b.len().abs_diff(TABLE8_TOTALS[k]) <= 15, "B{k}: {}", b.len());
    }
}

#[test]
fn schedules_nest_and_dilute() {
    for plan in [BiasPlan::english(), BiasPlan::arabic()] {
        let bs = build_bias_schedule(&plan.schedule(3).unwrap()).unwrap();
        for w in bs.windows(2) {
            let (a, b) = (ids(&w[0]), ids(&w[1]));
            assert!(a.is_subset(&b));
            assert_eq!(b.len() - a.len(), plan.increment);
            assert!(s_pct(&w[1]) <= s_pct(&w[0]));
        }
        let again = build_bias_schedule(&plan.schedule(3).unwrap()).unwrap();
        assert_eq!(bs, again);
    }
}

#[test]
fn exhausted_pool_names_the_step() {
    let mut spec = BiasPlan::english().schedule(1).unwrap();
    spec.steps = 20;
    match build_bias_schedule(&spec) {
        Err(AugmentError::PoolExhausted { step, .. }) => assert_eq!(step, 14),
        other => panic!("{other:?}"),
    }
}

/// `(p, q)` with `k = p / q` for each formula.
fn coefficient_fraction(label: Label) -> (u128, u128) {
    match label {
        Label::Irony => (1, 1),
        Label::Satire => (2, 1),
        Label::Understatement => (3, 1),
        Label::Overstatement => (3, 2),
        Label::RhetoricalQuestion => (6, 5),
        Label::Sarcasm => unreachable!(),
    }
}

/// Exact `round(s * (1 + k / sqrt(c)))`, clamped below by `c`, in integer
/// arithmetic: `s*k/sqrt(c) >= m - 1/2` iff `4 s^2 p^2 >= (2m - 1)^2 q^2 c`.
fn exact_target(s: u128, c: u128, label: Label) -> usize {
    let (p, q) = coefficient_fraction(label);
    let reaches = |m: u128| 4 * s * s * p * p >= (2 * m - 1) * (2 * m - 1) * q * q * c;
    let mut m = 0;
    while reaches(m + 1) {
        m += 1;
    }
    ((s + m) as usize).max(c as usize)
}

#[test]
fn heuristic_targets_match_exact_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let s = rng.gen_range(1..3000usize);
        let counts: [usize; 6] = std::array::from_fn(|_| rng.gen_range(1..3000));
        let t = heuristic_targets(&counts, s).unwrap();
        for l in &Label::ALL[1..] {
            assert_eq!(t.get(*l).unwrap(), exact_target(s as u128, counts[l.index()] as u128, *l), "s={s} {counts:?} {l:?}");
        }
    }
    let t = heuristic_targets(&[672, 268, 4, 9, 100, 100], 672).unwrap();
    assert_eq!(t.irony, 713);
    let t = heuristic_targets(&[100, 1, 4, 9, 1, 1], 100).unwrap();
    assert_eq!((t.satire, t.understatement), (200, 200));
    assert!(matches!(
        heuristic_targets(&[5, 0, 1, 1, 1, 1], 5),
        Err(AugmentError::ZeroInstances(Label::Irony))
    ));
}

proptest! {
    #[test]
    fn doubling_sarcasm_doubles_targets(s in 1usize..2000, counts in prop::array::uniform6(1usize..2000)) {
        let one = heuristic_targets(&counts, s).unwrap();
        let two = heuristic_targets(&counts, 2 * s).unwrap();
        for l in &Label::ALL[1..] {
            let (a, b) = (one.get(*l).unwrap(), two.get(*l).unwrap());
            prop_assert!(a >= counts[l.index()]);
            // Only unclamped targets scale.
            let k = HeuristicTargets::coefficient(*l).unwrap();
            if (s as f64) * (1.0 + k / (counts[l.index()] as f64).sqrt()) >= counts[l.index()] as f64 + 1.0 {
                prop_assert!(b.abs_diff(2 * a) <= 1, "{} {}", a, b);
            }
        }
    }
}

fn shares(ds: &Dataset) -> [f64; 6] {
    let c = ds.label_counts();
    let total: usize = c.iter().sum();
    c.map(|x| 100.0 * x as f64 / total as f64)
}

#[test]
fn uniform_label_balancing_on_ext_nb() {
    let ds = ext_nb_like(5);
    let out = balance_by_repetition(&ds, BalanceKey::Labels, 5).unwrap();
    assert!(out.len().abs_diff(4336) <= 10, "{}", out.len());
    for s in shares(&out) {
        assert!((s - 100.0 / 6.0).abs() <= 0.5, "{:?}", shares(&out));
    }
    for r in out.iter().skip(ds.len()) {
        assert_eq!(r.provenance.as_ref().unwrap().method, AugmentationMethod::Repetition);
    }
}

#[test]
fn heuristic_balancing_on_ext_nb() {
    let ds = ext_nb_like(5);
    let counts = ds.label_counts();
    let targets = heuristic_targets(&counts, counts[0]).unwrap();
    let out = balance_by_heuristic(&ds, &targets, 5).unwrap();
    assert!(out.len().abs_diff(5314) <= 20, "{}", out.len());
    let after = out.label_counts();
    for l in &Label::ALL[1..] {
        assert!(after[l.index()] >= targets.get(*l).unwrap());
    }
}

fn single_label(counts: [usize; 6]) -> Dataset {
    let mut recs = Vec::new();
    for l in Label::ALL {
        for i in 0..counts[l.index()] {
            recs.push(
                TweetRecord::new(format!("{l:?}{i}"), format!("t {i}"), Source::Original)
                    .with_sarcastic(true)
                    .with_labels(LabelVector::from_labels(&[l])),
            );
        }
    }
    Dataset::new("single", Language::En, recs).unwrap()
}

#[test]
fn heuristic_doubling_on_single_label_set() {
    let counts = [10, 4, 3, 2, 5, 1];
    let ds = single_label(counts);
    let targets = HeuristicTargets {
        irony: 8,
        satire: 6,
        understatement: 4,
        overstatement: 10,
        rhetorical_question: 2,
    };
    let out = balance_by_heuristic(&ds, &targets, 1).unwrap();
    assert_eq!(out.label_counts(), [10, 8, 6, 4, 10, 2]);
    let same = HeuristicTargets {
        irony: 4,
        satire: 3,
        understatement: 2,
        overstatement: 5,
        rhetorical_question: 1,
    };
    assert_eq!(balance_by_heuristic(&ds, &same, 1).unwrap().records(), ds.records());
}

#[test]
fn label_with_no_instances_is_an_error() {
    let ds = single_label([3, 1, 0, 1, 1, 1]);
    assert!(matches!(
        balance_by_repetition(&ds, BalanceKey::Labels, 1),
        Err(AugmentError::ZeroInstances(Label::Satire))
    ));
}

fn binary(s: usize, ns: usize) -> Dataset {
    let recs = (0..s + ns)
        .map(|i| TweetRecord::new(format!("b{i}"), format!("x {i}"), Source::Original).with_sarcastic(i < s))
        .collect();
    Dataset::new("bin", Language::En, recs).unwrap()
}

#[test]
fn class_balancing_examples() {
    let out = balance_by_repetition(&binary(3, 9), BalanceKey::SarcasticClass, 2).unwrap();
    assert_eq!((out.sarcastic_count(), out.len() - out.sarcastic_count()), (9, 9));
    let even = binary(5, 5);
    assert_eq!(balance_by_repetition(&even, BalanceKey::SarcasticClass, 2).unwrap().records(), even.records());
}

proptest! {
    #[test]
    fn class_balance_within_one(s in 1usize..60, ns in 1usize..60, seed in any::<u64>()) {
        let ds = binary(s, ns);
        let out = balance_by_repetition(&ds, BalanceKey::SarcasticClass, seed).unwrap();
        let sc = out.sarcastic_count();
        prop_assert!(sc.abs_diff(out.len() - sc) <= 1);
        prop_assert_eq!(&out.records()[..ds.len()], ds.records());
        for r in out.iter().skip(ds.len()) {
            let p = r.provenance.as_ref().unwrap();
            prop_assert_eq!(p.method, AugmentationMethod::Repetition);
            let parent = ds.iter().find(|x| x.id == p.parent_id).unwrap();
            prop_assert_eq!(&parent.text, &r.text);
        }
    }
}

fn rephrased(n: usize) -> Dataset {
    let recs = (0..n)
        .map(|i| {
            TweetRecord::new(format!("c{i}"), format!("sarcastic {i}"), Source::Original)
                .with_sarcastic(true)
                .with_rephrase(format!("plain {i}"))
        })
        .collect();
    Dataset::new("c", Language::En, recs).unwrap()
}

fn unordered_pairs(texts: impl Iterator<Item = (String, String)>) -> BTreeMap<(String, String), usize> {
    let mut m = BTreeMap::new();
    for (a, b) in texts {
        let key = if a <= b { (a, b) } else { (b, a) };
        *m.entry(key).or_default() += 1;
    }
    m
}

fn check_pair_swap(n: usize, seed: u64) -> Result<(), String> {
    let ds = rephrased(n);
    let out = pair_swap_half(&ds, seed).map_err(|e| e.to_string())?;
    let swapped = out.pairs.iter().filter(|p| p.label == 1).count();
    if out.len() != n || swapped != n.div_ceil(2) {
        return Err(format!("n={n}: {swapped} swapped"));
    }
    let tweets: BTreeSet<&str> = ds.iter().map(|r| r.text.as_str()).collect();
    for p in &out.pairs {
        let sarcastic_first = tweets.contains(p.text_a.as_str());
        if sarcastic_first != (p.label == 0) || p.sarcastic_text() != if sarcastic_first { &p.text_a } else { &p.text_b } {
            return Err(format!("inconsistent label on {p:?}"));
        }
    }
    let before = unordered_pairs(ds.iter().map(|r| (r.text.clone(), r.rephrase.clone().unwrap())));
    let after = unordered_pairs(out.pairs.iter().map(|p| (p.text_a.clone(), p.text_b.clone())));
    if before != after {
        return Err("pair multiset changed".into());
    }
    Ok(())
}

#[test]
fn pair_swap_for_one_to_twenty() {
    for n in 1..=20 {
        check_pair_swap(n, 13).unwrap();
    }
}

proptest! {
    #[test]
    fn pair_swap_any_seed(n in 1usize..40, seed in any::<u64>()) {
        prop_assert!(check_pair_swap(n, seed).is_ok());
    }

    #[test]
    fn complementary_masks_restore_orientation(n in 1usize..30, seed in any::<u64>()) {
        let base = PairDataset::from_dataset(&rephrased(n)).unwrap();
        let mask = half_swap_mask(n, seed);
        let inverse: Vec<bool> = mask.iter().map(|b| !b).collect();
        let all_swapped = apply_swap(&apply_swap(&base.pairs, &mask), &inverse);
        let restored: Vec<PairRecord> = all_swapped.iter().map(PairRecord::swapped).collect();
        prop_assert_eq!(restored, base.pairs.clone());
        prop_assert_eq!(apply_swap(&apply_swap(&base.pairs, &mask), &mask), base.pairs);
    }
}

#[test]
fn missing_rephrase_names_record() {
    let ds = Dataset::new("c", Language::En, vec![TweetRecord::new("bare", "x", Source::Original).with_sarcastic(true)]).unwrap();
    match pair_swap_half(&ds, 1) {
        Err(AugmentError::MissingRephrase(id)) => assert_eq!(id, "bare"),
        other => panic!("{other:?}"),
    }
}
