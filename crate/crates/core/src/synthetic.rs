//! Desk-scale stand-ins for the shared-task corpora: pools with the published
//! sizes and class ratios, an Ext-NB-shaped multi-label set and a separable
//! toy corpus.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::augment::BiasSchedule;
use crate::corpus::{
    split_train_val, CorpusError, Dataset, Label, LabelVector, Language, Source, SplitSpec, Stratify, TweetRecord,
};
use crate::rng;

/// Sarcastic count of a pool given its size and sarcastic percentage,
/// rounded to the nearest record.
pub fn sarcastic_count(total: usize, percent: f64) -> usize {
    (total as f64 * percent / 100.0).round() as usize
}

fn pool(name: &str, language: Language, sarcastic: usize, non_sarcastic: usize) -> Dataset {
    let records = (0..sarcastic + non_sarcastic)
        .map(|i| {
            TweetRecord::new(format!("{name}:{i}"), format!("{name} tweet {i}"), Source::Original)
                .with_sarcastic(i < sarcastic)
        })
        .collect();
    Dataset::new(name, language, records).expect("generated ids are unique")
}

/// Pool sizes behind the B0..B9 schedules.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasPlan {
    pub language: Language,
    /// Original train release: size and sarcastic percentage.
    pub original: (usize, f64),
    pub train_fraction: f64,
    /// External sarcastic-only pools: name and sarcastic count.
    pub sarcastic_pools: Vec<(String, usize)>,
    pub ns_pool: usize,
    pub increment: usize,
    pub steps: usize,
}

impl BiasPlan {
    /// Original 3468 @ 25% (60% train split), Twitter-API train 2841 and test
    /// 713 @ 16.8% sarcastic, SemEval-2018 3834 with 1911 sarcastic; 145 NS
    /// per step.
    pub fn english() -> Self {
        BiasPlan {
            language: Language::En,
            original: (3468, 25.0),
            train_fraction: 0.6,
            sarcastic_pools: vec![
                ("twitter-api-train".into(), sarcastic_count(2841, 16.8)),
                ("twitter-api-test".into(), sarcastic_count(713, 16.8)),
                ("semeval-2018-train".into(), 1911),
            ],
            ns_pool: 3834 - 1911,
            increment: 145,
            steps: 10,
        }
    }

    /// Original 3102 @ 24% (60% train split), ArSarcasm-v2 train 12548 @
    /// 17.3% and test with 821 sarcastic; non-sarcastic pool from the
    /// ArSarcasm-v2 train release; 202 NS per step.
    pub fn arabic() -> Self {
        let arsarcasm_s = sarcastic_count(12548, 17.3);
        BiasPlan {
            language: Language::Ar,
            original: (3102, 24.0),
            train_fraction: 0.6,
            sarcastic_pools: vec![
                ("arsarcasm-v2-train".into(), arsarcasm_s),
                ("arsarcasm-v2-test".into(), 821),
            ],
            ns_pool: 12548 - arsarcasm_s,
            increment: 202,
            steps: 10,
        }
    }

    /// Synthetic pools of the planned sizes, with the base pool taken as the
    /// stratified train split of the original release.
    pub fn schedule(&self, seed: u64) -> Result<BiasSchedule, CorpusError> {
        let (n, pct) = self.original;
        let s = sarcastic_count(n, pct);
        let original = pool("original", self.language, s, n - s);
        let (base_pool, _) = split_train_val(&original, &SplitSpec::new(self.train_fraction, Stratify::Sarcastic, seed))?;
        Ok(BiasSchedule {
            base_pool,
            sarcastic_pools: self
                .sarcastic_pools
                .iter()
                .map(|(name, count)| pool(name, self.language, *count, 0))
                .collect(),
            ns_pool: pool("ns", self.language, 0, self.ns_pool),
            increment: self.increment,
            steps: self.steps,
            seed,
        })
    }
}

/// Label-occurrence counts of the Ext-NB-like set, indexed by
/// [`Label::index`].
pub const EXT_NB_LABEL_COUNTS: [usize; 6] = [744, 297, 85, 16, 73, 116];
/// Records tagged with both sarcasm and irony.
pub const EXT_NB_SARCASM_IRONY: usize = 128;

/// 1203 sarcastic records whose 1331 label occurrences reproduce the Ext-NB
/// shares (55.9 / 22.3 / 6.4 / 1.2 / 5.5 / 8.7 %).
pub fn ext_nb_like(seed: u64) -> Dataset {
    let mut vectors = vec![LabelVector::from_labels(&[Label::Sarcasm, Label::Irony]); EXT_NB_SARCASM_IRONY];
    for l in Label::ALL {
        let mut single = EXT_NB_LABEL_COUNTS[l.index()];
        if matches!(l, Label::Sarcasm | Label::Irony) {
            single -= EXT_NB_SARCASM_IRONY;
        }
        vectors.extend(std::iter::repeat_n(LabelVector::from_labels(&[l]), single));
    }
    vectors.shuffle(&mut rng::rng_for(seed, "synthetic/ext-nb"));
    let records = vectors
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            TweetRecord::new(format!("ext-nb:{i}"), format!("labelled tweet {i}"), Source::Original)
                .with_sarcastic(true)
                .with_labels(v)
        })
        .collect();
    Dataset::new("ext-nb", Language::En, records).expect("generated ids are unique")
}

const SARCASTIC_CUES: [&str; 12] = [
    "yeah", "totally", "love", "wonderful", "obviously", "brilliant", "fantastic", "sure", "genius", "perfect", "thrilled",
    "amazing",
];
const NEUTRAL_CUES: [&str; 12] = [
    "meeting", "report", "schedule", "weather", "station", "delivery", "invoice", "library", "garden", "update", "recipe",
    "museum",
];
const FILLER: [&str; 16] = [
    "the", "today", "again", "this", "morning", "traffic", "work", "monday", "phone", "coffee", "team", "week", "city",
    "bus", "email", "lunch",
];

/// Toy corpus where each sarcastic tweet holds two sarcastic cue words and
/// each non-sarcastic one two neutral cue words, mixed with shared filler.
/// Sarcastic tweets also carry a rephrase and one label (sarcasm for half of
/// them, the other five labels spread over the rest).
pub fn separable_corpus(n: usize, sarcastic_fraction: f64, seed: u64) -> Dataset {
    let mut rng = rng::rng_for(seed, "synthetic/separable");
    let n_s = (n as f64 * sarcastic_fraction).round() as usize;
    let mut flags: Vec<bool> = (0..n).map(|i| i < n_s).collect();
    flags.shuffle(&mut rng);
    let mut records = Vec::with_capacity(n);
    for (i, sarcastic) in flags.into_iter().enumerate() {
        let cues = if sarcastic { &SARCASTIC_CUES } else { &NEUTRAL_CUES };
        let mut words: Vec<&str> = cues.choose_multiple(&mut rng, 2).copied().collect();
        let fill = rng.gen_range(2..=5);
        words.extend(FILLER.choose_multiple(&mut rng, fill).copied());
        words.shuffle(&mut rng);
        let mut rec = TweetRecord::new(format!("toy:{i}"), words.join(" "), Source::Original).with_sarcastic(sarcastic);
        if sarcastic {
            let plain: Vec<&str> = NEUTRAL_CUES.choose_multiple(&mut rng, 2).copied().collect();
            rec = rec.with_rephrase(format!("the {} was {} {}", FILLER[i % FILLER.len()], plain[0], plain[1]));
            let label = if rng.gen_bool(0.5) {
                Label::Sarcasm
            } else {
                Label::ALL[rng.gen_range(1..6)]
            };
            rec = rec.with_labels(LabelVector::from_labels(&[label]));
        }
        records.push(rec);
    }
    Dataset::new("toy", Language::En, records).expect("generated ids are unique")
}
