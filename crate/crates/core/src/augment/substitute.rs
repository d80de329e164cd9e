use std::collections::BTreeSet;

use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::AugmentError;
use crate::corpus::{
    AugmentationMethod, AugmentationProvenance, Dataset, Language, Replacement, Source,
    TweetRecord,
};
use crate::embed::EmbeddingTable;
use crate::preprocess::{Lexicons, URL_TOKEN, USER_TOKEN};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubstitutionConfig {
    pub copies_per_record: usize,
    /// Stop after this many generated records.
    #[serde(default)]
    pub max_generated: Option<usize>,
    #[serde(default)]
    pub also_rephrase: bool,
    pub seed: u64,
}

impl SubstitutionConfig {
    pub const NEIGHBOURS: usize = 3;
    pub const MAX_REPLACEMENTS: usize = 4;
    pub const MIN_KEYWORD_CHARS: usize = 3;

    pub fn new(copies_per_record: usize, seed: u64) -> Self {
        SubstitutionConfig {
            copies_per_record,
            max_generated: None,
            also_rephrase: false,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubstitutionOutcome {
    pub dataset: Dataset,
    pub generated: usize,
    /// Source records without a single eligible keyword.
    pub skipped: usize,
}

/// Byte span of a whitespace token's word core (surrounding punctuation
/// excluded).
#[derive(Debug, Clone)]
struct Keyword {
    position: usize,
    start: usize,
    end: usize,
    neighbours: Vec<String>,
}

fn keywords(text: &str, table: &EmbeddingTable, lex: &Lexicons, language: Language) -> Vec<Keyword> {
    let mut out = Vec::new();
    let mut offset = 0;
    for (pos, token) in text.split_whitespace().enumerate() {
        let tok_start = offset + text[offset..].find(token).unwrap_or(0);
        offset = tok_start + token.len();

        if token.starts_with('#') || token.starts_with('@') || token == URL_TOKEN || token == USER_TOKEN {
            continue;
        }
        let core = token.trim_matches(|c: char| !c.is_alphanumeric());
        if core.chars().count() < SubstitutionConfig::MIN_KEYWORD_CHARS {
            continue;
        }
        let lower = core.to_lowercase();
        if lex.is_stopword(language, &lower) {
            continue;
        }
        let Ok(neighbours) = table.top_k_similar(&lower, SubstitutionConfig::NEIGHBOURS) else {
            continue;
        };
        if neighbours.is_empty() {
            continue;
        }
        let start = tok_start + token.find(core).unwrap_or(0);
        out.push(Keyword {
            position: pos,
            start,
            end: start + core.len(),
            neighbours: neighbours.into_iter().map(|(w, _)| w).collect(),
        });
    }
    out
}

/// Replaces 1..=4 keywords, each by a uniformly chosen member of its top-3
/// neighbours. `None` when the text has no eligible keyword.
fn substitute_text(
    text: &str,
    table: &EmbeddingTable,
    lex: &Lexicons,
    language: Language,
    rng: &mut Rng,
) -> Option<(String, Vec<Replacement>)> {
    let eligible = keywords(text, table, lex, language);
    if eligible.is_empty() {
        return None;
    }
    let count = rng.gen_range(1..=eligible.len().min(SubstitutionConfig::MAX_REPLACEMENTS));
    let mut chosen: Vec<usize> = index::sample(rng, eligible.len(), count).into_vec();
    chosen.sort_unstable();

    let mut out = String::with_capacity(text.len() + 16);
    let mut last = 0;
    let mut replaced = Vec::with_capacity(count);
    for &i in &chosen {
        let kw = &eligible[i];
        let substitute = kw.neighbours.choose(rng).expect("non-empty neighbours").clone();
        out.push_str(&text[last..kw.start]);
        out.push_str(&substitute);
        last = kw.end;
        replaced.push(Replacement {
            position: kw.position,
            original: text[kw.start..kw.end].to_string(),
            substitute,
        });
    }
    out.push_str(&text[last..]);
    Some((out, replaced))
}

/// Builds one substitution copy of `record`; `None` if the tweet text has no
/// eligible keyword.
pub fn substitution_copy(
    record: &TweetRecord,
    copy: usize,
    table: &EmbeddingTable,
    lex: &Lexicons,
    language: Language,
    seed: u64,
    also_rephrase: bool,
) -> Option<TweetRecord> {
    let mut rng = rng::rng_for_record(seed, &format!("substitute/{copy}"), &record.id);
    let (text, replaced) = substitute_text(&record.text, table, lex, language, &mut rng)?;
    let mut out = record.clone();
    out.id = format!("{}~emb{copy}", record.id);
    out.text = text;
    out.source = Source::Augmented;
    let mut rephrase_replaced = Vec::new();
    if also_rephrase {
        if let Some(reph) = &record.rephrase {
            let mut rng = rng::rng_for_record(seed, &format!("substitute-rephrase/{copy}"), &record.id);
            if let Some((t, r)) = substitute_text(reph, table, lex, language, &mut rng) {
                out.rephrase = Some(t);
                rephrase_replaced = r;
            }
        }
    }
    out.provenance = Some(AugmentationProvenance {
        method: AugmentationMethod::EmbeddingSubstitution,
        parent_id: record.id.clone(),
        replaced,
        rephrase_replaced,
    });
    Some(out)
}

/// Appends embedding-substitution copies of every record in `ds`.
///
/// Copies are generated pass by pass (`copy` 0, then 1, ...) over the input
/// order until `copies_per_record` passes are done or `max_generated` is
/// reached. Records without eligible keywords are skipped and counted.
pub fn embedding_substitute(
    ds: &Dataset,
    table: &EmbeddingTable,
    lex: &Lexicons,
    cfg: &SubstitutionConfig,
) -> Result<SubstitutionOutcome, AugmentError> {
    if ds.is_empty() {
        return Err(AugmentError::EmptyInput);
    }
    let cap = cfg.max_generated.unwrap_or(usize::MAX);
    let mut generated = Vec::new();
    let mut skipped = BTreeSet::new();
    'passes: for copy in 0..cfg.copies_per_record {
        for rec in ds {
            if generated.len() >= cap {
                break 'passes;
            }
            match substitution_copy(rec, copy, table, lex, ds.language, cfg.seed, cfg.also_rephrase) {
                Some(r) => generated.push(r),
                None => {
                    skipped.insert(rec.id.as_str());
                }
            }
        }
    }
    let n = generated.len();
    let mut records = ds.records().to_vec();
    records.extend(generated);
    Ok(SubstitutionOutcome {
        dataset: Dataset::new(format!("{}-embedding", ds.name), ds.language, records)?,
        generated: n,
        skipped: skipped.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> EmbeddingTable {
        EmbeddingTable::from_pairs([
            ("good", vec![1.0, 0.1, 0.0]),
            ("great", vec![0.9, 0.2, 0.0]),
            ("fine", vec![0.8, 0.3, 0.1]),
            ("nice", vec![0.7, 0.1, 0.2]),
            ("morning", vec![0.0, 1.0, 0.1]),
            ("evening", vec![0.1, 0.9, 0.0]),
            ("night", vec![0.0, 0.8, 0.3]),
            ("world", vec![0.0, 0.1, 1.0]),
            ("earth", vec![0.1, 0.0, 0.9]),
            ("planet", vec![0.2, 0.1, 0.8]),
        ])
        .unwrap()
    }

    fn ds(texts: &[&str]) -> Dataset {
        let recs = texts
            .iter()
            .enumerate()
            .map(|(i, t)| TweetRecord::new(format!("r{i}"), *t, Source::Original).with_sarcastic(true))
            .collect();
        Dataset::new("d", Language::En, recs).unwrap()
    }

    #[test]
    fn all_oov_record_is_skipped() {
        let out = embedding_substitute(&ds(&["zzz qqq"]), &table(), &Lexicons::builtin(), &SubstitutionConfig::new(1, 1)).unwrap();
        assert_eq!(out.skipped, 1);
        assert_eq!(out.generated, 0);
        assert_eq!(out.dataset.len(), 1);
    }

    #[test]
    fn substitutes_come_from_top_three() {
        let t = table();
        let out = embedding_substitute(&ds(&["Good morning world!"]), &t, &Lexicons::builtin(), &SubstitutionConfig::new(20, 5)).unwrap();
        assert_eq!(out.generated, 20);
        for r in &out.dataset.records()[1..] {
            let p = r.provenance.as_ref().unwrap();
            assert!((1..=3).contains(&p.replaced.len()));
            for rep in &p.replaced {
                let top: Vec<String> = t.top_k_similar(&rep.original.to_lowercase(), 3).unwrap().into_iter().map(|x| x.0).collect();
                assert!(top.contains(&rep.substitute), "{rep:?}");
            }
            assert!(r.text.ends_with('!'));
            assert_eq!(r.sarcastic, Some(true));
        }
    }

    #[test]
    fn cap_limits_generation() {
        let cfg = SubstitutionConfig {
            max_generated: Some(3),
            ..SubstitutionConfig::new(2, 1)
        };
        let out = embedding_substitute(&ds(&["good world", "nice night"]), &table(), &Lexicons::builtin(), &cfg).unwrap();
        assert_eq!(out.generated, 3);
        let ids: Vec<_> = out.dataset.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, vec!["r0", "r1", "r0~emb0", "r1~emb0", "r0~emb1"]);
    }

    #[test]
    fn stopwords_hashtags_and_short_words_are_ineligible() {
        let t = EmbeddingTable::from_pairs([
            ("the", vec![1.0, 0.0]),
            ("a", vec![1.0, 0.1]),
            ("#good", vec![0.9, 0.1]),
            ("ok", vec![0.8, 0.2]),
        ])
        .unwrap();
        assert!(keywords("the #good ok a", &t, &Lexicons::builtin(), Language::En).is_empty());
    }

    #[test]
    fn rephrase_substituted_independently() {
        let mut d = ds(&["good morning"]).into_records();
        d[0].rephrase = Some("bad evening".into());
        let d = Dataset::new("d", Language::En, d).unwrap();
        let cfg = SubstitutionConfig {
            also_rephrase: true,
            ..SubstitutionConfig::new(1, 3)
        };
        let out = embedding_substitute(&d, &table(), &Lexicons::builtin(), &cfg).unwrap();
        let copy = &out.dataset.records()[1];
        assert_ne!(copy.rephrase.as_deref(), Some("bad evening"));
        assert_eq!(copy.provenance.as_ref().unwrap().rephrase_replaced.len(), 1);
    }
}
