use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use super::AugmentError;
use crate::corpus::{CorpusError, Dataset, Language};
use crate::rng;

/// One subtask-C example. `label` is 0 when `text_a` is the sarcastic tweet
/// and 1 when `text_b` is.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub id: String,
    pub text_a: String,
    pub text_b: String,
    pub label: u8,
}

impl PairRecord {
    /// Exchanges the two texts and flips the label.
    pub fn swapped(&self) -> PairRecord {
        PairRecord {
            id: self.id.clone(),
            text_a: self.text_b.clone(),
            text_b: self.text_a.clone(),
            label: 1 - self.label,
        }
    }

    /// Text of the sarcastic member.
    pub fn sarcastic_text(&self) -> &str {
        if self.label == 0 {
            &self.text_a
        } else {
            &self.text_b
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairDataset {
    pub name: String,
    pub language: Language,
    pub pairs: Vec<PairRecord>,
}

impl PairDataset {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Sarcastic tweets in text_a orientation, label 0.
    pub fn from_dataset(ds: &Dataset) -> Result<PairDataset, AugmentError> {
        let pairs = ds
            .iter()
            .map(|r| {
                let reph = r
                    .rephrase
                    .as_ref()
                    .ok_or_else(|| AugmentError::MissingRephrase(r.id.clone()))?;
                Ok(PairRecord {
                    id: r.id.clone(),
                    text_a: r.text.clone(),
                    text_b: reph.clone(),
                    label: 0,
                })
            })
            .collect::<Result<Vec<_>, AugmentError>>()?;
        Ok(PairDataset {
            name: ds.name.clone(),
            language: ds.language,
            pairs,
        })
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), CorpusError> {
        for p in &self.pairs {
            let line = serde_json::to_string(p).map_err(|e| CorpusError::Json {
                line: 0,
                message: e.to_string(),
            })?;
            writeln!(w, "{line}").map_err(|e| CorpusError::Io {
                path: self.name.clone(),
                source: e,
            })?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R, name: &str, language: Language) -> Result<PairDataset, CorpusError> {
        let mut pairs = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| CorpusError::Io {
                path: name.to_string(),
                source: e,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let p: PairRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Json {
                line: i + 1,
                message: e.to_string(),
            })?;
            if p.label > 1 {
                return Err(CorpusError::Json {
                    line: i + 1,
                    message: format!("pair label must be 0 or 1, found {}", p.label),
                });
            }
            pairs.push(p);
        }
        Ok(PairDataset {
            name: name.to_string(),
            language,
            pairs,
        })
    }

    pub fn save_jsonl(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        let path = path.as_ref();
        let io = |e| CorpusError::Io {
            path: path.display().to_string(),
            source: e,
        };
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        self.write_jsonl(&mut f)?;
        f.flush().map_err(io)
    }

    pub fn load_jsonl(path: impl AsRef<Path>, language: Language) -> Result<PairDataset, CorpusError> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| CorpusError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        PairDataset::read_jsonl(std::io::BufReader::new(f), &name, language)
    }
}

/// Swaps the pairs whose mask bit is set.
pub fn apply_swap(pairs: &[PairRecord], mask: &[bool]) -> Vec<PairRecord> {
    assert_eq!(pairs.len(), mask.len(), "mask length must match pair count");
    pairs
        .iter()
        .zip(mask)
        .map(|(p, &swap)| if swap { p.swapped() } else { p.clone() })
        .collect()
}

/// Seeded mask with exactly ⌈n/2⌉ bits set.
pub fn half_swap_mask(n: usize, seed: u64) -> Vec<bool> {
    let mut mask = vec![false; n];
    let mut rng = rng::rng_for(seed, "pair/swap");
    for i in index::sample(&mut rng, n, n.div_ceil(2)) {
        mask[i] = true;
    }
    mask
}

/// Turns each (tweet, rephrase) into a pair, puts the rephrase first for a
/// seeded half of them (label 1) and shuffles the result.
pub fn pair_swap_half(ds: &Dataset, seed: u64) -> Result<PairDataset, AugmentError> {
    let base = PairDataset::from_dataset(ds)?;
    let mask = half_swap_mask(base.len(), seed);
    let mut pairs = apply_swap(&base.pairs, &mask);
    pairs.shuffle(&mut rng::rng_for(seed, "pair/order"));
    Ok(PairDataset {
        name: format!("{}-pairs", ds.name),
        language: ds.language,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Source, TweetRecord};

    fn ds(n: usize) -> Dataset {
        let recs = (0..n)
            .map(|i| {
                TweetRecord::new(format!("p{i}"), format!("sarcastic {i}"), Source::Original)
                    .with_sarcastic(true)
                    .with_rephrase(format!("plain {i}"))
            })
            .collect();
        Dataset::new("c", Language::En, recs).unwrap()
    }

    #[test]
    fn even_and_odd_counts() {
        for (n, swapped) in [(4, 2), (5, 3), (1, 1), (0, 0)] {
            let out = pair_swap_half(&ds(n), 11).unwrap();
            assert_eq!(out.pairs.iter().filter(|p| p.label == 1).count(), swapped);
            for p in &out.pairs {
                assert!(p.sarcastic_text().starts_with("sarcastic"));
            }
        }
    }

    #[test]
    fn missing_rephrase_names_record() {
        let mut recs = ds(2).into_records();
        recs[1].rephrase = None;
        let d = Dataset::new("c", Language::En, recs).unwrap();
        match pair_swap_half(&d, 1) {
            Err(AugmentError::MissingRephrase(id)) => assert_eq!(id, "p1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let out = pair_swap_half(&ds(3), 2).unwrap();
        let mut buf = Vec::new();
        out.write_jsonl(&mut buf).unwrap();
        let back = PairDataset::read_jsonl(buf.as_slice(), &out.name, Language::En).unwrap();
        assert_eq!(back, out);
    }
}
