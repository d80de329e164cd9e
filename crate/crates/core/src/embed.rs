//! Word vectors with exact cosine nearest-neighbour queries.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::GzDecoder;
use log::warn;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("`{0}` is not in the vocabulary")]
    OutOfVocabulary(String),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("embedding table is empty")]
    Empty,
}

/// Immutable vocabulary -> vector table.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f64>,
    norms: Vec<f64>,
    /// Lines skipped because the word was already present.
    pub duplicates: usize,
}

impl EmbeddingTable {
    /// Builds a table from `(word, vector)` pairs; later duplicates are
    /// dropped and counted.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self, EmbedError>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut table: Option<EmbeddingTable> = None;
        for (i, (word, v)) in pairs.into_iter().enumerate() {
            let t = table.get_or_insert_with(|| EmbeddingTable::with_dim(v.len()));
            t.push(word.into(), v, i + 1)?;
        }
        table.ok_or(EmbedError::Empty)
    }

    fn with_dim(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            vectors: Vec::new(),
            norms: Vec::new(),
            duplicates: 0,
        }
    }

    fn push(&mut self, word: String, v: Vec<f64>, line: usize) -> Result<(), EmbedError> {
        if v.len() != self.dim || v.is_empty() {
            return Err(EmbedError::Format {
                line,
                message: format!("expected {} components, found {}", self.dim, v.len()),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(EmbedError::Format {
                line,
                message: "non-finite component".into(),
            });
        }
        if self.index.contains_key(&word) {
            self.duplicates += 1;
            return Ok(());
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.norms.push(v.iter().map(|x| x * x).sum::<f64>().sqrt());
        self.vectors.extend(v);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// Cosine similarity between two vocabulary words; `None` if either is
    /// missing or has zero norm.
    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let (&i, &j) = (self.index.get(a)?, self.index.get(b)?);
        self.cosine_rows(i, j)
    }

    fn cosine_rows(&self, i: usize, j: usize) -> Option<f64> {
        let denom = self.norms[i] * self.norms[j];
        if denom == 0.0 {
            return None;
        }
        let dot: f64 = self.row(i).iter().zip(self.row(j)).map(|(x, y)| x * y).sum();
        Some((dot / denom).clamp(-1.0, 1.0))
    }

    /// The `k` most cosine-similar words to `word`, excluding itself and any
    /// zero-norm word. Ties are ordered by ascending word.
    pub fn top_k_similar(&self, word: &str, k: usize) -> Result<Vec<(String, f64)>, EmbedError> {
        if k == 0 {
            return Err(EmbedError::ZeroK);
        }
        let &q = self
            .index
            .get(word)
            .ok_or_else(|| EmbedError::OutOfVocabulary(word.to_string()))?;
        let mut scored: Vec<(usize, f64)> = (0..self.words.len())
            .filter(|&i| i != q)
            .filter_map(|i| self.cosine_rows(q, i).map(|s| (i, s)))
            .collect();
        let cmp = |a: &(usize, f64), b: &(usize, f64)| -> Ordering {
            b.1.total_cmp(&a.1)
                .then_with(|| self.words[a.0].cmp(&self.words[b.0]))
        };
        if scored.len() > k {
            scored.select_nth_unstable_by(k - 1, cmp);
            scored.truncate(k);
        }
        scored.sort_by(cmp);
        Ok(scored
            .into_iter()
            .map(|(i, s)| (self.words[i].clone(), s))
            .collect())
    }

    /// Parses the whitespace-separated text format, one `word v1 .. vd` per
    /// line. A leading `count dim` header line is accepted and skipped.
    pub fn read<R: Read>(reader: R, expected_dim: Option<usize>) -> Result<Self, EmbedError> {
        let mut table: Option<EmbeddingTable> = None;
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| EmbedError::Format {
                line: line_no,
                message: e.to_string(),
            })?;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let rest: Vec<&str> = fields.collect();
            if line_no == 1 && rest.len() == 1 && word.parse::<usize>().is_ok() && rest[0].parse::<usize>().is_ok() {
                continue;
            }
            let v = rest
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| EmbedError::Format {
                    line: line_no,
                    message: format!("unparseable component: {e}"),
                })?;
            let dim = expected_dim.unwrap_or(v.len());
            let t = table.get_or_insert_with(|| EmbeddingTable::with_dim(dim));
            t.push(word.to_string(), v, line_no)?;
        }
        let table = table.ok_or(EmbedError::Empty)?;
        if table.duplicates > 0 {
            warn!("skipped {} duplicate words", table.duplicates);
        }
        Ok(table)
    }
}

/// Loads a vector file, decompressing `.gz` files transparently.
pub fn load_vectors(path: impl AsRef<Path>, expected_dim: Option<usize>) -> Result<EmbeddingTable, EmbedError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| EmbedError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    if path.extension().is_some_and(|e| e == "gz") {
        EmbeddingTable::read(GzDecoder::new(file), expected_dim)
    } else {
        EmbeddingTable::read(file, expected_dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parses_text_format() {
        let t = EmbeddingTable::read("a 1 0 0 0\nb 0 1 0 0\nc 0 0 1 0\n".as_bytes(), None).unwrap();
        assert_eq!((t.len(), t.dim()), (3, 4));
    }

    #[test]
    fn malformed_line_names_its_number() {
        let err = EmbeddingTable::read("a 1 0\nb 0 x\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, EmbedError::Format { line: 2, .. }));
        let err = EmbeddingTable::read("a 1 0\nb 0 1 2\n".as_bytes(), Some(2)).unwrap_err();
        assert!(matches!(err, EmbedError::Format { line: 2, .. }));
    }

    #[test]
    fn header_line_and_duplicates() {
        let t = EmbeddingTable::read("2 2\na 1 0\na 0 1\nb 0 1\n".as_bytes(), Some(2)).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.duplicates, 1);
        assert_eq!(t.vector("a").unwrap(), &[1.0, 0.0]);
    }

    #[test]
    fn identical_vectors_score_one() {
        let t = EmbeddingTable::from_pairs([("a", vec![1.0, 2.0]), ("b", vec![1.0, 2.0]), ("c", vec![-1.0, 0.5])]).unwrap();
        let top = t.top_k_similar("a", 1).unwrap();
        assert_eq!(top[0].0, "b");
        assert_abs_diff_eq!(top[0].1, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn orthogonal_words_score_zero() {
        let t = EmbeddingTable::from_pairs([("x", vec![1.0, 0.0]), ("y", vec![0.0, 3.0])]).unwrap();
        assert_eq!(t.top_k_similar("x", 1).unwrap(), vec![("y".to_string(), 0.0)]);
    }

    #[test]
    fn zero_vectors_and_oov() {
        let t = EmbeddingTable::from_pairs([("x", vec![1.0, 0.0]), ("z", vec![0.0, 0.0]), ("y", vec![1.0, 1.0])]).unwrap();
        let top = t.top_k_similar("x", 5).unwrap();
        assert_eq!(top.len(), 1);
        assert!(matches!(t.top_k_similar("nope", 1), Err(EmbedError::OutOfVocabulary(_))));
        assert!(matches!(t.top_k_similar("x", 0), Err(EmbedError::ZeroK)));
    }

    #[test]
    fn ties_break_lexicographically() {
        let t = EmbeddingTable::from_pairs([
            ("q", vec![1.0, 0.0]),
            ("b", vec![2.0, 0.0]),
            ("a", vec![3.0, 0.0]),
            ("c", vec![0.0, 1.0]),
        ])
        .unwrap();
        let words: Vec<_> = t.top_k_similar("q", 3).unwrap().into_iter().map(|p| p.0).collect();
        assert_eq!(words, vec!["a", "b", "c"]);
    }

    #[test]
    fn gzip_is_transparent() {
        use flate2::write::GzEncoder;
        use std::io::Write;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.txt.gz");
        let mut enc = GzEncoder::new(File::create(&path).unwrap(), flate2::Compression::default());
        enc.write_all(b"a 1 2\nb 3 4\n").unwrap();
        enc.finish().unwrap();
        let t = load_vectors(&path, Some(2)).unwrap();
        assert_eq!(t.len(), 2);
    }
}
