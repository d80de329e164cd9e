use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// The six ironic-speech categories annotated on sarcastic English tweets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Sarcasm,
    Irony,
    Satire,
    Understatement,
    Overstatement,
    RhetoricalQuestion,
}

impl Label {
    pub const ALL: [Label; 6] = [
        Label::Sarcasm,
        Label::Irony,
        Label::Satire,
        Label::Understatement,
        Label::Overstatement,
        Label::RhetoricalQuestion,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Column name used by the CSV release.
    pub fn column(self) -> &'static str {
        match self {
            Label::Sarcasm => "sarcasm",
            Label::Irony => "irony",
            Label::Satire => "satire",
            Label::Understatement => "understatement",
            Label::Overstatement => "overstatement",
            Label::RhetoricalQuestion => "rhetorical_question",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

/// Multi-label annotation; any subset of the six labels is allowed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelVector {
    pub sarcasm: bool,
    pub irony: bool,
    pub satire: bool,
    pub understatement: bool,
    pub overstatement: bool,
    pub rhetorical_question: bool,
}

impl LabelVector {
    pub fn from_bits(bits: u8) -> Self {
        let mut v = LabelVector::default();
        for label in Label::ALL {
            v.set(label, bits & (1 << label.index()) != 0);
        }
        v
    }

    pub fn bits(&self) -> u8 {
        Label::ALL
            .iter()
            .filter(|l| self.get(**l))
            .fold(0, |acc, l| acc | (1 << l.index()))
    }

    pub fn from_labels(labels: &[Label]) -> Self {
        let mut v = LabelVector::default();
        for &l in labels {
            v.set(l, true);
        }
        v
    }

    pub fn get(&self, label: Label) -> bool {
        match label {
            Label::Sarcasm => self.sarcasm,
            Label::Irony => self.irony,
            Label::Satire => self.satire,
            Label::Understatement => self.understatement,
            Label::Overstatement => self.overstatement,
            Label::RhetoricalQuestion => self.rhetorical_question,
        }
    }

    pub fn set(&mut self, label: Label, on: bool) {
        let slot = match label {
            Label::Sarcasm => &mut self.sarcasm,
            Label::Irony => &mut self.irony,
            Label::Satire => &mut self.satire,
            Label::Understatement => &mut self.understatement,
            Label::Overstatement => &mut self.overstatement,
            Label::RhetoricalQuestion => &mut self.rhetorical_question,
        };
        *slot = on;
    }

    pub fn to_array(&self) -> [bool; 6] {
        Label::ALL.map(|l| self.get(l))
    }

    pub fn from_array(values: [bool; 6]) -> Self {
        let mut v = LabelVector::default();
        for (l, on) in Label::ALL.into_iter().zip(values) {
            v.set(l, on);
        }
        v
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        Label::ALL.into_iter().filter(|l| self.get(*l))
    }

    pub fn is_empty(&self) -> bool {
        self.bits() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dialect {
    Msa,
    Egyptian,
    Levantine,
    Maghrebi,
    Gulf,
}

impl Dialect {
    pub const ALL: [Dialect; 5] = [
        Dialect::Msa,
        Dialect::Egyptian,
        Dialect::Levantine,
        Dialect::Maghrebi,
        Dialect::Gulf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dialect::Msa => "msa",
            Dialect::Egyptian => "egyptian",
            Dialect::Levantine => "levantine",
            Dialect::Maghrebi => "maghrebi",
            Dialect::Gulf => "gulf",
        }
    }
}

impl FromStr for Dialect {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // ArSarcasm-v2 spells the regions "egypt", "levant" and "magreb".
        match s.trim().to_lowercase().as_str() {
            "msa" => Ok(Dialect::Msa),
            "egyptian" | "egypt" => Ok(Dialect::Egyptian),
            "levantine" | "levant" => Ok(Dialect::Levantine),
            "maghrebi" | "magreb" | "maghreb" => Ok(Dialect::Maghrebi),
            "gulf" => Ok(Dialect::Gulf),
            other => Err(CorpusError::UnknownDialect(other.to_string())),
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Original,
    TwitterApi,
    Semeval2018,
    ArsarcasmV2,
    Augmented,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Language {
    En,
    Ar,
}

impl FromStr for Language {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "en" | "english" => Ok(Language::En),
            "ar" | "arabic" => Ok(Language::Ar),
            other => Err(CorpusError::Validation(format!("unknown language `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentationMethod {
    ExternalMerge,
    EmbeddingSubstitution,
    Repetition,
}

/// One word swapped by embedding substitution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replacement {
    pub position: usize,
    pub original: String,
    pub substitute: String,
}

/// How an augmented record was derived from its parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationProvenance {
    pub method: AugmentationMethod,
    pub parent_id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub replaced: Vec<Replacement>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rephrase_replaced: Vec<Replacement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sarcastic: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rephrase: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<LabelVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dialect: Option<Dialect>,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<AugmentationProvenance>,
}

impl TweetRecord {
    pub fn new(id: impl Into<String>, text: impl Into<String>, source: Source) -> Self {
        TweetRecord {
            id: id.into(),
            text: text.into(),
            sarcastic: None,
            rephrase: None,
            labels: None,
            dialect: None,
            source,
            provenance: None,
        }
    }

    pub fn with_sarcastic(mut self, sarcastic: bool) -> Self {
        self.sarcastic = Some(sarcastic);
        self
    }

    pub fn with_labels(mut self, labels: LabelVector) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn with_rephrase(mut self, rephrase: impl Into<String>) -> Self {
        self.rephrase = Some(rephrase.into());
        self
    }

    pub fn with_dialect(mut self, dialect: Dialect) -> Self {
        self.dialect = Some(dialect);
        self
    }

    pub fn is_sarcastic(&self) -> bool {
        self.sarcastic == Some(true)
    }

    pub fn has_label(&self, label: Label) -> bool {
        self.labels.is_some_and(|l| l.get(label))
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.text.trim().is_empty() {
            return Err(CorpusError::Validation(format!(
                "record `{}` has empty text",
                self.id
            )));
        }
        if self.labels.is_some() && self.sarcastic != Some(true) {
            return Err(CorpusError::Validation(format!(
                "record `{}` carries labels but is not sarcastic",
                self.id
            )));
        }
        if self.rephrase.is_some() && self.sarcastic != Some(true) {
            return Err(CorpusError::Validation(format!(
                "record `{}` carries a rephrase but is not sarcastic",
                self.id
            )));
        }
        Ok(())
    }
}

/// An ordered, id-unique collection of tweets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub language: Language,
    records: Vec<TweetRecord>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        language: Language,
        records: Vec<TweetRecord>,
    ) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            r.validate()?;
            if !seen.insert(r.id.as_str()) {
                return Err(CorpusError::DuplicateId(r.id.clone()));
            }
        }
        Ok(Dataset {
            name: name.into(),
            language,
            records,
        })
    }

    pub fn empty(name: impl Into<String>, language: Language) -> Self {
        Dataset {
            name: name.into(),
            language,
            records: Vec::new(),
        }
    }

    pub fn records(&self) -> &[TweetRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<TweetRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TweetRecord> {
        self.records.iter()
    }

    pub fn sarcastic_count(&self) -> usize {
        self.records.iter().filter(|r| r.is_sarcastic()).count()
    }

    /// Keeps the records matching `keep`, under a new name.
    pub fn filtered(&self, name: impl Into<String>, keep: impl Fn(&TweetRecord) -> bool) -> Self {
        Dataset {
            name: name.into(),
            language: self.language,
            records: self.records.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }

    /// Per-label occurrence counts.
    pub fn label_counts(&self) -> [usize; 6] {
        let mut counts = [0usize; 6];
        for labels in self.records.iter().filter_map(|r| r.labels) {
            for l in labels.labels() {
                counts[l.index()] += 1;
            }
        }
        counts
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a TweetRecord;
    type IntoIter = std::slice::Iter<'a, TweetRecord>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_bits_cover_every_subset() {
        for bits in 0u8..64 {
            assert_eq!(LabelVector::from_bits(bits).bits(), bits);
        }
    }

    #[test]
    fn dialect_parsing_is_case_insensitive() {
        assert_eq!("MSA".parse::<Dialect>().unwrap(), Dialect::Msa);
        assert_eq!("Gulf".parse::<Dialect>().unwrap(), Dialect::Gulf);
        assert_eq!("magreb".parse::<Dialect>().unwrap(), Dialect::Maghrebi);
        assert!(matches!(
            "klingon".parse::<Dialect>(),
            Err(CorpusError::UnknownDialect(_))
        ));
    }

    #[test]
    fn dataset_rejects_duplicate_ids() {
        let r = TweetRecord::new("a", "hello", Source::Original);
        let err = Dataset::new("d", Language::En, vec![r.clone(), r]).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId(id) if id == "a"));
    }

    #[test]
    fn labels_require_sarcastic_flag() {
        let r = TweetRecord::new("a", "hello", Source::Original)
            .with_sarcastic(false)
            .with_labels(LabelVector::from_labels(&[Label::Irony]));
        assert!(r.validate().is_err());
        let blank = TweetRecord::new("b", "   ", Source::Original);
        assert!(blank.validate().is_err());
    }
}
