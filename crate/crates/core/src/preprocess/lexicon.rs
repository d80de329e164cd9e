use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::PreprocessError;
use crate::corpus::Language;

const EMOJI_TSV: &str = include_str!("../../data/emoji.tsv");
const SMILEYS_TSV: &str = include_str!("../../data/smileys.tsv");
const CONTRACTIONS_TSV: &str = include_str!("../../data/contractions.tsv");
const STOPWORDS_EN: &str = include_str!("../../data/stopwords_en.txt");
const STOPWORDS_AR: &str = include_str!("../../data/stopwords_ar.txt");
const ARABIC_STEM_TSV: &str = include_str!("../../data/arabic_light_stem.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmileyClass {
    Smiley,
    Sad,
    Playful,
}

impl SmileyClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SmileyClass::Smiley => "smiley",
            SmileyClass::Sad => "sad",
            SmileyClass::Playful => "playful",
        }
    }
}

/// Token -> stem. Implementations must be pure.
pub trait Stemmer: Send + Sync {
    fn stem(&self, token: &str) -> String;
}

/// Snowball English stemmer.
pub struct SnowballEnglish(rust_stemmers::Stemmer);

impl SnowballEnglish {
    pub fn new() -> Self {
        SnowballEnglish(rust_stemmers::Stemmer::create(rust_stemmers::Algorithm::English))
    }
}

impl Default for SnowballEnglish {
    fn default() -> Self {
        Self::new()
    }
}

impl Stemmer for SnowballEnglish {
    fn stem(&self, token: &str) -> String {
        self.0.stem(token).into_owned()
    }
}

/// Rule-table Arabic light stemmer: one prefix strip, then repeated suffix
/// strips, never leaving fewer than two letters.
#[derive(Debug, Clone)]
pub struct ArabicLightStemmer {
    prefixes: Vec<String>,
    suffixes: Vec<String>,
}

impl ArabicLightStemmer {
    pub fn from_rules(text: &str) -> Result<Self, PreprocessError> {
        let mut prefixes = Vec::new();
        let mut suffixes = Vec::new();
        for (i, line) in data_lines(text) {
            let (kind, affix) = split_tsv(line).ok_or_else(|| lexicon_err("arabic stem rules", i, "expected `kind<TAB>affix`"))?;
            match kind {
                "prefix" => prefixes.push(affix.to_string()),
                "suffix" => suffixes.push(affix.to_string()),
                other => return Err(lexicon_err("arabic stem rules", i, &format!("unknown rule kind `{other}`"))),
            }
        }
        let by_len = |a: &String, b: &String| b.chars().count().cmp(&a.chars().count());
        prefixes.sort_by(by_len);
        suffixes.sort_by(by_len);
        Ok(ArabicLightStemmer { prefixes, suffixes })
    }

    pub fn builtin() -> Self {
        Self::from_rules(ARABIC_STEM_TSV).expect("bundled Arabic rules parse")
    }
}

impl Stemmer for ArabicLightStemmer {
    fn stem(&self, token: &str) -> String {
        let len = |s: &str| s.chars().count();
        let mut word = token;
        if let Some(p) = self
            .prefixes
            .iter()
            .find(|p| word.starts_with(p.as_str()) && len(word) - len(p) >= 2)
        {
            word = &word[p.len()..];
        }
        while let Some(s) = self
            .suffixes
            .iter()
            .find(|s| word.ends_with(s.as_str()) && len(word) - len(s) >= 2)
        {
            word = &word[..word.len() - s.len()];
        }
        word.to_string()
    }
}

/// Lookup tables for the preprocessing pipelines.
#[derive(Clone)]
pub struct Lexicons {
    pub emoji_map: HashMap<char, String>,
    /// Emoticon -> class, sorted longest first for matching.
    pub smiley_map: Vec<(String, SmileyClass)>,
    pub contraction_map: HashMap<String, String>,
    pub stopwords: HashMap<Language, HashSet<String>>,
    pub stemmers: HashMap<Language, Arc<dyn Stemmer>>,
}

impl fmt::Debug for Lexicons {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lexicons")
            .field("emoji", &self.emoji_map.len())
            .field("smileys", &self.smiley_map.len())
            .field("contractions", &self.contraction_map.len())
            .field("stemmers", &self.stemmers.keys().collect::<Vec<_>>())
            .finish()
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn split_tsv(line: &str) -> Option<(&str, &str)> {
    let (a, b) = line.split_once('\t')?;
    let (a, b) = (a.trim(), b.trim());
    (!a.is_empty() && !b.is_empty()).then_some((a, b))
}

fn lexicon_err(file: &str, line: usize, message: &str) -> PreprocessError {
    PreprocessError::Lexicon {
        file: file.to_string(),
        line,
        message: message.to_string(),
    }
}

fn parse_codepoint(field: &str) -> Option<char> {
    if let Some(hex) = field.strip_prefix("U+").or_else(|| field.strip_prefix("u+")) {
        return u32::from_str_radix(hex, 16).ok().and_then(char::from_u32);
    }
    let mut chars = field.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Some(c),
        _ => None,
    }
}

pub fn parse_emoji_map(text: &str) -> Result<HashMap<char, String>, PreprocessError> {
    let mut map = HashMap::new();
    for (i, line) in data_lines(text) {
        let (cp, code) = split_tsv(line).ok_or_else(|| lexicon_err("emoji", i, "expected `codepoint<TAB>shortcode`"))?;
        let c = parse_codepoint(cp).ok_or_else(|| lexicon_err("emoji", i, &format!("bad codepoint `{cp}`")))?;
        map.insert(c, code.to_string());
    }
    Ok(map)
}

pub fn parse_smiley_map(text: &str) -> Result<Vec<(String, SmileyClass)>, PreprocessError> {
    let mut out = Vec::new();
    for (i, line) in data_lines(text) {
        let (emoticon, class) = split_tsv(line).ok_or_else(|| lexicon_err("smileys", i, "expected `emoticon<TAB>class`"))?;
        let class = match class {
            "smiley" => SmileyClass::Smiley,
            "sad" => SmileyClass::Sad,
            "playful" => SmileyClass::Playful,
            other => return Err(lexicon_err("smileys", i, &format!("class `{other}` not in {{smiley, sad, playful}}"))),
        };
        out.push((emoticon.to_string(), class));
    }
    // Longest match first; ties in file order.
    out.sort_by_key(|e| std::cmp::Reverse(e.0.chars().count()));
    Ok(out)
}

pub fn parse_contraction_map(text: &str) -> Result<HashMap<String, String>, PreprocessError> {
    let mut map = HashMap::new();
    for (i, line) in data_lines(text) {
        let (key, expansion) = split_tsv(line).ok_or_else(|| lexicon_err("contractions", i, "expected `contraction<TAB>expansion`"))?;
        let key = key.replace('\u{2019}', "'").to_lowercase();
        if !key.contains('\'') {
            return Err(lexicon_err("contractions", i, &format!("key `{key}` has no apostrophe")));
        }
        map.insert(key, expansion.to_lowercase());
    }
    Ok(map)
}

pub fn parse_stopwords(text: &str) -> HashSet<String> {
    data_lines(text).map(|(_, l)| l.trim().to_lowercase()).collect()
}

impl Lexicons {
    /// The lexicons bundled with the crate.
    pub fn builtin() -> Self {
        let mut stemmers: HashMap<Language, Arc<dyn Stemmer>> = HashMap::new();
        stemmers.insert(Language::En, Arc::new(SnowballEnglish::new()));
        stemmers.insert(Language::Ar, Arc::new(ArabicLightStemmer::builtin()));
        Lexicons {
            emoji_map: parse_emoji_map(EMOJI_TSV).expect("bundled emoji map parses"),
            smiley_map: parse_smiley_map(SMILEYS_TSV).expect("bundled smiley map parses"),
            contraction_map: parse_contraction_map(CONTRACTIONS_TSV).expect("bundled contractions parse"),
            stopwords: HashMap::from([
                (Language::En, parse_stopwords(STOPWORDS_EN)),
                (Language::Ar, parse_stopwords(STOPWORDS_AR)),
            ]),
            stemmers,
        }
    }

    /// Loads lexicon files from `dir`, falling back to the bundled copy for
    /// any file that is absent. Recognised names: `emoji.tsv`, `smileys.tsv`,
    /// `contractions.tsv`, `stopwords_en.txt`, `stopwords_ar.txt`,
    /// `arabic_light_stem.tsv`.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, PreprocessError> {
        let dir = dir.as_ref();
        let read = |name: &str| -> Result<Option<String>, PreprocessError> {
            let p = dir.join(name);
            if !p.exists() {
                return Ok(None);
            }
            fs::read_to_string(&p).map(Some).map_err(|e| PreprocessError::Io {
                path: p.display().to_string(),
                source: e,
            })
        };
        let mut lex = Lexicons::builtin();
        if let Some(t) = read("emoji.tsv")? {
            lex.emoji_map = parse_emoji_map(&t)?;
        }
        if let Some(t) = read("smileys.tsv")? {
            lex.smiley_map = parse_smiley_map(&t)?;
        }
        if let Some(t) = read("contractions.tsv")? {
            lex.contraction_map = parse_contraction_map(&t)?;
        }
        if let Some(t) = read("stopwords_en.txt")? {
            lex.stopwords.insert(Language::En, parse_stopwords(&t));
        }
        if let Some(t) = read("stopwords_ar.txt")? {
            lex.stopwords.insert(Language::Ar, parse_stopwords(&t));
        }
        if let Some(t) = read("arabic_light_stem.tsv")? {
            lex.stemmers
                .insert(Language::Ar, Arc::new(ArabicLightStemmer::from_rules(&t)?));
        }
        Ok(lex)
    }

    pub fn with_stemmer(mut self, language: Language, stemmer: Arc<dyn Stemmer>) -> Self {
        self.stemmers.insert(language, stemmer);
        self
    }

    pub fn without_stemmer(mut self, language: Language) -> Self {
        self.stemmers.remove(&language);
        self
    }

    pub fn with_stopwords(mut self, language: Language, words: impl IntoIterator<Item = String>) -> Self {
        self.stopwords.insert(language, words.into_iter().collect());
        self
    }

    pub fn is_stopword(&self, language: Language, token: &str) -> bool {
        self.stopwords
            .get(&language)
            .is_some_and(|s| s.contains(&token.to_lowercase()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lexicons_load() {
        let lex = Lexicons::builtin();
        assert_eq!(lex.emoji_map[&'\u{1F642}'], ":slightly_smiling_face:");
        assert_eq!(lex.contraction_map["isn't"], "is not");
        assert_eq!(lex.contraction_map["'cause"], "because");
        assert!(lex.is_stopword(Language::En, "The"));
        assert!(lex.smiley_map.windows(2).all(|w| w[0].0.chars().count() >= w[1].0.chars().count()));
    }

    #[test]
    fn contraction_keys_need_apostrophes() {
        assert!(parse_contraction_map("cause\tbecause\n").is_err());
    }

    #[test]
    fn smiley_classes_are_closed() {
        let err = parse_smiley_map(":)\thappy\n").unwrap_err();
        assert!(err.to_string().contains("happy"));
    }

    #[test]
    fn arabic_light_stemming() {
        let s = ArabicLightStemmer::builtin();
        // "the-book" and "and-the-books" reduce to the bare stem.
        assert_eq!(s.stem("الكتاب"), "كتاب");
        assert_eq!(s.stem("والمعلمون"), "معلم");
        // Too short to strip.
        assert_eq!(s.stem("له"), "له");
    }

    #[test]
    fn english_snowball() {
        let s = SnowballEnglish::new();
        assert_eq!(s.stem("cats"), "cat");
        assert_eq!(s.stem("running"), "run");
    }
}
