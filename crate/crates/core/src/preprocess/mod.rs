//! Tweet normalization pipelines, Types I through IV.
//!
//! - Type I: identity.
//! - Type II: emoji to shortcode text, URLs to `HTTPURL`, mentions to `@USER`.
//! - Type III: Type II, then emoticons to `smiley`/`sad`/`playful`, runs of
//!   more than two identical letters or punctuation marks capped at two, and
//!   contractions expanded.
//! - Type IV: Type III, then stopword removal and stemming.

mod lexicon;

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lexicon::{
    parse_contraction_map, parse_emoji_map, parse_smiley_map, parse_stopwords,
    ArabicLightStemmer, Lexicons, SmileyClass, SnowballEnglish, Stemmer,
};

use crate::corpus::Language;

pub const URL_TOKEN: &str = "HTTPURL";
pub const USER_TOKEN: &str = "@USER";

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("no stemmer configured for language {0:?}")]
    MissingStemmer(Language),
    #[error("{file} lexicon, line {line}: {message}")]
    Lexicon {
        file: String,
        line: usize,
        message: String,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown preprocessing type `{0}`")]
    UnknownType(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PreprocessType {
    I,
    II,
    III,
    IV,
}

impl PreprocessType {
    pub const ALL: [PreprocessType; 4] = [
        PreprocessType::I,
        PreprocessType::II,
        PreprocessType::III,
        PreprocessType::IV,
    ];
}

impl fmt::Display for PreprocessType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PreprocessType::I => "I",
            PreprocessType::II => "II",
            PreprocessType::III => "III",
            PreprocessType::IV => "IV",
        };
        f.write_str(s)
    }
}

impl FromStr for PreprocessType {
    type Err = PreprocessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_uppercase();
        let t = t.strip_prefix("TYPE").unwrap_or(&t).trim_start_matches(['-', ' ', '_']);
        match t {
            "I" | "1" => Ok(PreprocessType::I),
            "II" | "2" => Ok(PreprocessType::II),
            "III" | "3" => Ok(PreprocessType::III),
            "IV" | "4" => Ok(PreprocessType::IV),
            _ => Err(PreprocessError::UnknownType(s.to_string())),
        }
    }
}

/// Scheme-prefixed links and bare `t.co` shortlinks.
pub static URL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?:https?://\S+|\bt\.co/\S*)").unwrap());

/// `@` followed by a handle; the whole word run is consumed.
pub static MENTION_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"@[A-Za-z0-9_]+").unwrap());

fn is_emoji_modifier(c: char) -> bool {
    matches!(c, '\u{FE0F}' | '\u{FE0E}' | '\u{1F3FB}'..='\u{1F3FF}')
}

fn replace_emoji(text: &str, lex: &Lexicons) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    let mut after_emoji = false;
    for c in text.chars() {
        if after_emoji && is_emoji_modifier(c) {
            continue;
        }
        if let Some(code) = lex.emoji_map.get(&c) {
            if out.chars().next_back().is_some_and(|p| !p.is_whitespace()) {
                out.push(' ');
            }
            out.push_str(code);
            pending_space = true;
            after_emoji = true;
            continue;
        }
        after_emoji = false;
        if pending_space && !c.is_whitespace() {
            out.push(' ');
        }
        pending_space = false;
        out.push(c);
    }
    out
}

/// Type II normalization: emoji, then URLs, then mentions.
pub fn normalize_tokens(text: &str, lex: &Lexicons) -> String {
    let text = replace_emoji(text, lex);
    let text = URL_RE.replace_all(&text, URL_TOKEN);
    MENTION_RE.replace_all(&text, USER_TOKEN).into_owned()
}

fn smiley_may_end_before(next: Option<char>) -> bool {
    match next {
        None => true,
        Some(c) if c.is_whitespace() => true,
        Some(c) => c.is_ascii_punctuation() && !matches!(c, '/' | ':' | '-' | '_' | '\'' | '@' | '#'),
    }
}

/// Replaces emoticons that start a whitespace token with their class name,
/// trying longer emoticons first.
pub fn replace_smileys(text: &str, lex: &Lexicons) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    let mut at_token_start = true;
    while let Some(c) = rest.chars().next() {
        if at_token_start {
            let hit = lex.smiley_map.iter().find(|(emo, _)| {
                rest.starts_with(emo.as_str()) && smiley_may_end_before(rest[emo.len()..].chars().next())
            });
            if let Some((emo, class)) = hit {
                out.push_str(class.as_str());
                rest = &rest[emo.len()..];
                at_token_start = false;
                continue;
            }
        }
        out.push(c);
        at_token_start = c.is_whitespace();
        rest = &rest[c.len_utf8()..];
    }
    out
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || ('\u{2000}'..='\u{206F}').contains(&c)
        || matches!(c, '؟' | '،' | '؛' | '«' | '»' | '¡' | '¿')
}

/// Caps runs of identical letters or punctuation marks at two.
pub fn collapse_repeats(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut prev = None;
    let mut run = 0usize;
    for c in text.chars() {
        if Some(c) == prev {
            run += 1;
        } else {
            prev = Some(c);
            run = 1;
        }
        if run > 2 && (c.is_alphabetic() || is_punctuation(c)) {
            continue;
        }
        out.push(c);
    }
    out
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn match_case(source: &str, expansion: &str) -> String {
    let capitalized = source
        .chars()
        .find(|c| c.is_alphabetic())
        .is_some_and(char::is_uppercase);
    let lower = expansion.to_lowercase();
    if !capitalized {
        return lower;
    }
    let mut chars = lower.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => lower,
    }
}

fn expand_word(word: &str, lex: &Lexicons) -> Option<String> {
    let key = word.replace('\u{2019}', "'").to_lowercase();
    if let Some(exp) = lex.contraction_map.get(&key) {
        return Some(match_case(word, exp));
    }
    // An opening quote glued to a contraction: 'isn't
    let first = word.chars().next()?;
    if is_apostrophe(first) {
        let inner = &word[first.len_utf8()..];
        let exp = lex.contraction_map.get(&key[1..])?;
        return Some(format!("{first}{}", match_case(inner, exp)));
    }
    None
}

/// Expands contractions found as runs of letters and apostrophes.
pub fn expand_contractions(text: &str, lex: &Lexicons) -> String {
    let mut out = String::with_capacity(text.len());
    let mut word_start: Option<usize> = None;
    // A run right after `@` is left alone so expansion cannot form a new handle.
    let flush = |out: &mut String, word: &str| match expand_word(word, lex) {
        Some(e) if word.chars().any(is_apostrophe) && !out.ends_with('@') => out.push_str(&e),
        _ => out.push_str(word),
    };
    for (i, c) in text.char_indices() {
        let in_word = c.is_alphabetic() || is_apostrophe(c);
        match (in_word, word_start) {
            (true, None) => word_start = Some(i),
            (false, Some(s)) => {
                flush(&mut out, &text[s..i]);
                word_start = None;
                out.push(c);
            }
            (false, None) => out.push(c),
            (true, Some(_)) => {}
        }
    }
    if let Some(s) = word_start {
        flush(&mut out, &text[s..]);
    }
    out
}

fn is_special_token(token: &str) -> bool {
    token == URL_TOKEN
        || token == USER_TOKEN
        || (token.len() > 2 && token.starts_with(':') && token.ends_with(':'))
}

/// Removes stopwords and stems the remaining whitespace tokens. Leading and
/// trailing punctuation stays attached to the stem.
pub fn stem_and_filter(text: &str, language: Language, lex: &Lexicons) -> Result<String, PreprocessError> {
    let stemmer = lex
        .stemmers
        .get(&language)
        .ok_or(PreprocessError::MissingStemmer(language))?;
    let mut kept = Vec::new();
    for token in text.split_whitespace() {
        if is_special_token(token) {
            kept.push(token.to_string());
            continue;
        }
        let core = token.trim_matches(|c: char| is_punctuation(c) && !is_apostrophe(c));
        if core.is_empty() {
            kept.push(token.to_string());
            continue;
        }
        if lex.is_stopword(language, core) {
            continue;
        }
        let start = token.find(core).unwrap_or(0);
        let stem = stemmer.stem(&core.to_lowercase());
        kept.push(format!("{}{}{}", &token[..start], stem, &token[start + core.len()..]));
    }
    Ok(kept.join(" "))
}

/// Runs the pipeline of the given type.
pub fn apply_pipeline(
    text: &str,
    kind: PreprocessType,
    language: Language,
    lex: &Lexicons,
) -> Result<String, PreprocessError> {
    if kind == PreprocessType::I {
        return Ok(text.to_string());
    }
    let mut t = normalize_tokens(text, lex);
    if kind >= PreprocessType::III {
        t = replace_smileys(&t, lex);
        t = collapse_repeats(&t);
        t = expand_contractions(&t, lex);
    }
    if kind == PreprocessType::IV {
        t = stem_and_filter(&t, language, lex)?;
    }
    Ok(t)
}
