//! Label matching by token-set Jaccard similarity after synonym
//! canonicalization.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchError {
    #[error("lexicon line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("phrase {phrase:?} is listed under both {first:?} and {second:?}")]
    Overlap {
        phrase: String,
        first: String,
        second: String,
    },
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
}

const DEFAULT_LEXICON: &str = "\
# form fields
first name: given name | forename | firstname
surname: last name | family name | lastname
full name: your name
email: e mail | email address | mail
phone: phone number | mobile | telephone | cell
address: street | street address
city: town
zip: zip code | postal code | postcode
password: passcode | pin | pass
username: user name | user id | userid | account
query: search term | keywords
# button intents
search: find | look up
close: x | dismiss | skip ad
next: continue | skip | get started
submit: done | save | send | confirm
back: return | go back
share: send to
settings: preferences | options
log in: sign in | login | signin | log on
";

/// Canonical terms and their synonyms, all normalized.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, BTreeSet<String>>,
    /// Every phrase (canonical or synonym) -> its canonical.
    phrase_index: BTreeMap<String, String>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// The shipped lexicon covering common form fields and button intents.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("builtin lexicon is valid")
    }

    pub fn builtin_text() -> &'static str {
        DEFAULT_LEXICON
    }

    pub fn insert<I, S>(&mut self, canonical: &str, synonyms: I) -> Result<(), MatchError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let canonical = normalize(canonical);
        let mut phrases = vec![canonical.clone()];
        phrases.extend(
            synonyms
                .into_iter()
                .map(|s| normalize(s.as_ref()))
                .filter(|s| !s.is_empty() && *s != canonical),
        );
        for phrase in &phrases {
            if let Some(owner) = self.phrase_index.get(phrase) {
                if *owner != canonical {
                    return Err(MatchError::Overlap {
                        phrase: phrase.clone(),
                        first: owner.clone(),
                        second: canonical,
                    });
                }
            }
        }
        let entry = self.entries.entry(canonical.clone()).or_default();
        for phrase in phrases {
            self.phrase_index.insert(phrase.clone(), canonical.clone());
            if phrase != canonical {
                entry.insert(phrase);
            }
        }
        Ok(())
    }

    /// Parses `canonical: syn1 | syn2` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, MatchError> {
        let mut lex = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (canonical, rest) = line.split_once(':').ok_or_else(|| MatchError::Malformed {
                line: i + 1,
                reason: "expected `canonical: synonyms`".into(),
            })?;
            if normalize(canonical).is_empty() {
                return Err(MatchError::Malformed {
                    line: i + 1,
                    reason: "empty canonical term".into(),
                });
            }
            lex.insert(canonical, rest.split('|'))?;
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self, MatchError> {
        let text = std::fs::read_to_string(path).map_err(|e| MatchError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (canonical, synonyms) in &self.entries {
            let syns: Vec<&str> = synonyms.iter().map(String::as_str).collect();
            let _ = writeln!(out, "{canonical}: {}", syns.join(" | "));
        }
        out
    }

    pub fn canonical_of(&self, phrase: &str) -> Option<&str> {
        self.phrase_index.get(phrase).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn longest_phrase(&self) -> usize {
        self.phrase_index
            .keys()
            .map(|p| p.split(' ').count())
            .max()
            .unwrap_or(0)
    }

    /// Token set after greedy longest-phrase replacement by canonicals.
    /// Multi-word canonicals stay a single token.
    pub fn expand(&self, normalized: &str) -> BTreeSet<String> {
        let tokens: Vec<&str> = normalized.split(' ').filter(|t| !t.is_empty()).collect();
        let longest = self.longest_phrase();
        let mut out = BTreeSet::new();
        let mut i = 0;
        while i < tokens.len() {
            let mut taken = false;
            for len in (1..=longest.min(tokens.len() - i)).rev() {
                let phrase = tokens[i..i + len].join(" ");
                if let Some(canonical) = self.phrase_index.get(&phrase) {
                    out.insert(canonical.clone());
                    i += len;
                    taken = true;
                    break;
                }
            }
            if !taken {
                out.insert(tokens[i].to_string());
                i += 1;
            }
        }
        out
    }
}

/// Lowercase, punctuation to spaces, collapsed whitespace.
pub fn normalize(text: &str) -> String {
    let mapped: String = text
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .flat_map(char::to_lowercase)
        .collect();
    mapped.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

fn plain_tokens(normalized: &str) -> BTreeSet<String> {
    normalized.split(' ').filter(|t| !t.is_empty()).map(String::from).collect()
}

/// Best Jaccard similarity over the plain and expanded forms of both sides.
pub fn score(a: &str, b: &str, lexicon: &Lexicon) -> f64 {
    let (na, nb) = (normalize(a), normalize(b));
    let forms_a = [plain_tokens(&na), lexicon.expand(&na)];
    let forms_b = [plain_tokens(&nb), lexicon.expand(&nb)];
    let mut best: f64 = 0.0;
    for x in &forms_a {
        for y in &forms_b {
            best = best.max(jaccard(x, y));
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub candidate: String,
    pub score: f64,
}

/// Highest-scoring candidate at or above `threshold`; ties keep the earlier
/// candidate.
pub fn match_label<S: AsRef<str>>(
    label: &str,
    candidates: &[S],
    lexicon: &Lexicon,
    threshold: f64,
) -> Option<MatchResult> {
    let mut best: Option<MatchResult> = None;
    for c in candidates {
        let s = score(label, c.as_ref(), lexicon);
        if s >= threshold && best.as_ref().is_none_or(|b| s > b.score) {
            best = Some(MatchResult {
                candidate: c.as_ref().to_string(),
                score: s,
            });
        }
    }
    best
}
