//! `<prefix> <context> <suffix>` patterns built from titles and queries.
//!
//! The context holds the significant (non-stop-word) tokens in title order;
//! prefix and suffix hold up to two surrounding tokens. Patterns serialize
//! to a key of the form `context|prefix|suffix` whose byte order groups
//! equal contexts together.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{is_stop_word, tokenize, DocumentMeta, TokenStream};
use crate::error::{Error, Result};

const SURROUNDING_WIDTH: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pattern {
    pub prefix: Vec<String>,
    pub context: Vec<String>,
    pub suffix: Vec<String>,
}

impl Pattern {
    pub fn key(&self) -> String {
        serialize_pattern(self)
    }

    /// The context part of the key, including its terminating `|`. Every key
    /// with this context starts with it.
    pub fn context_key(&self) -> String {
        let mut k = self.context.join(" ");
        k.push('|');
        k
    }
}

/// A document filed under its title pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifiedDocument {
    pub doc_id: u64,
    pub pattern: Pattern,
    pub key: String,
}

impl ClassifiedDocument {
    pub fn classify(meta: &DocumentMeta) -> Result<Self> {
        let pattern = build_pattern(meta)?;
        Ok(Self {
            doc_id: meta.doc_id,
            key: serialize_pattern(&pattern),
            pattern,
        })
    }
}

/// Significant tokens of a stream, or the whole stream when every token is
/// a stop word.
pub fn context_tokens(stream: &TokenStream) -> Vec<String> {
    let significant: Vec<String> = stream
        .tokens()
        .iter()
        .filter(|t| !is_stop_word(t))
        .cloned()
        .collect();
    if significant.is_empty() {
        stream.tokens().to_vec()
    } else {
        significant
    }
}

pub fn build_pattern(meta: &DocumentMeta) -> Result<Pattern> {
    pattern_for_text(&meta.title).ok_or(Error::EmptyTitle)
}

fn pattern_for_text(text: &str) -> Option<Pattern> {
    let stream = tokenize(text);
    let tokens = stream.tokens();
    if tokens.is_empty() {
        return None;
    }
    let first = tokens.iter().position(|t| !is_stop_word(t));
    let last = tokens.iter().rposition(|t| !is_stop_word(t));
    let (Some(first), Some(last)) = (first, last) else {
        return Some(Pattern {
            prefix: Vec::new(),
            context: tokens.to_vec(),
            suffix: Vec::new(),
        });
    };
    let suffix_end = (last + 1 + SURROUNDING_WIDTH).min(tokens.len());
    Some(Pattern {
        prefix: tokens[first.saturating_sub(SURROUNDING_WIDTH)..first].to_vec(),
        context: context_tokens(&stream),
        suffix: tokens[last + 1..suffix_end].to_vec(),
    })
}

pub fn serialize_pattern(p: &Pattern) -> String {
    format!(
        "{}|{}|{}",
        p.context.join(" "),
        p.prefix.join(" "),
        p.suffix.join(" ")
    )
}

/// Static context-to-context synonym table.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SynonymMap {
    // normalized context string -> synonym texts, in file order
    entries: BTreeMap<String, Vec<String>>,
}

impl SynonymMap {
    pub fn insert(&mut self, context: &str, synonym: &str) -> Result<()> {
        let from = normalize_context(context).ok_or(Error::EmptyQuery)?;
        if normalize_context(synonym).is_none() {
            return Err(Error::EmptyQuery);
        }
        self.entries
            .entry(from)
            .or_default()
            .push(synonym.to_string());
        Ok(())
    }

    /// Parses `context<TAB>synonym` lines; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = Self::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let malformed = |reason: &str| Error::MalformedSynonyms {
                line: i + 1,
                reason: reason.to_string(),
            };
            let (from, to) = line
                .split_once('\t')
                .ok_or_else(|| malformed("expected two tab-separated fields"))?;
            if to.contains('\t') {
                return Err(malformed("expected two tab-separated fields"));
            }
            map.insert(from, to)
                .map_err(|_| malformed("empty context or synonym"))?;
        }
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn synonyms_of(&self, context: &[String]) -> &[String] {
        self.entries
            .get(&context.join(" "))
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn normalize_context(text: &str) -> Option<String> {
    let stream = tokenize(text);
    (!stream.is_empty()).then(|| context_tokens(&stream).join(" "))
}

/// The query's own pattern followed by one pattern per synonym entry of its
/// context.
pub fn query_to_pattern(query: &str, synonyms: Option<&SynonymMap>) -> Result<Vec<Pattern>> {
    let own = pattern_for_text(query).ok_or(Error::EmptyQuery)?;
    let mut patterns = Vec::new();
    if let Some(map) = synonyms {
        patterns.extend(
            map.synonyms_of(&own.context)
                .iter()
                .filter_map(|s| pattern_for_text(s)),
        );
    }
    patterns.insert(0, own);
    Ok(patterns)
}
