//! Document/version data model, text preprocessing, the on-disk corpus
//! layout, and the seeded synthetic corpus generator.

mod generate;
mod store;
mod text;

pub use generate::{generate_corpus, render_words};
pub use store::{load_corpus, store_corpus, MANIFEST_FILE};
pub use text::{is_stop_word, remove_stopwords, stop_words, tokenize, TokenStream};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bibliographic metadata of one book.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DocumentMeta {
    pub doc_id: u64,
    pub title: String,
    pub author: String,
    pub edition: u32,
    pub publisher: String,
    pub year: i32,
}

/// A document together with the full text of every version, `versions[k - 1]`
/// holding version `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VersionedDocument {
    pub meta: DocumentMeta,
    versions: Vec<String>,
}

impl VersionedDocument {
    pub fn new(meta: DocumentMeta, versions: Vec<String>) -> Result<Self> {
        if versions.is_empty() {
            return Err(Error::InvalidSpec(format!(
                "document {} has no versions",
                meta.doc_id
            )));
        }
        if meta.title.trim().is_empty() {
            return Err(Error::EmptyTitle);
        }
        Ok(Self { meta, versions })
    }

    pub fn doc_id(&self) -> u64 {
        self.meta.doc_id
    }

    /// Latest version id `n`.
    pub fn latest(&self) -> u32 {
        self.versions.len() as u32
    }

    pub fn version(&self, vid: u32) -> Option<&str> {
        let idx = (vid as usize).checked_sub(1)?;
        self.versions.get(idx).map(String::as_str)
    }

    pub fn versions(&self) -> &[String] {
        &self.versions
    }
}

/// An ordered collection of documents with unique ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<VersionedDocument>,
}

impl Corpus {
    pub fn new(documents: Vec<VersionedDocument>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for doc in &documents {
            if !seen.insert(doc.doc_id()) {
                return Err(Error::DuplicateDocId(doc.doc_id()));
            }
        }
        Ok(Self { documents })
    }

    pub fn documents(&self) -> &[VersionedDocument] {
        &self.documents
    }

    pub fn get(&self, doc_id: u64) -> Option<&VersionedDocument> {
        self.documents.iter().find(|d| d.doc_id() == doc_id)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

/// Parameters of a synthetic corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusSpec {
    pub num_docs: usize,
    pub versions_per_doc: u32,
    pub doc_size_bytes: usize,
    /// Minimum fraction of the previous version's tokens that each new
    /// version changes.
    pub delta_ratio: f64,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            num_docs: 20,
            versions_per_doc: 20,
            doc_size_bytes: 4096,
            delta_ratio: 0.2,
            seed: 42,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_docs == 0 {
            return Err(Error::InvalidSpec("num_docs must be positive".into()));
        }
        if self.versions_per_doc == 0 {
            return Err(Error::InvalidSpec("versions_per_doc must be positive".into()));
        }
        if self.doc_size_bytes == 0 {
            return Err(Error::InvalidSpec("doc_size_bytes must be positive".into()));
        }
        if !(self.delta_ratio > 0.0 && self.delta_ratio <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "delta_ratio must lie in (0, 1], got {}",
                self.delta_ratio
            )));
        }
        Ok(())
    }
}

impl Corpus {
    /// The first `num_docs` documents, each cut to its first `versions`
    /// versions.
    ///
    /// Generated documents depend only on the seed and their own id, and
    /// version `k` only on versions before it, so a prefix of a generated
    /// corpus equals the corpus generated with the smaller parameters.
    pub fn prefix(&self, num_docs: usize, versions: u32) -> Corpus {
        Corpus {
            documents: self
                .documents
                .iter()
                .take(num_docs)
                .map(|d| VersionedDocument {
                    meta: d.meta.clone(),
                    versions: d.versions.iter().take(versions.max(1) as usize).cloned().collect(),
                })
                .collect(),
        }
    }
}
