use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("corpus manifest not found: {0}")]
    ManifestMissing(PathBuf),

    #[error("manifest line {line}: {reason}")]
    MalformedManifest { line: usize, reason: String },

    #[error("document {doc_id}: version file v{vid}.txt is missing")]
    DanglingVersion { doc_id: u64, vid: u32 },

    #[error("document {doc_id}: field {field} cannot be stored: {reason}")]
    UnstorableField {
        doc_id: u64,
        field: &'static str,
        reason: String,
    },

    #[error("invalid corpus spec: {0}")]
    InvalidSpec(String),

    #[error("title is empty after tokenization")]
    EmptyTitle,

    #[error("query is empty")]
    EmptyQuery,

    #[error("no document matches {query:?}{}", nearest.as_ref().map(|k| format!(" (nearest key {k:?})")).unwrap_or_default())]
    NotFound {
        query: String,
        nearest: Option<String>,
    },

    #[error("version id must be at least 1, got {0}")]
    InvalidVersion(u32),

    #[error("document id {0} inserted twice with differing metadata")]
    DuplicateDocId(u64),

    #[error("invalid fanout {0}: must be at least 3")]
    InvalidFanout(usize),

    #[error("change log for document {doc_id} version {vid} does not apply: {reason}")]
    CorruptChangeLog { doc_id: u64, vid: u32, reason: String },

    #[error("synonym file line {line}: {reason}")]
    MalformedSynonyms { line: usize, reason: String },

    #[error("index file {path}: {reason}")]
    CorruptIndex { path: PathBuf, reason: String },

    #[error("invalid benchmark config: {0}")]
    InvalidBenchConfig(String),

    #[error("retrieval for document {doc_id} version {vid} disagrees with ground truth")]
    GroundTruthMismatch { doc_id: u64, vid: u32 },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
