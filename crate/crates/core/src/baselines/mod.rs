//! Edit-based (EBVR) and reference-based (RBVR) version reconstruction.
//!
//! Both schemes store each document's first version whole and a change log
//! for versions `2..=n`, and both locate documents by a linear keyword scan.
//! Text is handled as a sequence of pieces (a word plus the whitespace
//! after it) so reconstruction is byte-exact.

pub mod diff;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Corpus, DocumentMeta};
use crate::error::{Error, Result};
use crate::pattern::context_tokens;
use crate::retrieval::{Method, RetrievalResult, RetrievalStats, VersionRetriever};
use diff::{apply_script, edit_script, reference_segments, EditOp, Segment};

pub type PieceId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Ebvr,
    Rbvr,
}

/// Changes turning version `version_id - 1` into `version_id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditScript {
    pub version_id: u32,
    pub ops: Vec<EditOp<PieceId>>,
}

/// Version `version_id` expressed as copies out of earlier versions and
/// literal runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceRecord {
    pub version_id: u32,
    pub segments: Vec<Segment<PieceId>>,
}

#[derive(Debug, Clone)]
enum ChangeLog {
    Edit(Vec<EditScript>),
    Reference(Vec<ReferenceRecord>),
}

#[derive(Debug, Clone)]
struct StoredDoc {
    meta: DocumentMeta,
    base: Vec<PieceId>,
    log: ChangeLog,
}

impl StoredDoc {
    fn latest(&self) -> u32 {
        1 + match &self.log {
            ChangeLog::Edit(s) => s.len() as u32,
            ChangeLog::Reference(r) => r.len() as u32,
        }
    }
}

/// A built EBVR or RBVR store.
#[derive(Debug, Clone)]
pub struct BaselineStore {
    scheme: Scheme,
    docs: Vec<StoredDoc>,
    // (keyword key, index into docs), sorted by key
    lookup: Vec<(String, usize)>,
    pieces: Vec<String>,
}

/// Splits text into pieces, each a run of non-whitespace followed by the
/// whitespace after it. Leading whitespace forms its own piece.
pub fn split_pieces(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut in_space = false;
    for (i, c) in text.char_indices() {
        let space = c.is_whitespace();
        if !space && in_space && i > start {
            out.push(&text[start..i]);
            start = i;
        }
        in_space = space;
    }
    if start < text.len() {
        out.push(&text[start..]);
    }
    out
}

/// Order-insensitive keyword form of a title or query.
pub fn keyword_key(text: &str) -> Option<String> {
    let stream = tokenize(text);
    if stream.is_empty() {
        return None;
    }
    let mut kws = context_tokens(&stream);
    kws.sort_unstable();
    Some(kws.join(" "))
}

#[derive(Default)]
struct Interner {
    ids: HashMap<String, PieceId>,
    pieces: Vec<String>,
}

impl Interner {
    fn intern_text(&mut self, text: &str) -> Vec<PieceId> {
        split_pieces(text)
            .into_iter()
            .map(|p| match self.ids.get(p) {
                Some(&id) => id,
                None => {
                    let id = self.pieces.len() as PieceId;
                    self.pieces.push(p.to_string());
                    self.ids.insert(p.to_string(), id);
                    id
                }
            })
            .collect()
    }
}

pub fn build_ebvr(corpus: &Corpus) -> Result<BaselineStore> {
    BaselineStore::build(corpus, Scheme::Ebvr)
}

pub fn build_rbvr(corpus: &Corpus) -> Result<BaselineStore> {
    BaselineStore::build(corpus, Scheme::Rbvr)
}

impl BaselineStore {
    pub fn build(corpus: &Corpus, scheme: Scheme) -> Result<Self> {
        let mut interner = Interner::default();
        let mut docs = Vec::with_capacity(corpus.len());
        let mut lookup = Vec::with_capacity(corpus.len());
        for doc in corpus.documents() {
            let key = keyword_key(&doc.meta.title).ok_or(Error::EmptyTitle)?;
            let versions: Vec<Vec<PieceId>> = doc
                .versions()
                .iter()
                .map(|v| interner.intern_text(v))
                .collect();
            let log = match scheme {
                Scheme::Ebvr => ChangeLog::Edit(
                    versions
                        .windows(2)
                        .zip(2..)
                        .map(|(w, version_id)| EditScript {
                            version_id,
                            ops: edit_script(&w[0], &w[1]),
                        })
                        .collect(),
                ),
                Scheme::Rbvr => ChangeLog::Reference(
                    versions
                        .windows(2)
                        .zip(2..)
                        .map(|(w, version_id)| ReferenceRecord {
                            version_id,
                            segments: reference_segments(&w[0], &w[1], version_id - 1),
                        })
                        .collect(),
                ),
            };
            lookup.push((key, docs.len()));
            docs.push(StoredDoc {
                meta: doc.meta.clone(),
                base: versions.into_iter().next().unwrap_or_default(),
                log,
            });
        }
        lookup.sort();
        Ok(Self {
            scheme,
            docs,
            lookup,
            pieces: interner.pieces,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    fn doc(&self, doc_id: u64) -> Option<&StoredDoc> {
        self.docs.iter().find(|d| d.meta.doc_id == doc_id)
    }

    /// Edit scripts of a document (EBVR stores only).
    pub fn edit_scripts(&self, doc_id: u64) -> Option<&[EditScript]> {
        match &self.doc(doc_id)?.log {
            ChangeLog::Edit(s) => Some(s),
            ChangeLog::Reference(_) => None,
        }
    }

    /// Reference records of a document (RBVR stores only).
    pub fn reference_records(&self, doc_id: u64) -> Option<&[ReferenceRecord]> {
        match &self.doc(doc_id)?.log {
            ChangeLog::Reference(r) => Some(r),
            ChangeLog::Edit(_) => None,
        }
    }

    /// Linear keyword scan over the sorted key list.
    fn locate(&self, query: &str, stats: &mut RetrievalStats) -> Result<&StoredDoc> {
        let key = keyword_key(query).ok_or(Error::EmptyQuery)?;
        for (k, idx) in &self.lookup {
            stats.key_comparisons += 1;
            if *k == key {
                return Ok(&self.docs[*idx]);
            }
        }
        Err(Error::NotFound {
            query: key,
            nearest: None,
        })
    }

    fn reconstruct(&self, doc: &StoredDoc, vid: u32, stats: &mut RetrievalStats) -> Result<RetrievalResult> {
        let n = doc.latest();
        let m = vid.min(n);
        let corrupt = |at: u32, reason: String| Error::CorruptChangeLog {
            doc_id: doc.meta.doc_id,
            vid: at,
            reason,
        };
        let tokens = match &doc.log {
            ChangeLog::Edit(scripts) => {
                let mut seq = doc.base.clone();
                for script in &scripts[..m as usize - 1] {
                    apply_script(&mut seq, &script.ops)
                        .map_err(|e| corrupt(script.version_id, e))?;
                    stats.edit_ops += script.ops.len() as u64;
                }
                seq
            }
            ChangeLog::Reference(records) => resolve(&doc.base, &records[..m as usize - 1], stats)
                .map_err(|(at, e)| corrupt(at, e))?,
        };
        stats.max_version_read = stats.max_version_read.max(m);
        Ok(RetrievalResult {
            doc_id: doc.meta.doc_id,
            m,
            content: tokens.iter().map(|&id| self.pieces[id as usize].as_str()).collect(),
            exact: vid == m,
        })
    }
}

/// Resolves the last of `records` (versions `2..`) back toward the base,
/// materializing each intermediate version once. A version's text is dropped
/// after its last reference.
fn resolve(
    base: &[PieceId],
    records: &[ReferenceRecord],
    stats: &mut RetrievalStats,
) -> std::result::Result<Vec<PieceId>, (u32, String)> {
    let Some(target) = records.last() else {
        return Ok(base.to_vec());
    };
    let mut last_use = vec![0u32; records.len() + 2];
    for rec in records {
        for seg in &rec.segments {
            if let Segment::Copy { source, .. } = seg {
                if *source < 1 || *source >= rec.version_id {
                    return Err((rec.version_id, format!("reference to version {source}")));
                }
                last_use[*source as usize] = last_use[*source as usize].max(rec.version_id);
            }
        }
    }

    let mut memo: Vec<Option<Vec<PieceId>>> = vec![None; records.len() + 2];
    memo[1] = Some(base.to_vec());
    for rec in records {
        let mut out = Vec::new();
        for seg in &rec.segments {
            match seg {
                Segment::Copy { source, start, len } => {
                    let src = memo[*source as usize]
                        .as_ref()
                        .ok_or_else(|| (rec.version_id, format!("version {source} unavailable")))?;
                    let run = src.get(*start..start + len).ok_or_else(|| {
                        (rec.version_id, format!("copy {start}+{len} outside version {source}"))
                    })?;
                    out.extend_from_slice(run);
                    stats.segments_resolved += 1;
                }
                Segment::Literal(tokens) => {
                    out.extend_from_slice(tokens);
                    stats.literals_copied += 1;
                }
            }
        }
        let k = rec.version_id as usize;
        memo[k] = Some(out);
        for (j, slot) in memo.iter_mut().enumerate().take(k) {
            if last_use[j] <= rec.version_id {
                *slot = None;
            }
        }
    }
    Ok(memo[target.version_id as usize].take().unwrap_or_default())
}

impl VersionRetriever for BaselineStore {
    fn method(&self) -> Method {
        match self.scheme {
            Scheme::Ebvr => Method::Ebvr,
            Scheme::Rbvr => Method::Rbvr,
        }
    }

    fn retrieve(&self, query: &str, vid: u32) -> Result<(RetrievalResult, RetrievalStats)> {
        if vid < 1 {
            return Err(Error::InvalidVersion(vid));
        }
        let mut stats = RetrievalStats::default();
        let doc = self.locate(query, &mut stats)?;
        let r = self.reconstruct(doc, vid, &mut stats)?;
        Ok((r, stats))
    }

    /// One scan, then an independent reconstruction per version.
    fn retrieve_many(
        &self,
        query: &str,
        vids: &[u32],
    ) -> Result<(Vec<RetrievalResult>, RetrievalStats)> {
        if let Some(&bad) = vids.iter().find(|&&v| v < 1) {
            return Err(Error::InvalidVersion(bad));
        }
        let mut stats = RetrievalStats::default();
        let doc = self.locate(query, &mut stats)?;
        let results = vids
            .iter()
            .map(|&vid| self.reconstruct(doc, vid, &mut stats))
            .collect::<Result<_>>()?;
        Ok((results, stats))
    }
}
