//! The VTAG index: a B+-tree over title pattern keys whose leaf entries point
//! at per-document version tables, and version-based retrieval on top.

mod persist;
mod tree;
mod version_table;

pub use tree::{Cursor, TableId, VTagLeafEntry, VTagTree, DEFAULT_FANOUT};
pub use version_table::{home_slot, ContentRef, Probe, VersionTable, FIBONACCI_MULTIPLIER};

use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use crate::corpus::{Corpus, DocumentMeta};
use crate::error::{Error, Result};
use crate::pattern::{query_to_pattern, ClassifiedDocument, Pattern, SynonymMap};
use crate::retrieval::{Method, RetrievalResult, RetrievalStats, VersionRetriever};

/// Tree, version tables, and the append-only store holding version text.
///
/// Built by a single writer; afterwards all lookups take `&self`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VTagIndex {
    tree: VTagTree,
    tables: Vec<VersionTable>,
    contents: String,
    synonyms: SynonymMap,
    doc_keys: HashMap<u64, String>,
}

impl VTagIndex {
    pub fn new(fanout: usize) -> Result<Self> {
        Ok(Self {
            tree: VTagTree::new(fanout)?,
            tables: Vec::new(),
            contents: String::new(),
            synonyms: SynonymMap::default(),
            doc_keys: HashMap::new(),
        })
    }

    pub fn with_synonyms(mut self, synonyms: SynonymMap) -> Self {
        self.synonyms = synonyms;
        self
    }

    /// Classifies and inserts every document of `corpus`.
    pub fn build(corpus: &Corpus, fanout: usize, synonyms: SynonymMap) -> Result<Self> {
        let mut index = Self::new(fanout)?.with_synonyms(synonyms);
        for doc in corpus.documents() {
            let classified = ClassifiedDocument::classify(&doc.meta)?;
            index.insert(&classified, &doc.meta, doc.versions())?;
        }
        Ok(index)
    }

    pub fn tree(&self) -> &VTagTree {
        &self.tree
    }

    pub fn synonyms(&self) -> &SynonymMap {
        &self.synonyms
    }

    pub fn table(&self, entry: &VTagLeafEntry) -> &VersionTable {
        &self.tables[entry.vl.0]
    }

    /// Key a document was stored under.
    pub fn key_of(&self, doc_id: u64) -> Option<&str> {
        self.doc_keys.get(&doc_id).map(String::as_str)
    }

    /// Inserts a classified document with versions `1..=versions.len()`.
    ///
    /// When the key is taken by a document with identical metadata the
    /// versions are appended after that document's latest version. A key
    /// taken by a different document is disambiguated as `key|doc_id`.
    /// Returns the key the document was stored under.
    pub fn insert(
        &mut self,
        doc: &ClassifiedDocument,
        meta: &DocumentMeta,
        versions: &[String],
    ) -> Result<String> {
        if versions.is_empty() {
            return Err(Error::InvalidSpec(format!(
                "document {} has no versions",
                meta.doc_id
            )));
        }
        if let Some(existing) = self.doc_keys.get(&meta.doc_id) {
            let same = self.tree.get(existing).is_some_and(|e| e.meta == *meta);
            if !same {
                return Err(Error::DuplicateDocId(meta.doc_id));
            }
        }

        let mut key = doc.key.clone();
        for attempt in 0..2 {
            match self.tree.get(&key) {
                None => break,
                Some(e) if e.meta == *meta => {
                    let vl = e.vl;
                    self.append_versions(vl, versions);
                    return Ok(key);
                }
                Some(_) if attempt == 0 => key = format!("{key}|{}", meta.doc_id),
                Some(_) => return Err(Error::DuplicateDocId(meta.doc_id)),
            }
        }

        let vl = TableId(self.tables.len());
        self.tables
            .push(VersionTable::with_capacity(versions.len()));
        self.append_versions(vl, versions);
        let entry = VTagLeafEntry {
            key: key.clone(),
            meta: meta.clone(),
            vl,
        };
        if self.tree.insert(entry).is_err() {
            unreachable!("key {key} checked absent");
        }
        self.doc_keys.insert(meta.doc_id, key.clone());
        Ok(key)
    }

    fn append_versions(&mut self, vl: TableId, versions: &[String]) {
        let table = &mut self.tables[vl.0];
        let base = table.latest();
        for (i, text) in versions.iter().enumerate() {
            let r = ContentRef {
                offset: self.contents.len() as u64,
                len: text.len() as u64,
            };
            self.contents.push_str(text);
            table.put(base + i as u32 + 1, r);
        }
    }

    fn content(&self, r: ContentRef) -> &str {
        &self.contents[r.offset as usize..(r.offset + r.len) as usize]
    }

    /// Locates the leaf entry for the first query pattern with a matching
    /// context. Among entries sharing that context an exact key match wins,
    /// otherwise the smallest key.
    pub fn find(&self, patterns: &[Pattern], stats: &mut RetrievalStats) -> Result<&VTagLeafEntry> {
        let mut nearest = None;
        for p in patterns {
            let (hit, near) = self.find_pattern(p, stats);
            if let Some(e) = hit {
                return Ok(e);
            }
            nearest = nearest.or(near);
        }
        Err(Error::NotFound {
            query: patterns
                .first()
                .map(|p| p.context.join(" "))
                .unwrap_or_default(),
            nearest,
        })
    }

    fn find_pattern(
        &self,
        p: &Pattern,
        stats: &mut RetrievalStats,
    ) -> (Option<&VTagLeafEntry>, Option<String>) {
        let mut visits = 0;
        let prefix = p.context_key();
        let key = p.key();
        stats.descents += 1;
        let mut cursor = Some(self.tree.seek(&prefix, &mut visits));
        let mut first = None;
        let mut nearest = None;
        while let Some(c) = cursor {
            let Some(e) = self.tree.entry_at(c) else { break };
            if !e.key.starts_with(&prefix) {
                nearest.get_or_insert_with(|| e.key.clone());
                break;
            }
            if e.key == key || e.key.strip_prefix(&key).is_some_and(|r| r.starts_with('|')) {
                first = Some(e);
                break;
            }
            first.get_or_insert(e);
            cursor = self.tree.advance(c, &mut visits);
        }
        stats.node_visits += u64::from(visits);
        (first, nearest)
    }

    fn lookup(
        &self,
        entry: &VTagLeafEntry,
        vid: u32,
        stats: &mut RetrievalStats,
    ) -> RetrievalResult {
        let vtp = self.table(entry);
        let probe = vtp.probe(vid);
        stats.lookups += 1;
        stats.probes += u64::from(probe.probes);
        let (m, r, exact) = match probe.slot.and_then(|s| vtp.slot(s)) {
            Some((v, r)) => (v, r, true),
            None => {
                let n = vtp.latest();
                let latest = vtp.get(n).expect("latest version is stored");
                (n, latest, false)
            }
        };
        stats.max_version_read = stats.max_version_read.max(m);
        RetrievalResult {
            doc_id: entry.meta.doc_id,
            m,
            content: self.content(r).to_string(),
            exact,
        }
    }

    pub fn find_bv(&self, query: &str, vid: u32) -> Result<RetrievalResult> {
        self.find_bv_traced(query, vid).map(|(r, _)| r)
    }

    /// Version-based retrieval: identify the document through its context,
    /// follow the leaf's version-table pointer, and return version `vid`, or
    /// the latest version when `vid` is absent.
    pub fn find_bv_traced(&self, query: &str, vid: u32) -> Result<(RetrievalResult, RetrievalStats)> {
        if vid < 1 {
            return Err(Error::InvalidVersion(vid));
        }
        let qb = query_to_pattern(query, Some(&self.synonyms))?;
        let mut stats = RetrievalStats::default();
        let result = self.find(&qb, &mut stats)?;
        let found = self.lookup(result, vid, &mut stats);
        Ok((found, stats))
    }

    /// One descent, then one table lookup per requested version.
    pub fn find_bv_many(
        &self,
        query: &str,
        vids: &[u32],
    ) -> Result<(Vec<RetrievalResult>, RetrievalStats)> {
        if let Some(&bad) = vids.iter().find(|&&v| v < 1) {
            return Err(Error::InvalidVersion(bad));
        }
        let qb = query_to_pattern(query, Some(&self.synonyms))?;
        let mut stats = RetrievalStats::default();
        let result = self.find(&qb, &mut stats)?;
        let found = vids
            .iter()
            .map(|&vid| self.lookup(result, vid, &mut stats))
            .collect();
        Ok((found, stats))
    }

    /// Hash of the full structural state; equal before and after any number
    /// of reads.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.tree.hash(&mut h);
        self.tables.hash(&mut h);
        self.contents.hash(&mut h);
        self.synonyms.hash(&mut h);
        h.finish()
    }
}

impl VersionRetriever for VTagIndex {
    fn method(&self) -> Method {
        Method::Vtag
    }

    fn retrieve(&self, query: &str, vid: u32) -> Result<(RetrievalResult, RetrievalStats)> {
        self.find_bv_traced(query, vid)
    }

    fn retrieve_many(
        &self,
        query: &str,
        vids: &[u32],
    ) -> Result<(Vec<RetrievalResult>, RetrievalStats)> {
        self.find_bv_many(query, vids)
    }
}
