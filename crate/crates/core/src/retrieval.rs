//! The retrieval contract shared by the VTAG index and the baselines.

use std::fmt;
use std::str::FromStr;

use crate::error::Result;

/// One retrieved version. `exact` is false when the queried version did not
/// exist and the latest version `m = n` was returned instead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetrievalResult {
    pub doc_id: u64,
    pub m: u32,
    pub content: String,
    pub exact: bool,
}

/// Logical work performed by a retrieval.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RetrievalStats {
    /// Keys compared during a linear document scan.
    pub key_comparisons: u64,
    /// Tree nodes touched, including leaf-chain hops.
    pub node_visits: u64,
    /// Root-to-leaf searches started.
    pub descents: u64,
    /// Version-table lookups.
    pub lookups: u64,
    /// Version-table slots examined.
    pub probes: u64,
    /// Edit-script operations replayed.
    pub edit_ops: u64,
    /// Reference segments dereferenced into an earlier version.
    pub segments_resolved: u64,
    /// Literal segments copied out of reference records. Informational;
    /// not part of [`RetrievalStats::total`].
    pub literals_copied: u64,
    /// Highest version id whose reconstruction was read, 0 if none.
    pub max_version_read: u32,
}

impl RetrievalStats {
    /// The logical operation count reported by the benchmarks.
    pub fn total(&self) -> u64 {
        self.key_comparisons + self.node_visits + self.probes + self.edit_ops + self.segments_resolved
    }

    pub fn absorb(&mut self, other: &RetrievalStats) {
        self.key_comparisons += other.key_comparisons;
        self.node_visits += other.node_visits;
        self.descents += other.descents;
        self.lookups += other.lookups;
        self.probes += other.probes;
        self.edit_ops += other.edit_ops;
        self.segments_resolved += other.segments_resolved;
        self.literals_copied += other.literals_copied;
        self.max_version_read = self.max_version_read.max(other.max_version_read);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Vtag,
    Ebvr,
    Rbvr,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Vtag, Method::Ebvr, Method::Rbvr];

    pub fn name(self) -> &'static str {
        match self {
            Method::Vtag => "vtag",
            Method::Ebvr => "ebvr",
            Method::Rbvr => "rbvr",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vtag" => Ok(Method::Vtag),
            "ebvr" => Ok(Method::Ebvr),
            "rbvr" => Ok(Method::Rbvr),
            other => Err(format!("unknown method {other:?} (expected vtag, ebvr or rbvr)")),
        }
    }
}

/// Version retrieval by query text and version id.
pub trait VersionRetriever {
    fn method(&self) -> Method;

    /// Returns version `vid` of the document the query identifies, or its
    /// latest version when `vid` does not exist.
    fn retrieve(&self, query: &str, vid: u32) -> Result<(RetrievalResult, RetrievalStats)>;

    /// Retrieves several versions of one document in one call.
    fn retrieve_many(
        &self,
        query: &str,
        vids: &[u32],
    ) -> Result<(Vec<RetrievalResult>, RetrievalStats)>;
}
