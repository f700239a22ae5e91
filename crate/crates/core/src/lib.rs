//! Multi-version document retrieval.
//!
//! Documents are classified by a `<prefix> <context> <suffix>` pattern built
//! from their title and indexed in a B+-tree whose leaf entries point at a
//! per-document hash table of versions ([`vtag_index`]). Two reconstruction
//! baselines, edit-script replay and reference records, live in
//! [`baselines`]; [`bench`] compares all three.

pub mod baselines;
pub mod bench;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod pattern;
pub mod retrieval;
pub mod vtag_index;

pub use error::{Error, Result};
pub use retrieval::{Method, RetrievalResult, RetrievalStats, VersionRetriever};
