//! Corpus directory layout:
//!
//! ```text
//! manifest.tsv            doc_id \t n \t title \t author \t edition \t publisher \t year
//! docs/<doc_id>/v<k>.txt  raw content of version k, k = 1..n
//! ```

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use super::{Corpus, DocumentMeta, VersionedDocument};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.tsv";

fn version_path(root: &Path, doc_id: u64, vid: u32) -> PathBuf {
    root.join("docs")
        .join(doc_id.to_string())
        .join(format!("v{vid}.txt"))
}

pub fn store_corpus(corpus: &Corpus, root: &Path) -> Result<()> {
    let mut manifest = String::new();
    for doc in corpus.documents() {
        let m = &doc.meta;
        for (field, value) in [
            ("title", &m.title),
            ("author", &m.author),
            ("publisher", &m.publisher),
        ] {
            if value.contains(['\t', '\n', '\r']) {
                return Err(Error::UnstorableField {
                    doc_id: m.doc_id,
                    field,
                    reason: "contains a tab or line break".into(),
                });
            }
        }
        manifest.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            m.doc_id,
            doc.latest(),
            m.title,
            m.author,
            m.edition,
            m.publisher,
            m.year
        ));

        let dir = root.join("docs").join(m.doc_id.to_string());
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for (i, content) in doc.versions().iter().enumerate() {
            let path = version_path(root, m.doc_id, i as u32 + 1);
            fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        }
    }
    let path = root.join(MANIFEST_FILE);
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))
}

pub fn load_corpus(root: &Path) -> Result<Corpus> {
    let manifest_path = root.join(MANIFEST_FILE);
    let manifest = match fs::read_to_string(&manifest_path) {
        Ok(s) => s,
        Err(e) if e.kind() == ErrorKind::NotFound => {
            return Err(Error::ManifestMissing(manifest_path))
        }
        Err(e) => return Err(Error::io(manifest_path, e)),
    };

    let body = manifest.strip_suffix('\n').unwrap_or(&manifest);
    let mut documents = Vec::new();
    if body.is_empty() {
        return Corpus::new(documents);
    }
    for (i, line) in body.split('\n').enumerate() {
        let line_no = i + 1;
        let (meta, n) = parse_manifest_line(line).map_err(|reason| Error::MalformedManifest {
            line: line_no,
            reason,
        })?;
        let mut versions = Vec::with_capacity(n as usize);
        for vid in 1..=n {
            let path = version_path(root, meta.doc_id, vid);
            match fs::read_to_string(&path) {
                Ok(s) => versions.push(s),
                Err(e) if e.kind() == ErrorKind::NotFound => {
                    return Err(Error::DanglingVersion {
                        doc_id: meta.doc_id,
                        vid,
                    })
                }
                Err(e) => return Err(Error::io(path, e)),
            }
        }
        documents.push(VersionedDocument::new(meta, versions).map_err(|e| {
            Error::MalformedManifest {
                line: line_no,
                reason: e.to_string(),
            }
        })?);
    }
    Corpus::new(documents)
}

fn parse_manifest_line(line: &str) -> std::result::Result<(DocumentMeta, u32), String> {
    let fields: Vec<&str> = line.split('\t').collect();
    let [doc_id, n, title, author, edition, publisher, year] = fields[..] else {
        return Err(format!("expected 7 tab-separated fields, found {}", fields.len()));
    };
    fn num<T: std::str::FromStr>(name: &str, s: &str) -> std::result::Result<T, String> {
        s.parse().map_err(|_| format!("{name} {s:?} is not a valid number"))
    }
    let n: u32 = num("n", n)?;
    if n == 0 {
        return Err("n must be at least 1".into());
    }
    let edition: u32 = num("edition", edition)?;
    if edition == 0 {
        return Err("edition must be positive".into());
    }
    if title.trim().is_empty() {
        return Err("title is empty".into());
    }
    Ok((
        DocumentMeta {
            doc_id: num("doc_id", doc_id)?,
            title: title.to_string(),
            author: author.to_string(),
            edition,
            publisher: publisher.to_string(),
            year: num("year", year)?,
        },
        n,
    ))
}
