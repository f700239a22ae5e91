//! On-disk index: `index.bin` (bincode-encoded tree, tables and synonyms)
//! next to `contents.bin` (the raw content store).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{VTagIndex, VTagTree, VersionTable};
use crate::error::{Error, Result};
use crate::pattern::SynonymMap;

pub const INDEX_FILE: &str = "index.bin";
pub const CONTENTS_FILE: &str = "contents.bin";
const MAGIC: [u8; 8] = *b"VTAGIDX1";

#[derive(Serialize, Deserialize)]
struct IndexFile {
    magic: [u8; 8],
    tree: VTagTree,
    tables: Vec<VersionTable>,
    synonyms: SynonymMap,
    doc_keys: Vec<(u64, String)>,
}

impl VTagIndex {
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut doc_keys: Vec<_> = self
            .doc_keys
            .iter()
            .map(|(id, k)| (*id, k.clone()))
            .collect();
        doc_keys.sort_unstable();
        let file = IndexFile {
            magic: MAGIC,
            tree: self.tree.clone(),
            tables: self.tables.clone(),
            synonyms: self.synonyms.clone(),
            doc_keys,
        };
        let path = dir.join(INDEX_FILE);
        let bytes = bincode::serialize(&file).map_err(|e| Error::CorruptIndex {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        let path = dir.join(CONTENTS_FILE);
        fs::write(&path, self.contents.as_bytes()).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(INDEX_FILE);
        let corrupt = |reason: String| Error::CorruptIndex {
            path: path.clone(),
            reason,
        };
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let file: IndexFile = bincode::deserialize(&bytes).map_err(|e| corrupt(e.to_string()))?;
        if file.magic != MAGIC {
            return Err(corrupt("not a VTAG index".into()));
        }
        let contents_path = dir.join(CONTENTS_FILE);
        let raw = fs::read(&contents_path).map_err(|e| Error::io(&contents_path, e))?;
        let contents = String::from_utf8(raw).map_err(|_| Error::CorruptIndex {
            path: contents_path.clone(),
            reason: "content store is not UTF-8".into(),
        })?;

        file.tree.check_invariants().map_err(corrupt)?;
        for entry in file.tree.iter() {
            let table = file
                .tables
                .get(entry.vl.0)
                .ok_or_else(|| corrupt(format!("entry {:?} has no version table", entry.key)))?;
            table.validate().map_err(corrupt)?;
            if table.is_empty() {
                return Err(corrupt(format!("entry {:?} has no versions", entry.key)));
            }
            for (vid, r) in table.iter() {
                let end = r.offset.checked_add(r.len);
                let in_bounds = end.is_some_and(|end| end as usize <= contents.len())
                    && contents.is_char_boundary(r.offset as usize)
                    && contents.is_char_boundary((r.offset + r.len) as usize);
                if !in_bounds {
                    return Err(corrupt(format!("version {vid} of {:?} points outside the content store", entry.key)));
                }
            }
        }

        Ok(Self {
            tree: file.tree,
            tables: file.tables,
            contents,
            synonyms: file.synonyms,
            doc_keys: file.doc_keys.into_iter().collect(),
        })
    }
}
