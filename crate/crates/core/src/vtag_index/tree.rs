//! B+-tree keyed by pattern keys.
//!
//! Nodes live in an arena and refer to each other by index. Internal nodes
//! keep one key per child, the smallest key stored under that child, so a
//! node never holds more than `fanout` keys. Leaves are chained left to
//! right.

use serde::{Deserialize, Serialize};

use crate::corpus::DocumentMeta;
use crate::error::{Error, Result};

pub const DEFAULT_FANOUT: usize = 32;

pub type NodeId = usize;

/// Handle of a version table owned by the index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TableId(pub usize);

/// A leaf bucket: the document's metadata plus its version-table handle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VTagLeafEntry {
    pub key: String,
    pub meta: DocumentMeta,
    pub vl: TableId,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
enum Node {
    Internal {
        keys: Vec<String>,
        children: Vec<NodeId>,
    },
    Leaf {
        entries: Vec<VTagLeafEntry>,
        next: Option<NodeId>,
    },
}

/// A position in the leaf level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cursor {
    pub leaf: NodeId,
    pub pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VTagTree {
    nodes: Vec<Node>,
    head: NodeId,
    fanout: usize,
    height: usize,
    len: usize,
}

impl Default for VTagTree {
    fn default() -> Self {
        Self::new(DEFAULT_FANOUT).expect("default fanout is valid")
    }
}

impl VTagTree {
    pub fn new(fanout: usize) -> Result<Self> {
        if fanout < 3 {
            return Err(Error::InvalidFanout(fanout));
        }
        Ok(Self {
            nodes: vec![Node::Leaf {
                entries: Vec::new(),
                next: None,
            }],
            head: 0,
            fanout,
            height: 1,
            len: 0,
        })
    }

    pub fn fanout(&self) -> usize {
        self.fanout
    }

    /// Number of levels; a lone leaf root has height 1.
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn min_occupancy(&self) -> usize {
        self.fanout.div_ceil(2)
    }

    /// Inserts `entry` under `entry.key`. Keys are unique; an existing key is
    /// reported back, never overwritten.
    pub fn insert(&mut self, entry: VTagLeafEntry) -> std::result::Result<(), VTagLeafEntry> {
        let head = self.head;
        if let Some((sep, right)) = self.insert_at(head, entry)? {
            let left_min = self.min_key(head).to_string();
            self.nodes.push(Node::Internal {
                keys: vec![left_min, sep],
                children: vec![head, right],
            });
            self.head = self.nodes.len() - 1;
            self.height += 1;
        }
        self.len += 1;
        Ok(())
    }

    fn min_key(&self, id: NodeId) -> &str {
        match &self.nodes[id] {
            Node::Internal { keys, .. } => &keys[0],
            Node::Leaf { entries, .. } => &entries[0].key,
        }
    }

    /// Returns the separator and id of a new right sibling when `id` split.
    fn insert_at(
        &mut self,
        id: NodeId,
        entry: VTagLeafEntry,
    ) -> std::result::Result<Option<(String, NodeId)>, VTagLeafEntry> {
        let fanout = self.fanout;
        let new_id = self.nodes.len();
        match &mut self.nodes[id] {
            Node::Leaf { entries, next } => {
                let pos = match entries.binary_search_by(|e| e.key.as_str().cmp(&entry.key)) {
                    Ok(_) => return Err(entry),
                    Err(pos) => pos,
                };
                entries.insert(pos, entry);
                if entries.len() <= fanout {
                    return Ok(None);
                }
                let right = entries.split_off(entries.len().div_ceil(2));
                let sep = right[0].key.clone();
                let right_next = next.replace(new_id);
                self.nodes.push(Node::Leaf {
                    entries: right,
                    next: right_next,
                });
                Ok(Some((sep, new_id)))
            }
            Node::Internal { keys, children } => {
                let idx = keys
                    .partition_point(|k| k.as_str() <= entry.key.as_str())
                    .saturating_sub(1);
                if entry.key < keys[0] {
                    keys[0] = entry.key.clone();
                }
                let child = children[idx];
                let Some((sep, right)) = self.insert_at(child, entry)? else {
                    return Ok(None);
                };
                let new_id = self.nodes.len();
                let Node::Internal { keys, children } = &mut self.nodes[id] else {
                    unreachable!()
                };
                keys.insert(idx + 1, sep);
                children.insert(idx + 1, right);
                if children.len() <= fanout {
                    return Ok(None);
                }
                let mid = children.len().div_ceil(2);
                let right_keys = keys.split_off(mid);
                let right_children = children.split_off(mid);
                let sep = right_keys[0].clone();
                self.nodes.push(Node::Internal {
                    keys: right_keys,
                    children: right_children,
                });
                Ok(Some((sep, new_id)))
            }
        }
    }

    /// Descends to the first entry whose key is `>= key`, counting every
    /// node touched in `visits`. The cursor may sit one past the end of the
    /// last leaf.
    pub fn seek(&self, key: &str, visits: &mut u32) -> Cursor {
        let mut id = self.head;
        loop {
            *visits += 1;
            match &self.nodes[id] {
                Node::Internal { keys, children } => {
                    let idx = keys
                        .partition_point(|k| k.as_str() <= key)
                        .saturating_sub(1);
                    id = children[idx];
                }
                Node::Leaf { entries, next } => {
                    let pos = entries.partition_point(|e| e.key.as_str() < key);
                    if pos == entries.len() {
                        if let Some(n) = next {
                            *visits += 1;
                            return Cursor { leaf: *n, pos: 0 };
                        }
                    }
                    return Cursor { leaf: id, pos };
                }
            }
        }
    }

    /// Entry under the cursor, if any.
    pub fn entry_at(&self, c: Cursor) -> Option<&VTagLeafEntry> {
        match &self.nodes[c.leaf] {
            Node::Leaf { entries, .. } => entries.get(c.pos),
            Node::Internal { .. } => None,
        }
    }

    /// Moves one entry to the right, following the leaf chain. Crossing into
    /// a new leaf counts as a node visit.
    pub fn advance(&self, c: Cursor, visits: &mut u32) -> Option<Cursor> {
        let Node::Leaf { entries, next } = &self.nodes[c.leaf] else {
            return None;
        };
        if c.pos + 1 < entries.len() {
            return Some(Cursor {
                leaf: c.leaf,
                pos: c.pos + 1,
            });
        }
        let n = (*next)?;
        *visits += 1;
        Some(Cursor { leaf: n, pos: 0 })
    }

    pub fn get(&self, key: &str) -> Option<&VTagLeafEntry> {
        let mut visits = 0;
        self.entry_at(self.seek(key, &mut visits))
            .filter(|e| e.key == key)
    }

    /// Entries in key order, following the leaf chain from the leftmost leaf.
    pub fn iter(&self) -> impl Iterator<Item = &VTagLeafEntry> + '_ {
        let mut id = self.head;
        while let Node::Internal { children, .. } = &self.nodes[id] {
            id = children[0];
        }
        let mut leaf = Some(id);
        std::iter::from_fn(move || {
            let Node::Leaf { entries, next } = &self.nodes[leaf?] else {
                return None;
            };
            leaf = *next;
            Some(entries.iter())
        })
        .flatten()
    }

    /// Full walk checking occupancy, key order, separator keys, uniform leaf
    /// depth and leaf chaining.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut leaves = Vec::new();
        let count = self.check_node(self.head, 1, None, &mut leaves)?;
        if count != self.len {
            return Err(format!("len {} but {count} entries reachable", self.len));
        }
        for pair in leaves.windows(2) {
            let Node::Leaf { next, .. } = &self.nodes[pair[0]] else {
                unreachable!()
            };
            if *next != Some(pair[1]) {
                return Err(format!("leaf {} is not chained to leaf {}", pair[0], pair[1]));
            }
        }
        if let Some(&last) = leaves.last() {
            if let Node::Leaf { next: Some(n), .. } = &self.nodes[last] {
                return Err(format!("last leaf {last} chains to {n}"));
            }
        }
        let keys: Vec<&str> = self.iter().map(|e| e.key.as_str()).collect();
        if keys.len() != self.len || keys.windows(2).any(|w| w[0] >= w[1]) {
            return Err("leaf chain is not in strictly increasing key order".into());
        }
        Ok(())
    }

    fn check_node(
        &self,
        id: NodeId,
        depth: usize,
        expected_min: Option<&str>,
        leaves: &mut Vec<NodeId>,
    ) -> std::result::Result<usize, String> {
        let is_root = id == self.head;
        match &self.nodes[id] {
            Node::Leaf { entries, .. } => {
                if depth != self.height {
                    return Err(format!("leaf {id} at depth {depth}, height {}", self.height));
                }
                if entries.len() > self.fanout
                    || (!is_root && entries.len() < self.min_occupancy())
                {
                    return Err(format!("leaf {id} holds {} entries", entries.len()));
                }
                if entries.windows(2).any(|w| w[0].key >= w[1].key) {
                    return Err(format!("leaf {id} keys not strictly increasing"));
                }
                if let (Some(min), Some(first)) = (expected_min, entries.first()) {
                    if first.key != min {
                        return Err(format!("leaf {id} starts at {:?}, parent says {min:?}", first.key));
                    }
                }
                leaves.push(id);
                Ok(entries.len())
            }
            Node::Internal { keys, children } => {
                let n = children.len();
                let lo = if is_root { 2 } else { self.min_occupancy() };
                if n < lo || n > self.fanout || keys.len() != n {
                    return Err(format!("internal {id} has {n} children, {} keys", keys.len()));
                }
                if keys.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(format!("internal {id} keys not strictly increasing"));
                }
                if let Some(min) = expected_min {
                    if keys[0] != min {
                        return Err(format!("internal {id} min {:?}, parent says {min:?}", keys[0]));
                    }
                }
                let mut total = 0;
                for (k, &child) in keys.iter().zip(children) {
                    total += self.check_node(child, depth + 1, Some(k), leaves)?;
                }
                Ok(total)
            }
        }
    }
}
