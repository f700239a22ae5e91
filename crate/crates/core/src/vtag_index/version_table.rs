use serde::{Deserialize, Serialize};

/// `2^32 / φ`, the 32-bit Fibonacci hashing multiplier.
pub const FIBONACCI_MULTIPLIER: u32 = 2_654_435_769;

// Grow before count / capacity would exceed 7/10.
const MAX_LOAD_NUM: usize = 7;
const MAX_LOAD_DEN: usize = 10;

/// Location of one version's bytes in the index's content store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContentRef {
    pub offset: u64,
    pub len: u64,
}

/// Outcome of a table lookup: the slot holding the version, if any, and the
/// number of slots examined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Probe {
    pub slot: Option<usize>,
    pub probes: u32,
}

/// Home slot of `vid` in a table of `2^bits` slots: the top `bits` bits of
/// `vid * 2654435769 mod 2^32`.
pub fn home_slot(vid: u32, bits: u32) -> usize {
    if bits == 0 {
        return 0;
    }
    (vid.wrapping_mul(FIBONACCI_MULTIPLIER) >> (32 - bits)) as usize
}

/// Open-addressed (linear probing) map from version id to content
/// reference for a single document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VersionTable {
    slots: Vec<Option<(u32, ContentRef)>>,
    bits: u32,
    count: usize,
    latest: u32,
}

impl Default for VersionTable {
    fn default() -> Self {
        Self::with_capacity(0)
    }
}

impl VersionTable {
    /// A table able to hold `n` versions without growing.
    pub fn with_capacity(n: usize) -> Self {
        let mut bits = 1;
        while (1usize << bits) * MAX_LOAD_NUM < n * MAX_LOAD_DEN {
            bits += 1;
        }
        Self {
            slots: vec![None; 1 << bits],
            bits,
            count: 0,
            latest: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Latest (highest) version id stored, `0` when empty.
    pub fn latest(&self) -> u32 {
        self.latest
    }

    pub fn load_factor(&self) -> f64 {
        self.count as f64 / self.capacity() as f64
    }

    /// Stores `r` under `vid` (which must be at least 1), returning the
    /// reference it replaced.
    pub fn put(&mut self, vid: u32, r: ContentRef) -> Option<ContentRef> {
        assert!(vid >= 1, "version ids start at 1");
        if let Some(slot) = self.probe(vid).slot {
            let old = self.slots[slot].replace((vid, r));
            return old.map(|(_, r)| r);
        }
        if (self.count + 1) * MAX_LOAD_DEN > self.capacity() * MAX_LOAD_NUM {
            self.grow();
        }
        let mut slot = home_slot(vid, self.bits);
        while self.slots[slot].is_some() {
            slot = (slot + 1) & (self.capacity() - 1);
        }
        self.slots[slot] = Some((vid, r));
        self.count += 1;
        self.latest = self.latest.max(vid);
        None
    }

    /// Slot index holding `vid`, or `None` when it is absent.
    pub fn hash(&self, vid: u32) -> Option<usize> {
        self.probe(vid).slot
    }

    pub fn probe(&self, vid: u32) -> Probe {
        let mask = self.capacity() - 1;
        let mut slot = home_slot(vid, self.bits);
        let mut probes = 0;
        loop {
            probes += 1;
            match self.slots[slot] {
                Some((v, _)) if v == vid => {
                    return Probe {
                        slot: Some(slot),
                        probes,
                    }
                }
                Some(_) => slot = (slot + 1) & mask,
                None => return Probe { slot: None, probes },
            }
        }
    }

    pub fn get(&self, vid: u32) -> Option<ContentRef> {
        self.slot(self.hash(vid)?).map(|(_, r)| r)
    }

    pub fn slot(&self, index: usize) -> Option<(u32, ContentRef)> {
        self.slots.get(index).copied().flatten()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, ContentRef)> + '_ {
        self.slots.iter().filter_map(|s| *s)
    }

    fn grow(&mut self) {
        let old = std::mem::take(&mut self.slots);
        self.bits += 1;
        self.slots = vec![None; 1 << self.bits];
        let mask = self.capacity() - 1;
        for (vid, r) in old.into_iter().flatten() {
            let mut slot = home_slot(vid, self.bits);
            while self.slots[slot].is_some() {
                slot = (slot + 1) & mask;
            }
            self.slots[slot] = Some((vid, r));
        }
    }

    /// Structural check used by index loading and tests.
    pub(crate) fn validate(&self) -> Result<(), String> {
        if !self.capacity().is_power_of_two() || self.capacity() != 1 << self.bits {
            return Err(format!("capacity {} is not 2^{}", self.capacity(), self.bits));
        }
        let stored: Vec<_> = self.iter().collect();
        if stored.len() != self.count {
            return Err(format!("count {} but {} occupied slots", self.count, stored.len()));
        }
        if self.count * MAX_LOAD_DEN > self.capacity() * MAX_LOAD_NUM {
            return Err(format!("load {} above 0.7", self.load_factor()));
        }
        let max = stored.iter().map(|(v, _)| *v).max().unwrap_or(0);
        if max != self.latest {
            return Err(format!("latest {} but max stored vid {max}", self.latest));
        }
        for (vid, r) in stored {
            if vid == 0 || self.get(vid) != Some(r) {
                return Err(format!("vid {vid} is not reachable from its home slot"));
            }
        }
        Ok(())
    }
}
