use thiserror::Error;

use super::{ContentItem, ItemId, PieceSet};

/// Bytes of a cached item by how they arrived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PieceOrigin {
    pub friend: u64,
    pub non_friend: u64,
    pub broadcast: u64,
}

impl PieceOrigin {
    pub fn total(&self) -> u64 {
        self.friend + self.non_friend + self.broadcast
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CacheEntry {
    pub item: ItemId,
    pub size_bytes: u64,
    pub pieces: PieceSet,
    pub origin: PieceOrigin,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CacheError {
    #[error("item {item} ({size} bytes) exceeds cache capacity {capacity}")]
    TooLarge { item: ItemId, size: u64, capacity: u64 },
}

/// Result of an insertion: what got evicted and whether the new item stayed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InsertOutcome {
    pub evicted: Vec<ItemId>,
    pub inserted: bool,
}

/// Byte-bounded item store. Every item reserves its full size, even while
/// only partially present.
#[derive(Debug, Clone, PartialEq)]
pub struct Cache {
    entries: Vec<CacheEntry>,
    capacity_bytes: u64,
    used_bytes: u64,
}

impl Cache {
    pub fn new(capacity_bytes: u64) -> Self {
        Cache {
            entries: Vec::new(),
            capacity_bytes,
            used_bytes: 0,
        }
    }

    pub fn capacity(&self) -> u64 {
        self.capacity_bytes
    }

    pub fn used(&self) -> u64 {
        self.used_bytes
    }

    pub fn free(&self) -> u64 {
        self.capacity_bytes - self.used_bytes
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CacheEntry] {
        &self.entries
    }

    fn position(&self, item: ItemId) -> Result<usize, usize> {
        self.entries.binary_search_by_key(&item, |e| e.item)
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.position(item).is_ok()
    }

    pub fn get(&self, item: ItemId) -> Option<&CacheEntry> {
        self.position(item).ok().map(|i| &self.entries[i])
    }

    pub fn get_mut(&mut self, item: ItemId) -> Option<&mut CacheEntry> {
        self.position(item).ok().map(move |i| &mut self.entries[i])
    }

    pub fn pieces(&self, item: ItemId) -> Option<&PieceSet> {
        self.get(item).map(|e| &e.pieces)
    }

    pub fn has_complete(&self, item: ItemId) -> bool {
        self.get(item).is_some_and(|e| e.pieces.is_full())
    }

    /// Stores an already complete copy without eviction checks (initial
    /// seeders).
    pub fn insert_complete(&mut self, item: &ContentItem) {
        if let Err(pos) = self.position(item.item_id) {
            self.entries.insert(
                pos,
                CacheEntry {
                    item: item.item_id,
                    size_bytes: item.size_bytes,
                    pieces: PieceSet::full(item.piece_count()),
                    origin: PieceOrigin::default(),
                },
            );
            self.used_bytes += item.size_bytes;
        }
    }

    pub fn remove(&mut self, item: ItemId) -> Option<CacheEntry> {
        let pos = self.position(item).ok()?;
        let e = self.entries.remove(pos);
        self.used_bytes -= e.size_bytes;
        Some(e)
    }

    /// Lowest-interest evictable entry, ties to the smaller item id.
    pub fn eviction_candidate(
        &self,
        interest: impl Fn(ItemId) -> f64,
        protected: impl Fn(ItemId) -> bool,
    ) -> Option<(ItemId, f64)> {
        self.entries
            .iter()
            .filter(|e| !protected(e.item))
            .map(|e| (e.item, interest(e.item)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
    }

    /// Whether a broadcast of an item scored `score` is worth capturing:
    /// free room, or it beats the cheapest evictable entry.
    pub fn worth_capturing(
        &self,
        size_bytes: u64,
        score: f64,
        interest: impl Fn(ItemId) -> f64,
        protected: impl Fn(ItemId) -> bool,
    ) -> bool {
        if size_bytes > self.capacity_bytes {
            return false;
        }
        if self.free() >= size_bytes {
            return true;
        }
        self.eviction_candidate(interest, protected)
            .is_some_and(|(_, min)| score > min)
    }

    /// Inserts `item` (empty bitmap) and evicts lowest-interest entries until
    /// the cache fits. The new item competes like any other entry unless
    /// `protected` covers it; protected entries are never evicted, so the
    /// cache can stay over capacity when everything is protected.
    pub fn insert(
        &mut self,
        item: &ContentItem,
        interest: impl Fn(ItemId) -> f64,
        protected: impl Fn(ItemId) -> bool,
    ) -> Result<InsertOutcome, CacheError> {
        if item.size_bytes > self.capacity_bytes {
            return Err(CacheError::TooLarge {
                item: item.item_id,
                size: item.size_bytes,
                capacity: self.capacity_bytes,
            });
        }
        let mut out = InsertOutcome::default();
        if let Err(pos) = self.position(item.item_id) {
            self.entries.insert(
                pos,
                CacheEntry {
                    item: item.item_id,
                    size_bytes: item.size_bytes,
                    pieces: PieceSet::empty(item.piece_count()),
                    origin: PieceOrigin::default(),
                },
            );
            self.used_bytes += item.size_bytes;
        }
        while self.used_bytes > self.capacity_bytes {
            let Some((victim, _)) = self.eviction_candidate(&interest, &protected) else {
                break;
            };
            self.remove(victim);
            out.evicted.push(victim);
        }
        out.inserted = self.contains(item.item_id);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::MIB;

    fn item(id: ItemId) -> ContentItem {
        ContentItem::new(id, id, 10 * MIB, MIB)
    }

    #[test]
    fn plain_insert_when_room() {
        let mut c = Cache::new(100 * MIB);
        let out = c.insert(&item(1), |_| 0.0, |_| false).unwrap();
        assert!(out.inserted && out.evicted.is_empty());
        assert_eq!(c.used(), 10 * MIB);
    }

    #[test]
    fn evicts_minimum_score() {
        let mut c = Cache::new(20 * MIB);
        let score = |i: ItemId| [0.0, 0.5, 0.2, 0.9][i as usize];
        c.insert(&item(1), score, |_| false).unwrap();
        c.insert(&item(2), score, |_| false).unwrap();
        let out = c.insert(&item(3), score, |_| false).unwrap();
        assert_eq!(out.evicted, vec![2]);
        assert!(c.contains(1) && c.contains(3));
        // A newcomer that scores lowest is itself dropped.
        let out = c.insert(&item(0), score, |_| false).unwrap();
        assert!(!out.inserted);
        assert_eq!(out.evicted, vec![0]);
    }

    #[test]
    fn protected_never_evicted() {
        let mut c = Cache::new(20 * MIB);
        c.insert(&item(1), |_| 0.0, |_| false).unwrap();
        c.insert(&item(2), |_| 0.0, |_| false).unwrap();
        let out = c.insert(&item(3), |_| 0.0, |i| i == 1 || i == 3).unwrap();
        assert_eq!(out.evicted, vec![2]);
        assert!(c.contains(1));
    }

    #[test]
    fn too_large_rejected() {
        let mut c = Cache::new(5 * MIB);
        assert!(matches!(c.insert(&item(1), |_| 1.0, |_| false), Err(CacheError::TooLarge { .. })));
        assert!(c.is_empty());
    }
}
