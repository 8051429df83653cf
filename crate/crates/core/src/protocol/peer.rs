use std::collections::{BTreeMap, BTreeSet};

use super::{Cache, ItemId, PeerId};

/// Protocol-level state of one peer.
#[derive(Debug, Clone, PartialEq)]
pub struct PeerState {
    pub peer_id: PeerId,
    pub sat_enabled: bool,
    /// Initial seeders hold every item and never request anything.
    pub seeder: bool,
    pub cache: Cache,
    /// Items the user has finished downloading at some point.
    pub completed: BTreeSet<ItemId>,
    /// Items currently being fetched (user request, prefetch or help).
    pub active_downloads: BTreeSet<ItemId>,
    /// Helping buddies per item this peer is downloading.
    pub helpers: BTreeMap<ItemId, Vec<PeerId>>,
    /// Simulation second at which the user issues the next request.
    pub idle_until: u64,
}

impl PeerState {
    pub fn new(peer_id: PeerId, sat_enabled: bool, cache_capacity_bytes: u64) -> Self {
        PeerState {
            peer_id,
            sat_enabled,
            seeder: false,
            cache: Cache::new(cache_capacity_bytes),
            completed: BTreeSet::new(),
            active_downloads: BTreeSet::new(),
            helpers: BTreeMap::new(),
            idle_until: 0,
        }
    }

    /// Holds a complete copy of `item` and is not fetching it.
    pub fn is_seeding(&self, item: ItemId) -> bool {
        self.cache.has_complete(item) && !self.active_downloads.contains(&item)
    }

    /// Holds at least one piece of `item` that `other` lacks.
    pub fn can_offer(&self, other: &PeerState, item: ItemId) -> bool {
        match (self.cache.pieces(item), other.cache.pieces(item)) {
            (Some(mine), Some(theirs)) => mine.has_any_not_in(theirs),
            (Some(mine), None) => !mine.is_empty(),
            _ => false,
        }
    }

    /// Is actively fetching `item` and `other` can supply a missing piece.
    pub fn needs_from(&self, other: &PeerState, item: ItemId) -> bool {
        self.active_downloads.contains(&item) && other.can_offer(self, item)
    }
}
