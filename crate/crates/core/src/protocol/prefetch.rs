use super::{ItemId, PeerState};
use crate::graphgen::SocialGraph;

/// Idle-time prefetch decision. Walks `ranked` (best first, as produced by
/// demand prediction) and returns the first item some buddy can supply.
/// Nothing starts while the peer has an active download or while `cap`
/// concurrent prefetchers are already running.
pub fn prefetch_tick(
    peer: &PeerState,
    graph: &SocialGraph,
    peers: &[PeerState],
    ranked: impl IntoIterator<Item = ItemId>,
    cap: Option<usize>,
    active_prefetchers: usize,
) -> Option<ItemId> {
    if peer.seeder || !peer.active_downloads.is_empty() {
        return None;
    }
    if cap.is_some_and(|c| active_prefetchers >= c) {
        return None;
    }
    let buddies = graph.neighbors(peer.peer_id as usize);
    ranked
        .into_iter()
        .filter(|&item| !peer.cache.has_complete(item))
        .find(|&item| buddies.iter().any(|&b| peers[b].can_offer(peer, item)))
}
