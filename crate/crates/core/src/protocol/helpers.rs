use thiserror::Error;

use super::{ItemId, PeerId, PeerState};
use crate::graphgen::SocialGraph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HelperError {
    #[error("peer {helper} is not a buddy of {downloader}")]
    NotBuddy { downloader: PeerId, helper: PeerId },
}

/// How a buddy supports a download.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum HelperRole {
    /// Already holds pieces (typically captured from a broadcast) and pushes
    /// them with its full upload bandwidth.
    Cached,
    /// 2Fast-style: fetches missing pieces from third parties and forwards
    /// them, spending half its upload on reciprocation.
    Fetching,
}

impl HelperRole {
    /// Share of the helper's upload dedicated to the downloader.
    pub fn upload_share(self) -> f64 {
        match self {
            HelperRole::Cached => 1.0,
            HelperRole::Fetching => 0.5,
        }
    }
}

/// Admits `buddy` as a helper for `downloader`'s fetch of `item`. Returns
/// `None` when the buddy holds nothing useful and fetching help is disabled.
pub fn register_helper(
    graph: &SocialGraph,
    downloader: &mut PeerState,
    buddy: &PeerState,
    item: ItemId,
    allow_fetching: bool,
) -> Result<Option<HelperRole>, HelperError> {
    if !graph.has_edge(downloader.peer_id as usize, buddy.peer_id as usize) {
        return Err(HelperError::NotBuddy {
            downloader: downloader.peer_id,
            helper: buddy.peer_id,
        });
    }
    let role = if buddy.can_offer(downloader, item) {
        HelperRole::Cached
    } else if allow_fetching && !buddy.seeder {
        HelperRole::Fetching
    } else {
        return Ok(None);
    };
    let list = downloader.helpers.entry(item).or_default();
    if !list.contains(&buddy.peer_id) {
        list.push(buddy.peer_id);
    }
    Ok(Some(role))
}

/// Picks up to `max_helpers` buddies of `downloader` for `item`: sat-enabled
/// buddies holding useful pieces first, then other buddies holding pieces
/// (more pieces first), then fetching helpers among buddies passing `may_fetch`.
pub fn recruit_helpers(
    graph: &SocialGraph,
    peers: &[PeerState],
    downloader: PeerId,
    item: ItemId,
    max_helpers: usize,
    may_fetch: impl Fn(&PeerState) -> bool,
) -> Vec<(PeerId, HelperRole)> {
    let me = &peers[downloader as usize];
    let mut ranked: Vec<(u8, u32, PeerId, HelperRole)> = graph
        .neighbors(downloader as usize)
        .iter()
        .filter_map(|&b| {
            let buddy = &peers[b];
            if buddy.can_offer(me, item) {
                let useful = match (buddy.cache.pieces(item), me.cache.pieces(item)) {
                    (Some(theirs), Some(mine)) => theirs.count_not_in(mine),
                    (Some(theirs), None) => theirs.count(),
                    _ => 0,
                };
                let class = if buddy.sat_enabled { 0 } else { 1 };
                Some((class, u32::MAX - useful, b as PeerId, HelperRole::Cached))
            } else if !buddy.seeder && may_fetch(buddy) {
                Some((2, 0, b as PeerId, HelperRole::Fetching))
            } else {
                None
            }
        })
        .collect();
    ranked.sort();
    ranked
        .into_iter()
        .take(max_helpers)
        .map(|(_, _, p, r)| (p, r))
        .collect()
}
