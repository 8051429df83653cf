use std::collections::BTreeMap;

use super::PeerId;
use crate::prefs::PreferenceProfile;

/// Deduplicated profile digest assembled at the uplink station.
pub type ProfileDigest = BTreeMap<PeerId, PreferenceProfile>;

/// Collapses uplink submissions into one entry per peer; later submissions
/// replace earlier ones.
pub fn buddy_broadcast_aggregate<'a>(
    inbox: impl IntoIterator<Item = &'a (PeerId, PreferenceProfile)>,
) -> ProfileDigest {
    let mut digest = ProfileDigest::new();
    for (peer, profile) in inbox {
        digest.insert(*peer, profile.clone());
    }
    digest
}
