use super::{CreditLedger, ItemId, PeerState, TransferKind};

/// Which incentive rules are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExchangePolicy {
    /// Buddies serve each other without tit-for-tat.
    pub buddy_service: bool,
    /// Persistent credits; when off, only seeders serve one-sidedly.
    pub credits: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExchangeDecision {
    /// Free service between buddies.
    BuddyServe,
    /// Piece for piece; balances untouched.
    Reciprocal,
    /// Downloader pays one credit per piece.
    PayCredit,
    /// Free one-sided seeding (credits disabled).
    FreeSeed,
    Refuse,
}

impl ExchangeDecision {
    pub fn kind(self) -> Option<TransferKind> {
        match self {
            ExchangeDecision::BuddyServe => Some(TransferKind::Buddy),
            ExchangeDecision::Reciprocal | ExchangeDecision::FreeSeed => Some(TransferKind::Reciprocal),
            ExchangeDecision::PayCredit => Some(TransferKind::Credit),
            ExchangeDecision::Refuse => None,
        }
    }
}

/// Whether `candidate` uploads `item` to strangers at all: while it is in
/// the item's swarm, as an initial seeder, or, with credits on, while its
/// balance is negative and it holds a complete copy to earn credits with.
pub fn serves_strangers(candidate: &PeerState, item: ItemId, ledger: &CreditLedger, credits: bool) -> bool {
    candidate.active_downloads.contains(&item)
        || candidate.seeder
        || (credits && ledger.balance(candidate.peer_id) < 0 && candidate.cache.has_complete(item))
}

/// Decides how `candidate` serves `downloader` a piece of `item`.
///
/// Buddies serve unconditionally when buddy service is on. Otherwise the
/// candidate must be willing to serve strangers (see [`serves_strangers`]).
/// The downloader then trades a piece if the candidate lacks one of its
/// pieces, else pays a credit if that keeps it at or above `-CreditLimit`.
/// With credits disabled only initial seeders serve one-sidedly.
pub fn select_exchange(
    downloader: &PeerState,
    candidate: &PeerState,
    item: ItemId,
    is_buddy: bool,
    ledger: &CreditLedger,
    policy: ExchangePolicy,
) -> ExchangeDecision {
    if is_buddy && policy.buddy_service {
        return ExchangeDecision::BuddyServe;
    }
    if !serves_strangers(candidate, item, ledger, policy.credits) {
        return ExchangeDecision::Refuse;
    }
    if candidate.needs_from(downloader, item) {
        return ExchangeDecision::Reciprocal;
    }
    if policy.credits {
        if ledger.can_spend(downloader.peer_id, 1) {
            ExchangeDecision::PayCredit
        } else {
            ExchangeDecision::Refuse
        }
    } else if candidate.seeder {
        ExchangeDecision::FreeSeed
    } else {
        ExchangeDecision::Refuse
    }
}
