//! Peer, tracker and broadcast-scheduler rules: piece exchange with credits,
//! buddy help, profile digests, prefetching and cache replacement.

mod broadcast;
mod cache;
mod content;
mod credits;
mod digest;
mod exchange;
mod helpers;
mod log;
mod peer;
mod prefetch;

pub type PeerId = u32;
pub type ItemId = u32;

pub use broadcast::{broadcast_scheduler_tick, transmission_seconds, BroadcastPolicy, BroadcastSchedule, ScheduledBroadcast};
pub use cache::{Cache, CacheEntry, CacheError, InsertOutcome, PieceOrigin};
pub use content::{Catalog, ContentItem, PieceSet, MIB};
pub use credits::{donate_credits, seeding_reward, CreditLedger, LedgerError};
pub use digest::{buddy_broadcast_aggregate, ProfileDigest};
pub use exchange::{select_exchange, serves_strangers, ExchangeDecision, ExchangePolicy};
pub use helpers::{recruit_helpers, register_helper, HelperError, HelperRole};
pub use log::{read_transfer_log, write_transfer_log, TransferKind, TransferRecord, LOG_HEADER};
pub use peer::PeerState;
pub use prefetch::prefetch_tick;
