//! Discrete-time engine: arrivals, influence, broadcasts, bandwidth sharing,
//! prefetching and completions, one fixed step at a time.

mod arrivals;
mod audit;
mod bandwidth;
mod clock;
mod engine;
mod world;

pub use arrivals::{sample_wait, ArrivalProcess};
pub use audit::{audit_bandwidth, audit_bytes, audit_credits, audit_pieces, audit_world, AuditReport};
pub use bandwidth::{allocate_bandwidth, Flow};
pub use clock::{LinkBudget, SimClock};
pub use engine::PREFETCH_RETRY_S;
pub use world::{build_graph, init_world, Download, Eviction, InvariantCounters, LedgerEvent, Purpose, Slot, SlotRole, World};
