//! Checks over a finished run's transfer log, ledger events and eviction
//! trail, independent of the engine's own bookkeeping.

use std::collections::BTreeMap;

use super::world::{Eviction, LedgerEvent, World};
use crate::metrics::{non_friend_upload_series, traffic_split, DownloadRecord};
use crate::protocol::{Catalog, PeerId, PieceSet, TransferRecord};

/// Violations found by [`audit_world`]; empty when everything holds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub credit_floor: Vec<String>,
    pub bandwidth: Vec<String>,
    pub pieces: Vec<String>,
    pub byte_accounting: Vec<String>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.credit_floor.is_empty()
            && self.bandwidth.is_empty()
            && self.pieces.is_empty()
            && self.byte_accounting.is_empty()
    }
}

/// Replays credit events: no balance below `-limit` at any point, and the
/// final sum equals the minted total.
pub fn audit_credits(events: &[LedgerEvent], peers: usize, limit: u64) -> Vec<String> {
    let mut bal = vec![0i64; peers];
    let mut minted = 0i64;
    let mut out = Vec::new();
    let floor = -(limit as i64);
    for e in events {
        match *e {
            LedgerEvent::Payment { time, from, to, amount } | LedgerEvent::Donation { time, from, to, amount } => {
                bal[from as usize] -= amount;
                bal[to as usize] += amount;
                if bal[from as usize] < floor {
                    out.push(format!("t={time}: peer {from} at {} below {floor}", bal[from as usize]));
                }
            }
            LedgerEvent::Mint { peer, amount, .. } => {
                bal[peer as usize] += amount;
                minted += amount;
            }
        }
    }
    let sum: i64 = bal.iter().sum();
    if sum != minted {
        out.push(format!("balance sum {sum} differs from minted {minted}"));
    }
    out
}

/// Cumulative unicast bytes sent and received by each peer never exceed
/// what its link could carry since time zero.
pub fn audit_bandwidth(log: &[TransferRecord], upload_bps: u64, download_bps: u64) -> Vec<String> {
    let mut sent: BTreeMap<PeerId, u64> = BTreeMap::new();
    let mut recv: BTreeMap<PeerId, u64> = BTreeMap::new();
    let mut out = Vec::new();
    let mut last_time = 0;
    for r in log.iter().filter(|r| r.is_unicast()) {
        if r.time < last_time {
            out.push(format!("log not time-ordered at t={}", r.time));
        }
        last_time = r.time;
        let from = r.from.expect("unicast record has a sender");
        let s = sent.entry(from).or_default();
        *s += r.bytes;
        if *s as f64 > upload_bps as f64 * r.time as f64 / 8.0 {
            out.push(format!("t={}: peer {from} sent {s} bytes", r.time));
        }
        let d = recv.entry(r.to).or_default();
        *d += r.bytes;
        if *d as f64 > download_bps as f64 * r.time as f64 / 8.0 {
            out.push(format!("t={}: peer {} received {d} bytes", r.time, r.to));
        }
    }
    out
}

/// Replays the log and evictions in order: every unicast piece must still
/// be held by its sender (initial seeders hold everything; broadcasts
/// deliver whole items; an eviction drops the whole entry), a broadcast
/// delivers no more than the receiver lacks, and piece counts and byte
/// totals must match each record.
pub fn audit_pieces(
    log: &[TransferRecord],
    evictions: &[Eviction],
    catalog: &Catalog,
    users: usize,
    seeders: usize,
) -> Vec<String> {
    let mut held: BTreeMap<(PeerId, u32), PieceSet> = BTreeMap::new();
    let mut out = Vec::new();
    let is_seeder = |p: PeerId| (p as usize) >= users && (p as usize) < users + seeders;
    let mut pending = evictions.iter().peekable();
    for (idx, r) in log.iter().enumerate() {
        while let Some(e) = pending.next_if(|e| e.log_len <= idx) {
            held.remove(&(e.peer, e.item));
        }
        let content = catalog.get(r.item);
        let n = content.piece_count();
        match r.from {
            None => {
                let set = held.entry((r.to, r.item)).or_insert_with(|| PieceSet::empty(n));
                let mut bytes = 0;
                let mut count = 0;
                for i in 0..n {
                    if set.insert(i) {
                        bytes += content.piece_bytes(i);
                        count += 1;
                    }
                }
                if bytes < r.bytes || count < r.count {
                    out.push(format!("t={}: broadcast to {} claims more than the item's missing pieces", r.time, r.to));
                }
            }
            Some(from) => {
                if r.count as usize != r.pieces.len() {
                    out.push(format!("t={}: record count {} vs {} pieces", r.time, r.count, r.pieces.len()));
                }
                let bytes: u64 = r.pieces.iter().map(|&p| content.piece_bytes(p)).sum();
                if bytes != r.bytes {
                    out.push(format!("t={}: record bytes {} vs pieces {}", r.time, r.bytes, bytes));
                }
                for &p in &r.pieces {
                    let ok = is_seeder(from) || held.get(&(from, r.item)).is_some_and(|s| s.contains(p));
                    if !ok {
                        out.push(format!("t={}: {from} sent piece {p} of item {} it does not hold", r.time, r.item));
                    }
                }
                let set = held.entry((r.to, r.item)).or_insert_with(|| PieceSet::empty(n));
                for &p in &r.pieces {
                    set.insert(p);
                }
            }
        }
    }
    out
}

/// Every completed download's origin split adds up to the item size, and
/// the log's friend, non-friend and broadcast bytes add up to its total.
pub fn audit_bytes(records: &[DownloadRecord], log: &[TransferRecord], catalog: &Catalog, bucket_s: u64) -> Vec<String> {
    let mut out = Vec::new();
    for r in records {
        let size = catalog.get(r.item_id).size_bytes;
        if r.total_bytes() != size {
            out.push(format!(
                "download of item {} by {}: {} bytes accounted, size {size}",
                r.item_id,
                r.peer_id,
                r.total_bytes()
            ));
        }
        if r.completion_time < r.request_time {
            out.push(format!("download of item {} by {} ends before it starts", r.item_id, r.peer_id));
        }
    }
    let (friend, non_friend, broadcast) = traffic_split(log);
    let total: u64 = log.iter().map(|r| r.bytes).sum();
    let series: u64 = non_friend_upload_series(log, bucket_s).iter().map(|p| p.non_friend_bytes).sum();
    if friend + non_friend + broadcast != total || series != non_friend {
        out.push(format!(
            "log bytes: friend {friend} + non-friend {non_friend} (series {series}) + broadcast {broadcast} != {total}"
        ));
    }
    out
}

/// Runs every audit over a finished world.
pub fn audit_world(world: &World) -> AuditReport {
    let c = &world.config;
    AuditReport {
        credit_floor: audit_credits(&world.ledger_events, world.peers.len(), c.credit_limit),
        bandwidth: audit_bandwidth(&world.log, c.upload_bps, c.download_bps),
        pieces: audit_pieces(&world.log, &world.evictions, &world.catalog, world.user_count(), c.seeders),
        byte_accounting: audit_bytes(&world.records, &world.log, &world.catalog, c.bucket_s),
    }
}
