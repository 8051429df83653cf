use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;

use super::world::{interest, Download, Eviction, LedgerEvent, Purpose, Slot, SlotRole, World};
use super::{allocate_bandwidth, Flow};
use crate::metrics::DownloadRecord;
use crate::prefs::{feedback_change, influence_change};
use crate::protocol::{
    recruit_helpers, select_exchange, serves_strangers, CacheEntry, ExchangeDecision, ExchangePolicy, HelperRole,
    ItemId, PeerId, PeerState, PieceSet, TransferKind, TransferRecord,
};

/// Seconds an idle peer waits after a prefetch attempt before trying again.
pub const PREFETCH_RETRY_S: u64 = 600;

/// Ranked items examined per prefetch attempt.
const PREFETCH_CANDIDATES: usize = 10;

fn pair_mut<T>(v: &mut [T], a: usize, b: usize) -> (&mut T, &mut T) {
    assert_ne!(a, b);
    if a < b {
        let (x, y) = v.split_at_mut(b);
        (&mut x[a], &mut y[0])
    } else {
        let (x, y) = v.split_at_mut(a);
        (&mut y[0], &mut x[b])
    }
}

fn download_record(entry: &CacheEntry, peer: PeerId, request: u64, done: u64, prefetch: bool) -> DownloadRecord {
    DownloadRecord {
        peer_id: peer,
        item_id: entry.item,
        request_time: request,
        completion_time: done,
        bytes_from_friends: entry.origin.friend,
        bytes_from_non_friends: entry.origin.non_friend,
        bytes_from_broadcast_cache: entry.origin.broadcast,
        was_prefetch: prefetch,
    }
}

/// First piece at or after `start` (cyclically) that `src` has and `dst`
/// lacks.
fn pick_piece(src: &PieceSet, dst: &PieceSet, start: u32) -> Option<u32> {
    let n = src.len();
    (start..n)
        .chain(0..start)
        .find(|&i| src.contains(i) && !dst.contains(i))
}

impl World {
    /// Advances the world by one step.
    pub fn tick(&mut self) {
        let t0 = self.clock.seconds();
        let t1 = self.clock.step_end();
        self.arrivals(t0);
        self.influence();
        if self.config.features.broadcast {
            self.schedule_broadcast(t0);
            if let Some(b) = self.schedule.complete_by(t1 as f64) {
                self.broadcasts.push(b);
                self.deliver_broadcast(b.item, t1);
            }
        }
        self.transfers(t1);
        if self.config.features.prefetch {
            self.prefetch(t0);
        }
        self.completions(t1);
        if !self.ledger.floor_respected() {
            self.counters.credit_floor_violations += 1;
        }
        self.clock.advance();
    }

    /// Runs until the configured duration is reached.
    pub fn run(&mut self) {
        while !self.finished() {
            self.tick();
        }
    }

    fn wait_after(&mut self, t: u64) -> u64 {
        t + self.arrival.sample_wait(&mut self.rng_arrivals).ceil() as u64
    }

    fn has_user_download(&self, peer: PeerId) -> bool {
        self.peers[peer as usize]
            .active_downloads
            .iter()
            .any(|&i| self.downloads.get(&(peer, i)).is_some_and(|d| d.purpose == Purpose::User))
    }

    /// Category drawn in proportion to the user's quantifiers among
    /// categories with unfinished items, then a uniform unfinished item of
    /// it. None once every profiled category is finished.
    fn choose_request(&mut self, peer: usize) -> Option<ItemId> {
        let completed = &self.peers[peer].completed;
        let open = |items: &[ItemId]| items.iter().any(|i| !completed.contains(i));
        let cats = self.catalog.categories();
        let weighted: Vec<(u32, f64)> = self.profiles[peer]
            .iter()
            .filter(|&(c, _)| c < cats && open(self.catalog.in_category(c)))
            .collect();
        // nothing left that this user cares about
        let &(mut cat, _) = weighted.last()?;
        let rng = &mut self.rng_requests;
        let total: f64 = weighted.iter().map(|w| w.1).sum();
        let mut x = rng.random::<f64>() * total;
        for &(c, w) in &weighted {
            if x < w {
                cat = c;
                break;
            }
            x -= w;
        }
        let pool: Vec<ItemId> = self
            .catalog
            .in_category(cat)
            .iter()
            .copied()
            .filter(|i| !completed.contains(i))
            .collect();
        Some(pool[rng.random_range(0..pool.len())])
    }

    fn arrivals(&mut self, t: u64) {
        for p in 0..self.user_count() {
            if self.peers[p].idle_until > t || self.has_user_download(p as PeerId) {
                continue;
            }
            match self.choose_request(p) {
                Some(item) => self.start_user_download(p as PeerId, item, t),
                None => self.peers[p].idle_until = self.wait_after(t),
            }
        }
    }

    /// Makes room for `item` in `peer`'s cache. Returns false when it does
    /// not fit at all.
    fn reserve(&mut self, peer: PeerId, item: ItemId) -> bool {
        let p = peer as usize;
        if self.peers[p].cache.contains(item) {
            return true;
        }
        let social = self.config.features.social_caching();
        let (demand, graph, catalog) = (&self.demand, &self.graph, &self.catalog);
        let state = &mut self.peers[p];
        let active = &state.active_downloads;
        let outcome = state.cache.insert(
            catalog.get(item),
            |i| interest(demand, graph, social, p, catalog.get(i).category),
            |i| i == item || active.contains(&i),
        );
        match outcome {
            Ok(o) => {
                for victim in o.evicted {
                    if self.peers[p].active_downloads.contains(&victim) {
                        self.counters.active_evictions += 1;
                    }
                    self.holders[victim as usize].remove(&peer);
                    self.evictions.push(Eviction {
                        log_len: self.log.len(),
                        peer,
                        item: victim,
                    });
                }
                o.inserted
            }
            Err(_) => false,
        }
    }

    fn start_user_download(&mut self, peer: PeerId, item: ItemId, t: u64) {
        let p = peer as usize;
        if self.peers[p].cache.has_complete(item) && !self.peers[p].active_downloads.contains(&item) {
            let rec = download_record(self.peers[p].cache.get(item).unwrap(), peer, t, t, false);
            self.records.push(rec);
            self.finish_user(peer, item, t);
            return;
        }
        // A prefetch of another item yields to the user's request.
        let stale: Vec<ItemId> = self.peers[p]
            .active_downloads
            .iter()
            .copied()
            .filter(|&i| i != item && self.downloads[&(peer, i)].purpose == Purpose::Prefetch)
            .collect();
        for i in stale {
            self.downloads.remove(&(peer, i));
            self.peers[p].active_downloads.remove(&i);
        }
        if let Some(d) = self.downloads.get_mut(&(peer, item)) {
            d.purpose = Purpose::User;
            d.request_time = t;
            d.slots.clear();
        } else {
            if !self.reserve(peer, item) {
                self.peers[p].idle_until = self.wait_after(t);
                return;
            }
            self.peers[p].active_downloads.insert(item);
            self.downloads.insert(
                (peer, item),
                Download {
                    peer,
                    item,
                    purpose: Purpose::User,
                    request_time: t,
                    slots: Vec::new(),
                    fetching_helpers: Vec::new(),
                },
            );
        }
        if self.config.features.buddy_help {
            self.recruit(peer, item, t);
        }
    }

    fn recruit(&mut self, peer: PeerId, item: ItemId, t: u64) {
        // with broadcasts on, sat buddies wait for the satellite instead of fetching
        let broadcast = self.config.features.broadcast;
        let picks = recruit_helpers(&self.graph, &self.peers, peer, item, self.config.helpers_max, |b| {
            !(broadcast && b.sat_enabled)
        });
        for (h, role) in picks {
            if role == HelperRole::Fetching {
                let busy = self.peers[h as usize]
                    .active_downloads
                    .iter()
                    .any(|&i| matches!(self.downloads[&(h, i)].purpose, Purpose::Help { .. }));
                if busy || self.peers[h as usize].active_downloads.contains(&item) || !self.reserve(h, item) {
                    continue;
                }
                self.peers[h as usize].active_downloads.insert(item);
                self.downloads.insert(
                    (h, item),
                    Download {
                        peer: h,
                        item,
                        purpose: Purpose::Help { beneficiary: peer },
                        request_time: t,
                        slots: Vec::new(),
                        fetching_helpers: Vec::new(),
                    },
                );
            }
            let d = self.downloads.get_mut(&(peer, item)).unwrap();
            if role == HelperRole::Fetching {
                d.fetching_helpers.push(h);
            }
            d.slots.push(Slot {
                source: h,
                role: SlotRole::Helper(role),
                carry: 0.0,
            });
            let list = self.peers[peer as usize].helpers.entry(item).or_default();
            if !list.contains(&h) {
                list.push(h);
            }
        }
    }

    /// Bookkeeping shared by every finished user request.
    fn finish_user(&mut self, peer: PeerId, item: ItemId, t: u64) {
        let p = peer as usize;
        self.peers[p].completed.insert(item);
        self.peers[p].idle_until = self.wait_after(t);
        let category = self.catalog.get(item).category;
        let negative = self.rng_feedback.random::<f64>() < self.config.feedback.negative_probability;
        if let Some(c) = feedback_change(&self.profiles[p], category, negative, &self.config.feedback) {
            c.apply(&mut self.profiles[p]);
            self.demand.update(&self.graph, p, &c);
        }
    }

    fn influence(&mut self) {
        let Some(model) = self.config.mi_model else {
            return;
        };
        let mut changes = Vec::new();
        for node in 0..self.user_count() {
            if self.rng_influence.random::<f64>() < self.config.p_mi {
                if let Some(c) = influence_change(model, &self.graph, &self.profiles, node, &mut self.rng_influence) {
                    changes.push((node, c));
                }
            }
        }
        for (node, c) in changes {
            c.apply(&mut self.profiles[node]);
            self.demand.update(&self.graph, node, &c);
        }
    }

    /// Concurrent user downloads per item.
    pub fn current_demand(&self) -> BTreeMap<ItemId, u32> {
        let mut demand = BTreeMap::new();
        for d in self.downloads.values() {
            if d.purpose == Purpose::User {
                *demand.entry(d.item).or_insert(0) += 1;
            }
        }
        demand
    }

    fn schedule_broadcast(&mut self, t: u64) {
        let demand = self.current_demand();
        self.schedule.tick(&demand, &self.catalog, t as f64);
    }

    /// Every sat peer receives the transmission; it keeps the pieces when it
    /// is fetching the item or the item earns a place in its cache.
    fn deliver_broadcast(&mut self, item: ItemId, t: u64) {
        let content = self.catalog.get(item).clone();
        for p in 0..self.user_count() {
            if !self.peers[p].sat_enabled || self.peers[p].cache.has_complete(item) {
                continue;
            }
            if !self.peers[p].active_downloads.contains(&item) && !self.peers[p].cache.contains(item) {
                let score = self.interest(p, content.category);
                if score <= 0.0 {
                    continue;
                }
                let social = self.config.features.social_caching();
                let (demand, graph, catalog) = (&self.demand, &self.graph, &self.catalog);
                let state = &self.peers[p];
                let worth = state.cache.worth_capturing(
                    content.size_bytes,
                    score,
                    |i| interest(demand, graph, social, p, catalog.get(i).category),
                    |i| state.active_downloads.contains(&i),
                );
                if !worth || !self.reserve(p as PeerId, item) {
                    continue;
                }
            }
            let entry = self.peers[p].cache.get_mut(item).unwrap();
            let was_empty = entry.pieces.is_empty();
            let mut count = 0;
            let mut bytes = 0;
            for i in 0..content.piece_count() {
                if entry.pieces.insert(i) {
                    count += 1;
                    bytes += content.piece_bytes(i);
                }
            }
            entry.origin.broadcast += bytes;
            if was_empty {
                self.holders[item as usize].insert(p as PeerId);
            }
            self.log.push(TransferRecord {
                time: t,
                from: None,
                to: p as PeerId,
                item,
                pieces: Vec::new(),
                count,
                bytes,
                kind: TransferKind::Broadcast,
                friend: false,
            });
        }
    }

    fn exchange_policy(&self) -> ExchangePolicy {
        ExchangePolicy {
            buddy_service: self.config.features.buddy_help,
            credits: self.config.features.credits,
        }
    }

    /// A buddy with spare credits tops up a downloader stuck at the floor.
    fn donations(&mut self, t: u64) {
        let f = self.config.features;
        if !(f.credits && f.buddy_help) || self.config.donation == 0 {
            return;
        }
        let amount = self.config.donation as i64;
        let stuck: Vec<PeerId> = self
            .downloads
            .values()
            .filter(|d| d.purpose == Purpose::User && !self.ledger.can_spend(d.peer, 1))
            .map(|d| d.peer)
            .collect();
        for peer in stuck {
            let donor = self
                .graph
                .neighbors(peer as usize)
                .iter()
                .map(|&b| b as PeerId)
                .filter(|&b| self.ledger.balance(b) >= amount)
                .max_by(|&a, &b| self.ledger.balance(a).cmp(&self.ledger.balance(b)).then(b.cmp(&a)));
            if let Some(from) = donor {
                if crate::protocol::donate_credits(&mut self.ledger, from, peer, amount).is_ok() {
                    self.ledger_events.push(LedgerEvent::Donation {
                        time: t,
                        from,
                        to: peer,
                        amount,
                    });
                }
            }
        }
    }

    /// Drops slots whose source has nothing left to give or now refuses,
    /// then tops up helpers and sources.
    fn refresh_slots(&mut self, key: (PeerId, ItemId)) {
        let policy = self.exchange_policy();
        let f = self.config.features;
        let max_sources = self.config.max_sources;
        let (peer, item) = key;
        let mut d = self.downloads.remove(&key).unwrap();
        {
            let me = &self.peers[peer as usize];
            let peers = &self.peers;
            let ledger = &self.ledger;
            let graph = &self.graph;
            let serving = &mut self.serving;
            let n = graph.node_count();
            d.slots.retain(|s| {
                let src = &peers[s.source as usize];
                let keep = match s.role {
                    SlotRole::Helper(HelperRole::Fetching) => {
                        src.can_offer(me, item) || src.active_downloads.contains(&item)
                    }
                    SlotRole::Helper(HelperRole::Cached) | SlotRole::Prefetch => src.can_offer(me, item),
                    SlotRole::Unicast => {
                        let buddy = (s.source as usize) < n && graph.has_edge(peer as usize, s.source as usize);
                        src.can_offer(me, item)
                            && select_exchange(me, src, item, buddy, ledger, policy) != ExchangeDecision::Refuse
                    }
                };
                if !keep && s.role == SlotRole::Unicast {
                    serving[s.source as usize] -= 1;
                }
                keep
            });
        }
        let used = |d: &Download, p: PeerId| d.slots.iter().any(|s| s.source == p);
        match d.purpose {
            Purpose::Prefetch => {
                let buddies: Vec<PeerId> = self.graph.neighbors(peer as usize).iter().map(|&b| b as PeerId).collect();
                for b in buddies {
                    if d.slots.len() >= max_sources {
                        break;
                    }
                    if !used(&d, b) && self.peers[b as usize].can_offer(&self.peers[peer as usize], item) {
                        d.slots.push(Slot {
                            source: b,
                            role: SlotRole::Prefetch,
                            carry: 0.0,
                        });
                    }
                }
            }
            Purpose::User | Purpose::Help { .. } => {
                if d.purpose == Purpose::User && f.buddy_help {
                    let helpers = d.slots.iter().filter(|s| matches!(s.role, SlotRole::Helper(_))).count();
                    if helpers < self.config.helpers_max {
                        let me = &self.peers[peer as usize];
                        let mut extra: Vec<(bool, PeerId)> = self
                            .graph
                            .neighbors(peer as usize)
                            .iter()
                            .map(|&b| b as PeerId)
                            .filter(|&b| !used(&d, b) && self.peers[b as usize].can_offer(me, item))
                            .map(|b| (!self.peers[b as usize].sat_enabled, b))
                            .collect();
                        extra.sort();
                        for (_, b) in extra.into_iter().take(self.config.helpers_max - helpers) {
                            d.slots.push(Slot {
                                source: b,
                                role: SlotRole::Helper(HelperRole::Cached),
                                carry: 0.0,
                            });
                            let list = self.peers[peer as usize].helpers.entry(item).or_default();
                            if !list.contains(&b) {
                                list.push(b);
                            }
                        }
                    }
                }
                let unicast = d.slots.iter().filter(|s| s.role == SlotRole::Unicast).count();
                if unicast < max_sources {
                    self.add_sources(&mut d, max_sources - unicast, policy);
                }
            }
        }
        self.downloads.insert(key, d);
    }

    fn add_sources(&mut self, d: &mut Download, wanted: usize, policy: ExchangePolicy) {
        let (peer, item) = (d.peer, d.item);
        let all: Vec<PeerId> = self.holders[item as usize]
            .iter()
            .copied()
            .filter(|&h| h != peer && !d.slots.iter().any(|s| s.source == h))
            .filter(|&h| {
                (policy.buddy_service && self.are_buddies(peer, h))
                    || serves_strangers(&self.peers[h as usize], item, &self.ledger, policy.credits)
            })
            .collect();
        if all.is_empty() {
            return;
        }
        let full_view = self.config.features.broadcast && self.peers[peer as usize].sat_enabled;
        let rng = &mut self.rng_protocol;
        let mut visible: Vec<PeerId> = if full_view || all.len() <= self.config.tracker_sample {
            let mut v = all;
            for i in (1..v.len()).rev() {
                v.swap(i, rng.random_range(0..=i));
            }
            v
        } else {
            sample(rng, all.len(), self.config.tracker_sample)
                .into_iter()
                .map(|i| all[i])
                .collect()
        };
        if self.config.features.locality_only {
            let graph = &self.graph;
            let n = graph.node_count();
            visible.sort_by_key(|&h| !((h as usize) < n && graph.has_edge(peer as usize, h as usize)));
        }
        let me = &self.peers[peer as usize];
        let mut added = 0;
        for h in visible {
            if added == wanted {
                break;
            }
            let src = &self.peers[h as usize];
            if self.serving[h as usize] >= self.config.upload_slots || !src.can_offer(me, item) {
                continue;
            }
            let buddy = self.are_buddies(peer, h);
            if select_exchange(me, src, item, buddy, &self.ledger, policy) == ExchangeDecision::Refuse {
                continue;
            }
            d.slots.push(Slot {
                source: h,
                role: SlotRole::Unicast,
                carry: 0.0,
            });
            self.serving[h as usize] += 1;
            added += 1;
        }
    }

    fn transfers(&mut self, t: u64) {
        self.donations(t);
        self.serving.iter_mut().for_each(|c| *c = 0);
        for d in self.downloads.values() {
            for s in d.slots.iter().filter(|s| s.role == SlotRole::Unicast) {
                self.serving[s.source as usize] += 1;
            }
        }
        let mut keys: Vec<(PeerId, ItemId)> = self.downloads.keys().copied().collect();
        if !keys.is_empty() {
            // Rotate so no peer id always picks sources first.
            let start = self.rng_protocol.random_range(0..keys.len());
            keys.rotate_left(start);
        }
        for &k in &keys {
            self.refresh_slots(k);
        }

        let policy = self.exchange_policy();
        let upload_bps = self.link.upload_bps as f64;
        let mut flows = Vec::new();
        let mut refs = Vec::new();
        for &k in &keys {
            let d = &self.downloads[&k];
            let me = &self.peers[k.0 as usize];
            for (si, s) in d.slots.iter().enumerate() {
                let src = &self.peers[s.source as usize];
                if !src.can_offer(me, k.1) {
                    continue;
                }
                // cached helpers first, user traffic next, prefetch in the background
                let (kind, cap, tier) = match s.role {
                    SlotRole::Helper(HelperRole::Cached) => (TransferKind::Buddy, None, 0),
                    SlotRole::Helper(HelperRole::Fetching) => (
                        TransferKind::Buddy,
                        Some(upload_bps * HelperRole::Fetching.upload_share()),
                        1,
                    ),
                    SlotRole::Prefetch => (TransferKind::Prefetch, None, 2),
                    SlotRole::Unicast => {
                        let buddy = self.are_buddies(k.0, s.source);
                        match select_exchange(me, src, k.1, buddy, &self.ledger, policy).kind() {
                            Some(kind) => (kind, None, 1),
                            None => continue,
                        }
                    }
                };
                flows.push(Flow {
                    src: s.source as usize,
                    dst: k.0 as usize,
                    cap,
                    tier,
                });
                refs.push((k, si, kind));
            }
        }
        if flows.is_empty() {
            return;
        }
        let total = self.peers.len();
        let up = vec![upload_bps; total];
        let down = vec![self.link.download_bps as f64; total];
        let rates = allocate_bandwidth(&flows, &up, &down);
        self.check_allocation(&flows, &rates, &up, &down);

        let dt = self.clock.step_seconds as f64;
        for (fi, &(key, si, kind)) in refs.iter().enumerate() {
            let carry = self.downloads[&key].slots[si].carry + rates[fi] * dt / 8.0;
            let carry = self.move_pieces(key, self.downloads[&key].slots[si].source, kind, carry, t);
            self.downloads.get_mut(&key).unwrap().slots[si].carry = carry;
        }
    }

    fn check_allocation(&mut self, flows: &[Flow], rates: &[f64], up: &[f64], down: &[f64]) {
        let mut u = vec![0.0; up.len()];
        let mut dn = vec![0.0; down.len()];
        for (f, &r) in flows.iter().zip(rates) {
            u[f.src] += r;
            dn[f.dst] += r;
            if r < 0.0 || f.cap.is_some_and(|c| r > c * (1.0 + 1e-9)) {
                self.counters.bandwidth_violations += 1;
            }
        }
        let over = |a: &[f64], cap: &[f64]| a.iter().zip(cap).filter(|(x, c)| **x > **c * (1.0 + 1e-9)).count();
        self.counters.bandwidth_violations += (over(&u, up) + over(&dn, down)) as u64;
    }

    /// Turns `budget` bytes into whole pieces from `source`; returns the
    /// leftover carried into the next step.
    fn move_pieces(&mut self, key: (PeerId, ItemId), source: PeerId, kind: TransferKind, mut budget: f64, t: u64) -> f64 {
        let (peer, item) = key;
        let content = self.catalog.get(item);
        let friend = self.are_buddies(peer, source);
        let credits = self.config.features.credits;
        let start = self.rng_protocol.random_range(0..content.piece_count());
        let (src, dst) = pair_mut(&mut self.peers, source as usize, peer as usize);
        let seeding = src.is_seeding(item);
        let Some(src_pieces) = src.cache.pieces(item) else {
            return 0.0;
        };
        let dst_entry = dst.cache.get_mut(item).expect("active download has a cache entry");
        let was_empty = dst_entry.pieces.is_empty();
        let mut moved = Vec::new();
        let mut bytes = 0;
        let mut next = start;
        loop {
            let Some(piece) = pick_piece(src_pieces, &dst_entry.pieces, next) else {
                budget = 0.0;
                break;
            };
            let size = content.piece_bytes(piece);
            if budget < size as f64 {
                break;
            }
            if kind == TransferKind::Credit {
                if self.ledger.transfer(peer, source, 1).is_err() {
                    budget = 0.0;
                    break;
                }
                self.ledger_events.push(LedgerEvent::Payment {
                    time: t,
                    from: peer,
                    to: source,
                    amount: 1,
                });
            }
            if credits && seeding && !friend {
                self.ledger.mint(source, 1);
                self.ledger_events.push(LedgerEvent::Mint {
                    time: t,
                    peer: source,
                    amount: 1,
                });
            }
            if !src_pieces.contains(piece) {
                self.counters.piece_violations += 1;
            }
            dst_entry.pieces.insert(piece);
            if friend {
                dst_entry.origin.friend += size;
            } else {
                dst_entry.origin.non_friend += size;
            }
            budget -= size as f64;
            bytes += size;
            moved.push(piece);
            next = (piece + 1) % content.piece_count();
        }
        if moved.is_empty() {
            return budget;
        }
        if was_empty {
            self.holders[item as usize].insert(peer);
        }
        self.log.push(TransferRecord {
            time: t,
            from: Some(source),
            to: peer,
            item,
            count: moved.len() as u32,
            pieces: moved,
            bytes,
            kind,
            friend,
        });
        budget
    }

    /// Idle users start fetching the best predicted item a buddy can supply.
    fn prefetch(&mut self, t: u64) {
        let cap = self.config.features.prefetch_cap;
        let mut active = self
            .downloads
            .values()
            .filter(|d| d.purpose == Purpose::Prefetch)
            .count();
        let social = self.config.features.social_caching();
        for p in 0..self.user_count() {
            if cap.is_some_and(|c| active >= c) {
                break;
            }
            if self.next_prefetch_try[p] > t || !self.peers[p].active_downloads.is_empty() {
                continue;
            }
            self.next_prefetch_try[p] = t + PREFETCH_RETRY_S;
            let ranked = self.ranked_items(p);
            let pick = crate::protocol::prefetch_tick(
                &self.peers[p],
                &self.graph,
                &self.peers,
                ranked.iter().map(|&(item, _)| item),
                cap,
                active,
            );
            let Some(item) = pick else {
                continue;
            };
            let score = ranked.iter().find(|r| r.0 == item).map_or(0.0, |r| r.1);
            if !self.peers[p].cache.contains(item) {
                let (demand, graph, catalog) = (&self.demand, &self.graph, &self.catalog);
                let state = &self.peers[p];
                let worth = state.cache.worth_capturing(
                    catalog.get(item).size_bytes,
                    score,
                    |i| interest(demand, graph, social, p, catalog.get(i).category),
                    |i| state.active_downloads.contains(&i),
                );
                if !worth || !self.reserve(p as PeerId, item) {
                    continue;
                }
            }
            self.peers[p].active_downloads.insert(item);
            self.downloads.insert(
                (p as PeerId, item),
                Download {
                    peer: p as PeerId,
                    item,
                    purpose: Purpose::Prefetch,
                    request_time: t,
                    slots: Vec::new(),
                    fetching_helpers: Vec::new(),
                },
            );
            active += 1;
        }
    }

    /// Predicted demand of `p` for items it neither finished nor holds,
    /// best first (ties to the smaller item id).
    fn ranked_items(&self, p: usize) -> Vec<(ItemId, f64)> {
        let mut cats: Vec<u32> = self.profiles[p].iter().map(|(c, _)| c).collect();
        for &b in self.graph.neighbors(p) {
            cats.extend(self.profiles[b].iter().map(|(c, _)| c));
        }
        cats.sort_unstable();
        cats.dedup();
        let peer = &self.peers[p];
        let mut items: Vec<(ItemId, f64)> = cats
            .into_iter()
            .filter(|&c| c < self.catalog.categories())
            .map(|c| (c, self.demand.score(p, c)))
            .filter(|&(_, s)| s > 0.0)
            .flat_map(|(c, s)| self.catalog.in_category(c).iter().map(move |&i| (i, s)))
            .filter(|(i, _)| !peer.completed.contains(i) && !peer.cache.has_complete(*i))
            .collect();
        items.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        items.truncate(PREFETCH_CANDIDATES);
        items
    }

    fn completions(&mut self, t: u64) {
        let done: Vec<(PeerId, ItemId)> = self
            .downloads
            .keys()
            .copied()
            .filter(|&(p, i)| self.peers[p as usize].cache.has_complete(i))
            .collect();
        for key in done {
            let Some(d) = self.downloads.remove(&key) else {
                continue;
            };
            let (peer, item) = key;
            let p = peer as usize;
            self.peers[p].active_downloads.remove(&item);
            self.peers[p].helpers.remove(&item);
            match d.purpose {
                Purpose::User => {
                    let rec = download_record(self.peers[p].cache.get(item).unwrap(), peer, d.request_time, t, false);
                    self.records.push(rec);
                    self.finish_user(peer, item, t);
                    for h in d.fetching_helpers {
                        let hk = (h, item);
                        if self.downloads.get(&hk).is_some_and(|x| x.purpose == Purpose::Help { beneficiary: peer }) {
                            self.downloads.remove(&hk);
                            self.peers[h as usize].active_downloads.remove(&item);
                        }
                    }
                }
                Purpose::Prefetch => {
                    let rec = download_record(self.peers[p].cache.get(item).unwrap(), peer, d.request_time, t, true);
                    self.records.push(rec);
                }
                Purpose::Help { .. } => {}
            }
        }
    }

    /// Peer state by id, for inspection.
    pub fn peer(&self, id: PeerId) -> &PeerState {
        &self.peers[id as usize]
    }
}
