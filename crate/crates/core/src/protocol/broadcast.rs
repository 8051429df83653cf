use std::collections::{BTreeMap, VecDeque};

use super::{Catalog, ItemId};

/// Popularity-driven transponder scheduling rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroadcastPolicy {
    /// Minimum number of concurrent downloaders before an item airs.
    pub threshold: u32,
    /// No item airs twice within this many seconds.
    pub cooldown_s: u64,
    pub transponder_bps: u64,
}

impl Default for BroadcastPolicy {
    fn default() -> Self {
        BroadcastPolicy {
            threshold: 5,
            cooldown_s: 6 * 3600,
            transponder_bps: 36_000_000,
        }
    }
}

/// Airtime of `size_bytes` on a transponder of `bps` bits per second.
pub fn transmission_seconds(size_bytes: u64, bps: u64) -> f64 {
    size_bytes as f64 * 8.0 / bps as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduledBroadcast {
    pub item: ItemId,
    pub start: f64,
    pub end: f64,
}

/// One transponder: at most one item on air at any instant.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastSchedule {
    pub policy: BroadcastPolicy,
    queue: VecDeque<ScheduledBroadcast>,
    last_start: BTreeMap<ItemId, f64>,
    busy_until: f64,
}

impl BroadcastSchedule {
    pub fn new(policy: BroadcastPolicy) -> Self {
        BroadcastSchedule {
            policy,
            queue: VecDeque::new(),
            last_start: BTreeMap::new(),
            busy_until: 0.0,
        }
    }

    pub fn queue(&self) -> &VecDeque<ScheduledBroadcast> {
        &self.queue
    }

    pub fn is_idle(&self, now: f64) -> bool {
        self.queue.is_empty() && self.busy_until <= now
    }

    fn cooling_down(&self, item: ItemId, now: f64) -> bool {
        self.last_start
            .get(&item)
            .is_some_and(|&t| now - t < self.policy.cooldown_s as f64)
    }

    /// When the transponder is idle, schedules the item with the most
    /// concurrent downloaders among those at or above the threshold and out
    /// of cooldown (ties to the smaller id).
    pub fn tick(&mut self, demand: &BTreeMap<ItemId, u32>, catalog: &Catalog, now: f64) -> Option<ScheduledBroadcast> {
        if !self.is_idle(now) {
            return None;
        }
        let (&item, _) = demand
            .iter()
            .filter(|&(&item, &d)| d >= self.policy.threshold && !self.cooling_down(item, now))
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))?;
        let start = now.max(self.busy_until);
        let end = start + transmission_seconds(catalog.get(item).size_bytes, self.policy.transponder_bps);
        let b = ScheduledBroadcast { item, start, end };
        self.queue.push_back(b);
        self.last_start.insert(item, start);
        self.busy_until = end;
        Some(b)
    }

    /// Pops the transmission finishing by `until`, if any. At most one per
    /// call.
    pub fn complete_by(&mut self, until: f64) -> Option<ScheduledBroadcast> {
        if self.queue.front().is_some_and(|b| b.end <= until) {
            self.queue.pop_front()
        } else {
            None
        }
    }
}

/// Functional form of [`BroadcastSchedule::tick`].
pub fn broadcast_scheduler_tick(
    demand: &BTreeMap<ItemId, u32>,
    mut schedule: BroadcastSchedule,
    catalog: &Catalog,
    now: f64,
) -> BroadcastSchedule {
    schedule.tick(demand, catalog, now);
    schedule
}
