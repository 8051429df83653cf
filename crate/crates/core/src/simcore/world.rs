use std::collections::{BTreeMap, BTreeSet};

use super::{ArrivalProcess, LinkBudget, SimClock};
use crate::config::ScenarioConfig;
use crate::error::ConfigError;
use crate::graphgen::{assign_sat_peers, SocialGraph};
use crate::metrics::DownloadRecord;
use crate::prefs::{CategoryId, DemandIndex, PreferenceProfile};
use crate::protocol::{
    BroadcastSchedule, Catalog, CreditLedger, HelperRole, ItemId, PeerId, PeerState, ScheduledBroadcast,
    TransferRecord,
};
use crate::rng::{derive_seed, stream_rng, SimRng, Stream};

/// Why a download runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    /// The user asked for the item.
    User,
    /// Idle-time fetch into the cache.
    Prefetch,
    /// 2Fast-style fetch on behalf of a buddy.
    Help { beneficiary: PeerId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotRole {
    Unicast,
    Helper(HelperRole),
    Prefetch,
}

/// A source attached to a download. `carry` holds bytes of allocated rate
/// not yet turned into a whole piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slot {
    pub source: PeerId,
    pub role: SlotRole,
    pub carry: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Download {
    pub peer: PeerId,
    pub item: ItemId,
    pub purpose: Purpose,
    pub request_time: u64,
    pub slots: Vec<Slot>,
    /// Buddies running a help fetch for this download.
    pub fetching_helpers: Vec<PeerId>,
}

/// Every credit movement, in the order it happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LedgerEvent {
    Payment { time: u64, from: PeerId, to: PeerId, amount: i64 },
    Donation { time: u64, from: PeerId, to: PeerId, amount: i64 },
    Mint { time: u64, peer: PeerId, amount: i64 },
}

/// A cache entry dropped to make room. `log_len` is the transfer log's
/// length at that moment, which orders evictions against transfers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Eviction {
    pub log_len: usize,
    pub peer: PeerId,
    pub item: ItemId,
}

/// Runtime invariant checks; all stay zero in a correct run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InvariantCounters {
    pub bandwidth_violations: u64,
    pub piece_violations: u64,
    pub credit_floor_violations: u64,
    pub active_evictions: u64,
}

impl InvariantCounters {
    pub fn is_clean(&self) -> bool {
        *self == InvariantCounters::default()
    }
}

/// Complete simulation state. Users are graph nodes `0..n`; the initial
/// seeders follow as `n..n + seeders` and have no buddies.
#[derive(Debug, Clone)]
pub struct World {
    pub config: ScenarioConfig,
    pub graph: SocialGraph,
    pub catalog: Catalog,
    pub peers: Vec<PeerState>,
    pub profiles: Vec<PreferenceProfile>,
    pub initial_profiles: Vec<PreferenceProfile>,
    pub demand: DemandIndex,
    pub ledger: CreditLedger,
    pub schedule: BroadcastSchedule,
    pub clock: SimClock,
    pub link: LinkBudget,
    pub arrival: ArrivalProcess,
    pub downloads: BTreeMap<(PeerId, ItemId), Download>,
    /// Peers holding at least one piece, per item.
    pub holders: Vec<BTreeSet<PeerId>>,
    pub(crate) next_prefetch_try: Vec<u64>,
    /// Unicast slots each peer currently serves.
    pub(crate) serving: Vec<usize>,
    pub(crate) rng_arrivals: SimRng,
    pub(crate) rng_requests: SimRng,
    pub(crate) rng_influence: SimRng,
    pub(crate) rng_protocol: SimRng,
    pub(crate) rng_feedback: SimRng,
    pub log: Vec<TransferRecord>,
    pub ledger_events: Vec<LedgerEvent>,
    pub evictions: Vec<Eviction>,
    pub records: Vec<DownloadRecord>,
    pub broadcasts: Vec<ScheduledBroadcast>,
    pub counters: InvariantCounters,
}

/// The social graph with sat flags exactly as a run with `config` sees it.
pub fn build_graph(config: &ScenarioConfig) -> Result<SocialGraph, ConfigError> {
    let seed = config.seed;
    let graph = if config.node_count == 0 {
        SocialGraph::empty(0)
    } else {
        config.graph_model().generate(config.node_count, derive_seed(seed, Stream::Graph))?
    };
    Ok(assign_sat_peers(graph, config.sat_ratio, derive_seed(seed, Stream::SatFlags)))
}

/// Builds the initial world: graph, sat flags, profiles, catalog, seeders
/// and staggered first requests.
pub fn init_world(config: &ScenarioConfig) -> Result<World, ConfigError> {
    config.validate()?;
    let seed = config.seed;
    let n = config.node_count;
    let graph = build_graph(config)?;

    let mut rng = stream_rng(seed, Stream::Profiles);
    let profiles: Vec<PreferenceProfile> = (0..n)
        .map(|_| PreferenceProfile::random(&mut rng, config.categories, config.profile_min, config.profile_max))
        .collect();

    let catalog = Catalog::uniform(
        config.catalog_size,
        config.categories,
        config.file_size_bytes,
        config.piece_size_bytes,
    );
    let catalog_bytes: u64 = catalog.items().iter().map(|i| i.size_bytes).sum();

    let mut peers: Vec<PeerState> = (0..n)
        .map(|i| PeerState::new(i as PeerId, graph.is_sat_enabled(i), config.cache_capacity_bytes()))
        .collect();
    let mut holders = vec![BTreeSet::new(); catalog.len()];
    for s in 0..config.seeders {
        let id = (n + s) as PeerId;
        let mut p = PeerState::new(id, false, catalog_bytes);
        p.seeder = true;
        p.idle_until = u64::MAX;
        for item in catalog.items() {
            p.cache.insert_complete(item);
            holders[item.item_id as usize].insert(id);
        }
        peers.push(p);
    }

    let arrival = ArrivalProcess::new(config.wait_mean_s, config.wait_dist);
    let mut rng_arrivals = stream_rng(seed, Stream::Arrivals);
    for p in peers.iter_mut().take(n) {
        p.idle_until = arrival.sample_wait(&mut rng_arrivals).ceil() as u64;
    }

    let demand = DemandIndex::new(&graph, &profiles, config.categories, config.weights);
    let total = peers.len();
    Ok(World {
        config: config.clone(),
        catalog,
        ledger: CreditLedger::new(total, config.credit_limit),
        schedule: BroadcastSchedule::new(config.broadcast),
        clock: SimClock::new(config.step_s),
        link: LinkBudget {
            download_bps: config.download_bps,
            upload_bps: config.upload_bps,
        },
        arrival,
        downloads: BTreeMap::new(),
        holders,
        next_prefetch_try: vec![0; n],
        serving: vec![0; total],
        rng_arrivals,
        rng_requests: stream_rng(seed, Stream::Requests),
        rng_influence: stream_rng(seed, Stream::Influence),
        rng_protocol: stream_rng(seed, Stream::Protocol),
        rng_feedback: stream_rng(seed, Stream::Feedback),
        log: Vec::new(),
        ledger_events: Vec::new(),
        evictions: Vec::new(),
        records: Vec::new(),
        broadcasts: Vec::new(),
        counters: InvariantCounters::default(),
        initial_profiles: profiles.clone(),
        profiles,
        demand,
        graph,
        peers,
    })
}

impl World {
    pub fn user_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn is_user(&self, peer: PeerId) -> bool {
        (peer as usize) < self.graph.node_count()
    }

    pub fn are_buddies(&self, a: PeerId, b: PeerId) -> bool {
        self.is_user(a) && self.is_user(b) && self.graph.has_edge(a as usize, b as usize)
    }

    pub fn now(&self) -> u64 {
        self.clock.seconds()
    }

    pub fn finished(&self) -> bool {
        self.clock.now >= self.config.steps()
    }

    /// Cache interest of `node` in `category`: its own quantifier, or the
    /// best demand score among itself and its buddies when social features
    /// are on.
    pub fn interest(&self, node: usize, category: CategoryId) -> f64 {
        interest(&self.demand, &self.graph, self.config.features.social_caching(), node, category)
    }
}

pub(crate) fn interest(demand: &DemandIndex, graph: &SocialGraph, social: bool, node: usize, category: CategoryId) -> f64 {
    if node >= graph.node_count() {
        return 0.0;
    }
    if social {
        demand.interest(graph, node, category)
    } else {
        demand.own(node, category)
    }
}
