//! Social SatTorrent simulator.
//!
//! Peers on a social graph download files over a BitTorrent-like unicast
//! network while a satellite broadcasts popular files to sat-enabled peers.
//! Buddies help each other, prefetch for each other and influence each
//! other's preferences. Every run is deterministic given its configuration.
//!
//! ```
//! use sst::config::{expand_preset, PresetId, ScenarioConfig};
//! use sst::metrics::mean_duration;
//!
//! let mut cfg = expand_preset(PresetId::F, &ScenarioConfig::default());
//! cfg.node_count = 100;
//! cfg.duration_s = 3600;
//! let world = sst::runner::simulate(&cfg).unwrap();
//! println!("mean duration {:?}", mean_duration(&world.records));
//! ```

pub mod config;
pub mod error;
pub mod graphgen;
pub mod metrics;
pub mod prefs;
pub mod protocol;
pub mod rng;
pub mod runner;
pub mod simcore;

// The book's chapters are checked as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/preferences.md")]
    mod preferences {}
    #[doc = include_str!("../../../book/src/protocol.md")]
    mod protocol {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
