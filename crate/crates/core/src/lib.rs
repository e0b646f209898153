//! Trace-driven cache simulation.
//!
//! The centrepiece is [`RacEngine`], a random adaptive cache: a per-set tag
//! directory with more ways than the per-set share of a global data store,
//! LRU tag replacement within a set, and uniform-random frame eviction when
//! the data store is full. Conventional LRU and random caches and a V-Way
//! style reuse-replacement variant are provided for comparison, along with
//! trace readers, synthetic workloads, reporting, and a naive reference
//! replay ([`oracle`]) used to check the engines outcome-for-outcome.

pub mod access;
pub mod baseline;
pub mod config;
pub mod engine;
pub mod gen;
pub mod oracle;
pub mod policy;
mod rank;
pub mod rng;
pub mod run;
pub mod stats;
pub mod trace;

pub use access::{
    map_address, Access, AccessKind, AccessOutcome, AddressParts, Eviction, FillCase, FrameId,
    TagLoc,
};
pub use baseline::SetAssocCache;
pub use config::{BaselineConfig, Case4Mode, ConfigError, SimConfig};
pub use engine::{check_transition, DataReplacement, RacEngine, Violation};
pub use policy::{build_policy, CachePolicy, PolicyKind};
pub use rng::SplitMix64;
pub use stats::{Stats, StatsReport};
pub use trace::{TraceError, TraceFormat, TraceStream};
