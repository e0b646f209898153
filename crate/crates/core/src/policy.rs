//! Policy selection behind a single trait.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::access::{Access, AccessOutcome};
use crate::baseline::SetAssocCache;
use crate::config::{ConfigError, SimConfig};
use crate::engine::RacEngine;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Rac,
    Lru,
    Random,
    Vway,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Rac,
        PolicyKind::Lru,
        PolicyKind::Random,
        PolicyKind::Vway,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Rac => "rac",
            PolicyKind::Lru => "lru",
            PolicyKind::Random => "random",
            PolicyKind::Vway => "vway",
        }
    }

    /// Whether the policy uses the decoupled tag/data layout (and so the
    /// tag-way count and case-4 mode).
    pub fn is_decoupled(self) -> bool {
        matches!(self, PolicyKind::Rac | PolicyKind::Vway)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown policy '{s}' (expected rac|lru|random|vway)"))
    }
}

pub trait CachePolicy: Send {
    fn access(&mut self, access: Access) -> AccessOutcome;
    fn kind(&self) -> PolicyKind;
}

impl CachePolicy for RacEngine {
    fn access(&mut self, access: Access) -> AccessOutcome {
        RacEngine::access(self, access)
    }

    fn kind(&self) -> PolicyKind {
        match self.replacement() {
            crate::engine::DataReplacement::Random => PolicyKind::Rac,
            crate::engine::DataReplacement::Reuse => PolicyKind::Vway,
        }
    }
}

impl CachePolicy for SetAssocCache {
    fn access(&mut self, access: Access) -> AccessOutcome {
        SetAssocCache::access(self, access)
    }

    fn kind(&self) -> PolicyKind {
        match self.victim() {
            crate::baseline::WayVictim::Lru => PolicyKind::Lru,
            crate::baseline::WayVictim::Random => PolicyKind::Random,
        }
    }
}

/// Build a policy instance. Conventional baselines take `num_sets` and
/// `data_ways` from `config`, so every policy has the same data capacity.
pub fn build_policy(
    kind: PolicyKind,
    config: &SimConfig,
) -> Result<Box<dyn CachePolicy>, ConfigError> {
    Ok(match kind {
        PolicyKind::Rac => Box::new(RacEngine::new(*config)?),
        PolicyKind::Vway => Box::new(RacEngine::vway(*config)?),
        PolicyKind::Lru => Box::new(SetAssocCache::lru(config.baseline())?),
        PolicyKind::Random => Box::new(SetAssocCache::random(config.baseline())?),
    })
}
