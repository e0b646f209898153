//! Cache geometry and run configuration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_SETS: u32 = 2048;
pub const DEFAULT_TAG_WAYS: u32 = 32;
pub const DEFAULT_DATA_WAYS: u32 = 16;
pub const DEFAULT_BLOCK_SIZE: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("number of sets must be a power of two, got {0}")]
    SetsNotPowerOfTwo(u32),
    #[error("block size must be a power of two, got {0}")]
    BlockNotPowerOfTwo(u64),
    #[error("{0} must be at least 1")]
    ZeroWays(&'static str),
    #[error("geometry too large: {0} frames")]
    TooLarge(u64),
}

/// How a miss is handled when both the target set's tags and the data store
/// are full.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case4Mode {
    /// Evict the set's LRU tag and hand its frame straight to the new block.
    #[default]
    Reuse,
    /// Evict the set's LRU tag, free its frame, then additionally evict a
    /// victim frame chosen by the data-store replacement rule. Occupancy
    /// shrinks by one line per event.
    Literal,
}

impl fmt::Display for Case4Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case4Mode::Reuse => "reuse",
            Case4Mode::Literal => "literal",
        })
    }
}

impl FromStr for Case4Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reuse" => Ok(Case4Mode::Reuse),
            "literal" => Ok(Case4Mode::Literal),
            other => Err(format!(
                "unknown case-4 mode '{other}' (expected reuse|literal)"
            )),
        }
    }
}

/// Geometry of the decoupled cache plus the run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub num_sets: u32,
    pub tag_ways: u32,
    pub data_ways: u32,
    pub block_size_bytes: u64,
    pub seed: u64,
    pub case4_mode: Case4Mode,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            num_sets: DEFAULT_SETS,
            tag_ways: DEFAULT_TAG_WAYS,
            data_ways: DEFAULT_DATA_WAYS,
            block_size_bytes: DEFAULT_BLOCK_SIZE,
            seed: 0,
            case4_mode: Case4Mode::Reuse,
        }
    }
}

impl SimConfig {
    pub fn with_geometry(num_sets: u32, tag_ways: u32, data_ways: u32) -> Self {
        Self {
            num_sets,
            tag_ways,
            data_ways,
            ..Self::default()
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn case4(mut self, mode: Case4Mode) -> Self {
        self.case4_mode = mode;
        self
    }

    pub fn block_size(mut self, bytes: u64) -> Self {
        self.block_size_bytes = bytes;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.num_sets.is_power_of_two() {
            return Err(ConfigError::SetsNotPowerOfTwo(self.num_sets));
        }
        if !self.block_size_bytes.is_power_of_two() {
            return Err(ConfigError::BlockNotPowerOfTwo(self.block_size_bytes));
        }
        if self.tag_ways == 0 {
            return Err(ConfigError::ZeroWays("tag_ways"));
        }
        if self.data_ways == 0 {
            return Err(ConfigError::ZeroWays("data_ways"));
        }
        if self.tag_ways > u32::from(u16::MAX) {
            return Err(ConfigError::TooLarge(u64::from(self.tag_ways)));
        }
        let frames = self.total_frames_u64();
        if frames > u64::from(u32::MAX) {
            return Err(ConfigError::TooLarge(frames));
        }
        Ok(())
    }

    fn total_frames_u64(&self) -> u64 {
        u64::from(self.num_sets) * u64::from(self.data_ways)
    }

    pub fn total_frames(&self) -> usize {
        self.total_frames_u64() as usize
    }

    pub fn total_tag_entries(&self) -> usize {
        self.num_sets as usize * self.tag_ways as usize
    }

    /// Tag-to-data ratio as a reduced fraction `(numerator, denominator)`.
    pub fn tdr(&self) -> (u64, u64) {
        let num = u64::from(self.num_sets) * u64::from(self.tag_ways);
        let den = self.total_frames_u64();
        let g = gcd(num, den).max(1);
        (num / g, den / g)
    }

    /// Geometry for the conventional baselines: same sets and the same data
    /// capacity, with `data_ways` as the associativity.
    pub fn baseline(&self) -> BaselineConfig {
        BaselineConfig {
            num_sets: self.num_sets,
            ways: self.data_ways,
            block_size_bytes: self.block_size_bytes,
            seed: self.seed,
        }
    }
}

/// Geometry of a conventional set-associative cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub num_sets: u32,
    pub ways: u32,
    pub block_size_bytes: u64,
    pub seed: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        SimConfig::default().baseline()
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.num_sets.is_power_of_two() {
            return Err(ConfigError::SetsNotPowerOfTwo(self.num_sets));
        }
        if !self.block_size_bytes.is_power_of_two() {
            return Err(ConfigError::BlockNotPowerOfTwo(self.block_size_bytes));
        }
        if self.ways == 0 {
            return Err(ConfigError::ZeroWays("ways"));
        }
        let lines = u64::from(self.num_sets) * u64::from(self.ways);
        if lines > u64::from(u32::MAX) {
            return Err(ConfigError::TooLarge(lines));
        }
        Ok(())
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_geometry() {
        let c = SimConfig::default();
        assert_eq!(
            (c.num_sets, c.tag_ways, c.data_ways, c.block_size_bytes),
            (2048, 32, 16, 64)
        );
        assert_eq!(c.case4_mode, Case4Mode::Reuse);
        assert_eq!(c.total_frames(), 32768);
        assert_eq!(c.total_tag_entries(), 65536);
        assert_eq!(c.tdr(), (2, 1));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn tdr_reduces() {
        assert_eq!(SimConfig::with_geometry(4, 6, 4).tdr(), (3, 2));
        assert_eq!(SimConfig::with_geometry(8, 4, 4).tdr(), (1, 1));
    }

    #[test]
    fn rejects_bad_geometry() {
        assert_eq!(
            SimConfig::with_geometry(3, 4, 2).validate(),
            Err(ConfigError::SetsNotPowerOfTwo(3))
        );
        assert_eq!(
            SimConfig::default().block_size(48).validate(),
            Err(ConfigError::BlockNotPowerOfTwo(48))
        );
        assert!(matches!(
            SimConfig::with_geometry(2, 0, 2).validate(),
            Err(ConfigError::ZeroWays(_))
        ));
        assert!(matches!(
            SimConfig::with_geometry(2, 4, 0).validate(),
            Err(ConfigError::ZeroWays(_))
        ));
        assert!(matches!(
            SimConfig::with_geometry(0, 4, 2).validate(),
            Err(ConfigError::SetsNotPowerOfTwo(0))
        ));
    }

    #[test]
    fn baseline_is_capacity_matched() {
        let b = SimConfig::default().baseline();
        assert_eq!((b.num_sets, b.ways), (2048, 16));
        assert_eq!(b, BaselineConfig::default());
    }

    #[test]
    fn case4_mode_parses() {
        assert_eq!("reuse".parse::<Case4Mode>(), Ok(Case4Mode::Reuse));
        assert_eq!("literal".parse::<Case4Mode>(), Ok(Case4Mode::Literal));
        assert!("both".parse::<Case4Mode>().is_err());
    }
}
