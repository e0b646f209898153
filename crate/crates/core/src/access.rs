//! Memory references, address decomposition and per-access outcomes.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessKind {
    Load,
    Store,
}

/// One memory reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Access {
    pub kind: AccessKind,
    pub address: u64,
}

impl Access {
    pub fn load(address: u64) -> Self {
        Self {
            kind: AccessKind::Load,
            address,
        }
    }

    pub fn store(address: u64) -> Self {
        Self {
            kind: AccessKind::Store,
            address,
        }
    }

    pub fn is_store(&self) -> bool {
        self.kind == AccessKind::Store
    }
}

/// Which fill path a miss took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillCase {
    /// Free way in the set and a free data frame.
    C1,
    /// Set full, data store has room.
    C2,
    /// Free way in the set, data store full.
    C3,
    /// Set full and data store full.
    C4,
}

impl FillCase {
    pub const ALL: [FillCase; 4] = [FillCase::C1, FillCase::C2, FillCase::C3, FillCase::C4];

    pub fn index(self) -> usize {
        match self {
            FillCase::C1 => 0,
            FillCase::C2 => 1,
            FillCase::C3 => 2,
            FillCase::C4 => 3,
        }
    }
}

impl fmt::Display for FillCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FillCase::C1 => "c1",
            FillCase::C2 => "c2",
            FillCase::C3 => "c3",
            FillCase::C4 => "c4",
        })
    }
}

/// Index of a frame in the global data store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FrameId(pub u32);

impl FrameId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for FrameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "frame {}", self.0)
    }
}

/// Location of a tag entry: `(set, way)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TagLoc {
    pub set: u32,
    pub way: u16,
}

impl fmt::Display for TagLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "set {} way {}", self.set, self.way)
    }
}

/// A block pushed out of the cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Eviction {
    pub block_addr: u64,
    pub dirty: bool,
}

/// What the cache did with one access.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AccessOutcome {
    pub hit: bool,
    /// `None` exactly when `hit`.
    pub fill_case: Option<FillCase>,
    pub evicted: Vec<Eviction>,
    /// Frame that was read (hit) or filled (miss).
    pub frame_used: Option<FrameId>,
}

impl AccessOutcome {
    pub fn hit(frame: FrameId) -> Self {
        Self {
            hit: true,
            fill_case: None,
            evicted: Vec::new(),
            frame_used: Some(frame),
        }
    }

    pub fn miss(case: FillCase, evicted: Vec<Eviction>, frame: FrameId) -> Self {
        Self {
            hit: false,
            fill_case: Some(case),
            evicted,
            frame_used: Some(frame),
        }
    }

    pub fn dirty_evictions(&self) -> usize {
        self.evicted.iter().filter(|e| e.dirty).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AddressParts {
    pub block_addr: u64,
    pub set_index: u32,
    pub tag: u64,
}

/// Split a byte address into block address, set index and tag. `num_sets`
/// and `block_size_bytes` must be powers of two.
pub fn map_address(num_sets: u32, block_size_bytes: u64, address: u64) -> AddressParts {
    let block_addr = address / block_size_bytes;
    let sets = u64::from(num_sets);
    AddressParts {
        block_addr,
        set_index: (block_addr % sets) as u32,
        tag: block_addr / sets,
    }
}

/// Inverse of the set/tag split.
pub fn block_addr_of(num_sets: u32, set_index: u32, tag: u64) -> u64 {
    tag * u64::from(num_sets) + u64::from(set_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_address() {
        let p = map_address(2048, 64, 0);
        assert_eq!((p.block_addr, p.set_index, p.tag), (0, 0, 0));
    }

    #[test]
    fn default_geometry_example() {
        let p = map_address(2048, 64, 0x1234_5678);
        assert_eq!((p.block_addr, p.set_index, p.tag), (4_772_185, 345, 2330));
    }

    #[test]
    fn small_geometry_example() {
        let p = map_address(2, 64, 0x7F);
        assert_eq!((p.block_addr, p.set_index, p.tag), (1, 1, 0));
    }

    #[test]
    fn hit_outcome_shape() {
        let o = AccessOutcome::hit(FrameId(3));
        assert!(o.hit && o.fill_case.is_none() && o.evicted.is_empty());
    }

    proptest! {
        #[test]
        fn decomposition_recombines(addr in any::<u64>(), sets_log in 0u32..16, block_log in 0u32..12) {
            let sets = 1u32 << sets_log;
            let block = 1u64 << block_log;
            let p = map_address(sets, block, addr);
            prop_assert!(p.set_index < sets);
            prop_assert_eq!(p.block_addr, addr / block);
            prop_assert_eq!(block_addr_of(sets, p.set_index, p.tag), p.block_addr);
        }
    }
}
