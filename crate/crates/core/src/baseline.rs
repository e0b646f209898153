//! Conventional set-associative caches used as comparison arms.

use crate::access::{
    block_addr_of, map_address, Access, AccessOutcome, Eviction, FillCase, FrameId,
};
use crate::config::{BaselineConfig, ConfigError};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WayVictim {
    Lru,
    /// One draw per eviction, `r mod ways`.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Line {
    pub valid: bool,
    pub tag: u64,
    pub dirty: bool,
}

#[derive(Debug, Clone)]
pub struct SetAssocCache {
    config: BaselineConfig,
    victim: WayVictim,
    /// `num_sets * ways` lines, set-major.
    lines: Vec<Line>,
    /// Per set, valid ways most recently used first.
    recency: Vec<Vec<u32>>,
    rng: SplitMix64,
}

impl SetAssocCache {
    pub fn lru(config: BaselineConfig) -> Result<Self, ConfigError> {
        Self::new(config, WayVictim::Lru)
    }

    pub fn random(config: BaselineConfig) -> Result<Self, ConfigError> {
        Self::new(config, WayVictim::Random)
    }

    pub fn new(config: BaselineConfig, victim: WayVictim) -> Result<Self, ConfigError> {
        config.validate()?;
        let ways = config.ways as usize;
        Ok(Self {
            config,
            victim,
            lines: vec![Line::default(); config.num_sets as usize * ways],
            recency: vec![Vec::with_capacity(ways); config.num_sets as usize],
            rng: SplitMix64::new(config.seed),
        })
    }

    pub fn config(&self) -> &BaselineConfig {
        &self.config
    }

    pub fn victim(&self) -> WayVictim {
        self.victim
    }

    pub fn rng_state(&self) -> u64 {
        self.rng.state()
    }

    pub fn set_lines(&self, set: u32) -> &[Line] {
        let ways = self.config.ways as usize;
        let base = set as usize * ways;
        &self.lines[base..base + ways]
    }

    /// Valid ways of `set`, most recently used first.
    pub fn recency(&self, set: u32) -> &[u32] {
        &self.recency[set as usize]
    }

    pub fn access(&mut self, access: Access) -> AccessOutcome {
        let parts = map_address(
            self.config.num_sets,
            self.config.block_size_bytes,
            access.address,
        );
        let set = parts.set_index;
        let ways = self.config.ways;
        let base = set * ways;
        let lines = &mut self.lines[base as usize..(base + ways) as usize];

        if let Some(way) = lines.iter().position(|l| l.valid && l.tag == parts.tag) {
            if access.is_store() {
                lines[way].dirty = true;
            }
            touch(&mut self.recency[set as usize], way as u32);
            return AccessOutcome::hit(FrameId(base + way as u32));
        }

        let (way, evicted) = match lines.iter().position(|l| !l.valid) {
            Some(way) => (way as u32, Vec::new()),
            None => {
                let way = match self.victim {
                    WayVictim::Lru => *self.recency[set as usize]
                        .last()
                        .expect("full set has an LRU way"),
                    WayVictim::Random => self.rng.below(u64::from(ways)) as u32,
                };
                let old = lines[way as usize];
                let eviction = Eviction {
                    block_addr: block_addr_of(self.config.num_sets, set, old.tag),
                    dirty: old.dirty,
                };
                (way, vec![eviction])
            }
        };
        let case = if evicted.is_empty() {
            FillCase::C1
        } else {
            FillCase::C2
        };
        lines[way as usize] = Line {
            valid: true,
            tag: parts.tag,
            dirty: access.is_store(),
        };
        touch(&mut self.recency[set as usize], way);
        AccessOutcome::miss(case, evicted, FrameId(base + way))
    }

    /// Recency lists must be permutations of the valid ways and no tag may
    /// appear twice in a set. Returns a description per violation.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut out = Vec::new();
        for set in 0..self.config.num_sets {
            let lines = self.set_lines(set);
            let mut valid: Vec<u32> = (0..self.config.ways)
                .filter(|&w| lines[w as usize].valid)
                .collect();
            let mut listed = self.recency[set as usize].clone();
            listed.sort_unstable();
            valid.sort_unstable();
            if valid != listed {
                out.push(format!("set {set}: recency does not match valid ways"));
            }
            for (w, l) in lines.iter().enumerate() {
                if l.valid && lines[..w].iter().any(|o| o.valid && o.tag == l.tag) {
                    out.push(format!("set {set}: duplicate tag {:#x}", l.tag));
                }
            }
        }
        out
    }
}

fn touch(order: &mut Vec<u32>, way: u32) {
    if let Some(pos) = order.iter().position(|&w| w == way) {
        order.remove(pos);
    }
    order.insert(0, way);
}
