//! Naive reference replay of every policy.
//!
//! Written directly from the policy rules with no shared machinery: LRU is
//! found by minimum timestamp instead of an ordered list, free frames and
//! random victims by linear scans, and the RNG recurrence is inlined. The
//! engines are certified by comparing outcome sequences against this.
//! Intended for small geometries only.

use crate::access::{Access, AccessKind, AccessOutcome, Eviction, FillCase, FrameId};
use crate::config::{Case4Mode, ConfigError, SimConfig};
use crate::policy::PolicyKind;

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, Default)]
struct Slot {
    valid: bool,
    tag: u64,
    frame: usize,
    stamp: u64,
    dirty: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Frame {
    valid: bool,
    set: usize,
    way: usize,
    dirty: bool,
    ctr: u8,
}

/// Replay state. Decoupled policies use `slots` + `frames`; conventional
/// ones use `slots` only, with the dirty bit kept on the slot.
#[derive(Debug, Clone)]
pub struct Oracle {
    policy: PolicyKind,
    sets: usize,
    ways: usize,
    block: u64,
    case4: Case4Mode,
    slots: Vec<Vec<Slot>>,
    frames: Vec<Frame>,
    rng: u64,
    clock: u64,
    ptr: usize,
}

impl Oracle {
    pub fn new(config: &SimConfig, policy: PolicyKind) -> Result<Self, ConfigError> {
        config.validate()?;
        let sets = config.num_sets as usize;
        let ways = if policy.is_decoupled() {
            config.tag_ways as usize
        } else {
            config.data_ways as usize
        };
        let frames = if policy.is_decoupled() {
            sets * config.data_ways as usize
        } else {
            0
        };
        Ok(Self {
            policy,
            sets,
            ways,
            block: config.block_size_bytes,
            case4: config.case4_mode,
            slots: vec![vec![Slot::default(); ways]; sets],
            frames: vec![Frame::default(); frames],
            rng: config.seed,
            clock: 0,
            ptr: 0,
        })
    }

    pub fn step(&mut self, access: Access) -> AccessOutcome {
        self.clock += 1;
        let block = access.address / self.block;
        let set = (block % self.sets as u64) as usize;
        let tag = block / self.sets as u64;
        let store = access.kind == AccessKind::Store;
        if self.policy.is_decoupled() {
            self.step_decoupled(set, tag, store)
        } else {
            self.step_conventional(set, tag, store)
        }
    }

    fn block_of(&self, set: usize, tag: u64) -> u64 {
        tag * self.sets as u64 + set as u64
    }

    fn lru_way(&self, set: usize) -> usize {
        let mut best: Option<usize> = None;
        for w in 0..self.ways {
            let s = self.slots[set][w];
            if s.valid && best.is_none_or(|b| s.stamp < self.slots[set][b].stamp) {
                best = Some(w);
            }
        }
        best.expect("lru of an empty set")
    }

    fn first_free_way(&self, set: usize) -> Option<usize> {
        (0..self.ways).find(|&w| !self.slots[set][w].valid)
    }

    fn step_conventional(&mut self, set: usize, tag: u64, store: bool) -> AccessOutcome {
        for w in 0..self.ways {
            let s = &mut self.slots[set][w];
            if s.valid && s.tag == tag {
                s.stamp = self.clock;
                s.dirty |= store;
                return AccessOutcome::hit(FrameId((set * self.ways + w) as u32));
            }
        }
        let mut evicted = Vec::new();
        let way = match self.first_free_way(set) {
            Some(w) => w,
            None => {
                let w = if self.policy == PolicyKind::Random {
                    (splitmix(&mut self.rng) % self.ways as u64) as usize
                } else {
                    self.lru_way(set)
                };
                let old = self.slots[set][w];
                evicted.push(Eviction {
                    block_addr: self.block_of(set, old.tag),
                    dirty: old.dirty,
                });
                w
            }
        };
        self.slots[set][way] = Slot {
            valid: true,
            tag,
            frame: 0,
            stamp: self.clock,
            dirty: store,
        };
        let case = if evicted.is_empty() {
            FillCase::C1
        } else {
            FillCase::C2
        };
        AccessOutcome::miss(case, evicted, FrameId((set * self.ways + way) as u32))
    }

    /// Invalidate the tag at `(set, way)` and its frame; report the block.
    fn drop_line(&mut self, set: usize, way: usize) -> (Eviction, usize) {
        let slot = self.slots[set][way];
        let frame = self.frames[slot.frame];
        self.slots[set][way].valid = false;
        self.frames[slot.frame] = Frame::default();
        (
            Eviction {
                block_addr: self.block_of(set, slot.tag),
                dirty: frame.dirty,
            },
            slot.frame,
        )
    }

    fn pick_frame_victim(&mut self) -> usize {
        if self.policy == PolicyKind::Vway {
            let n = self.frames.len();
            let mut i = self.ptr;
            loop {
                if self.frames[i].valid {
                    if self.frames[i].ctr == 0 {
                        self.ptr = (i + 1) % n;
                        return i;
                    }
                    self.frames[i].ctr -= 1;
                }
                i = (i + 1) % n;
            }
        }
        let valid: Vec<usize> = (0..self.frames.len())
            .filter(|&i| self.frames[i].valid)
            .collect();
        let r = (splitmix(&mut self.rng) % valid.len() as u64) as usize;
        valid[r]
    }

    fn fill(&mut self, set: usize, way: usize, tag: u64, frame: usize, store: bool) {
        self.slots[set][way] = Slot {
            valid: true,
            tag,
            frame,
            stamp: self.clock,
            dirty: false,
        };
        self.frames[frame] = Frame {
            valid: true,
            set,
            way,
            dirty: store,
            ctr: 0,
        };
    }

    fn step_decoupled(&mut self, set: usize, tag: u64, store: bool) -> AccessOutcome {
        for w in 0..self.ways {
            let s = self.slots[set][w];
            if s.valid && s.tag == tag {
                self.slots[set][w].stamp = self.clock;
                let f = &mut self.frames[s.frame];
                f.dirty |= store;
                if self.policy == PolicyKind::Vway && f.ctr < 3 {
                    f.ctr += 1;
                }
                return AccessOutcome::hit(FrameId(s.frame as u32));
            }
        }

        let free_way = self.first_free_way(set);
        let free_frame = (0..self.frames.len()).find(|&i| !self.frames[i].valid);

        let (case, way, frame, evicted) = match (free_way, free_frame) {
            (Some(w), Some(f)) => (FillCase::C1, w, f, vec![]),
            (None, Some(_)) => {
                let w = self.lru_way(set);
                let (ev, f) = self.drop_line(set, w);
                (FillCase::C2, w, f, vec![ev])
            }
            (Some(_), None) => {
                let f = self.pick_frame_victim();
                let (owner_set, owner_way) = (self.frames[f].set, self.frames[f].way);
                let (ev, _) = self.drop_line(owner_set, owner_way);
                let w = self.first_free_way(set).expect("set still has a free way");
                (FillCase::C3, w, f, vec![ev])
            }
            (None, None) => {
                let w = self.lru_way(set);
                let (ev, lru_frame) = self.drop_line(set, w);
                match self.case4 {
                    Case4Mode::Reuse => (FillCase::C4, w, lru_frame, vec![ev]),
                    Case4Mode::Literal => {
                        if self.frames.iter().any(|f| f.valid) {
                            let f = self.pick_frame_victim();
                            let (os, ow) = (self.frames[f].set, self.frames[f].way);
                            let (ev2, _) = self.drop_line(os, ow);
                            (FillCase::C4, w, f, vec![ev, ev2])
                        } else {
                            (FillCase::C4, w, lru_frame, vec![ev])
                        }
                    }
                }
            }
        };
        self.fill(set, way, tag, frame, store);
        AccessOutcome::miss(case, evicted, FrameId(frame as u32))
    }

    /// Structural checks on the oracle's own tables: link bijection, tag
    /// uniqueness per set, and capacity.
    pub fn check(&self) -> Vec<String> {
        let mut out = Vec::new();
        for set in 0..self.sets {
            for w in 0..self.ways {
                let s = self.slots[set][w];
                if !s.valid {
                    continue;
                }
                if (0..w).any(|o| self.slots[set][o].valid && self.slots[set][o].tag == s.tag) {
                    out.push(format!("set {set}: duplicate tag {:#x}", s.tag));
                }
                if self.policy.is_decoupled() {
                    let f = self.frames[s.frame];
                    if !(f.valid && f.set == set && f.way == w) {
                        out.push(format!(
                            "tag ({set},{w}) -> frame {} not linked back",
                            s.frame
                        ));
                    }
                }
            }
        }
        for (i, f) in self.frames.iter().enumerate() {
            if f.valid {
                let s = self.slots[f.set][f.way];
                if !(s.valid && s.frame == i) {
                    out.push(format!(
                        "frame {i} back link ({},{}) is stale",
                        f.set, f.way
                    ));
                }
            }
        }
        out
    }
}

/// Replay `trace` under `policy` and return every outcome. `rac` and `vway`
/// honour `config.case4_mode`; `lru` and `random` use `data_ways` as their
/// associativity.
pub fn oracle_replay(
    config: &SimConfig,
    policy: PolicyKind,
    trace: &[Access],
) -> Result<Vec<AccessOutcome>, ConfigError> {
    let mut oracle = Oracle::new(config, policy)?;
    Ok(trace.iter().map(|&a| oracle.step(a)).collect())
}
