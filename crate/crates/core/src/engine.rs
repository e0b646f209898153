//! Random adaptive cache: a per-set tag directory decoupled from a global
//! pool of data frames.
//!
//! Each set owns `tag_ways` tag entries, twice the per-set share of data
//! frames at the default geometry. A valid tag entry points forward to the
//! frame holding its data and that frame points back to the entry. Tags are
//! replaced LRU within a set; when the data store is full, a frame is taken
//! from anywhere in the pool and its owning tag is invalidated through the
//! back link. This lets hot sets borrow capacity from cold ones.
//!
//! The same structure, with the random frame choice swapped for a
//! reuse-counter clock sweep, serves as the V-Way comparison policy.

use std::collections::BTreeSet;
use std::fmt;

use crate::access::{
    block_addr_of, map_address, Access, AccessOutcome, Eviction, FillCase, FrameId, TagLoc,
};
use crate::config::{Case4Mode, ConfigError, SimConfig};
use crate::rank::RankIndex;
use crate::rng::SplitMix64;

/// Saturation value of the 2-bit reuse counter.
pub const REUSE_MAX: u8 = 3;

/// How a frame is chosen when the data store has to give one up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataReplacement {
    /// Uniform over all valid frames.
    Random,
    /// Clock sweep over per-frame reuse counters.
    Reuse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TagEntry {
    pub valid: bool,
    pub tag: u64,
    /// Meaningful only when `valid`.
    pub fwd: FrameId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSet {
    entries: Vec<TagEntry>,
    /// Valid ways, most recently used first.
    recency: Vec<u16>,
}

impl TagSet {
    fn new(ways: usize) -> Self {
        Self {
            entries: vec![TagEntry::default(); ways],
            recency: Vec::with_capacity(ways),
        }
    }

    pub fn entries(&self) -> &[TagEntry] {
        &self.entries
    }

    pub fn recency(&self) -> &[u16] {
        &self.recency
    }

    pub fn valid_count(&self) -> usize {
        self.entries.iter().filter(|e| e.valid).count()
    }

    fn find(&self, tag: u64) -> Option<u16> {
        self.entries
            .iter()
            .position(|e| e.valid && e.tag == tag)
            .map(|w| w as u16)
    }

    fn first_invalid(&self) -> Option<u16> {
        self.entries.iter().position(|e| !e.valid).map(|w| w as u16)
    }

    fn lru(&self) -> Option<u16> {
        self.recency.last().copied()
    }

    fn touch(&mut self, way: u16) {
        if let Some(pos) = self.recency.iter().position(|&w| w == way) {
            self.recency.remove(pos);
        }
        self.recency.insert(0, way);
    }

    fn forget(&mut self, way: u16) {
        self.recency.retain(|&w| w != way);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DataFrame {
    pub valid: bool,
    pub back: TagLoc,
    pub dirty: bool,
    /// Only the V-Way policy moves this off zero.
    pub reuse_ctr: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InvariantKind {
    Bijection,
    Capacity,
    Recency,
    FreeSet,
    Occupancy,
    HitPurity,
    Uniqueness,
}

impl fmt::Display for InvariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InvariantKind::Bijection => "bijection",
            InvariantKind::Capacity => "capacity",
            InvariantKind::Recency => "recency",
            InvariantKind::FreeSet => "free-set",
            InvariantKind::Occupancy => "occupancy",
            InvariantKind::HitPurity => "hit-purity",
            InvariantKind::Uniqueness => "uniqueness",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: InvariantKind,
    pub detail: String,
}

impl Violation {
    fn new(kind: InvariantKind, detail: impl Into<String>) -> Self {
        Self {
            kind,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct RacEngine {
    config: SimConfig,
    replacement: DataReplacement,
    sets: Vec<TagSet>,
    frames: Vec<DataFrame>,
    free_frames: BTreeSet<u32>,
    valid_frames: RankIndex,
    valid_tags: usize,
    rng: SplitMix64,
    reuse_ptr: u32,
}

impl RacEngine {
    /// Random adaptive cache with uniform-random data-frame eviction.
    pub fn new(config: SimConfig) -> Result<Self, ConfigError> {
        Self::with_replacement(config, DataReplacement::Random)
    }

    /// Same decoupled structure with reuse-counter frame replacement.
    pub fn vway(config: SimConfig) -> Result<Self, ConfigError> {
        Self::with_replacement(config, DataReplacement::Reuse)
    }

    pub fn with_replacement(
        config: SimConfig,
        replacement: DataReplacement,
    ) -> Result<Self, ConfigError> {
        config.validate()?;
        let total = config.total_frames();
        Ok(Self {
            config,
            replacement,
            sets: (0..config.num_sets)
                .map(|_| TagSet::new(config.tag_ways as usize))
                .collect(),
            frames: vec![DataFrame::default(); total],
            free_frames: (0..total as u32).collect(),
            valid_frames: RankIndex::new(total),
            valid_tags: 0,
            rng: SplitMix64::new(config.seed),
            reuse_ptr: 0,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn replacement(&self) -> DataReplacement {
        self.replacement
    }

    pub fn sets(&self) -> &[TagSet] {
        &self.sets
    }

    pub fn frames(&self) -> &[DataFrame] {
        &self.frames
    }

    pub fn free_frames(&self) -> &BTreeSet<u32> {
        &self.free_frames
    }

    pub fn valid_frame_count(&self) -> usize {
        self.valid_frames.count()
    }

    pub fn valid_tag_count(&self) -> usize {
        self.valid_tags
    }

    pub fn rng_state(&self) -> u64 {
        self.rng.state()
    }

    pub fn reuse_ptr(&self) -> u32 {
        self.reuse_ptr
    }

    pub fn contains(&self, address: u64) -> bool {
        let p = map_address(self.config.num_sets, self.config.block_size_bytes, address);
        self.sets[p.set_index as usize].find(p.tag).is_some()
    }

    /// Uniformly pick a valid frame: draw `r`, reduce modulo the number of
    /// valid frames and return the `r`-th valid frame in index order.
    ///
    /// Panics if no frame is valid; the access path never calls it then.
    pub fn select_random_victim(&mut self) -> FrameId {
        let k = self.valid_frames.count();
        assert!(k > 0, "random victim requested with no valid frames");
        let r = self.rng.below(k as u64) as usize;
        let pos = self
            .valid_frames
            .select(r)
            .expect("rank index out of sync with frame table");
        FrameId(pos as u32)
    }

    /// Clock sweep from the cursor: nonzero counters are decremented and
    /// skipped, the first valid frame at zero is the victim and the cursor
    /// moves past it. Invalid frames are skipped untouched.
    ///
    /// Panics if no frame is valid.
    pub fn select_reuse_victim(&mut self) -> FrameId {
        assert!(
            self.valid_frames.count() > 0,
            "reuse victim requested with no valid frames"
        );
        let n = self.frames.len();
        let mut pos = self.reuse_ptr as usize;
        loop {
            let frame = &mut self.frames[pos];
            if frame.valid {
                if frame.reuse_ctr == 0 {
                    self.reuse_ptr = ((pos + 1) % n) as u32;
                    return FrameId(pos as u32);
                }
                frame.reuse_ctr -= 1;
            }
            pos = (pos + 1) % n;
        }
    }

    fn data_victim(&mut self) -> FrameId {
        match self.replacement {
            DataReplacement::Random => self.select_random_victim(),
            DataReplacement::Reuse => self.select_reuse_victim(),
        }
    }

    pub fn access(&mut self, access: Access) -> AccessOutcome {
        let parts = map_address(
            self.config.num_sets,
            self.config.block_size_bytes,
            access.address,
        );
        let set = parts.set_index;
        let tag_set = &mut self.sets[set as usize];

        if let Some(way) = tag_set.find(parts.tag) {
            tag_set.touch(way);
            let fwd = tag_set.entries[way as usize].fwd;
            let frame = &mut self.frames[fwd.index()];
            if access.is_store() {
                frame.dirty = true;
            }
            if self.replacement == DataReplacement::Reuse {
                frame.reuse_ctr = (frame.reuse_ctr + 1).min(REUSE_MAX);
            }
            return AccessOutcome::hit(fwd);
        }

        let free_way = tag_set.first_invalid();
        let store_has_room = !self.free_frames.is_empty();
        let store = access.is_store();

        match (free_way, store_has_room) {
            (Some(way), true) => {
                let frame = self.pop_free_frame();
                self.install(set, way, parts.tag, frame, store);
                AccessOutcome::miss(FillCase::C1, Vec::new(), frame)
            }
            (None, true) => {
                let (way, eviction, frame) = self.evict_lru(set);
                self.install(set, way, parts.tag, frame, store);
                AccessOutcome::miss(FillCase::C2, vec![eviction], frame)
            }
            (Some(_), false) => {
                let frame = self.data_victim();
                let eviction = self.evict_frame_owner(frame);
                let way = self.sets[set as usize]
                    .first_invalid()
                    .expect("set had a free way before the eviction");
                self.install(set, way, parts.tag, frame, store);
                AccessOutcome::miss(FillCase::C3, vec![eviction], frame)
            }
            (None, false) => match self.config.case4_mode {
                Case4Mode::Reuse => {
                    let (way, eviction, frame) = self.evict_lru(set);
                    self.install(set, way, parts.tag, frame, store);
                    AccessOutcome::miss(FillCase::C4, vec![eviction], frame)
                }
                Case4Mode::Literal => {
                    let (way, lru_eviction, lru_frame) = self.evict_lru(set);
                    self.free_frames.insert(lru_frame.0);
                    let mut evicted = vec![lru_eviction];
                    let frame = if self.valid_frames.count() > 0 {
                        let victim = self.data_victim();
                        evicted.push(self.evict_frame_owner(victim));
                        victim
                    } else {
                        // Single-frame store: nothing else to evict.
                        self.pop_free_frame()
                    };
                    self.install(set, way, parts.tag, frame, store);
                    AccessOutcome::miss(FillCase::C4, evicted, frame)
                }
            },
        }
    }

    fn pop_free_frame(&mut self) -> FrameId {
        let idx = self
            .free_frames
            .pop_first()
            .expect("caller checked the free list");
        FrameId(idx)
    }

    /// Invalidate the LRU entry of a full set. Returns its way, the evicted
    /// block and the frame it held (now invalid, not on the free list).
    fn evict_lru(&mut self, set: u32) -> (u16, Eviction, FrameId) {
        let way = self.sets[set as usize]
            .lru()
            .expect("full set has an LRU entry");
        let (eviction, frame) = self.release(TagLoc { set, way });
        (way, eviction, frame)
    }

    fn evict_frame_owner(&mut self, frame: FrameId) -> Eviction {
        let owner = self.frames[frame.index()].back;
        let (eviction, released) = self.release(owner);
        debug_assert_eq!(released, frame);
        eviction
    }

    fn release(&mut self, loc: TagLoc) -> (Eviction, FrameId) {
        let tag_set = &mut self.sets[loc.set as usize];
        let entry = &mut tag_set.entries[loc.way as usize];
        debug_assert!(entry.valid);
        entry.valid = false;
        let (tag, fwd) = (entry.tag, entry.fwd);
        tag_set.forget(loc.way);

        let frame = &mut self.frames[fwd.index()];
        let dirty = frame.dirty;
        frame.valid = false;
        frame.dirty = false;
        frame.reuse_ctr = 0;
        self.valid_frames.clear(fwd.index());
        self.valid_tags -= 1;

        let eviction = Eviction {
            block_addr: block_addr_of(self.config.num_sets, loc.set, tag),
            dirty,
        };
        (eviction, fwd)
    }

    fn install(&mut self, set: u32, way: u16, tag: u64, frame: FrameId, dirty: bool) {
        let tag_set = &mut self.sets[set as usize];
        tag_set.entries[way as usize] = TagEntry {
            valid: true,
            tag,
            fwd: frame,
        };
        tag_set.touch(way);
        self.frames[frame.index()] = DataFrame {
            valid: true,
            back: TagLoc { set, way },
            dirty,
            reuse_ctr: 0,
        };
        self.valid_frames.set(frame.index());
        self.valid_tags += 1;
    }

    /// Structural check of the tag/frame links, capacities, recency lists,
    /// free list and tag uniqueness. Empty when everything holds.
    pub fn check_invariants(&self) -> Vec<Violation> {
        use InvariantKind::*;
        let mut out = Vec::new();
        let total = self.frames.len();

        for (s, tag_set) in self.sets.iter().enumerate() {
            if tag_set.entries.len() != self.config.tag_ways as usize {
                out.push(Violation::new(
                    Capacity,
                    format!("set {s} has {} ways", tag_set.entries.len()),
                ));
            }
            for (w, entry) in tag_set.entries.iter().enumerate() {
                if !entry.valid {
                    continue;
                }
                let loc = TagLoc {
                    set: s as u32,
                    way: w as u16,
                };
                match self.frames.get(entry.fwd.index()) {
                    Some(f) if f.valid && f.back == loc => {}
                    Some(_) => out.push(Violation::new(
                        Bijection,
                        format!(
                            "tag at {loc} points to {} which does not point back",
                            entry.fwd
                        ),
                    )),
                    None => out.push(Violation::new(
                        Bijection,
                        format!("tag at {loc} points past the data store ({})", entry.fwd),
                    )),
                }
                let dup = tag_set.entries[..w]
                    .iter()
                    .any(|e| e.valid && e.tag == entry.tag);
                if dup {
                    out.push(Violation::new(
                        Uniqueness,
                        format!("tag {:#x} appears twice in set {s}", entry.tag),
                    ));
                }
            }

            let mut expected: Vec<u16> = tag_set
                .entries
                .iter()
                .enumerate()
                .filter(|(_, e)| e.valid)
                .map(|(w, _)| w as u16)
                .collect();
            let mut listed = tag_set.recency.clone();
            expected.sort_unstable();
            listed.sort_unstable();
            if expected != listed {
                out.push(Violation::new(
                    Recency,
                    format!(
                        "set {s} recency {:?} is not a permutation of valid ways {:?}",
                        tag_set.recency, expected
                    ),
                ));
            }
        }

        let mut valid_frames = 0usize;
        for (i, frame) in self.frames.iter().enumerate() {
            let in_free = self.free_frames.contains(&(i as u32));
            if frame.valid == in_free {
                out.push(Violation::new(
                    FreeSet,
                    format!(
                        "frame {i} valid={} but free-list membership={in_free}",
                        frame.valid
                    ),
                ));
            }
            if !frame.valid {
                continue;
            }
            valid_frames += 1;
            let back = frame.back;
            let owner = self
                .sets
                .get(back.set as usize)
                .and_then(|ts| ts.entries.get(back.way as usize));
            match owner {
                Some(e) if e.valid && e.fwd.index() == i => {}
                _ => out.push(Violation::new(
                    Bijection,
                    format!("frame {i} back link {back} does not name a valid owner of this frame"),
                )),
            }
        }
        if let Some(&bad) = self.free_frames.range(total as u32..).next() {
            out.push(Violation::new(
                FreeSet,
                format!("free list holds out-of-range frame {bad}"),
            ));
        }
        if valid_frames > total {
            out.push(Violation::new(
                Capacity,
                format!("{valid_frames} valid frames exceed {total}"),
            ));
        }
        if valid_frames != self.valid_frames.count() {
            out.push(Violation::new(
                FreeSet,
                format!(
                    "rank index counts {} valid frames, table has {valid_frames}",
                    self.valid_frames.count()
                ),
            ));
        }
        out
    }
}

/// Check the per-access effects: occupancy deltas by fill case, and that a
/// hit leaves validity, links, the free list and the RNG untouched (only
/// recency and a single dirty bit may move).
pub fn check_transition(
    before: &RacEngine,
    after: &RacEngine,
    outcome: &AccessOutcome,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let d_tags = after.valid_tags as i64 - before.valid_tags as i64;
    let d_frames = after.valid_frame_count() as i64 - before.valid_frame_count() as i64;
    let expected = match outcome.fill_case {
        None => (0, 0),
        Some(FillCase::C1) => (1, 1),
        Some(FillCase::C2) | Some(FillCase::C3) => (0, 0),
        Some(FillCase::C4) => match before.config.case4_mode {
            Case4Mode::Reuse => (0, 0),
            Case4Mode::Literal if outcome.evicted.len() == 2 => (-1, -1),
            Case4Mode::Literal => (0, 0),
        },
    };
    if (d_tags, d_frames) != expected {
        out.push(Violation::new(
            InvariantKind::Occupancy,
            format!(
                "{:?}: deltas (tags {d_tags}, frames {d_frames}), expected {expected:?}",
                outcome.fill_case
            ),
        ));
    }

    if outcome.hit {
        let same_tags = before
            .sets
            .iter()
            .zip(&after.sets)
            .all(|(a, b)| a.entries == b.entries);
        if !same_tags {
            out.push(Violation::new(
                InvariantKind::HitPurity,
                "hit changed a tag entry",
            ));
        }
        let mut dirty_flips = 0;
        let mut frames_changed = false;
        for (a, b) in before.frames.iter().zip(&after.frames) {
            if a.valid != b.valid || a.back != b.back {
                frames_changed = true;
            }
            if a.dirty != b.dirty {
                dirty_flips += 1;
            }
        }
        if frames_changed {
            out.push(Violation::new(
                InvariantKind::HitPurity,
                "hit changed a frame's validity or back link",
            ));
        }
        if dirty_flips > 1 {
            out.push(Violation::new(
                InvariantKind::HitPurity,
                format!("hit changed {dirty_flips} dirty bits"),
            ));
        }
        if before.free_frames != after.free_frames {
            out.push(Violation::new(
                InvariantKind::HitPurity,
                "hit changed the free list",
            ));
        }
        if before.rng != after.rng {
            out.push(Violation::new(
                InvariantKind::HitPurity,
                "hit consumed a random draw",
            ));
        }
    }
    out
}
