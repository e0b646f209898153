//! Synthetic workload generators. Every generated access is a load; block
//! ids become byte addresses as `block * block_size`.

use thiserror::Error;

use crate::access::Access;
use crate::config::SimConfig;
use crate::rng::SplitMix64;
use crate::trace::{TraceSource, TraceStream};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid generator parameter: {0}")]
    Param(String),
}

fn param(msg: impl Into<String>) -> GenError {
    GenError::Param(msg.into())
}

fn check_block_size(block_size: u64) -> Result<(), GenError> {
    if block_size == 0 || !block_size.is_power_of_two() {
        return Err(param(format!(
            "block size {block_size} is not a power of two"
        )));
    }
    Ok(())
}

/// `length` loads of blocks drawn uniformly from `0..n_blocks`.
pub fn gen_uniform(
    n_blocks: u64,
    length: usize,
    seed: u64,
    block_size: u64,
) -> Result<TraceStream, GenError> {
    if n_blocks == 0 {
        return Err(param("n_blocks must be at least 1"));
    }
    check_block_size(block_size)?;
    let mut rng = SplitMix64::new(seed);
    let accesses = (0..length)
        .map(|_| Access::load(rng.below(n_blocks) * block_size))
        .collect();
    Ok(TraceStream::new(
        TraceSource::Generated("uniform"),
        accesses,
    ))
}

/// Inverse-CDF sampler over ranks `1..=n` with weight `rank^(-s)`. Rank 1
/// (block 0) is the hottest.
#[derive(Debug, Clone)]
pub struct ZipfSampler {
    cdf: Vec<f64>,
}

impl ZipfSampler {
    pub fn new(n_blocks: u64, s: f64) -> Result<Self, GenError> {
        if n_blocks == 0 {
            return Err(param("n_blocks must be at least 1"));
        }
        if !(s >= 0.0 && s.is_finite()) {
            return Err(param(format!(
                "zipf exponent must be finite and >= 0, got {s}"
            )));
        }
        let mut cdf = Vec::with_capacity(n_blocks as usize);
        let mut acc = 0.0;
        for rank in 1..=n_blocks {
            acc += (rank as f64).powf(-s);
            cdf.push(acc);
        }
        for c in &mut cdf {
            *c /= acc;
        }
        Ok(Self { cdf })
    }

    /// Probability of block `i` (0-based).
    pub fn probability(&self, i: usize) -> f64 {
        let prev = if i == 0 { 0.0 } else { self.cdf[i - 1] };
        self.cdf[i] - prev
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> u64 {
        let u = rng.next_f64();
        let idx = self.cdf.partition_point(|&c| c <= u);
        idx.min(self.cdf.len() - 1) as u64
    }
}

pub fn gen_zipf(
    n_blocks: u64,
    s: f64,
    length: usize,
    seed: u64,
    block_size: u64,
) -> Result<TraceStream, GenError> {
    check_block_size(block_size)?;
    let sampler = ZipfSampler::new(n_blocks, s)?;
    let mut rng = SplitMix64::new(seed);
    let accesses = (0..length)
        .map(|_| Access::load(sampler.sample(&mut rng) * block_size))
        .collect();
    Ok(TraceStream::new(TraceSource::Generated("zipf"), accesses))
}

/// `blocks` repeated `passes` times.
pub fn gen_cyclic(blocks: &[u64], passes: usize, block_size: u64) -> Result<TraceStream, GenError> {
    check_block_size(block_size)?;
    if blocks.is_empty() {
        return Err(param("block list is empty"));
    }
    let accesses = (0..passes)
        .flat_map(|_| blocks.iter().map(|&b| Access::load(b * block_size)))
        .collect();
    Ok(TraceStream::new(TraceSource::Generated("cyclic"), accesses))
}

/// `distinct` blocks that all map to `set_index` under `config`, cycled
/// `passes` times.
pub fn gen_single_set(
    config: &SimConfig,
    set_index: u32,
    distinct: u64,
    passes: usize,
) -> Result<TraceStream, GenError> {
    config.validate().map_err(|e| param(e.to_string()))?;
    if set_index >= config.num_sets {
        return Err(param(format!(
            "set {set_index} out of range for {} sets",
            config.num_sets
        )));
    }
    if distinct == 0 {
        return Err(param("distinct must be at least 1"));
    }
    let sets = u64::from(config.num_sets);
    let blocks: Vec<u64> = (0..distinct)
        .map(|i| i * sets + u64::from(set_index))
        .collect();
    let mut t = gen_cyclic(&blocks, passes, config.block_size_bytes)?;
    t.source = TraceSource::Generated("single-set");
    Ok(t)
}
