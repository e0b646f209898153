//! Drive a policy over an access stream.

use crate::access::Access;
use crate::policy::CachePolicy;
use crate::stats::Stats;

/// Feed every access to `policy`. The first `warmup` accesses update cache
/// state but are left out of the counters.
pub fn simulate<I, E>(policy: &mut dyn CachePolicy, trace: I, warmup: u64) -> Result<Stats, E>
where
    I: IntoIterator<Item = Result<Access, E>>,
{
    let mut stats = Stats::default();
    for (i, access) in trace.into_iter().enumerate() {
        let access = access?;
        let outcome = policy.access(access);
        if i as u64 >= warmup {
            stats.record(&access, &outcome);
        }
    }
    Ok(stats)
}

/// `simulate` over an in-memory trace.
pub fn simulate_slice(policy: &mut dyn CachePolicy, trace: &[Access], warmup: u64) -> Stats {
    let ok = trace.iter().map(|&a| Ok::<_, std::convert::Infallible>(a));
    match simulate(policy, ok, warmup) {
        Ok(stats) => stats,
        Err(never) => match never {},
    }
}
