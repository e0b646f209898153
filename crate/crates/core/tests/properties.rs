use proptest::prelude::*;
use rac_core::gen::{gen_cyclic, gen_single_set};
use rac_core::run::simulate_slice;
use rac_core::{
    build_policy, check_transition, Access, Case4Mode, FillCase, PolicyKind, RacEngine,
    SetAssocCache, SimConfig, SplitMix64,
};

fn single_set_blocks(cfg: &SimConfig, set: u32, distinct: u64) -> Vec<u64> {
    (0..distinct)
        .map(|i| i * u64::from(cfg.num_sets) + u64::from(set))
        .collect()
}

#[test]
fn cyclic_within_tag_ways_hits_after_first_pass() {
    let cfg = SimConfig::with_geometry(4, 8, 2);
    // 8 frames total, so W <= 8 stays resident.
    for w in 1..=8u64 {
        let mut e = RacEngine::new(cfg).unwrap();
        let trace = gen_cyclic(&single_set_blocks(&cfg, 1, w), 6, 64)
            .unwrap()
            .accesses;
        for (i, a) in trace.iter().enumerate() {
            let o = e.access(*a);
            assert_eq!(o.hit, i as u64 >= w, "W={w} access {i}");
        }
    }
}

#[test]
fn cyclic_over_tag_ways_always_misses() {
    let cfg = SimConfig::with_geometry(4, 4, 4);
    for policy in [PolicyKind::Rac, PolicyKind::Vway] {
        for w in 5..=9 {
            let trace = gen_cyclic(&single_set_blocks(&cfg, 2, w), 5, 64)
                .unwrap()
                .accesses;
            let mut p = build_policy(policy, &cfg).unwrap();
            let stats = simulate_slice(p.as_mut(), &trace, 0);
            assert_eq!(stats.hits, 0, "{policy} W={w}");
        }
    }
}

#[test]
fn hot_set_borrows_capacity_from_cold_sets() {
    // 20 blocks in one set: beyond 16-way LRU, within 32 tag ways.
    let cfg = SimConfig::default();
    let trace = gen_single_set(&cfg, 7, 20, 10).unwrap().accesses;
    let run = |p| {
        let mut policy = build_policy(p, &cfg).unwrap();
        simulate_slice(policy.as_mut(), &trace, 0)
    };
    assert_eq!(run(PolicyKind::Rac).hits, 180);
    assert_eq!(run(PolicyKind::Vway).hits, 180);
    assert_eq!(run(PolicyKind::Lru).hits, 0);
}

#[test]
fn same_seed_same_outcomes() {
    let cfg = SimConfig::with_geometry(8, 4, 2)
        .seed(42)
        .case4(Case4Mode::Literal);
    let mut rng = SplitMix64::new(1);
    let trace: Vec<Access> = (0..5000)
        .map(|_| Access::load(rng.next_u64() % 100 * 64))
        .collect();
    for p in PolicyKind::ALL {
        let mut a = build_policy(p, &cfg).unwrap();
        let mut b = build_policy(p, &cfg).unwrap();
        for &x in &trace {
            assert_eq!(a.access(x), b.access(x));
        }
    }
}

#[test]
fn reuse_sweep_terminates_quickly() {
    // Saturate every counter, then force a sweep: at most 4 laps.
    let cfg = SimConfig::with_geometry(1, 8, 4);
    let mut e = RacEngine::vway(cfg).unwrap();
    for b in 0..4 {
        for _ in 0..4 {
            e.access(Access::load(b * 64));
        }
    }
    assert!(e.frames().iter().all(|f| f.reuse_ctr == 3));
    let o = e.access(Access::load(4 * 64));
    assert_eq!(o.fill_case, Some(FillCase::C3));
    assert_eq!(o.frame_used.unwrap().0, 0);
    assert!(e.frames()[1..].iter().all(|f| f.reuse_ctr == 0));
}

fn arb_access(blocks: u64) -> impl Strategy<Value = Access> {
    (any::<bool>(), 0..blocks).prop_map(|(st, b)| {
        if st {
            Access::store(b * 64)
        } else {
            Access::load(b * 64)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn engine_invariants_hold_every_step(
        sets_log in 0u32..4,
        tag_ways in 1u32..7,
        data_ways in 1u32..4,
        literal in any::<bool>(),
        vway in any::<bool>(),
        seed in any::<u64>(),
        trace in proptest::collection::vec(arb_access(48), 0..400),
    ) {
        let mode = if literal { Case4Mode::Literal } else { Case4Mode::Reuse };
        let cfg = SimConfig::with_geometry(1 << sets_log, tag_ways, data_ways).seed(seed).case4(mode);
        let mut e = if vway { RacEngine::vway(cfg) } else { RacEngine::new(cfg) }.unwrap();
        for a in trace {
            let before = e.clone();
            let o = e.access(a);
            prop_assert!(!o.hit || (o.fill_case.is_none() && o.evicted.is_empty()));
            let v = e.check_invariants();
            prop_assert!(v.is_empty(), "{:?}", v);
            let t = check_transition(&before, &e, &o);
            prop_assert!(t.is_empty(), "{:?}", t);
            prop_assert!(e.valid_tag_count() == e.valid_frame_count());
        }
    }

    #[test]
    fn baselines_keep_recency_consistent(
        ways in 1u32..6,
        random in any::<bool>(),
        trace in proptest::collection::vec(arb_access(40), 0..400),
    ) {
        let cfg = SimConfig::with_geometry(4, ways, ways).baseline();
        let mut c = if random { SetAssocCache::random(cfg) } else { SetAssocCache::lru(cfg) }.unwrap();
        for a in trace {
            let rng_before = c.rng_state();
            let o = c.access(a);
            if o.hit {
                prop_assert_eq!(c.rng_state(), rng_before);
            }
            prop_assert!(c.check_invariants().is_empty());
        }
    }
}
