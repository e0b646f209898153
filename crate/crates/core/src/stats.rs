//! Run counters and report rendering (human table, JSON, CSV).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::access::{Access, AccessKind, AccessOutcome, FillCase};
use crate::config::{Case4Mode, SimConfig};
use crate::policy::PolicyKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FillCounts {
    pub c1: u64,
    pub c2: u64,
    pub c3: u64,
    pub c4: u64,
}

impl FillCounts {
    pub fn get(&self, case: FillCase) -> u64 {
        match case {
            FillCase::C1 => self.c1,
            FillCase::C2 => self.c2,
            FillCase::C3 => self.c3,
            FillCase::C4 => self.c4,
        }
    }

    fn bump(&mut self, case: FillCase) {
        match case {
            FillCase::C1 => self.c1 += 1,
            FillCase::C2 => self.c2 += 1,
            FillCase::C3 => self.c3 += 1,
            FillCase::C4 => self.c4 += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.c1 + self.c2 + self.c3 + self.c4
    }
}

/// Running counters for one policy run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Stats {
    pub accesses: u64,
    pub hits: u64,
    pub misses: u64,
    pub loads: u64,
    pub stores: u64,
    pub writebacks: u64,
    pub fills_by_case: FillCounts,
}

impl Stats {
    pub fn record(&mut self, access: &Access, outcome: &AccessOutcome) {
        self.accesses += 1;
        match access.kind {
            AccessKind::Load => self.loads += 1,
            AccessKind::Store => self.stores += 1,
        }
        if outcome.hit {
            self.hits += 1;
        } else {
            self.misses += 1;
        }
        if let Some(case) = outcome.fill_case {
            self.fills_by_case.bump(case);
        }
        self.writebacks += outcome.dirty_evictions() as u64;
    }

    /// `hits / accesses`, or 0 for an empty run.
    pub fn hit_rate(&self) -> f64 {
        if self.accesses == 0 {
            0.0
        } else {
            self.hits as f64 / self.accesses as f64
        }
    }

    pub fn finalize(&self, meta: RunMeta) -> StatsReport {
        StatsReport {
            policy: meta.policy,
            config: meta.config,
            seed: meta.seed,
            trace: meta.trace,
            accesses: self.accesses,
            hits: self.hits,
            misses: self.misses,
            loads: self.loads,
            stores: self.stores,
            writebacks: self.writebacks,
            fills_by_case: self.fills_by_case,
            hit_rate: self.hit_rate(),
        }
    }
}

/// Geometry echoed into a report. Conventional baselines have no separate
/// tag store, so their tag and data ways coincide and there is no case-4 mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub num_sets: u32,
    pub tag_ways: u32,
    pub data_ways: u32,
    pub block_size_bytes: u64,
    pub case4_mode: Option<Case4Mode>,
}

impl ConfigEcho {
    pub fn for_policy(policy: PolicyKind, config: &SimConfig) -> Self {
        let decoupled = policy.is_decoupled();
        Self {
            num_sets: config.num_sets,
            tag_ways: if decoupled {
                config.tag_ways
            } else {
                config.data_ways
            },
            data_ways: config.data_ways,
            block_size_bytes: config.block_size_bytes,
            case4_mode: decoupled.then_some(config.case4_mode),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMeta {
    pub policy: PolicyKind,
    pub config: ConfigEcho,
    pub seed: u64,
    pub trace: String,
}

impl RunMeta {
    pub fn new(policy: PolicyKind, config: &SimConfig, trace: impl Into<String>) -> Self {
        Self {
            policy,
            config: ConfigEcho::for_policy(policy, config),
            seed: config.seed,
            trace: trace.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub policy: PolicyKind,
    pub config: ConfigEcho,
    pub seed: u64,
    pub trace: String,
    pub accesses: u64,
    pub hits: u64,
    pub misses: u64,
    pub loads: u64,
    pub stores: u64,
    pub writebacks: u64,
    pub fills_by_case: FillCounts,
    pub hit_rate: f64,
}

/// Two-decimal percentage, e.g. `90.00%`.
pub fn percent(rate: f64) -> String {
    format!("{:.2}%", rate * 100.0)
}

impl StatsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_human(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(out, "policy      {}", self.policy);
        let _ = write!(
            out,
            "geometry    {} sets, {} tag ways, {} data ways, {} B blocks",
            c.num_sets, c.tag_ways, c.data_ways, c.block_size_bytes
        );
        if let Some(mode) = c.case4_mode {
            let _ = write!(out, ", case4 {mode}");
        }
        out.push('\n');
        let _ = writeln!(out, "seed        {}", self.seed);
        let _ = writeln!(out, "trace       {}", self.trace);
        let _ = writeln!(out, "accesses    {}", self.accesses);
        let _ = writeln!(out, "loads       {}", self.loads);
        let _ = writeln!(out, "stores      {}", self.stores);
        let _ = writeln!(out, "hits        {}", self.hits);
        let _ = writeln!(out, "misses      {}", self.misses);
        let f = &self.fills_by_case;
        let _ = writeln!(
            out,
            "fills       c1 {}  c2 {}  c3 {}  c4 {}",
            f.c1, f.c2, f.c3, f.c4
        );
        let _ = writeln!(out, "writebacks  {}", self.writebacks);
        let _ = writeln!(out, "hit rate    {}", percent(self.hit_rate));
        out
    }
}

pub const CSV_HEADER: [&str; 19] = [
    "policy",
    "num_sets",
    "tag_ways",
    "data_ways",
    "block_size_bytes",
    "case4_mode",
    "seed",
    "trace",
    "accesses",
    "hits",
    "misses",
    "loads",
    "stores",
    "writebacks",
    "fills_c1",
    "fills_c2",
    "fills_c3",
    "fills_c4",
    "hit_rate",
];

pub fn to_csv(reports: &[StatsReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in reports {
        let c = &r.config;
        let f = &r.fills_by_case;
        w.write_record([
            r.policy.to_string(),
            c.num_sets.to_string(),
            c.tag_ways.to_string(),
            c.data_ways.to_string(),
            c.block_size_bytes.to_string(),
            c.case4_mode.map(|m| m.to_string()).unwrap_or_default(),
            r.seed.to_string(),
            r.trace.clone(),
            r.accesses.to_string(),
            r.hits.to_string(),
            r.misses.to_string(),
            r.loads.to_string(),
            r.stores.to_string(),
            r.writebacks.to_string(),
            f.c1.to_string(),
            f.c2.to_string(),
            f.c3.to_string(),
            f.c4.to_string(),
            r.hit_rate.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn to_json_array(reports: &[StatsReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

/// One row per report, in input order.
pub fn compare(reports: &[StatsReport]) -> String {
    let header = ["policy", "accesses", "hits", "misses", "hit_rate"];
    let rows: Vec<[String; 5]> = reports
        .iter()
        .map(|r| {
            [
                r.policy.to_string(),
                r.accesses.to_string(),
                r.hits.to_string(),
                r.misses.to_string(),
                percent(r.hit_rate),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }

    let mut out = String::new();
    let line = |out: &mut String, cells: &[&str]| {
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(out, "{cell:<w$}");
            } else {
                let _ = write!(out, "  {cell:>w$}");
            }
        }
        out.push('\n');
    };
    line(&mut out, &header);
    for row in &rows {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&mut out, &cells);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access::{Eviction, FrameId};
    use proptest::prelude::*;

    fn meta() -> RunMeta {
        RunMeta::new(PolicyKind::Rac, &SimConfig::default(), "unit")
    }

    #[test]
    fn load_hit() {
        let mut s = Stats::default();
        s.record(&Access::load(0), &AccessOutcome::hit(FrameId(0)));
        assert_eq!((s.accesses, s.hits, s.misses), (1, 1, 0));
    }

    #[test]
    fn store_miss_c1() {
        let mut s = Stats::default();
        s.record(
            &Access::store(0),
            &AccessOutcome::miss(FillCase::C1, vec![], FrameId(0)),
        );
        assert_eq!((s.misses, s.stores, s.fills_by_case.c1), (1, 1, 1));
    }

    #[test]
    fn dirty_evictions_count_as_writebacks() {
        let mut s = Stats::default();
        let evicted = vec![
            Eviction {
                block_addr: 1,
                dirty: true,
            },
            Eviction {
                block_addr: 2,
                dirty: false,
            },
            Eviction {
                block_addr: 3,
                dirty: true,
            },
        ];
        s.record(
            &Access::load(0),
            &AccessOutcome::miss(FillCase::C4, evicted, FrameId(0)),
        );
        assert_eq!(s.writebacks, 2);
    }

    #[test]
    fn empty_run_has_zero_rate() {
        let r = Stats::default().finalize(meta());
        assert_eq!(r.accesses, 0);
        assert_eq!(r.hit_rate, 0.0);
    }

    #[test]
    fn two_decimal_rendering() {
        let s = Stats {
            accesses: 15_835,
            hits: 9_624,
            misses: 6_211,
            ..Default::default()
        };
        // 9624 / 15835 = 0.607767...
        assert_eq!(percent(s.hit_rate()), "60.78%");
        assert_eq!(percent(0.9), "90.00%");
        assert_eq!(percent(0.0), "0.00%");
    }

    #[test]
    fn csv_has_header_plus_rows() {
        let r = Stats::default().finalize(meta());
        let csv = to_csv(&[r.clone(), r]);
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER.join(","));
    }

    #[test]
    fn csv_quotes_trace_with_comma() {
        let mut m = meta();
        m.trace = "a,b".into();
        let csv = to_csv(&[Stats::default().finalize(m)]);
        assert!(csv.contains("\"a,b\""));
    }

    #[test]
    fn json_keys_are_the_report_fields() {
        let v: serde_json::Value =
            serde_json::from_str(&Stats::default().finalize(meta()).to_json()).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            [
                "accesses",
                "config",
                "fills_by_case",
                "hit_rate",
                "hits",
                "loads",
                "misses",
                "policy",
                "seed",
                "stores",
                "trace",
                "writebacks"
            ]
        );
        assert_eq!(v["policy"], "rac");
        assert_eq!(v["config"]["case4_mode"], "reuse");
    }

    #[test]
    fn baseline_echo_has_no_case4() {
        let echo = ConfigEcho::for_policy(PolicyKind::Lru, &SimConfig::default());
        assert_eq!(
            (echo.tag_ways, echo.data_ways, echo.case4_mode),
            (16, 16, None)
        );
    }

    #[test]
    fn compare_rows() {
        let a = Stats {
            accesses: 200,
            hits: 180,
            misses: 20,
            ..Default::default()
        }
        .finalize(meta());
        let b = Stats {
            accesses: 200,
            hits: 0,
            misses: 200,
            ..Default::default()
        }
        .finalize(RunMeta::new(PolicyKind::Lru, &SimConfig::default(), "unit"));
        let table = compare(&[a, b]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("rac") && lines[1].ends_with("90.00%"));
        assert!(lines[2].starts_with("lru") && lines[2].ends_with("0.00%"));
    }

    fn arb_outcome() -> impl Strategy<Value = (Access, AccessOutcome)> {
        (
            any::<bool>(),
            0usize..5,
            proptest::collection::vec(any::<bool>(), 0..3),
        )
            .prop_map(|(store, case, dirty)| {
                let access = if store {
                    Access::store(0)
                } else {
                    Access::load(0)
                };
                let outcome = if case == 0 {
                    AccessOutcome::hit(FrameId(0))
                } else {
                    let evicted = dirty
                        .into_iter()
                        .map(|d| Eviction {
                            block_addr: 0,
                            dirty: d,
                        })
                        .collect();
                    AccessOutcome::miss(FillCase::ALL[case - 1], evicted, FrameId(0))
                };
                (access, outcome)
            })
    }

    proptest! {
        #[test]
        fn conservation(steps in proptest::collection::vec(arb_outcome(), 0..100)) {
            let mut s = Stats::default();
            for (a, o) in &steps {
                s.record(a, o);
                prop_assert_eq!(s.hits + s.misses, s.accesses);
                prop_assert_eq!(s.loads + s.stores, s.accesses);
                prop_assert_eq!(s.fills_by_case.total(), s.misses);
            }
            let r = s.finalize(meta());
            prop_assert!((0.0..=1.0).contains(&r.hit_rate));
            let back = StatsReport::from_json(&r.to_json()).unwrap();
            prop_assert_eq!(back, r);
        }
    }
}
