mod common;

use proptest::prelude::*;

use common::{brute_bases, brute_ssc};
use polynash::game::{check_ssc, check_truncated_ssc, CostTable};
use polynash::generators::{gen_random, CostFamily};
use polynash::io::{
    parse_instance, parse_profile, parse_trace, replay_trace, write_instance, write_profile,
    write_trace,
};
use polynash::oracle::{verify_pne, OracleCaps};
use polynash::polymatroid::RankProperty;
use polynash::solver::{compute_pne_observed, PlayerSelection, SolverPolicy};
use polynash::RankFunction;

fn brute_rank_ok(v: &[u64], m: usize) -> bool {
    let n = 1usize << m;
    v[0] == 0
        && (0..n).all(|u| {
            (0..n).all(|w| (u & w != u || v[u] <= v[w]) && v[u] + v[w] >= v[u | w] + v[u & w])
        })
}

fn any_table() -> impl Strategy<Value = (usize, Vec<u64>)> {
    (1usize..=3).prop_flat_map(|m| (Just(m), prop::collection::vec(0u64..5, 1 << m)))
}

fn nondecreasing(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0u64..6, len).prop_map(|steps| {
        steps
            .iter()
            .scan(0, |acc, s| {
                *acc += s;
                Some(*acc)
            })
            .collect()
    })
}

fn policy_for(k: u8, seed: u64) -> SolverPolicy {
    let selection = match k % 3 {
        0 => PlayerSelection::MinIndex,
        1 => PlayerSelection::RoundRobin,
        _ => PlayerSelection::SeededRandom { seed },
    };
    SolverPolicy {
        selection,
        ..SolverPolicy::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn local_validation_matches_global_definition((m, mut v) in any_table()) {
        if v[0] != 0 && v.iter().sum::<u64>() % 2 == 0 {
            v[0] = 0;
        }
        let f = RankFunction::new(m, v.clone()).unwrap();
        let report = f.validate();
        prop_assert_eq!(report.is_ok(), brute_rank_ok(&v, m));
        for w in report.violations {
            let (a, b) = (w.u as usize, w.v as usize);
            let genuine = match w.property {
                RankProperty::Normalized => v[0] != 0,
                RankProperty::Monotone => a & b == a && v[a] > v[b],
                RankProperty::Submodular => v[a] + v[b] < v[a | b] + v[a & b],
            };
            prop_assert!(genuine, "spurious witness {}", w);
        }
    }

    #[test]
    fn membership_matches_subset_sums(seed in 0u64..10_000, x in prop::collection::vec(0u64..4, 3)) {
        let g = gen_random(seed, 1, 3, 3, CostFamily::ConvexNondecreasing).unwrap();
        let f = &g.player(0).rank;
        let brute = (0..8usize).all(|u| (0..3).filter(|r| u & (1 << r) != 0).map(|r| x[r]).sum::<u64>() <= f.value(u as u32));
        prop_assert_eq!(f.member_polytope(&x).unwrap(), brute);
        let d = x.iter().sum::<u64>();
        if d <= f.total() {
            prop_assert_eq!(f.member_base(d, &x).unwrap(), brute);
            let listed: Vec<Vec<u64>> = f.enumerate_base(d, 10_000).unwrap().into_iter().map(|i| i.0).collect();
            prop_assert_eq!(listed, brute_bases(f, d));
        }
    }

    #[test]
    fn ssc_check_matches_brute_force(c in nondecreasing(2..=8), u in 1u64..8) {
        let table = CostTable::new(c.clone()).unwrap();
        let horizon = c.len() as u64 - 1;
        prop_assert_eq!(check_ssc(&table, horizon).unwrap(), brute_ssc(&c, horizon, horizon));
        prop_assert_eq!(check_truncated_ssc(&table, u).unwrap(), brute_ssc(&c, horizon, u));
        if table.is_convex() {
            prop_assert!(check_ssc(&table, horizon).unwrap());
        }
    }

    #[test]
    fn every_outer_iteration_ends_in_an_equilibrium(seed in 0u64..100_000, k in 0u8..3, ssc in any::<bool>()) {
        let family = if ssc { CostFamily::TruncatedSsc } else { CostFamily::ConvexNondecreasing };
        let g = gen_random(seed, 3, 3, 3, family).unwrap();
        let caps = OracleCaps::default();
        let mut failures = Vec::new();
        let sol = compute_pne_observed(&g, &policy_for(k, seed).with_debug(), |cp| {
            let partial = g.with_demands(cp.demands).unwrap();
            let report = verify_pne(&partial, cp.profile, &caps).unwrap();
            if !report.is_pne {
                failures.push(cp.outer);
            }
        })
        .unwrap();
        prop_assert!(failures.is_empty(), "not an equilibrium after outer iterations {:?}", failures);
        prop_assert!(verify_pne(&g, &sol.profile, &caps).unwrap().is_pne);
    }

    #[test]
    fn documents_round_trip(seed in 0u64..100_000, k in 0u8..3) {
        let g = gen_random(seed, 3, 4, 3, CostFamily::TruncatedSsc).unwrap();
        let text = write_instance(&g);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(write_instance(&back), text);

        let sol = compute_pne_observed(&back, &policy_for(k, seed), |_| {}).unwrap();
        let profile_text = write_profile(&g, &sol.profile).unwrap();
        prop_assert_eq!(&parse_profile(&g, &profile_text).unwrap(), &sol.profile);

        let trace_text = write_trace(&g, &sol.trace);
        let trace = parse_trace(&g, &trace_text).unwrap();
        prop_assert_eq!(&trace, &sol.trace);
        prop_assert_eq!(replay_trace(&g, &trace).unwrap(), sol.profile);
    }
}
