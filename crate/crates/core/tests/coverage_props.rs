use greycone::corpus::{self, CORPUS};
use greycone::coverage::{bucket_floor, bucketize, pct, CoverageMap};
use greycone::exec::{run_concrete, DEFAULT_STEP_LIMIT};
use greycone::report::lcov::{emit_lcov, totals};
use proptest::prelude::*;

#[test]
fn bucket_table_is_exhaustive_to_a_thousand() {
    for raw in 1..=1000u32 {
        let want = match raw {
            1 => 0,
            2 => 1,
            3 => 2,
            4..=7 => 3,
            8..=15 => 4,
            16..=31 => 5,
            32..=127 => 6,
            _ => 7,
        };
        assert_eq!(bucketize(raw), want, "raw {raw}");
        assert!(bucket_floor(bucketize(raw)) <= raw);
    }
}

#[test]
fn percentages_round_to_a_tenth() {
    assert_eq!(pct(0, 0), 100.0);
    assert_eq!(pct(0, 6), 0.0);
    assert_eq!(pct(2, 3), 66.7);
    assert_eq!(pct(1, 3), 33.3);
    assert_eq!(pct(7, 10), 70.0);
}

fn corpus_program(i: usize) -> greycone::dut::InstrumentedProgram {
    corpus::program(CORPUS[i].name).unwrap().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn merging_never_clears_flags(
        prog in 0..CORPUS.len(),
        inputs in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 2), 1..30),
    ) {
        let ip = corpus_program(prog);
        let mut m = CoverageMap::for_program(&ip);
        let mut last_pct = m.coverage_pct(&ip);
        for bytes in inputs {
            let before = m.clone();
            let r = run_concrete(&ip, &bytes, DEFAULT_STEP_LIMIT);
            let novelty = m.novelty(&r);
            prop_assert_eq!(m.merge(&r), novelty);
            for e in 0..ip.edge_count() {
                prop_assert_eq!(m.flags(e) & before.flags(e), before.flags(e));
            }
            prop_assert_eq!(m.flags_set(), before.flags_set() + novelty);
            prop_assert!(m.coverage_pct(&ip) >= last_pct);
            last_pct = m.coverage_pct(&ip);
            // A run merged once is never interesting again.
            prop_assert!(!m.is_interesting(&r));
        }
    }

    #[test]
    fn map_merge_is_a_union(a in proptest::collection::vec(any::<u8>(), 12), b in proptest::collection::vec(any::<u8>(), 12)) {
        let mut x = CoverageMap::from_flags(a.clone());
        let y = CoverageMap::from_flags(b.clone());
        let gained = x.merge_map(&y);
        let union: Vec<u8> = a.iter().zip(&b).map(|(p, q)| p | q).collect();
        prop_assert_eq!(x.as_flags(), union.as_slice());
        prop_assert_eq!(gained, x.flags_set() - CoverageMap::from_flags(a).flags_set());
        let mut z = y.clone();
        z.merge_map(&CoverageMap::from_flags(union.clone()));
        prop_assert_eq!(z.as_flags(), union.as_slice());
    }

    #[test]
    fn lcov_totals_agree_with_percentage(
        prog in 0..CORPUS.len(),
        inputs in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 2), 0..12),
    ) {
        let ip = corpus_program(prog);
        let mut m = CoverageMap::for_program(&ip);
        for bytes in inputs {
            m.merge(&run_concrete(&ip, &bytes, DEFAULT_STEP_LIMIT));
        }
        let (brf, brh) = totals(&emit_lcov(&m, &ip, "p.dut")).unwrap();
        prop_assert_eq!(brf, ip.branch_edge_count());
        prop_assert_eq!(brh, m.covered_branch_edges(&ip));
        prop_assert!((pct(brh, brf) - m.coverage_pct(&ip)).abs() <= 0.1);
    }
}
