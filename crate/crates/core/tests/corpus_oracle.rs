//! Exhaustive facts about the corpus, frozen from the brute-force oracle.

use greycone::corpus::{self, CORPUS};
use greycone::coverage::CoverageMap;
use greycone::exec::{run_concrete, Outcome, DEFAULT_STEP_LIMIT};
use greycone::oracle::reachable_branch_edges;

fn program(name: &str) -> greycone::dut::InstrumentedProgram {
    corpus::program(name).unwrap().unwrap()
}

#[test]
fn every_corpus_program_loads_and_is_enumerable() {
    for e in &CORPUS {
        let ip = corpus::program(e.name).unwrap().unwrap_or_else(|err| panic!("{}: {err}", e.name));
        assert!(ip.program.input_bits() <= 16, "{} is too wide for the oracle", e.name);
    }
}

#[test]
fn frozen_reachability() {
    // (program, branch sites, reachable edges, failing inputs)
    let expected = [
        ("fig2", 3, 6, 0),
        ("loop_eq", 2, 4, 0),
        ("motiv", 5, 10, 1),
        ("nested_magic", 3, 6, 1),
        ("single_branch", 1, 2, 0),
        ("straightline", 0, 0, 0),
    ];
    for (name, sites, reachable, failing) in expected {
        let ip = program(name);
        let r = reachable_branch_edges(&ip, DEFAULT_STEP_LIMIT).unwrap();
        assert_eq!((ip.sites().len(), r.reachable.len(), r.failing), (sites, reachable, failing), "{name}");
        assert_eq!(r.pct(), 100.0, "{name}");
    }
}

#[test]
fn motiv_fails_only_on_the_magic_value() {
    let ip = program("motiv");
    assert_eq!(run_concrete(&ip, &43686u16.to_le_bytes(), DEFAULT_STEP_LIMIT).outcome, Outcome::Failed);
    assert_eq!(run_concrete(&ip, &43680u16.to_le_bytes(), DEFAULT_STEP_LIMIT).outcome, Outcome::Returned);
}

#[test]
fn motiv_loop_has_four_symbolic_iterations_at_most() {
    // Every u16 has at most four hex digits, so the loop test runs at most
    // five times and the last one is always the exit.
    let ip = program("motiv");
    let loop_site = ip.sites()[0];
    let r = run_concrete(&ip, &u16::MAX.to_le_bytes(), DEFAULT_STEP_LIMIT);
    assert_eq!((r.hits[loop_site.true_edge], r.hits[loop_site.false_edge]), (4, 1));
}

#[test]
fn motiv_both_and_neither_branches_only() {
    // n = 6 takes the "divisible by both" branch, n = 1 the "neither" one.
    let ip = program("motiv");
    let mut m = CoverageMap::for_program(&ip);
    for n in [6u16, 1] {
        m.merge(&run_concrete(&ip, &n.to_le_bytes(), DEFAULT_STEP_LIMIT));
    }
    assert_eq!(m.covered_branch_edges(&ip), 7);
    assert_eq!(m.coverage_pct(&ip), 70.0);
}

#[test]
fn nested_magic_needs_one_exact_pair() {
    let ip = program("nested_magic");
    let r = run_concrete(&ip, &[0xCD, 0xCD ^ 0x17], DEFAULT_STEP_LIMIT);
    assert_eq!(r.outcome, Outcome::Failed);
}
