use greycone::budget::{Budget, Meter, Stall};
use greycone::concolic::{concolic_phase, materialize, run_symbolic, symbolic_values, ConcolicParams, ExecutionTree};
use greycone::corpus::{self, CORPUS};
use greycone::coverage::Tracker;
use greycone::dut::{load, InstrumentedProgram};
use greycone::exec::{run_concrete, run_concrete_traced, Origin, TestCase, DEFAULT_STEP_LIMIT};
use greycone::fuzz::{fuzz_phase, FuzzParams, SeedQueue};
use greycone::phase::StopReason;
use greycone::solver::{solve, DEFAULT_NODE_BUDGET};
use greycone::sym::parse_conjuncts;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn program(name: &str) -> InstrumentedProgram {
    corpus::program(name).unwrap().unwrap()
}

fn params() -> ConcolicParams {
    ConcolicParams { stall: Stall::SolverCalls(64), step_limit: DEFAULT_STEP_LIMIT, fork_limit: 4, node_budget: DEFAULT_NODE_BUDGET, dump_predicates: false }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn symbolic_runs_agree_with_concrete_ones(prog in 0..CORPUS.len(), bytes in proptest::collection::vec(any::<u8>(), 0..3)) {
        let ip = program(CORPUS[prog].name);
        let (r, tr) = run_symbolic(&ip, &bytes, DEFAULT_STEP_LIMIT, 4);
        let (rc, decisions) = run_concrete_traced(&ip, &bytes, DEFAULT_STEP_LIMIT);
        prop_assert_eq!(r, rc);
        prop_assert_eq!(tr.decisions(), decisions);
        let vals = symbolic_values(&ip, &tr.bytes);
        for s in &tr.steps {
            if let Some(p) = &s.predicate {
                prop_assert_eq!(p.eval_in(&vals), Some(s.taken as u32), "{}", p);
            }
            prop_assert!(!s.is_symbolic || s.predicate.is_some());
        }
    }

    #[test]
    fn tree_grows_monotonically(prog in 0..CORPUS.len(), tests in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 2), 1..20)) {
        let ip = program(CORPUS[prog].name);
        let mut tree = ExecutionTree::new();
        let (mut nodes, mut covered) = (0, 0);
        for bytes in tests {
            tree.add_trace(run_symbolic(&ip, &bytes, DEFAULT_STEP_LIMIT, 4).1).unwrap();
            prop_assert!(tree.nodes.len() >= nodes && tree.covered_outcomes() >= covered);
            nodes = tree.nodes.len();
            covered = tree.covered_outcomes();
        }
        // Prefix closure: every node but the root has exactly one parent.
        let mut parents = vec![0; tree.nodes.len()];
        for n in &tree.nodes {
            for c in n.children.iter().flatten() {
                parents[*c] += 1;
            }
        }
        for (id, &p) in parents.iter().enumerate() {
            prop_assert_eq!(p, (Some(id) != tree.root()) as usize);
        }
        // Frontier entries are open outcomes of symbolic nodes whose sibling ran.
        for p in tree.frontier() {
            let n = &tree.nodes[p.node];
            prop_assert!(n.symbolic && !n.covered[p.target.1 as usize] && n.covered[!p.target.1 as usize]);
        }
    }
}

#[test]
fn fig2_trace_from_two_and_one() {
    let ip = program("fig2");
    let (_, tr) = run_symbolic(&ip, &[2, 1], DEFAULT_STEP_LIMIT, 4);
    assert_eq!(tr.steps.len(), 2);
    assert_eq!(tr.steps[0].predicate.as_ref().unwrap().to_string(), "(> (var i i8) (var j i8))");
    assert_eq!(tr.steps[1].predicate.as_ref().unwrap().to_string(), "(== (var i i8) (* (var j i8) (const i8 2)))");
    assert!(tr.steps[0].taken && tr.steps[1].taken);
}

#[test]
fn traces_diverging_at_the_third_step_share_three_nodes() {
    let ip = program("motiv");
    let mut tree = ExecutionTree::new();
    // 0x111 and 0x11 differ at the third loop test.
    tree.add_trace(run_symbolic(&ip, &0x111u16.to_le_bytes(), DEFAULT_STEP_LIMIT, 4).1).unwrap();
    let before = tree.nodes.len();
    tree.add_trace(run_symbolic(&ip, &0x11u16.to_le_bytes(), DEFAULT_STEP_LIMIT, 4).1).unwrap();
    let mut at = tree.root().unwrap();
    for _ in 0..2 {
        assert_eq!(tree.nodes[at].covered, [false, true]);
        at = tree.nodes[at].children[1].unwrap();
    }
    assert_eq!(tree.nodes[at].covered, [true, true]);
    assert_eq!(tree.nodes[at].depth, 2);
    assert!(tree.nodes.len() > before);
}

#[test]
fn divisible_by_two_but_not_three_lands_in_branch_two() {
    let ip = program("motiv");
    let p = parse_conjuncts("(== (% (var n u16) (const u16 2)) (const u16 0))\n(not (== (% (var n u16) (const u16 3)) (const u16 0)))").unwrap();
    let r = solve(&p, DEFAULT_NODE_BUDGET).unwrap();
    let bytes = materialize(&ip, &[0, 0], r.model.as_ref().unwrap());
    let n = u16::from_le_bytes([bytes[0], bytes[1]]);
    assert!(n % 2 == 0 && n % 3 != 0);
    // Site 3 is `n % 2 == 0` in the else arm; its true edge sets kind = 2.
    let hits = run_concrete(&ip, &bytes, DEFAULT_STEP_LIMIT).hits;
    assert_eq!(hits[ip.sites()[3].true_edge], 1);
}

#[test]
fn unconstrained_inputs_keep_the_seed_bytes() {
    let ip = load("m", "input u8 a symbolic; input u8 b; if (a == 77) { fail; }").unwrap();
    let mut tree = ExecutionTree::new();
    let mut tr = Tracker::new(&ip, 100.0);
    let mut meter = Meter::new(Budget::Execs(100));
    let seeds = [TestCase::new(vec![1, 0xAB], Origin::Initial, 0)];
    let out = concolic_phase(&ip, &seeds, &mut tree, &mut tr, &mut meter, params(), "conc_1").unwrap();
    assert_eq!(out.new_tests.len(), 1);
    assert_eq!(out.new_tests[0].0.bytes, vec![77, 0xAB]);
    assert_eq!(out.report.stop_reason, StopReason::Target);
}

#[test]
fn fully_covering_seeds_need_no_solver() {
    let ip = program("fig2");
    let seeds: Vec<TestCase> = [[2u8, 1], [3, 1], [1, 9], [0, 0]].iter().map(|b| TestCase::new(b.to_vec(), Origin::Initial, 0)).collect();
    let mut tr = Tracker::new(&ip, 100.0);
    let mut meter = Meter::new(Budget::Execs(1000));
    let out = concolic_phase(&ip, &seeds, &mut ExecutionTree::new(), &mut tr, &mut meter, params(), "conc_1").unwrap();
    assert_eq!(out.report.stop_reason, StopReason::Target);
    assert_eq!(out.report.solver.unwrap().calls(), 0);
    assert!(out.new_tests.is_empty());
}

#[test]
fn motiv_breaks_through_from_the_fuzzer_stall_queue() {
    let ip = program("motiv");
    let mut q = SeedQueue::new();
    let mut tr = Tracker::new(&ip, 100.0);
    let mut meter = Meter::new(Budget::Execs(1_000_000));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = fuzz_phase(&ip, &mut q, &mut tr, &mut meter, &mut rng, FuzzParams { stall: Stall::Executions(50_000), step_limit: DEFAULT_STEP_LIMIT }, "fuzz_1");
    assert_eq!((f.stop_reason, f.coverage_pct), (StopReason::Stalled, 90.0));
    let out = concolic_phase(&ip, &q.entries, &mut ExecutionTree::new(), &mut tr, &mut meter, params(), "conc_1").unwrap();
    assert_eq!((out.report.stop_reason, out.report.coverage_pct), (StopReason::Target, 100.0));
    assert!(out.new_tests.iter().any(|(t, _)| t.bytes == 43686u16.to_le_bytes()));
    assert!(out.replays.iter().all(|r| r.faithful()));
}
