//! Concolic execution: trace seeds symbolically, grow the execution tree, and
//! solve for inputs that reach uncovered outcomes.

mod trace;
mod tree;

pub use trace::{run_symbolic, symbolic_values, PathTrace, Step, DEFAULT_FORK_LIMIT, MAX_TERM_SIZE};
pub use tree::{Attempt, ExecutionTree, NodeId, PathPredicate, TreeError, TreeNode, TreeStats};

use crate::budget::{Meter, Stall, StallWatch};
use crate::coverage::Tracker;
use crate::dut::{BlockId, InstrumentedProgram};
use crate::exec::{run_concrete_traced, write_input, Origin, TestCase};
use crate::fuzz::SeedMeta;
use crate::phase::{PhaseKind, PhaseReport, SolverTally, StopReason};
use crate::solver::{self, Model, SolveStatus};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcolicParams {
    pub stall: Stall,
    pub step_limit: u64,
    pub fork_limit: u32,
    pub node_budget: u64,
    pub dump_predicates: bool,
}

/// Outcome of replaying one solver-produced test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayRecord {
    pub target: (BlockId, bool),
    pub depth: usize,
    pub bytes: Vec<u8>,
    pub prefix_followed: bool,
    pub target_hit: bool,
}

impl ReplayRecord {
    pub fn faithful(&self) -> bool {
        self.prefix_followed && self.target_hit
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DumpedPredicate {
    pub target: (BlockId, bool),
    /// `sat`, `unsat`, `timeout` or `unsupported`.
    pub verdict: String,
    /// One s-expression conjunct per line.
    pub text: String,
}

#[derive(Clone, Debug)]
pub struct ConcolicOutput {
    /// Solver-produced tests with their calibration data, in creation order.
    pub new_tests: Vec<(TestCase, SeedMeta)>,
    pub report: PhaseReport,
    pub stats: TreeStats,
    pub replays: Vec<ReplayRecord>,
    pub predicates: Vec<DumpedPredicate>,
}

/// Writes a model's values over `base`; inputs the model omits keep their bytes.
pub fn materialize(ip: &InstrumentedProgram, base: &[u8], model: &Model) -> Vec<u8> {
    let mut bytes = base.to_vec();
    bytes.resize(ip.program.input_len(), 0);
    for d in ip.program.inputs.iter().filter(|d| d.symbolic) {
        if let Some(&v) = model.get(&d.name) {
            write_input(d, &mut bytes, v);
        }
    }
    bytes
}

/// Replays `bytes` concretely and checks it follows `p` to its target.
pub fn check_fidelity(ip: &InstrumentedProgram, tree: &ExecutionTree, p: &PathPredicate, bytes: &[u8], step_limit: u64) -> ReplayRecord {
    let (_, decisions) = run_concrete_traced(ip, bytes, step_limit);
    let source = tree.traces[p.source].decisions();
    let prefix_followed = decisions.len() > p.depth && decisions[..p.depth] == source[..p.depth];
    let target_hit = prefix_followed && decisions[p.depth] == p.target;
    ReplayRecord { target: p.target, depth: p.depth, bytes: bytes.to_vec(), prefix_followed, target_hit }
}

struct Run<'a> {
    ip: &'a InstrumentedProgram,
    params: ConcolicParams,
    watch: StallWatch,
}

impl Run<'_> {
    fn should_stop(&self, tr: &Tracker, meter: &Meter) -> Option<StopReason> {
        if tr.target_reached() {
            Some(StopReason::Target)
        } else if meter.exhausted() {
            Some(StopReason::Cutoff)
        } else if self.watch.stalled(meter) {
            Some(StopReason::Stalled)
        } else {
            None
        }
    }
}

/// One concolic phase over `seeds` (the whole queue in hybrid mode).
pub fn concolic_phase(
    ip: &InstrumentedProgram,
    seeds: &[TestCase],
    tree: &mut ExecutionTree,
    tr: &mut Tracker,
    meter: &mut Meter,
    params: ConcolicParams,
    name: &str,
) -> Result<ConcolicOutput, TreeError> {
    let start_execs = meter.executions;
    let mut run = Run { ip, params, watch: StallWatch::start(params.stall, meter) };
    let mut out = ConcolicOutput {
        new_tests: Vec::new(),
        report: PhaseReport {
            phase: name.to_string(),
            kind: PhaseKind::Concolic,
            executions: 0,
            retained: 0,
            coverage_pct: 0.0,
            stop_reason: StopReason::Exhausted,
            executions_total: 0,
            solver: None,
            seconds: 0.0,
        },
        stats: TreeStats::default(),
        replays: Vec::new(),
        predicates: Vec::new(),
    };
    let mut tally = SolverTally::default();
    let stop = explore(&mut run, seeds, tree, tr, meter, &mut tally, &mut out)?;

    out.report.executions = meter.executions - start_execs;
    out.report.retained = out.new_tests.len() as u64;
    out.report.coverage_pct = tr.pct();
    out.report.stop_reason = stop;
    out.report.executions_total = meter.executions;
    out.report.solver = Some(tally);
    out.stats = TreeStats { nodes: tree.nodes.len(), frontier_size: tree.frontier_size(), sat: tally.sat, unsat: tally.unsat, timeout: tally.timeout };
    Ok(out)
}

fn explore(
    run: &mut Run,
    seeds: &[TestCase],
    tree: &mut ExecutionTree,
    tr: &mut Tracker,
    meter: &mut Meter,
    tally: &mut SolverTally,
    out: &mut ConcolicOutput,
) -> Result<StopReason, TreeError> {
    let ip = run.ip;
    for seed in seeds {
        let mut bytes = seed.bytes.clone();
        bytes.resize(ip.program.input_len(), 0);
        if tree.has_traced(&bytes) {
            continue;
        }
        if let Some(stop) = run.should_stop(tr, meter) {
            return Ok(stop);
        }
        let (r, trace) = run_symbolic(ip, &bytes, run.params.step_limit, run.params.fork_limit);
        meter.executions += 1;
        if tr.record(ip, &r, meter) > 0 {
            run.watch.progress(meter);
        }
        tree.add_trace(trace)?;
    }

    loop {
        if let Some(stop) = run.should_stop(tr, meter) {
            return Ok(stop);
        }
        let Some(p) = tree.next_predicate() else { return Ok(StopReason::Exhausted) };
        meter.solver_calls += 1;
        let result = solver::solve(&p.conjuncts, run.params.node_budget);
        let verdict = match &result {
            Ok(r) => match r.status {
                SolveStatus::Sat => "sat",
                SolveStatus::Unsat => "unsat",
                SolveStatus::Timeout => "timeout",
            },
            Err(_) => "unsupported",
        };
        if run.params.dump_predicates {
            let text = p.conjuncts.iter().map(|c| format!("{c}\n")).collect();
            out.predicates.push(DumpedPredicate { target: p.target, verdict: verdict.to_string(), text });
        }
        let model = match result {
            Ok(r) if r.status == SolveStatus::Sat => {
                tally.sat += 1;
                r.model.expect("sat results carry a model")
            }
            Ok(r) => {
                let attempt = if r.status == SolveStatus::Unsat {
                    tally.unsat += 1;
                    Attempt::Unsat
                } else {
                    tally.timeout += 1;
                    Attempt::Timeout
                };
                tree.close(p.node, p.target.1, attempt);
                continue;
            }
            Err(_) => {
                tally.errors += 1;
                tree.close(p.node, p.target.1, Attempt::Unsupported);
                continue;
            }
        };

        let bytes = materialize(ip, &tree.traces[p.source].bytes, &model);
        let replay = check_fidelity(ip, tree, &p, &bytes, run.params.step_limit);
        let faithful = replay.faithful();
        out.replays.push(replay);
        if tree.has_traced(&bytes) {
            tree.close(p.node, p.target.1, Attempt::Diverged);
            continue;
        }
        let (r, trace) = run_symbolic(ip, &bytes, run.params.step_limit, run.params.fork_limit);
        meter.executions += 1;
        if tr.record(ip, &r, meter) > 0 {
            run.watch.progress(meter);
        }
        tree.add_trace(trace)?;
        if !faithful {
            tree.close(p.node, p.target.1, Attempt::Diverged);
        }
        let meta = SeedMeta::from_run(ip, &r);
        out.new_tests.push((TestCase::new(bytes, Origin::Concolic, meter.executions), meta));
    }
}
