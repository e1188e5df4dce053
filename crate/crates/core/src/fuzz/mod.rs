//! Coverage-guided greybox fuzzing: seed queue, energy, and the phase loop.

pub mod mutate;

use crate::budget::{Meter, Stall, StallWatch};
use crate::coverage::Tracker;
use crate::dut::InstrumentedProgram;
use crate::exec::{run_concrete, ExecResult, Origin, TestCase};
use crate::phase::{PhaseKind, PhaseReport, StopReason};
use rand::Rng;
use std::collections::HashSet;

pub const K_BASE: f64 = 64.0;
pub const K_MIN: u32 = 8;
pub const K_MAX: u32 = 1024;

/// What energy assignment needs to know about a seed's own run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SeedMeta {
    pub calibrated: bool,
    pub steps: u64,
    pub depth: u32,
    pub branch_edges: usize,
    pub deterministic_done: bool,
}

impl SeedMeta {
    pub fn from_run(ip: &InstrumentedProgram, r: &ExecResult) -> SeedMeta {
        SeedMeta { calibrated: true, steps: r.steps, depth: r.depth, branch_edges: r.covered_branch_edges(ip), deterministic_done: false }
    }
}

/// Queue-wide figures the energy factors are relative to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyContext {
    pub avg_steps: f64,
    pub max_depth: u32,
    pub total_branch_edges: usize,
}

/// `K = clamp(round(64 × f_speed × f_cov × f_depth), 8, 1024)`.
pub fn calculate_energy(seed: &SeedMeta, ctx: &EnergyContext) -> u32 {
    let f_speed = (ctx.avg_steps / seed.steps.max(1) as f64).clamp(0.25, 4.0);
    let f_cov = if ctx.total_branch_edges == 0 { 2.0 } else { 1.0 + seed.branch_edges as f64 / ctx.total_branch_edges as f64 };
    let f_depth = 1.0 + seed.depth as f64 / ctx.max_depth.max(1) as f64;
    let k = (K_BASE * f_speed * f_cov * f_depth).round();
    (k as u32).clamp(K_MIN, K_MAX)
}

#[derive(Clone, Debug, Default)]
pub struct SeedQueue {
    pub entries: Vec<TestCase>,
    pub meta: Vec<SeedMeta>,
    /// Next seed to schedule.
    pub cursor: usize,
    /// Campaign execution count when the last test was retained.
    pub last_interesting_at: u64,
    known: HashSet<Vec<u8>>,
}

impl SeedQueue {
    pub fn new() -> SeedQueue {
        SeedQueue::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, bytes: &[u8]) -> bool {
        self.known.contains(bytes)
    }

    /// Adds a test not yet executed; returns false for duplicates.
    pub fn push_uncalibrated(&mut self, t: TestCase) -> bool {
        self.push(t, SeedMeta::default())
    }

    /// Adds an executed test; returns false for duplicates.
    pub fn push(&mut self, t: TestCase, meta: SeedMeta) -> bool {
        if !self.known.insert(t.bytes.clone()) {
            return false;
        }
        self.entries.push(t);
        self.meta.push(meta);
        true
    }

    pub fn energy_context(&self, ip: &InstrumentedProgram) -> EnergyContext {
        let calibrated: Vec<&SeedMeta> = self.meta.iter().filter(|m| m.calibrated).collect();
        let avg_steps = if calibrated.is_empty() {
            1.0
        } else {
            calibrated.iter().map(|m| m.steps as f64).sum::<f64>() / calibrated.len() as f64
        };
        EnergyContext {
            avg_steps,
            max_depth: calibrated.iter().map(|m| m.depth).max().unwrap_or(1),
            total_branch_edges: ip.branch_edge_count(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FuzzParams {
    pub stall: Stall,
    pub step_limit: u64,
}

struct Phase<'a> {
    ip: &'a InstrumentedProgram,
    params: FuzzParams,
    watch: StallWatch,
}

impl Phase<'_> {
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

    /// Runs one mutant; retains it if it sets a new coverage flag.
    fn try_mutant(&mut self, bytes: Vec<u8>, q: &mut SeedQueue, tr: &mut Tracker, meter: &mut Meter) -> Result<(), StopReason> {
        if let Some(stop) = self.should_stop(tr, meter) {
            return Err(stop);
        }
        let r = run_concrete(self.ip, &bytes, self.params.step_limit);
        meter.executions += 1;
        if tr.map.is_interesting(&r) && !q.contains(&bytes) {
            tr.record(self.ip, &r, meter);
            q.push(TestCase::new(bytes, Origin::Fuzz, meter.executions), SeedMeta::from_run(self.ip, &r));
            q.last_interesting_at = meter.executions;
            self.watch.progress(meter);
        }
        Ok(())
    }
}

/// One fuzz phase: calibrate unexecuted seeds, then visit seeds round-robin,
/// running each seed's deterministic stage once followed by `K` havoc mutants.
pub fn fuzz_phase<R: Rng>(
    ip: &InstrumentedProgram,
    q: &mut SeedQueue,
    tr: &mut Tracker,
    meter: &mut Meter,
    rng: &mut R,
    params: FuzzParams,
    name: &str,
) -> PhaseReport {
    if q.is_empty() {
        q.push_uncalibrated(TestCase::new(vec![0; ip.program.input_len()], Origin::Initial, 0));
    }
    let (start_execs, start_len) = (meter.executions, q.len());
    let mut phase = Phase { ip, params, watch: StallWatch::start(params.stall, meter) };
    let stop = run(&mut phase, q, tr, meter, rng).err().unwrap_or(StopReason::Exhausted);
    PhaseReport {
        phase: name.to_string(),
        kind: PhaseKind::Fuzz,
        executions: meter.executions - start_execs,
        retained: (q.len() - start_len) as u64,
        coverage_pct: tr.pct(),
        stop_reason: stop,
        executions_total: meter.executions,
        solver: None,
        seconds: 0.0,
    }
}

fn run<R: Rng>(phase: &mut Phase, q: &mut SeedQueue, tr: &mut Tracker, meter: &mut Meter, rng: &mut R) -> Result<(), StopReason> {
    for i in 0..q.len() {
        if q.meta[i].calibrated {
            continue;
        }
        if let Some(stop) = phase.should_stop(tr, meter) {
            return Err(stop);
        }
        let r = run_concrete(phase.ip, &q.entries[i].bytes, phase.params.step_limit);
        meter.executions += 1;
        q.meta[i] = SeedMeta::from_run(phase.ip, &r);
        if tr.record(phase.ip, &r, meter) > 0 {
            q.last_interesting_at = meter.executions;
            phase.watch.progress(meter);
        }
    }
    if phase.ip.program.input_len() == 0 {
        // Every mutant of the empty input is the empty input.
        return phase.should_stop(tr, meter).map_or(Ok(()), Err);
    }
    q.cursor %= q.len();
    loop {
        let i = q.cursor;
        let seed = q.entries[i].bytes.clone();
        if !q.meta[i].deterministic_done {
            for m in mutate::deterministic_stage(&seed) {
                phase.try_mutant(m, q, tr, meter)?;
            }
            q.meta[i].deterministic_done = true;
        }
        let k = calculate_energy(&q.meta[i], &q.energy_context(phase.ip));
        q.entries[i].energy = k;
        for _ in 0..k {
            let m = mutate::havoc(rng, &seed);
            phase.try_mutant(m, q, tr, meter)?;
        }
        q.cursor = (i + 1) % q.len();
    }
}

/// One havoc mutant of `t`.
pub fn mutate_seed<R: Rng>(t: &TestCase, rng: &mut R, discovered_at: u64) -> TestCase {
    TestCase::new(mutate::havoc(rng, &t.bytes), Origin::Fuzz, discovered_at)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budget;
    use crate::dut::load;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx() -> EnergyContext {
        EnergyContext { avg_steps: 100.0, max_depth: 10, total_branch_edges: 8 }
    }

    #[test]
    fn energy_extremes() {
        let slow = SeedMeta { steps: 10_000, depth: 1, branch_edges: 0, ..Default::default() };
        // 64 × 0.25 × 1 × 1.1 = 17.6
        assert_eq!(calculate_energy(&slow, &ctx()), 18);
        let fast = SeedMeta { steps: 1, depth: 10, branch_edges: 8, ..Default::default() };
        assert_eq!(calculate_energy(&fast, &ctx()), K_MAX);
    }

    #[test]
    fn single_branch_reaches_target() {
        let ip = load("sb", "input u8 n; u8 k = 0; if (n % 2 == 0) { k = 1; } else { k = 2; }").unwrap();
        let mut q = SeedQueue::new();
        let mut tr = Tracker::new(&ip, 100.0);
        let mut meter = Meter::new(Budget::Execs(100_000));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = FuzzParams { stall: Stall::Executions(10_000), step_limit: 1000 };
        let rep = fuzz_phase(&ip, &mut q, &mut tr, &mut meter, &mut rng, params, "fuzz_1");
        assert_eq!(rep.stop_reason, StopReason::Target);
        assert_eq!(tr.pct(), 100.0);
        assert!(q.len() <= 2, "{} tests retained", q.len());
    }

    #[test]
    fn zero_budget_returns_immediately() {
        let ip = load("sb", "input u8 n; if (n == 3) { fail; }").unwrap();
        let mut q = SeedQueue::new();
        q.push_uncalibrated(TestCase::new(vec![1], Origin::Initial, 0));
        let mut tr = Tracker::new(&ip, 100.0);
        let mut meter = Meter::new(Budget::Execs(0));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = FuzzParams { stall: Stall::Executions(10), step_limit: 1000 };
        let rep = fuzz_phase(&ip, &mut q, &mut tr, &mut meter, &mut rng, params, "fuzz_1");
        assert_eq!((rep.executions, rep.retained, rep.stop_reason), (0, 0, StopReason::Cutoff));
        assert_eq!(tr.map.flags_set(), 0);
        assert_eq!(q.len(), 1);
    }
}
