//! The hybrid loop: fuzz until the fuzzer stalls, hand the whole queue to
//! the concolic engine, feed its tests back, and repeat until the target
//! coverage or the global budget is reached.

use crate::budget::{Budget, Meter, Stall};
use crate::concolic::{self, ConcolicParams, DumpedPredicate, ExecutionTree, ReplayRecord, TreeError, TreeStats};
use crate::coverage::Tracker;
use crate::dut::InstrumentedProgram;
use crate::exec::{Origin, TestCase, DEFAULT_STEP_LIMIT};
use crate::fuzz::{self, FuzzParams, SeedQueue};
use crate::phase::{PhaseKind, PhaseReport, StopReason};
use crate::solver::DEFAULT_NODE_BUDGET;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Greycone,
    FuzzOnly,
    ConcolicOnly,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Greycone, Mode::FuzzOnly, Mode::ConcolicOnly];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Greycone => "greycone",
            Mode::FuzzOnly => "fuzz-only",
            Mode::ConcolicOnly => "concolic-only",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fuzzer stall for execution-counted campaigns.
pub const LOGICAL_FUZZ_STALL: u64 = 10_000;
/// Concolic stall for execution-counted campaigns, in solver calls.
pub const LOGICAL_CONCOLIC_STALL: u64 = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub mode: Mode,
    pub target_coverage_pct: f64,
    /// Global cutoff.
    pub budget: Budget,
    pub fuzz_stall: Stall,
    pub concolic_stall: Stall,
    pub rng_seed: u64,
    pub step_limit: u64,
    pub fork_limit: u32,
    pub node_budget: u64,
    pub dump_predicates: bool,
}

/// The wall-clock settings of the original evaluation: a two hour cutoff,
/// 5 s fuzzer stall and 10 s concolic stall.
impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            mode: Mode::Greycone,
            target_coverage_pct: 100.0,
            budget: Budget::Secs(7200.0),
            fuzz_stall: Stall::Seconds(5.0),
            concolic_stall: Stall::Seconds(10.0),
            rng_seed: 0,
            step_limit: DEFAULT_STEP_LIMIT,
            fork_limit: concolic::DEFAULT_FORK_LIMIT,
            node_budget: DEFAULT_NODE_BUDGET,
            dump_predicates: false,
        }
    }
}

impl CampaignConfig {
    /// Reproducible settings: every limit is counted, never timed.
    pub fn logical(mode: Mode, executions: u64, rng_seed: u64) -> CampaignConfig {
        CampaignConfig {
            mode,
            budget: Budget::Execs(executions),
            fuzz_stall: Stall::Executions(LOGICAL_FUZZ_STALL),
            concolic_stall: Stall::SolverCalls(LOGICAL_CONCOLIC_STALL),
            rng_seed,
            ..CampaignConfig::default()
        }
    }

    pub fn is_logical(&self) -> bool {
        let timed = |s: Stall| matches!(s, Stall::Seconds(_));
        matches!(self.budget, Budget::Execs(_)) && !timed(self.fuzz_stall) && !timed(self.concolic_stall)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = self.target_coverage_pct;
        if !(t > 0.0 && t <= 100.0) {
            return Err(ConfigError(format!("target coverage must be in (0, 100], got {t}")));
        }
        match self.budget {
            Budget::Execs(0) => return Err(ConfigError("execution budget must be positive".into())),
            Budget::Secs(s) if !(s > 0.0 && s.is_finite()) => {
                return Err(ConfigError(format!("time budget must be positive, got {s}")))
            }
            _ => {}
        }
        for (what, s) in [("fuzz", self.fuzz_stall), ("concolic", self.concolic_stall)] {
            let ok = match s {
                Stall::Executions(n) | Stall::SolverCalls(n) => n > 0,
                Stall::Seconds(x) => x > 0.0 && x.is_finite(),
                Stall::Never => true,
            };
            if !ok {
                return Err(ConfigError(format!("{what} stall threshold must be positive")));
            }
        }
        if self.step_limit == 0 || self.node_budget == 0 {
            return Err(ConfigError("step and node limits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("invalid campaign config: {0}")]
pub struct ConfigError(pub String);

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("execution tree invariant broken: {0}")]
    Tree(#[from] TreeError),
}

#[derive(Clone, Debug)]
pub struct CampaignState {
    pub config: CampaignConfig,
    pub phase_log: Vec<PhaseReport>,
    pub queue: SeedQueue,
    pub tree: ExecutionTree,
    pub tracker: Tracker,
    pub executions: u64,
    pub solver_calls: u64,
    /// Fidelity record of every solver-produced test.
    pub replays: Vec<ReplayRecord>,
    /// `(phase, predicate)` pairs, when dumping was requested.
    pub predicates: Vec<(String, DumpedPredicate)>,
    pub tree_stats: TreeStats,
    pub seconds: f64,
}

impl CampaignState {
    pub fn coverage_pct(&self) -> f64 {
        self.tracker.pct()
    }

    /// Executions at the last coverage gain.
    pub fn executions_to_final(&self) -> u64 {
        self.tracker.series.last().map_or(0, |p| p.executions)
    }

    /// Wall-clock seconds at the last coverage gain.
    pub fn seconds_to_final(&self) -> f64 {
        self.tracker.series.last().map_or(0.0, |p| p.seconds)
    }

    pub fn concolic_phases(&self) -> usize {
        self.phase_log.iter().filter(|p| p.kind == PhaseKind::Concolic).count()
    }

    /// Checks the phase-log invariants; the error names the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        for w in self.phase_log.windows(2) {
            if w[1].coverage_pct < w[0].coverage_pct {
                return Err(format!("coverage fell from {} to {} in {}", w[0].coverage_pct, w[1].coverage_pct, w[1].phase));
            }
            if self.config.mode == Mode::Greycone && w[0].kind == w[1].kind {
                return Err(format!("{} follows {} without alternation", w[1].phase, w[0].phase));
            }
        }
        if self.config.mode == Mode::Greycone && self.phase_log.first().is_some_and(|p| p.kind != PhaseKind::Fuzz) {
            return Err("greycone campaigns start with a fuzz phase".into());
        }
        for p in &self.phase_log {
            match p.stop_reason {
                StopReason::Target if p.coverage_pct < self.config.target_coverage_pct => {
                    return Err(format!("{} claims the target at {}%", p.phase, p.coverage_pct));
                }
                StopReason::Cutoff => {
                    if let Budget::Execs(n) = self.config.budget {
                        if p.executions_total < n {
                            return Err(format!("{} claims a cutoff after {} of {n} executions", p.phase, p.executions_total));
                        }
                    }
                }
                _ => {}
            }
        }
        if let Some(r) = self.replays.iter().find(|r| !self.queue.contains(&r.bytes)) {
            return Err(format!("solver test {:?} never reached the queue", r.bytes));
        }
        Ok(())
    }
}

struct Driver<'a> {
    ip: &'a InstrumentedProgram,
    st: CampaignState,
    meter: Meter,
    rng: ChaCha8Rng,
}

impl Driver<'_> {
    fn fuzz(&mut self, k: usize, stall: Stall) -> StopReason {
        let started = Instant::now();
        let params = FuzzParams { stall, step_limit: self.st.config.step_limit };
        let name = format!("fuzz_{k}");
        let mut rep = fuzz::fuzz_phase(self.ip, &mut self.st.queue, &mut self.st.tracker, &mut self.meter, &mut self.rng, params, &name);
        rep.seconds = started.elapsed().as_secs_f64();
        let stop = rep.stop_reason;
        self.st.phase_log.push(rep);
        stop
    }

    fn concolic(&mut self, k: usize, seeds: &[TestCase]) -> Result<StopReason, TreeError> {
        let started = Instant::now();
        let cfg = &self.st.config;
        let params = ConcolicParams {
            stall: cfg.concolic_stall,
            step_limit: cfg.step_limit,
            fork_limit: cfg.fork_limit,
            node_budget: cfg.node_budget,
            dump_predicates: cfg.dump_predicates,
        };
        let name = format!("conc_{k}");
        let out = concolic::concolic_phase(self.ip, seeds, &mut self.st.tree, &mut self.st.tracker, &mut self.meter, params, &name)?;
        let mut rep = out.report;
        // Solver tests join the queue before the next fuzz phase; duplicates
        // of queued tests are dropped.
        rep.retained = out.new_tests.into_iter().filter(|(t, meta)| self.st.queue.push(t.clone(), *meta)).count() as u64;
        rep.seconds = started.elapsed().as_secs_f64();
        self.st.replays.extend(out.replays);
        self.st.predicates.extend(out.predicates.into_iter().map(|p| (name.clone(), p)));
        self.st.tree_stats = out.stats;
        let stop = rep.stop_reason;
        self.st.phase_log.push(rep);
        Ok(stop)
    }
}

/// Runs one campaign. With an execution budget and counted stall thresholds
/// the result depends only on the program, the seeds and the config.
pub fn run_campaign(ip: &InstrumentedProgram, initial: &[TestCase], cfg: &CampaignConfig) -> Result<CampaignState, CampaignError> {
    cfg.validate()?;
    let started = Instant::now();
    let mut queue = SeedQueue::new();
    for t in initial {
        let mut t = t.clone();
        t.bytes = TestCase::normalized(t.bytes, ip.program.input_len());
        queue.push_uncalibrated(t);
    }
    if queue.is_empty() {
        queue.push_uncalibrated(TestCase::new(vec![0; ip.program.input_len()], Origin::Initial, 0));
    }
    let mut d = Driver {
        ip,
        st: CampaignState {
            config: cfg.clone(),
            phase_log: Vec::new(),
            queue,
            tree: ExecutionTree::new(),
            tracker: Tracker::new(ip, cfg.target_coverage_pct),
            executions: 0,
            solver_calls: 0,
            replays: Vec::new(),
            predicates: Vec::new(),
            tree_stats: TreeStats::default(),
            seconds: 0.0,
        },
        meter: Meter::new(cfg.budget),
        rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
    };

    match cfg.mode {
        Mode::FuzzOnly => {
            d.fuzz(1, Stall::Never);
        }
        Mode::ConcolicOnly => {
            let seeds = d.st.queue.entries.clone();
            d.concolic(1, &seeds)?;
        }
        Mode::Greycone => {
            for k in 1.. {
                let before = d.meter.executions;
                let stop = d.fuzz(k, cfg.fuzz_stall);
                if matches!(stop, StopReason::Target | StopReason::Cutoff) {
                    break;
                }
                let seeds = d.st.queue.entries.clone();
                let stop = d.concolic(k, &seeds)?;
                if matches!(stop, StopReason::Target | StopReason::Cutoff) {
                    break;
                }
                if d.meter.executions == before {
                    // Neither engine can run anything more: no inputs to
                    // mutate and nothing left to solve.
                    break;
                }
            }
        }
    }

    let mut st = d.st;
    st.executions = d.meter.executions;
    st.solver_calls = d.meter.solver_calls;
    st.seconds = started.elapsed().as_secs_f64();
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dut::load;

    #[test]
    fn config_validation() {
        assert!(CampaignConfig::default().validate().is_ok());
        let bad = CampaignConfig { target_coverage_pct: 0.0, ..CampaignConfig::default() };
        assert!(bad.validate().is_err());
        let bad = CampaignConfig { budget: Budget::Execs(0), ..CampaignConfig::default() };
        assert!(bad.validate().is_err());
        assert!(CampaignConfig::logical(Mode::Greycone, 10, 1).is_logical());
        assert!(!CampaignConfig::default().is_logical());
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = CampaignConfig::logical(Mode::ConcolicOnly, 5000, 9);
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(toml::from_str::<CampaignConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn tiny_target_stops_in_first_fuzz_phase() {
        let ip = load("t", "input u8 n; if (n == 9) { fail; }").unwrap();
        let cfg = CampaignConfig { target_coverage_pct: 0.1, ..CampaignConfig::logical(Mode::Greycone, 1000, 1) };
        let st = run_campaign(&ip, &[], &cfg).unwrap();
        assert_eq!(st.phase_log.len(), 1);
        assert_eq!((st.phase_log[0].phase.as_str(), st.phase_log[0].stop_reason), ("fuzz_1", StopReason::Target));
    }
}
