//! Logical and wall-clock budgets.
//!
//! Execution-counted budgets make campaigns reproducible; the wall-clock
//! variants exist for interactive use (5 s and 10 s stall, two hours overall).

use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Global campaign cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Budget {
    Execs(u64),
    Secs(f64),
}

/// Unproductive work after which a phase hands over.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stall {
    Executions(u64),
    SolverCalls(u64),
    Seconds(f64),
    Never,
}

/// Campaign-wide counters shared by every phase.
#[derive(Clone, Debug)]
pub struct Meter {
    pub executions: u64,
    pub solver_calls: u64,
    pub budget: Budget,
    started: Instant,
}

impl Meter {
    pub fn new(budget: Budget) -> Meter {
        Meter { executions: 0, solver_calls: 0, budget, started: Instant::now() }
    }

    pub fn elapsed_secs(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }

    pub fn exhausted(&self) -> bool {
        match self.budget {
            Budget::Execs(n) => self.executions >= n,
            Budget::Secs(s) => self.elapsed_secs() >= s,
        }
    }
}

/// Tracks work since the last useful result of a phase.
#[derive(Clone, Debug)]
pub struct StallWatch {
    stall: Stall,
    executions: u64,
    solver_calls: u64,
    since: Instant,
}

impl StallWatch {
    pub fn start(stall: Stall, meter: &Meter) -> StallWatch {
        StallWatch { stall, executions: meter.executions, solver_calls: meter.solver_calls, since: Instant::now() }
    }

    pub fn progress(&mut self, meter: &Meter) {
        self.executions = meter.executions;
        self.solver_calls = meter.solver_calls;
        self.since = Instant::now();
    }

    pub fn stalled(&self, meter: &Meter) -> bool {
        match self.stall {
            Stall::Executions(n) => meter.executions - self.executions >= n,
            Stall::SolverCalls(n) => meter.solver_calls - self.solver_calls >= n,
            Stall::Seconds(s) => self.since.elapsed().as_secs_f64() >= s,
            Stall::Never => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn execution_budget_and_stall() {
        let mut m = Meter::new(Budget::Execs(10));
        let mut w = StallWatch::start(Stall::Executions(3), &m);
        m.executions = 2;
        assert!(!w.stalled(&m));
        w.progress(&m);
        m.executions = 5;
        assert!(w.stalled(&m));
        assert!(!m.exhausted());
        m.executions = 10;
        assert!(m.exhausted());
        assert!(Meter::new(Budget::Execs(0)).exhausted());
        assert!(!StallWatch::start(Stall::Never, &m).stalled(&m));
    }
}
