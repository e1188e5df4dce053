use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseKind {
    Fuzz,
    Concolic,
}

impl PhaseKind {
    pub fn prefix(self) -> &'static str {
        match self {
            PhaseKind::Fuzz => "fuzz",
            PhaseKind::Concolic => "conc",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopReason {
    /// Target coverage reached.
    Target,
    /// Global budget used up.
    Cutoff,
    /// Stall threshold hit.
    Stalled,
    /// Nothing left to try: empty frontier or no inputs to mutate.
    Exhausted,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Target => "target",
            StopReason::Cutoff => "cutoff",
            StopReason::Stalled => "stalled",
            StopReason::Exhausted => "exhausted",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverTally {
    pub sat: u64,
    pub unsat: u64,
    pub timeout: u64,
    /// Predicates the solver rejected as malformed.
    pub errors: u64,
}

impl SolverTally {
    pub fn calls(&self) -> u64 {
        self.sat + self.unsat + self.timeout + self.errors
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    /// `fuzz_k` or `conc_k`.
    pub phase: String,
    pub kind: PhaseKind,
    /// Executions spent in this phase.
    pub executions: u64,
    /// Tests appended to the queue by this phase.
    pub retained: u64,
    pub coverage_pct: f64,
    pub stop_reason: StopReason,
    /// Campaign execution counter when the phase ended.
    pub executions_total: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverTally>,
    #[serde(skip)]
    pub seconds: f64,
}
