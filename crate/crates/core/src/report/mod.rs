//! Report emitters: campaign statistics, coverage series, LCOV and the
//! comparison tables.

pub mod lcov;

pub use lcov::emit_lcov;

use crate::campaign::{CampaignState, Mode};
use crate::coverage::SeriesPoint;
use crate::phase::{PhaseKind, PhaseReport};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Everything `stats.json` holds for one campaign. Wall-clock figures are
/// left out so identical runs give identical files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignStats {
    pub program: String,
    pub source: String,
    pub mode: Mode,
    pub rng_seed: u64,
    pub phases: Vec<PhaseReport>,
    pub coverage_pct: f64,
    pub covered_branch_edges: usize,
    pub total_branch_edges: usize,
    pub executions: u64,
    pub solver_calls: u64,
    pub tests: usize,
    pub replays: usize,
    pub faithful_replays: usize,
    pub series: Vec<SeriesPoint>,
    /// Per-edge bucket flags, enough to regenerate the LCOV file.
    pub coverage_flags: Vec<u8>,
}

impl CampaignStats {
    pub fn new(st: &CampaignState, program: &str, source: &str) -> CampaignStats {
        CampaignStats {
            program: program.to_string(),
            source: source.to_string(),
            mode: st.config.mode,
            rng_seed: st.config.rng_seed,
            phases: st.phase_log.clone(),
            coverage_pct: st.coverage_pct(),
            covered_branch_edges: st.tracker.covered_branch_edges(),
            total_branch_edges: st.tracker.total_branch_edges(),
            executions: st.executions,
            solver_calls: st.solver_calls,
            tests: st.queue.len(),
            replays: st.replays.len(),
            faithful_replays: st.replays.iter().filter(|r| r.faithful()).count(),
            series: st.tracker.series.clone(),
            coverage_flags: st.tracker.map.as_flags().to_vec(),
        }
    }
}

/// Wall-clock side file; never compared across runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub seconds_to_final: f64,
    pub phases: Vec<(String, f64)>,
    pub series: Vec<(u64, f64)>,
}

impl Timing {
    pub fn new(st: &CampaignState) -> Timing {
        Timing {
            total_seconds: st.seconds,
            seconds_to_final: st.seconds_to_final(),
            phases: st.phase_log.iter().map(|p| (p.phase.clone(), p.seconds)).collect(),
            series: st.tracker.series.iter().map(|p| (p.executions, p.seconds)).collect(),
        }
    }
}

/// `executions,pct` rows, one per coverage gain.
pub fn series_csv(series: &[SeriesPoint]) -> String {
    let mut out = String::from("executions,pct\n");
    for p in series {
        writeln!(out, "{},{:.1}", p.executions, p.pct).unwrap();
    }
    out
}

/// One row of a comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub benchmark: String,
    pub mode: Mode,
    /// Unique queue entries.
    pub tests: usize,
    pub coverage_pct: f64,
    /// Oracle ceiling, when the input domain is small enough to enumerate.
    pub reachable_pct: Option<f64>,
    pub executions_to_final: u64,
    #[serde(skip)]
    pub seconds_to_final: f64,
    pub executions: u64,
    pub fuzz_phases: usize,
    pub concolic_phases: usize,
    pub series: Vec<SeriesPoint>,
}

impl RunRecord {
    pub fn new(benchmark: &str, st: &CampaignState, reachable_pct: Option<f64>) -> RunRecord {
        let count = |k: PhaseKind| st.phase_log.iter().filter(|p| p.kind == k).count();
        RunRecord {
            benchmark: benchmark.to_string(),
            mode: st.config.mode,
            tests: st.queue.len(),
            coverage_pct: st.coverage_pct(),
            reachable_pct,
            executions_to_final: st.executions_to_final(),
            seconds_to_final: st.seconds_to_final(),
            executions: st.executions,
            fuzz_phases: count(PhaseKind::Fuzz),
            concolic_phases: count(PhaseKind::Concolic),
            series: st.tracker.series.clone(),
        }
    }
}

const COLUMNS: [&str; 9] = ["benchmark", "mode", "tests", "cov%", "reach%", "ttf_execs", "execs", "fuzz", "conc"];

fn cells(r: &RunRecord) -> [String; 9] {
    [
        r.benchmark.clone(),
        r.mode.to_string(),
        r.tests.to_string(),
        format!("{:.1}", r.coverage_pct),
        r.reachable_pct.map_or("-".to_string(), |p| format!("{p:.1}")),
        r.executions_to_final.to_string(),
        r.executions.to_string(),
        r.fuzz_phases.to_string(),
        r.concolic_phases.to_string(),
    ]
}

/// Human-readable table: names left-aligned, numbers right-aligned.
pub fn table_text(records: &[RunRecord]) -> String {
    let rows: Vec<[String; 9]> = records.iter().map(cells).collect();
    let mut widths = COLUMNS.map(str::len);
    for row in &rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |row: &[String]| {
        let mut s = String::new();
        for (i, (c, w)) in row.iter().zip(widths).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            if i < 2 {
                write!(s, "{c:<w$}").unwrap();
            } else {
                write!(s, "{c:>w$}").unwrap();
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(&COLUMNS.map(String::from));
    out.push_str(&line(&widths.map(|w| "-".repeat(w))));
    for row in &rows {
        out.push_str(&line(row));
    }
    out
}

pub fn table_csv(records: &[RunRecord]) -> String {
    let mut out = COLUMNS.join(",") + "\n";
    for r in records {
        out.push_str(&cells(r).join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(name: &str, mode: Mode, pct: f64) -> RunRecord {
        RunRecord {
            benchmark: name.into(),
            mode,
            tests: 3,
            coverage_pct: pct,
            reachable_pct: Some(100.0),
            executions_to_final: 42,
            seconds_to_final: 0.5,
            executions: 1000,
            fuzz_phases: 1,
            concolic_phases: 0,
            series: vec![],
        }
    }

    #[test]
    fn tables_have_one_row_per_record() {
        let rs = [record("fig2", Mode::Greycone, 100.0), record("motiv", Mode::FuzzOnly, 90.0)];
        let text = table_text(&rs);
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(3).unwrap().starts_with("motiv      fuzz-only"));
        let csv = table_csv(&rs);
        assert_eq!(csv.lines().nth(2), Some("motiv,fuzz-only,3,90.0,100.0,42,1000,1,0"));
    }

    #[test]
    fn series_rows() {
        let s = [SeriesPoint { executions: 1, pct: 50.0, seconds: 0.1 }, SeriesPoint { executions: 9, pct: 100.0, seconds: 0.2 }];
        assert_eq!(series_csv(&s), "executions,pct\n1,50.0\n9,100.0\n");
    }
}
