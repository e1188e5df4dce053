//! Bucketed edge coverage, the novelty signal shared by both engines.

use crate::budget::Meter;
use crate::dut::{EdgeId, InstrumentedProgram};
use crate::exec::ExecResult;
use serde::{Deserialize, Serialize};

pub const BUCKETS: usize = 8;

/// Classifies a raw hit count into {1, 2, 3, 4–7, 8–15, 16–31, 32–127, 128+}.
pub fn bucketize(raw: u32) -> usize {
    debug_assert!(raw >= 1, "bucketize expects a positive hit count");
    match raw {
        0..=1 => 0,
        2 => 1,
        3 => 2,
        4..=7 => 3,
        8..=15 => 4,
        16..=31 => 5,
        32..=127 => 6,
        _ => 7,
    }
}

/// Smallest hit count that lands in `bucket`.
pub fn bucket_floor(bucket: usize) -> u32 {
    [1, 2, 3, 4, 8, 16, 32, 128][bucket]
}

/// One byte per edge; bit `k` is set once a run hit the edge with a count in bucket `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoverageMap {
    flags: Vec<u8>,
}

impl CoverageMap {
    pub fn new(edge_count: usize) -> CoverageMap {
        CoverageMap { flags: vec![0; edge_count] }
    }

    pub fn for_program(ip: &InstrumentedProgram) -> CoverageMap {
        CoverageMap::new(ip.edge_count())
    }

    /// Rebuilds a map from its per-edge flag bytes.
    pub fn from_flags(flags: Vec<u8>) -> CoverageMap {
        CoverageMap { flags }
    }

    pub fn as_flags(&self) -> &[u8] {
        &self.flags
    }

    pub fn edge_count(&self) -> usize {
        self.flags.len()
    }

    pub fn flags(&self, e: EdgeId) -> u8 {
        self.flags[e]
    }

    pub fn is_set(&self, e: EdgeId, bucket: usize) -> bool {
        self.flags[e] >> bucket & 1 == 1
    }

    pub fn edge_covered(&self, e: EdgeId) -> bool {
        self.flags[e] != 0
    }

    /// Total number of (edge, bucket) flags set.
    pub fn flags_set(&self) -> u32 {
        self.flags.iter().map(|f| f.count_ones()).sum()
    }

    /// Number of flags `r` would newly set.
    pub fn novelty(&self, r: &ExecResult) -> u32 {
        r.edge_hits()
            .map(|(e, h)| {
                let bit = 1u8 << bucketize(h);
                (self.flags[e] & bit == 0) as u32
            })
            .sum()
    }

    pub fn is_interesting(&self, r: &ExecResult) -> bool {
        r.edge_hits().any(|(e, h)| self.flags[e] & (1u8 << bucketize(h)) == 0)
    }

    /// Merges a run; returns the number of newly set flags.
    pub fn merge(&mut self, r: &ExecResult) -> u32 {
        let mut new_flags = 0;
        for (e, h) in r.edge_hits() {
            let bit = 1u8 << bucketize(h);
            if self.flags[e] & bit == 0 {
                self.flags[e] |= bit;
                new_flags += 1;
            }
        }
        new_flags
    }

    /// Merges another map; returns the number of newly set flags.
    pub fn merge_map(&mut self, other: &CoverageMap) -> u32 {
        let mut new_flags = 0;
        for (mine, theirs) in self.flags.iter_mut().zip(&other.flags) {
            new_flags += (theirs & !*mine).count_ones();
            *mine |= theirs;
        }
        new_flags
    }

    pub fn covered_branch_edges(&self, ip: &InstrumentedProgram) -> usize {
        ip.branch_edges().filter(|&e| self.edge_covered(e)).count()
    }

    pub fn coverage_pct(&self, ip: &InstrumentedProgram) -> f64 {
        pct(self.covered_branch_edges(ip), ip.branch_edge_count())
    }
}

/// `covered / total × 100` rounded to one decimal; a program without
/// branches is fully covered.
pub fn pct(covered: usize, total: usize) -> f64 {
    if total == 0 {
        return 100.0;
    }
    (covered as f64 * 1000.0 / total as f64).round() / 10.0
}

pub fn coverage_pct(m: &CoverageMap, ip: &InstrumentedProgram) -> f64 {
    m.coverage_pct(ip)
}

/// A coverage-improving event.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub executions: u64,
    pub pct: f64,
    /// Wall-clock time is kept out of serialized reports so they stay reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

/// The coverage calculator: the shared map plus the progress series and
/// the target check.
#[derive(Clone, Debug)]
pub struct Tracker {
    pub map: CoverageMap,
    pub series: Vec<SeriesPoint>,
    pub target_pct: f64,
    covered: usize,
    total: usize,
}

impl Tracker {
    pub fn new(ip: &InstrumentedProgram, target_pct: f64) -> Tracker {
        Tracker { map: CoverageMap::for_program(ip), series: Vec::new(), target_pct, covered: 0, total: ip.branch_edge_count() }
    }

    /// Merges a run; returns the number of newly set flags.
    pub fn record(&mut self, ip: &InstrumentedProgram, r: &ExecResult, meter: &Meter) -> u32 {
        let new_flags = self.map.merge(r);
        if new_flags > 0 {
            let before = self.covered;
            self.covered = self.map.covered_branch_edges(ip);
            if self.covered > before || self.series.is_empty() {
                self.series.push(SeriesPoint { executions: meter.executions, pct: self.pct(), seconds: meter.elapsed_secs() });
            }
        }
        new_flags
    }

    pub fn covered_branch_edges(&self) -> usize {
        self.covered
    }

    pub fn total_branch_edges(&self) -> usize {
        self.total
    }

    pub fn pct(&self) -> f64 {
        pct(self.covered, self.total)
    }

    pub fn target_reached(&self) -> bool {
        self.pct() >= self.target_pct
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dut::load;
    use crate::exec::{run_concrete, DEFAULT_STEP_LIMIT};

    #[test]
    fn bucket_examples() {
        assert_eq!(bucketize(1), 0);
        assert_eq!(bucketize(5), 3);
        assert_eq!(bucketize(200), 7);
    }

    #[test]
    fn loop_counts_five_then_nine_sets_a_new_bucket() {
        let ip = load("loop", "input u8 n; while (n > 0) n = n - 1;").unwrap();
        let mut m = CoverageMap::for_program(&ip);
        let five = run_concrete(&ip, &[5], DEFAULT_STEP_LIMIT);
        let nine = run_concrete(&ip, &[9], DEFAULT_STEP_LIMIT);
        assert!(m.merge(&five) >= 1);
        assert_eq!(m.merge(&five), 0);
        assert!(m.is_interesting(&nine));
        // body->header (edge 3) gains bucket 8–15; header->body (edge 1) too.
        assert_eq!(m.novelty(&nine), 2);
        assert_eq!(m.merge(&nine), 2);
        assert!(m.is_set(3, 4) && m.is_set(3, 3));
    }

    #[test]
    fn percentage_rounding() {
        assert_eq!(pct(0, 10), 0.0);
        assert_eq!(pct(2, 3), 66.7);
        assert_eq!(pct(13, 18), 72.2);
        assert_eq!(pct(0, 0), 100.0);
    }
}
