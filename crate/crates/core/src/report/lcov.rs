//! LCOV branch records.
//!
//! The map only keeps hit-count buckets, so a taken count is reported as
//! the smallest count of the highest bucket seen. That is a lower bound,
//! and zero versus non-zero is exact, which is all BRH depends on.

use crate::coverage::{bucket_floor, CoverageMap};
use crate::dut::InstrumentedProgram;
use std::fmt::Write;

/// Lower bound on the hits of an edge, `None` if never hit.
pub fn taken_lower_bound(m: &CoverageMap, e: usize) -> Option<u32> {
    let f = m.flags(e);
    (f != 0).then(|| bucket_floor(7 - f.leading_zeros() as usize))
}

/// `BRDA` counts for one site: `None` means the block never ran (`-`).
pub fn site_counts(m: &CoverageMap, true_edge: usize, false_edge: usize) -> [Option<u32>; 2] {
    let t = taken_lower_bound(m, true_edge);
    let f = taken_lower_bound(m, false_edge);
    if t.is_none() && f.is_none() {
        [None, None]
    } else {
        [Some(t.unwrap_or(0)), Some(f.unwrap_or(0))]
    }
}

pub fn emit_lcov(m: &CoverageMap, ip: &InstrumentedProgram, source_path: &str) -> String {
    let mut out = String::new();
    let (mut found, mut hit) = (0, 0);
    writeln!(out, "TN:{}", ip.name()).unwrap();
    writeln!(out, "SF:{source_path}").unwrap();
    for site in ip.sites() {
        let line = ip.program.lines[site.block];
        let counts = site_counts(m, site.true_edge, site.false_edge);
        // Branch 0 is the true outcome, branch 1 the false one.
        for (branch, count) in counts.iter().enumerate() {
            found += 1;
            match count {
                Some(c) => {
                    hit += (*c > 0) as usize;
                    writeln!(out, "BRDA:{line},{},{branch},{c}", site.block).unwrap();
                }
                None => writeln!(out, "BRDA:{line},{},{branch},-", site.block).unwrap(),
            }
        }
    }
    writeln!(out, "BRF:{found}").unwrap();
    writeln!(out, "BRH:{hit}").unwrap();
    out.push_str("end_of_record\n");
    out
}

/// `(BRF, BRH)` read back from LCOV text.
pub fn totals(lcov: &str) -> Option<(usize, usize)> {
    let field = |key: &str| lcov.lines().find_map(|l| l.strip_prefix(key)).and_then(|v| v.trim().parse().ok());
    Some((field("BRF:")?, field("BRH:")?))
}
