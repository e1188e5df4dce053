//! Ground truth by exhaustion: run every input of a small program.

use crate::coverage::pct;
use crate::dut::{EdgeId, InstrumentedProgram};
use crate::exec::run_concrete;
use std::collections::BTreeSet;

/// Largest input domain, in bits, the oracle will enumerate.
pub const MAX_ORACLE_BITS: u32 = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reachability {
    pub reachable: BTreeSet<EdgeId>,
    pub total: usize,
    /// Inputs that hit the fail sink.
    pub failing: usize,
}

impl Reachability {
    pub fn pct(&self) -> f64 {
        pct(self.reachable.len(), self.total)
    }
}

/// Reachable branch edges over the whole input domain, or `None` if the
/// domain is wider than [`MAX_ORACLE_BITS`].
pub fn reachable_branch_edges(ip: &InstrumentedProgram, step_limit: u64) -> Option<Reachability> {
    let bits = ip.program.input_bits();
    if bits > MAX_ORACLE_BITS {
        return None;
    }
    let len = ip.program.input_len();
    let mut reachable = BTreeSet::new();
    let mut failing = 0;
    for x in 0u32..(1u32 << bits) {
        let bytes: Vec<u8> = (0..len).map(|i| (x >> (8 * i)) as u8).collect();
        let r = run_concrete(ip, &bytes, step_limit);
        if r.outcome == crate::exec::Outcome::Failed {
            failing += 1;
        }
        reachable.extend(r.edge_hits().map(|(e, _)| e).filter(|&e| ip.is_branch_edge(e)));
    }
    Some(Reachability { reachable, total: ip.branch_edge_count(), failing })
}
