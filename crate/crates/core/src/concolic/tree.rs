//! The execution tree: a trie over branch decisions with per-outcome flags.

use super::trace::PathTrace;
use crate::dut::BlockId;
use crate::sym::{SymExpr, SymRef};
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::{BTreeSet, HashSet};

pub type NodeId = usize;

/// What happened to an uncovered outcome once it was attempted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attempt {
    Open,
    Unsat,
    Timeout,
    /// The solver accepted the predicate but the produced test went elsewhere.
    Diverged,
    /// The solver rejected the predicate.
    Unsupported,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    pub site: BlockId,
    /// Number of decisions above this node.
    pub depth: usize,
    /// Indexed by outcome: `[false, true]`.
    pub covered: [bool; 2],
    pub children: [Option<NodeId>; 2],
    pub attempts: [Attempt; 2],
    pub symbolic: bool,
    /// Trace that created the node; its conjuncts and bytes seed every fork here.
    pub source: usize,
    pub predicate: Option<SymRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("replay mismatch at depth {depth}: tree has site {expected}, trace has site {found}")]
    ReplayMismatch { depth: usize, expected: BlockId, found: BlockId },
}

/// Conjunction that steers execution to `target`, the still-uncovered
/// outcome of a known node.
#[derive(Clone, Debug, PartialEq)]
pub struct PathPredicate {
    pub conjuncts: Vec<SymRef>,
    /// `(site, desired outcome)`.
    pub target: (BlockId, bool),
    pub node: NodeId,
    pub depth: usize,
    /// Trace whose bytes fill unconstrained inputs.
    pub source: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeStats {
    pub nodes: usize,
    pub frontier_size: usize,
    pub sat: u64,
    pub unsat: u64,
    pub timeout: u64,
}

#[derive(Clone, Debug, Default)]
pub struct ExecutionTree {
    pub nodes: Vec<TreeNode>,
    pub traces: Vec<PathTrace>,
    root: Option<NodeId>,
    /// `(deepest first, site, node, outcome)`.
    open: BTreeSet<(Reverse<usize>, BlockId, NodeId, bool)>,
    traced: HashSet<Vec<u8>>,
}

impl ExecutionTree {
    pub fn new() -> ExecutionTree {
        ExecutionTree::default()
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn has_traced(&self, bytes: &[u8]) -> bool {
        self.traced.contains(bytes)
    }

    pub fn covered_outcomes(&self) -> usize {
        self.nodes.iter().map(|n| n.covered.iter().filter(|&&c| c).count()).sum()
    }

    /// Inserts a trace; returns the number of newly covered node outcomes.
    pub fn add_trace(&mut self, tr: PathTrace) -> Result<usize, TreeError> {
        let source = self.traces.len();
        // Validate first so a mismatch leaves the tree untouched.
        let mut at = self.root;
        for (depth, step) in tr.steps.iter().enumerate() {
            let Some(id) = at else { break };
            let n = &self.nodes[id];
            if n.site != step.site {
                return Err(TreeError::ReplayMismatch { depth, expected: n.site, found: step.site });
            }
            at = n.children[step.taken as usize];
        }
        if self.traced.contains(&tr.bytes) {
            // Execution is deterministic, so the same bytes add nothing.
            return Ok(0);
        }

        let mut fresh = 0;
        let mut parent: Option<(NodeId, bool)> = None;
        for (depth, step) in tr.steps.iter().enumerate() {
            let existing = match parent {
                None => self.root,
                Some((p, t)) => self.nodes[p].children[t as usize],
            };
            let id = match existing {
                Some(id) => id,
                None => {
                    let id = self.nodes.len();
                    self.nodes.push(TreeNode {
                        site: step.site,
                        depth,
                        covered: [false; 2],
                        children: [None; 2],
                        attempts: [Attempt::Open; 2],
                        symbolic: step.is_symbolic,
                        source,
                        predicate: step.predicate.clone(),
                    });
                    match parent {
                        None => self.root = Some(id),
                        Some((p, t)) => self.nodes[p].children[t as usize] = Some(id),
                    }
                    if step.is_symbolic {
                        for outcome in [false, true] {
                            self.open.insert((Reverse(depth), step.site, id, outcome));
                        }
                    }
                    id
                }
            };
            let slot = step.taken as usize;
            if !self.nodes[id].covered[slot] {
                self.nodes[id].covered[slot] = true;
                self.open.remove(&(Reverse(depth), step.site, id, step.taken));
                fresh += 1;
            }
            parent = Some((id, step.taken));
        }
        self.traced.insert(tr.bytes.clone());
        self.traces.push(tr);
        Ok(fresh)
    }

    /// Marks an outcome as attempted so it leaves the frontier.
    pub fn close(&mut self, node: NodeId, outcome: bool, attempt: Attempt) {
        let n = &mut self.nodes[node];
        n.attempts[outcome as usize] = attempt;
        self.open.remove(&(Reverse(n.depth), n.site, node, outcome));
    }

    pub fn frontier_size(&self) -> usize {
        self.open.len()
    }

    /// The path predicate for an uncovered outcome, built from the trace that
    /// created the node.
    pub fn predicate_for(&self, node: NodeId, outcome: bool) -> PathPredicate {
        let n = &self.nodes[node];
        let tr = &self.traces[n.source];
        let mut conjuncts = Vec::new();
        for step in &tr.steps[..n.depth] {
            conjuncts.extend(step.guards.iter().cloned());
            conjuncts.extend(step.directed());
        }
        let target = &tr.steps[n.depth];
        conjuncts.extend(target.guards.iter().cloned());
        let p = target.predicate.as_ref().expect("frontier nodes are symbolic");
        conjuncts.push(SymExpr::directed(p, outcome));
        PathPredicate { conjuncts, target: (n.site, outcome), node, depth: n.depth, source: n.source }
    }

    /// The next predicate in frontier order: deepest first, then lowest site.
    pub fn next_predicate(&self) -> Option<PathPredicate> {
        self.open.iter().next().map(|&(_, _, node, outcome)| self.predicate_for(node, outcome))
    }

    /// Every open predicate in frontier order.
    pub fn frontier(&self) -> Vec<PathPredicate> {
        self.open.iter().map(|&(_, _, node, outcome)| self.predicate_for(node, outcome)).collect()
    }
}
