use super::program::{BlockId, EdgeId, Program, Terminator};
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BranchSite {
    pub block: BlockId,
    pub true_edge: EdgeId,
    pub false_edge: EdgeId,
}

impl BranchSite {
    pub fn edge(&self, taken: bool) -> EdgeId {
        if taken {
            self.true_edge
        } else {
            self.false_edge
        }
    }
}

/// Dense edge numbering: blocks in ascending order, successors in edge order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeTable {
    pub edges: Vec<(BlockId, BlockId)>,
}

impl EdgeTable {
    pub fn build(p: &Program) -> EdgeTable {
        let edges = p
            .blocks
            .iter()
            .flat_map(|b| b.term.successors().into_iter().map(move |s| (b.id, s)))
            .collect();
        EdgeTable { edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn lookup(&self) -> HashMap<(BlockId, BlockId), EdgeId> {
        self.edges.iter().enumerate().map(|(i, &e)| (e, i)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstrumentedProgram {
    pub program: Program,
    pub edges: EdgeTable,
    /// Outgoing edge ids per block, in successor order.
    pub(crate) out_edges: Vec<[EdgeId; 2]>,
    pub(crate) sites: Vec<BranchSite>,
    /// `site_index[block]` is the position of the block's site in `sites`.
    pub(crate) site_index: Vec<Option<usize>>,
    pub(crate) is_branch_edge: Vec<bool>,
}

pub fn instrument(program: Program) -> InstrumentedProgram {
    let edges = EdgeTable::build(&program);
    let mut out_edges = vec![[usize::MAX; 2]; program.blocks.len()];
    for (id, &(from, _)) in edges.edges.iter().enumerate() {
        let slot = &mut out_edges[from];
        if slot[0] == usize::MAX {
            slot[0] = id;
        } else {
            slot[1] = id;
        }
    }
    let mut sites = Vec::new();
    let mut site_index = vec![None; program.blocks.len()];
    let mut is_branch_edge = vec![false; edges.len()];
    for b in &program.blocks {
        if let Terminator::CondBranch { .. } = b.term {
            let [t, f] = out_edges[b.id];
            site_index[b.id] = Some(sites.len());
            sites.push(BranchSite { block: b.id, true_edge: t, false_edge: f });
            is_branch_edge[t] = true;
            is_branch_edge[f] = true;
        }
    }
    InstrumentedProgram { program, edges, out_edges, sites, site_index, is_branch_edge }
}

/// Branch sites in ascending block order.
pub fn branch_sites(ip: &InstrumentedProgram) -> &[BranchSite] {
    &ip.sites
}

impl InstrumentedProgram {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn sites(&self) -> &[BranchSite] {
        &self.sites
    }

    pub fn site_at(&self, block: BlockId) -> Option<&BranchSite> {
        self.site_index.get(block).copied().flatten().map(|i| &self.sites[i])
    }

    pub fn branch_edge_count(&self) -> usize {
        self.sites.len() * 2
    }

    pub fn is_branch_edge(&self, e: EdgeId) -> bool {
        self.is_branch_edge[e]
    }

    pub fn branch_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.sites.iter().flat_map(|s| [s.true_edge, s.false_edge])
    }

    pub(crate) fn out_edge(&self, block: BlockId, slot: usize) -> EdgeId {
        self.out_edges[block][slot]
    }

    pub fn name(&self) -> &str {
        &self.program.name
    }
}
