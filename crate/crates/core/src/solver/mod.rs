//! Bounded native solver for conjunctions of MiniDUT predicates.
//!
//! The search splits variable domains at their midpoints, prunes boxes whose
//! interval evaluation rules out a conjunct, and enumerates boxes of at most
//! [`ENUMERATE_BELOW`] points. Every enumerated point and every box visited
//! counts against the node budget.

mod interval;
mod search;
mod simplify;

pub use interval::Iv;
pub use simplify::simplify;

use crate::dut::{BinOp, CmpOp, IntTy, LogicOp, UnOp};
use crate::sym::{SymExpr, SymRef};
use search::{Arena, Dom, Node, NodeId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};

pub const DEFAULT_NODE_BUDGET: u64 = 200_000;
pub const ENUMERATE_BELOW: u128 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Sat,
    Unsat,
    Timeout,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverStats {
    pub nodes_explored: u64,
    pub simplifications: u64,
}

/// Raw bits per variable name.
pub type Model = BTreeMap<String, u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverResult {
    pub status: SolveStatus,
    /// Present iff `status` is sat; assigns every variable of the predicate.
    pub model: Option<Model>,
    pub stats: SolverStats,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error("unsupported expression: {0}")]
    UnsupportedExpr(String),
}

/// Checks every conjunct under `model` with trap-free semantics.
pub fn verify(conjuncts: &[SymRef], model: &Model) -> bool {
    conjuncts.iter().all(|c| c.eval_in(model) == Some(1))
}

pub fn solve(conjuncts: &[SymRef], budget: u64) -> Result<SolverResult, SolverError> {
    let mut all_vars = BTreeMap::new();
    for c in conjuncts {
        c.collect_vars(&mut all_vars);
    }
    let mut simp = simplify::Simplifier::default();
    let mut flat = Vec::new();
    for c in conjuncts {
        if c.check().map_err(SolverError::UnsupportedExpr)? != crate::dut::Ty::Bool {
            return Err(SolverError::UnsupportedExpr(format!("non-boolean conjunct {c}")));
        }
        flatten(&simp.run(c), &mut flat);
    }
    let simplified = flat.iter().map(|c| simp.run(c)).collect::<Vec<_>>();
    let mut stats = SolverStats { nodes_explored: 0, simplifications: simp.rewrites };
    let finish = |status, model: Option<Model>, stats| {
        let model = model.map(|mut m: Model| {
            for name in all_vars.keys() {
                m.entry(name.clone()).or_insert(0);
            }
            m
        });
        Ok(SolverResult { status, model, stats })
    };

    let mut arena = Arena::default();
    let mut roots = Vec::new();
    for c in &simplified {
        match **c {
            SymExpr::Bool(true) => continue,
            SymExpr::Bool(false) => return finish(SolveStatus::Unsat, None, stats),
            _ => roots.push(arena.compile(&canonical(c))?),
        }
    }
    let roots: Vec<NodeId> = {
        let mut seen = HashSet::new();
        roots.into_iter().filter(|r| seen.insert(*r)).collect()
    };
    if has_complementary_pair(&mut arena, &roots)? {
        stats.nodes_explored = 1;
        return finish(SolveStatus::Unsat, None, stats);
    }

    let mut doms: Vec<Dom> = arena.vars.iter().map(|(_, ty)| Dom::full(*ty)).collect();
    if !tighten_at_root(&arena, &roots, &mut doms) {
        stats.nodes_explored = 1;
        return finish(SolveStatus::Unsat, None, stats);
    }
    let (status, model) = search(&arena, &roots, doms, budget, &mut stats.nodes_explored);
    finish(status, model, stats)
}

/// Splits top-level conjunctions, including negated disjunctions.
fn flatten(e: &SymRef, out: &mut Vec<SymRef>) {
    match &**e {
        SymExpr::BoolOp { op: LogicOp::And, lhs, rhs } => {
            flatten(lhs, out);
            flatten(rhs, out);
        }
        SymExpr::Unary { op: UnOp::Not, arg } => match &**arg {
            SymExpr::BoolOp { op: LogicOp::Or, lhs, rhs } => {
                flatten(&SymExpr::not(lhs.clone()), out);
                flatten(&SymExpr::not(rhs.clone()), out);
            }
            _ => out.push(e.clone()),
        },
        _ => out.push(e.clone()),
    }
}

/// Rewrites `>` and `>=` as swapped `<` and `<=` so complements are syntactic.
fn canonical(e: &SymRef) -> SymRef {
    match &**e {
        SymExpr::Compare { op: op @ (CmpOp::Gt | CmpOp::Ge), lhs, rhs } => SymExpr::compare(op.swap(), rhs.clone(), lhs.clone()),
        _ => e.clone(),
    }
}

fn has_complementary_pair(arena: &mut Arena, roots: &[NodeId]) -> Result<bool, SolverError> {
    let set: HashSet<NodeId> = roots.iter().copied().collect();
    for &r in roots {
        let complement = match arena.nodes[r] {
            Node::Cmp(op, ty, a, b) => {
                let (op, a, b) = match op.negate() {
                    o @ (CmpOp::Gt | CmpOp::Ge) => (o.swap(), b, a),
                    o => (o, a, b),
                };
                arena.nodes.iter().position(|n| *n == Node::Cmp(op, ty, a, b))
            }
            Node::Not(a) => Some(a),
            _ => None,
        };
        if complement.is_some_and(|c| set.contains(&c)) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Applies `var op const` bounds and `var % k == c` residues found among the roots.
fn tighten_at_root(arena: &Arena, roots: &[NodeId], doms: &mut [Dom]) -> bool {
    let konst = |id: NodeId| match arena.nodes[id] {
        Node::Const(ty, bits) => Some(ty.to_i64(bits) as i128),
        _ => None,
    };
    for &r in roots {
        let Node::Cmp(op, _, a, b) = arena.nodes[r] else { continue };
        let (op, x, c) = match (konst(a), konst(b)) {
            (None, Some(c)) => (op, a, c),
            (Some(c), None) => (op.swap(), b, c),
            _ => continue,
        };
        let ok = match arena.nodes[x] {
            Node::Var(v, _) => search::tighten(&mut doms[v], op, c),
            Node::Bin(BinOp::Rem, _, y, k) if op == CmpOp::Eq => match (arena.nodes[y], konst(k)) {
                (Node::Var(v, _), Some(k)) if k != 0 => search::tighten_residue(&mut doms[v], k, c),
                _ => true,
            },
            _ => true,
        };
        if !ok {
            return false;
        }
    }
    doms.iter_mut().all(|d| d.align())
}

fn search(arena: &Arena, roots: &[NodeId], root: Vec<Dom>, budget: u64, nodes: &mut u64) -> (SolveStatus, Option<Model>) {
    let mut order: Vec<usize> = (0..root.len()).collect();
    order.sort_by_key(|&v| (root[v].count(), arena.vars[v].0.clone()));
    let model_of = |point: &[u32]| -> Model {
        arena.vars.iter().zip(point).map(|((name, _), &bits)| (name.clone(), bits)).collect()
    };
    let to_bits = |doms: &[Dom], pick: &dyn Fn(&Dom) -> i128| -> Vec<u32> {
        doms.iter().zip(&arena.vars).map(|(d, (_, ty))| ty.from_i64(pick(d) as i64)).collect()
    };

    let mut ivs = Vec::with_capacity(arena.nodes.len());
    let mut vals = Vec::with_capacity(arena.nodes.len());
    let mut satisfied = |point: &[u32]| {
        arena.eval_point(point, &mut vals);
        roots.iter().all(|&r| vals[r] == 1)
    };
    let mut stack = vec![root];
    while let Some(doms) = stack.pop() {
        *nodes += 1;
        if *nodes > budget {
            return (SolveStatus::Timeout, None);
        }
        arena.eval_box(&doms, &mut ivs);
        if roots.iter().any(|&r| ivs[r] == interval::FALSE) {
            continue;
        }
        if roots.iter().all(|&r| ivs[r] == interval::TRUE) {
            let point = to_bits(&doms, &|d| d.lo);
            if satisfied(&point) {
                return (SolveStatus::Sat, Some(model_of(&point)));
            }
        }
        let total = doms.iter().try_fold(1u128, |acc, d| acc.checked_mul(d.count())).unwrap_or(u128::MAX);
        if total <= ENUMERATE_BELOW {
            let mut idx = vec![0u128; doms.len()];
            for _ in 0..total {
                *nodes += 1;
                if *nodes > budget {
                    return (SolveStatus::Timeout, None);
                }
                let point: Vec<u32> = doms
                    .iter()
                    .zip(&idx)
                    .zip(&arena.vars)
                    .map(|((d, &i), (_, ty))| ty.from_i64((d.lo + i as i128 * d.m) as i64))
                    .collect();
                if satisfied(&point) {
                    return (SolveStatus::Sat, Some(model_of(&point)));
                }
                for &v in order.iter().rev() {
                    idx[v] += 1;
                    if idx[v] < doms[v].count() {
                        break;
                    }
                    idx[v] = 0;
                }
            }
            continue;
        }
        let v = *order.iter().find(|&&v| doms[v].count() > 1).expect("a box above the threshold has a splittable variable");
        let d = doms[v];
        let split = d.lo + (d.count() as i128 - 1) / 2 * d.m;
        let (mut low, mut high) = (doms.clone(), doms);
        low[v].hi = split;
        high[v].lo = split + d.m;
        stack.push(high);
        stack.push(low);
    }
    (SolveStatus::Unsat, None)
}

/// Exhaustive reference: enumerates every valuation of the predicate's
/// variables, which must total at most `limit` points.
pub fn brute_force(conjuncts: &[SymRef], limit: u64) -> Option<Option<Model>> {
    let mut vars: BTreeMap<String, IntTy> = BTreeMap::new();
    for c in conjuncts {
        c.collect_vars(&mut vars);
    }
    let total = vars.values().try_fold(1u64, |acc, ty| acc.checked_mul(ty.cardinality()))?;
    if total > limit {
        return None;
    }
    let vars: Vec<(String, IntTy)> = vars.into_iter().collect();
    let mut model: Model = vars.iter().map(|(n, _)| (n.clone(), 0)).collect();
    for mut i in 0..total {
        for (name, ty) in &vars {
            let card = ty.cardinality();
            model.insert(name.clone(), (i % card) as u32);
            i /= card;
        }
        if verify(conjuncts, &model) {
            return Some(Some(model));
        }
    }
    Some(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sym::parse_sexpr;

    fn preds(lines: &[&str]) -> Vec<SymRef> {
        lines.iter().map(|l| parse_sexpr(l).unwrap()).collect()
    }

    #[test]
    fn divisible_by_two_and_three() {
        let p = preds(&["(== (% (var n u8) (const u8 2)) (const u8 0))", "(== (% (var n u8) (const u8 3)) (const u8 0))"]);
        let r = solve(&p, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(r.status, SolveStatus::Sat);
        let n = r.model.as_ref().unwrap()["n"];
        assert_eq!(n % 6, 0);
        assert!(verify(&p, r.model.as_ref().unwrap()));
    }

    #[test]
    fn empty_interval_is_unsat() {
        let p = preds(&["(< (var n u8) (const u8 5))", "(> (var n u8) (const u8 10))"]);
        assert_eq!(solve(&p, DEFAULT_NODE_BUDGET).unwrap().status, SolveStatus::Unsat);
    }

    #[test]
    fn contradiction_over_two_variables_is_unsat() {
        let p = preds(&["(< (var a i16) (var b i16))", "(>= (var a i16) (var b i16))"]);
        let r = solve(&p, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(r.status, SolveStatus::Unsat);
        assert!(r.stats.nodes_explored <= 1);
    }

    #[test]
    fn wide_equality_is_found_by_bisection() {
        let p = preds(&["(== (+ (var x u32) (const u32 5)) (const u32 12345678))"]);
        let r = solve(&p, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(r.model.unwrap()["x"], 12345673);
        let p = preds(&["(== (* (var x u32) (const u32 3)) (const u32 7))", "(< (var x u32) (const u32 1000000))"]);
        assert_eq!(solve(&p, DEFAULT_NODE_BUDGET).unwrap().status, SolveStatus::Unsat);
    }

    #[test]
    fn budget_exhaustion_is_a_timeout() {
        // No square is 2 modulo 2^32, but intervals cannot see that.
        let p = preds(&["(== (* (var x u32) (var x u32)) (const u32 2))"]);
        assert_eq!(solve(&p, 1000).unwrap().status, SolveStatus::Timeout);
    }

    #[test]
    fn ill_typed_predicates_are_unsupported() {
        let bad = SymExpr::compare(CmpOp::Eq, SymExpr::var("a", IntTy::U8), SymExpr::konst(IntTy::U16, 1));
        assert!(matches!(solve(&[bad], 10), Err(SolverError::UnsupportedExpr(_))));
        let int = SymExpr::var("a", IntTy::U8);
        assert!(matches!(solve(&[int], 10), Err(SolverError::UnsupportedExpr(_))));
        let clash = preds(&["(== (var a u8) (const u8 1))", "(== (var a u16) (const u16 1))"]);
        assert!(matches!(solve(&clash, 10), Err(SolverError::UnsupportedExpr(_))));
    }

    #[test]
    fn models_cover_variables_that_simplify_away() {
        let p = preds(&["(== (- (var a u8) (var a u8)) (const u8 0))", "(== (var b u8) (const u8 9))"]);
        let m = solve(&p, DEFAULT_NODE_BUDGET).unwrap().model.unwrap();
        assert_eq!(m.keys().collect::<Vec<_>>(), vec!["a", "b"]);
        assert_eq!(m["b"], 9);
    }

    #[test]
    fn brute_force_agrees_on_examples() {
        let p = preds(&["(== (% (var n u8) (const u8 2)) (const u8 0))", "(== (% (var n u8) (const u8 3)) (const u8 0))"]);
        assert_eq!(brute_force(&p, 1 << 16).unwrap().unwrap()["n"], 0);
        let q = preds(&["(< (var n u8) (const u8 5))", "(> (var n u8) (const u8 10))"]);
        assert_eq!(brute_force(&q, 1 << 16), Some(None));
    }
}
