//! Concrete execution with a symbolic shadow over the `symbolic` inputs.

use crate::dut::{BinOp, BlockId, CmpOp, InputDecl, InstrumentedProgram, IntTy, LogicOp, UnOp};
use crate::exec::{execute, ExecResult, Shadow, Val};
use crate::sym::{SymExpr, SymRef};
use std::collections::HashMap;

pub const DEFAULT_FORK_LIMIT: u32 = 4;

/// Symbolic terms larger than this are concretized to keep evaluation bounded.
pub const MAX_TERM_SIZE: u32 = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub site: BlockId,
    pub taken: bool,
    /// The branch condition over symbolic inputs, if it depends on any.
    pub predicate: Option<SymRef>,
    /// Forkable. False for concrete conditions and for conditions past the
    /// site's fork limit; the latter keep their predicate as a fixed constraint.
    pub is_symbolic: bool,
    /// Non-zero divisor facts established since the previous branch.
    pub guards: Vec<SymRef>,
}

impl Step {
    /// The condition as it was decided on this path.
    pub fn directed(&self) -> Option<SymRef> {
        self.predicate.as_ref().map(|p| SymExpr::directed(p, self.taken))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathTrace {
    pub steps: Vec<Step>,
    /// Input bytes of the traced test.
    pub bytes: Vec<u8>,
}

impl PathTrace {
    pub fn symbolic_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.is_symbolic).count()
    }

    pub fn decisions(&self) -> Vec<(BlockId, bool)> {
        self.steps.iter().map(|s| (s.site, s.taken)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Sym {
    pub expr: SymRef,
    pub size: u32,
}

struct Recorder {
    fork_limit: u32,
    forks: HashMap<BlockId, u32>,
    guards: Vec<SymRef>,
    steps: Vec<Step>,
}

type V = Option<Sym>;

fn node(expr: SymRef, size: u32) -> V {
    (size <= MAX_TERM_SIZE).then_some(Sym { expr, size })
}

/// The operand's term, or its concrete value as a constant.
fn lift(v: &Val<V>, ty: IntTy) -> (SymRef, u32) {
    match &v.shadow {
        Some(s) => (s.expr.clone(), s.size),
        None => (SymExpr::konst(ty, v.bits), 1),
    }
}

fn lift_bool(v: &Val<V>) -> (SymRef, u32) {
    match &v.shadow {
        Some(s) => (s.expr.clone(), s.size),
        None => (SymExpr::boolean(v.bits != 0), 1),
    }
}

impl Shadow for Recorder {
    type V = V;

    fn constant(&mut self) -> V {
        None
    }

    fn input(&mut self, decl: &InputDecl) -> V {
        decl.symbolic.then(|| Sym { expr: SymExpr::var(&decl.name, decl.ty), size: 1 })
    }

    fn unary(&mut self, op: UnOp, _ty: IntTy, a: &Val<V>) -> V {
        let s = a.shadow.as_ref()?;
        node(SymExpr::unary(op, s.expr.clone()), s.size + 1)
    }

    fn not(&mut self, a: &Val<V>) -> V {
        let s = a.shadow.as_ref()?;
        node(SymExpr::not(s.expr.clone()), s.size + 1)
    }

    fn binary(&mut self, op: BinOp, ty: IntTy, a: &Val<V>, b: &Val<V>) -> V {
        if op.is_division() {
            if let Some(d) = &b.shadow {
                self.guards.push(SymExpr::compare(CmpOp::Ne, d.expr.clone(), SymExpr::konst(ty, 0)));
            }
        }
        if a.shadow.is_none() && b.shadow.is_none() {
            return None;
        }
        let ((x, sx), (y, sy)) = (lift(a, ty), lift(b, ty));
        node(SymExpr::binary(op, x, y), sx.saturating_add(sy).saturating_add(1))
    }

    fn compare(&mut self, op: CmpOp, ty: IntTy, a: &Val<V>, b: &Val<V>) -> V {
        if a.shadow.is_none() && b.shadow.is_none() {
            return None;
        }
        let ((x, sx), (y, sy)) = (lift(a, ty), lift(b, ty));
        node(SymExpr::compare(op, x, y), sx.saturating_add(sy).saturating_add(1))
    }

    fn logic(&mut self, op: LogicOp, a: &Val<V>, b: &Val<V>) -> V {
        if a.shadow.is_none() && b.shadow.is_none() {
            return None;
        }
        let ((x, sx), (y, sy)) = (lift_bool(a), lift_bool(b));
        node(SymExpr::logic(op, x, y), sx.saturating_add(sy).saturating_add(1))
    }

    fn cast(&mut self, _from: IntTy, to: IntTy, a: &Val<V>) -> V {
        let s = a.shadow.as_ref()?;
        node(SymExpr::cast(to, s.expr.clone()), s.size + 1)
    }

    fn branch(&mut self, site: BlockId, cond: &Val<V>, taken: bool) {
        let guards = std::mem::take(&mut self.guards);
        let (predicate, is_symbolic) = match &cond.shadow {
            Some(s) => {
                let n = self.forks.entry(site).or_insert(0);
                *n += 1;
                (Some(s.expr.clone()), *n <= self.fork_limit)
            }
            None => (None, false),
        };
        self.steps.push(Step { site, taken, predicate, is_symbolic, guards });
    }
}

/// Runs `bytes` concretely while recording the symbolic branch conditions.
pub fn run_symbolic(ip: &InstrumentedProgram, bytes: &[u8], step_limit: u64, fork_limit: u32) -> (ExecResult, PathTrace) {
    let mut rec = Recorder { fork_limit, forks: HashMap::new(), guards: Vec::new(), steps: Vec::new() };
    let r = execute(ip, bytes, step_limit, &mut rec);
    let mut padded = bytes.to_vec();
    padded.resize(ip.program.input_len(), 0);
    (r, PathTrace { steps: rec.steps, bytes: padded })
}

/// Concrete valuation of the symbolic inputs of a test, by input name.
pub fn symbolic_values(ip: &InstrumentedProgram, bytes: &[u8]) -> crate::solver::Model {
    ip.program
        .inputs
        .iter()
        .filter(|d| d.symbolic)
        .map(|d| (d.name.clone(), crate::exec::read_input(d, bytes)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dut::load;
    use crate::exec::run_concrete;

    #[test]
    fn fork_limit_concretizes_later_iterations() {
        let ip = load("l", "input u8 n symbolic; while (n != 0) { n = n - 1; }").unwrap();
        let (r, tr) = run_symbolic(&ip, &[10], 10_000, 4);
        assert_eq!(r, run_concrete(&ip, &[10], 10_000));
        assert_eq!(tr.steps.len(), 11);
        assert_eq!(tr.symbolic_steps(), 4);
        assert!(tr.steps.iter().all(|s| s.predicate.is_some()));
        assert!(tr.steps[..4].iter().all(|s| s.is_symbolic));
    }

    #[test]
    fn concrete_inputs_give_concrete_steps() {
        let ip = load("c", "input u8 n; if (n > 3) { n = 0; }").unwrap();
        let (_, tr) = run_symbolic(&ip, &[5], 100, 4);
        assert_eq!(tr.steps.len(), 1);
        assert!(!tr.steps[0].is_symbolic && tr.steps[0].predicate.is_none());
    }

    #[test]
    fn predicates_evaluate_to_the_taken_direction() {
        let ip = load("f", "input i8 i symbolic; input i8 j symbolic; if (i > j) { if (i == j * 2) { fail; } }").unwrap();
        let (_, tr) = run_symbolic(&ip, &[2, 1], 100, 4);
        let vals = symbolic_values(&ip, &tr.bytes);
        assert_eq!(tr.steps[0].predicate.as_ref().unwrap().to_string(), "(> (var i i8) (var j i8))");
        for s in &tr.steps {
            assert_eq!(s.predicate.as_ref().unwrap().eval_in(&vals), Some(s.taken as u32));
        }
        assert_eq!(tr.decisions(), vec![(0, true), (1, true)]);
    }

    #[test]
    fn symbolic_divisors_leave_guards() {
        let ip = load("d", "input u8 a symbolic; input u8 b symbolic; if (a / b == 3) { fail; }").unwrap();
        let (_, tr) = run_symbolic(&ip, &[9, 3], 100, 4);
        assert_eq!(tr.steps[0].guards.len(), 1);
        assert_eq!(tr.steps[0].guards[0].to_string(), "(!= (var b u8) (const u8 0))");
    }
}
