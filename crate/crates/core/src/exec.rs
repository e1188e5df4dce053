//! Concrete interpreter for instrumented programs.
//!
//! The interpreter is generic over a [`Shadow`] that rides along with every
//! value. Concrete runs use a zero-sized shadow; the concolic engine plugs in
//! symbolic expressions, so both share one implementation of the semantics.

use crate::dut::{
    types, BinOp, BlockId, CmpOp, EdgeId, Expr, InputDecl, InstrumentedProgram, IntTy, LogicOp, Program,
    Terminator, UnOp,
};
use serde::{Deserialize, Serialize};

pub const DEFAULT_STEP_LIMIT: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Initial,
    Fuzz,
    Concolic,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Initial => "initial",
            Origin::Fuzz => "fuzz",
            Origin::Concolic => "concolic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestCase {
    pub bytes: Vec<u8>,
    /// Mutation energy last assigned to this test.
    pub energy: u32,
    pub origin: Origin,
    /// Campaign execution counter when the test was produced.
    pub discovered_at: u64,
}

impl TestCase {
    pub fn new(bytes: Vec<u8>, origin: Origin, discovered_at: u64) -> TestCase {
        TestCase { bytes, energy: 0, origin, discovered_at }
    }

    /// Pads with zeros or truncates to `len` bytes.
    pub fn normalized(mut bytes: Vec<u8>, len: usize) -> Vec<u8> {
        bytes.resize(len, 0);
        bytes
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Returned,
    Failed,
    StepLimit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecResult {
    /// Raw hit count per edge id; zero for edges not traversed.
    pub hits: Vec<u32>,
    pub outcome: Outcome,
    /// Statements plus terminators executed.
    pub steps: u64,
    /// Number of distinct blocks entered.
    pub depth: u32,
}

impl ExecResult {
    /// Traversed edges with their hit counts (all ≥ 1).
    pub fn edge_hits(&self) -> impl Iterator<Item = (EdgeId, u32)> + '_ {
        self.hits.iter().enumerate().filter(|(_, &h)| h > 0).map(|(e, &h)| (e, h))
    }

    pub fn covered_branch_edges(&self, ip: &InstrumentedProgram) -> usize {
        ip.branch_edges().filter(|&e| self.hits[e] > 0).count()
    }
}

/// Reads the value of one input from a test case: little-endian, zero-padded.
pub fn read_input(decl: &InputDecl, bytes: &[u8]) -> u32 {
    let mut v = 0u32;
    for i in 0..decl.ty.bytes() {
        let b = bytes.get(decl.offset + i).copied().unwrap_or(0);
        v |= (b as u32) << (8 * i);
    }
    v
}

/// Writes an input value into a test case buffer.
pub fn write_input(decl: &InputDecl, bytes: &mut [u8], bits: u32) {
    for i in 0..decl.ty.bytes() {
        if let Some(slot) = bytes.get_mut(decl.offset + i) {
            *slot = (bits >> (8 * i)) as u8;
        }
    }
}

pub fn run_concrete(ip: &InstrumentedProgram, bytes: &[u8], step_limit: u64) -> ExecResult {
    execute(ip, bytes, step_limit, &mut NoShadow)
}

/// Concrete run that also reports the `(site, taken)` decision sequence.
pub fn run_concrete_traced(ip: &InstrumentedProgram, bytes: &[u8], step_limit: u64) -> (ExecResult, Vec<(BlockId, bool)>) {
    let mut log = DecisionLog(Vec::new());
    let r = execute(ip, bytes, step_limit, &mut log);
    (r, log.0)
}

/// Division by zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Trap;

#[derive(Clone, Debug)]
pub struct Val<V> {
    pub bits: u32,
    pub shadow: V,
}

/// Companion computation carried alongside concrete values.
pub trait Shadow {
    type V: Clone;
    fn constant(&mut self) -> Self::V;
    fn input(&mut self, decl: &InputDecl) -> Self::V;
    fn unary(&mut self, op: UnOp, ty: IntTy, a: &Val<Self::V>) -> Self::V;
    fn not(&mut self, a: &Val<Self::V>) -> Self::V;
    fn binary(&mut self, op: BinOp, ty: IntTy, a: &Val<Self::V>, b: &Val<Self::V>) -> Self::V;
    fn compare(&mut self, op: CmpOp, ty: IntTy, a: &Val<Self::V>, b: &Val<Self::V>) -> Self::V;
    fn logic(&mut self, op: LogicOp, a: &Val<Self::V>, b: &Val<Self::V>) -> Self::V;
    fn cast(&mut self, from: IntTy, to: IntTy, a: &Val<Self::V>) -> Self::V;
    fn branch(&mut self, site: BlockId, cond: &Val<Self::V>, taken: bool);
}

pub struct NoShadow;

impl Shadow for NoShadow {
    type V = ();
    fn constant(&mut self) {}
    fn input(&mut self, _: &InputDecl) {}
    fn unary(&mut self, _: UnOp, _: IntTy, _: &Val<()>) {}
    fn not(&mut self, _: &Val<()>) {}
    fn binary(&mut self, _: BinOp, _: IntTy, _: &Val<()>, _: &Val<()>) {}
    fn compare(&mut self, _: CmpOp, _: IntTy, _: &Val<()>, _: &Val<()>) {}
    fn logic(&mut self, _: LogicOp, _: &Val<()>, _: &Val<()>) {}
    fn cast(&mut self, _: IntTy, _: IntTy, _: &Val<()>) {}
    fn branch(&mut self, _: BlockId, _: &Val<()>, _: bool) {}
}

struct DecisionLog(Vec<(BlockId, bool)>);

impl Shadow for DecisionLog {
    type V = ();
    fn constant(&mut self) {}
    fn input(&mut self, _: &InputDecl) {}
    fn unary(&mut self, _: UnOp, _: IntTy, _: &Val<()>) {}
    fn not(&mut self, _: &Val<()>) {}
    fn binary(&mut self, _: BinOp, _: IntTy, _: &Val<()>, _: &Val<()>) {}
    fn compare(&mut self, _: CmpOp, _: IntTy, _: &Val<()>, _: &Val<()>) {}
    fn logic(&mut self, _: LogicOp, _: &Val<()>, _: &Val<()>) {}
    fn cast(&mut self, _: IntTy, _: IntTy, _: &Val<()>) {}
    fn branch(&mut self, site: BlockId, _: &Val<()>, taken: bool) {
        self.0.push((site, taken));
    }
}

pub fn execute<S: Shadow>(ip: &InstrumentedProgram, bytes: &[u8], step_limit: u64, shadow: &mut S) -> ExecResult {
    let p: &Program = &ip.program;
    let mut env: Vec<Val<S::V>> = (0..p.vars.len()).map(|_| Val { bits: 0, shadow: shadow.constant() }).collect();
    for decl in &p.inputs {
        env[decl.var] = Val { bits: read_input(decl, bytes), shadow: shadow.input(decl) };
    }

    let mut hits = vec![0u32; ip.edge_count()];
    let mut visited = vec![false; p.blocks.len()];
    let (mut depth, mut steps) = (0u32, 0u64);
    let mut block = p.entry;

    let outcome = 'run: loop {
        if !visited[block] {
            visited[block] = true;
            depth += 1;
        }
        let bb = &p.blocks[block];
        for stmt in &bb.stmts {
            if steps >= step_limit {
                break 'run Outcome::StepLimit;
            }
            steps += 1;
            match eval(&stmt.value, &env, shadow) {
                Ok(v) => env[stmt.var] = v,
                Err(Trap) => break 'run Outcome::Failed,
            }
        }
        if steps >= step_limit {
            break Outcome::StepLimit;
        }
        steps += 1;
        match &bb.term {
            Terminator::Goto(next) => {
                let e = ip.out_edge(block, 0);
                hits[e] = hits[e].saturating_add(1);
                block = *next;
            }
            Terminator::CondBranch { cond, then_block, else_block } => {
                let c = match eval(cond, &env, shadow) {
                    Ok(c) => c,
                    Err(Trap) => break Outcome::Failed,
                };
                let taken = c.bits != 0;
                shadow.branch(block, &c, taken);
                let e = ip.out_edge(block, if taken { 0 } else { 1 });
                hits[e] = hits[e].saturating_add(1);
                block = if taken { *then_block } else { *else_block };
            }
            Terminator::Return => break Outcome::Returned,
            Terminator::Fail => break Outcome::Failed,
        }
    };
    ExecResult { hits, outcome, steps, depth }
}

fn eval<S: Shadow>(e: &Expr, env: &[Val<S::V>], sh: &mut S) -> Result<Val<S::V>, Trap> {
    Ok(match e {
        Expr::Int { bits, .. } => Val { bits: *bits, shadow: sh.constant() },
        Expr::Bool(b) => Val { bits: *b as u32, shadow: sh.constant() },
        Expr::Var { id, .. } => env[*id].clone(),
        Expr::Unary { op, ty, arg } => {
            let a = eval(arg, env, sh)?;
            let shadow = sh.unary(*op, *ty, &a);
            Val { bits: types::eval_un(*op, *ty, a.bits), shadow }
        }
        Expr::Not(arg) => {
            let a = eval(arg, env, sh)?;
            let shadow = sh.not(&a);
            Val { bits: (a.bits == 0) as u32, shadow }
        }
        Expr::Binary { op, ty, lhs, rhs } => {
            let a = eval(lhs, env, sh)?;
            let b = eval(rhs, env, sh)?;
            let bits = types::eval_bin(*op, *ty, a.bits, b.bits).ok_or(Trap)?;
            let shadow = sh.binary(*op, *ty, &a, &b);
            Val { bits, shadow }
        }
        Expr::Compare { op, ty, lhs, rhs } => {
            let a = eval(lhs, env, sh)?;
            let b = eval(rhs, env, sh)?;
            let shadow = sh.compare(*op, *ty, &a, &b);
            Val { bits: types::eval_cmp(*op, *ty, a.bits, b.bits) as u32, shadow }
        }
        Expr::Logic { op, lhs, rhs } => {
            // Both operands are always evaluated; MiniDUT has no short circuit.
            let a = eval(lhs, env, sh)?;
            let b = eval(rhs, env, sh)?;
            let shadow = sh.logic(*op, &a, &b);
            let bits = match op {
                LogicOp::And => a.bits & b.bits,
                LogicOp::Or => a.bits | b.bits,
            };
            Val { bits, shadow }
        }
        Expr::Cast { from, to, arg } => {
            let a = eval(arg, env, sh)?;
            let shadow = sh.cast(*from, *to, &a);
            Val { bits: types::cast(*from, *to, a.bits), shadow }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dut::load;

    #[test]
    fn countdown_loop_hit_counts() {
        let ip = load("loop", "input u8 n; while (n > 0) n = n - 1;").unwrap();
        let r = run_concrete(&ip, &[5], DEFAULT_STEP_LIMIT);
        // Edges: entry->header, header->body, header->exit, body->header.
        assert_eq!(r.hits, vec![1, 5, 1, 5]);
        assert_eq!(r.outcome, Outcome::Returned);
    }

    #[test]
    fn division_by_zero_fails() {
        let ip = load("div", "input u8 a; input u8 b; u8 c = a / b;").unwrap();
        assert_eq!(run_concrete(&ip, &[4, 0], 100).outcome, Outcome::Failed);
        assert_eq!(run_concrete(&ip, &[4, 2], 100).outcome, Outcome::Returned);
    }

    #[test]
    fn step_limit_is_an_outcome() {
        let ip = load("spin", "input u8 n; while (n == n) { n = n + 1; }").unwrap();
        let r = run_concrete(&ip, &[0], 1000);
        assert_eq!(r.outcome, Outcome::StepLimit);
        assert_eq!(r.steps, 1000);
    }

    #[test]
    fn inputs_are_little_endian_and_zero_padded() {
        let ip = load("le", "input u16 w; input u8 b; if (w == 0x1234) { if (b == 0) { fail; } }").unwrap();
        assert_eq!(run_concrete(&ip, &[0x34, 0x12], 100).outcome, Outcome::Failed);
        assert_eq!(run_concrete(&ip, &[0x34, 0x12, 0, 9, 9], 100).outcome, Outcome::Failed);
        assert_eq!(run_concrete(&ip, &[0x12, 0x34], 100).outcome, Outcome::Returned);
    }

    #[test]
    fn decision_log_matches_branches() {
        let ip = load("d", "input u8 n; if (n > 3) { n = 1; } if (n == 1) { n = 2; }").unwrap();
        let (_, log) = run_concrete_traced(&ip, &[9], 100);
        assert_eq!(log.iter().map(|d| d.1).collect::<Vec<_>>(), vec![true, true]);
        let (_, log) = run_concrete_traced(&ip, &[0], 100);
        assert_eq!(log.iter().map(|d| d.1).collect::<Vec<_>>(), vec![false, false]);
    }

    #[test]
    fn write_then_read_input() {
        let ip = load("w", "input u8 a; input i16 b; input u32 c;").unwrap();
        let mut bytes = vec![0u8; ip.program.input_len()];
        for (decl, v) in ip.program.inputs.iter().zip([0xAB, 0xFFFE, 0xDEADBEEF]) {
            write_input(decl, &mut bytes, v);
        }
        assert_eq!(bytes, vec![0xAB, 0xFE, 0xFF, 0xEF, 0xBE, 0xAD, 0xDE]);
        let read: Vec<u32> = ip.program.inputs.iter().map(|d| read_input(d, &bytes)).collect();
        assert_eq!(read, vec![0xAB, 0xFFFE, 0xDEADBEEF]);
    }
}
