//! Interval-pruned backtracking over a hash-consed arena.

use super::interval::{self, Iv};
use super::SolverError;
use crate::dut::{types, BinOp, CmpOp, IntTy, LogicOp, Ty, UnOp};
use crate::sym::SymExpr;
use std::collections::HashMap;
use std::sync::Arc;

pub(crate) type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Node {
    Const(IntTy, u32),
    Bool(bool),
    Var(usize, IntTy),
    Neg(IntTy, NodeId),
    BitNot(IntTy, NodeId),
    Not(NodeId),
    Bin(BinOp, IntTy, NodeId, NodeId),
    Cmp(CmpOp, IntTy, NodeId, NodeId),
    Logic(LogicOp, NodeId, NodeId),
    Cast(IntTy, IntTy, NodeId),
}

/// Children always precede their parents, so evaluation is one forward pass.
#[derive(Default)]
pub(crate) struct Arena {
    pub nodes: Vec<Node>,
    types: Vec<Ty>,
    consed: HashMap<Node, NodeId>,
    /// Holds each compiled expression so its address cannot be reused.
    seen: HashMap<*const SymExpr, (Arc<SymExpr>, NodeId)>,
    pub vars: Vec<(String, IntTy)>,
    var_index: HashMap<String, usize>,
}

impl Arena {
    fn add(&mut self, n: Node, ty: Ty) -> NodeId {
        if let Some(&id) = self.consed.get(&n) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(n);
        self.types.push(ty);
        self.consed.insert(n, id);
        id
    }

    pub fn ty(&self, id: NodeId) -> Ty {
        self.types[id]
    }

    pub fn var_id(&mut self, name: &str, ty: IntTy) -> Result<usize, SolverError> {
        if let Some(&i) = self.var_index.get(name) {
            let declared = self.vars[i].1;
            return if declared == ty {
                Ok(i)
            } else {
                Err(SolverError::UnsupportedExpr(format!("variable `{name}` used as both {declared} and {ty}")))
            };
        }
        self.vars.push((name.to_string(), ty));
        self.var_index.insert(name.to_string(), self.vars.len() - 1);
        Ok(self.vars.len() - 1)
    }

    /// Lowers a type-checked expression; ill-formed terms are rejected.
    pub fn compile(&mut self, e: &Arc<SymExpr>) -> Result<NodeId, SolverError> {
        let key = Arc::as_ptr(e);
        if let Some((_, id)) = self.seen.get(&key) {
            return Ok(*id);
        }
        let bad = |what: &str| Err(SolverError::UnsupportedExpr(format!("{what} in {e}")));
        let id = match &**e {
            SymExpr::Const { ty, bits } => self.add(Node::Const(*ty, bits & ty.mask()), Ty::Int(*ty)),
            SymExpr::Bool(b) => self.add(Node::Bool(*b), Ty::Bool),
            SymExpr::Var { name, ty } => {
                let v = self.var_id(name, *ty)?;
                self.add(Node::Var(v, *ty), Ty::Int(*ty))
            }
            SymExpr::Unary { op, arg } => {
                let a = self.compile(arg)?;
                match (op, self.ty(a)) {
                    (UnOp::Not, Ty::Bool) => self.add(Node::Not(a), Ty::Bool),
                    (UnOp::Neg, Ty::Int(t)) => self.add(Node::Neg(t, a), Ty::Int(t)),
                    (UnOp::BitNot, Ty::Int(t)) => self.add(Node::BitNot(t, a), Ty::Int(t)),
                    _ => return bad("operand type mismatch"),
                }
            }
            SymExpr::Binary { op, lhs, rhs } => {
                let (a, b) = (self.compile(lhs)?, self.compile(rhs)?);
                match (self.ty(a), self.ty(b)) {
                    (Ty::Int(x), Ty::Int(y)) if x == y => self.add(Node::Bin(*op, x, a, b), Ty::Int(x)),
                    _ => return bad("operand width mismatch"),
                }
            }
            SymExpr::Compare { op, lhs, rhs } => {
                let (a, b) = (self.compile(lhs)?, self.compile(rhs)?);
                match (self.ty(a), self.ty(b)) {
                    (Ty::Int(x), Ty::Int(y)) if x == y => self.add(Node::Cmp(*op, x, a, b), Ty::Bool),
                    _ => return bad("operand width mismatch"),
                }
            }
            SymExpr::BoolOp { op, lhs, rhs } => {
                let (a, b) = (self.compile(lhs)?, self.compile(rhs)?);
                if self.ty(a) != Ty::Bool || self.ty(b) != Ty::Bool {
                    return bad("integer operand of a logical operator");
                }
                self.add(Node::Logic(*op, a, b), Ty::Bool)
            }
            SymExpr::Cast { ty, arg } => {
                let a = self.compile(arg)?;
                let Ty::Int(from) = self.ty(a) else { return bad("cast of a boolean") };
                self.add(Node::Cast(from, *ty, a), Ty::Int(*ty))
            }
        };
        self.seen.insert(key, (e.clone(), id));
        Ok(id)
    }

    pub fn eval_box(&self, doms: &[Dom], out: &mut Vec<Iv>) {
        out.clear();
        for n in &self.nodes {
            let v = match *n {
                Node::Const(ty, bits) => Iv::point(ty.to_i64(bits)),
                Node::Bool(b) => Iv::point(b as i64),
                Node::Var(i, _) => Iv { lo: doms[i].lo as i64, hi: doms[i].hi as i64 },
                Node::Neg(ty, a) => interval::neg(ty, out[a]),
                Node::BitNot(ty, a) => interval::bit_not(ty, out[a]),
                Node::Not(a) => interval::not(out[a]),
                Node::Bin(op, ty, a, b) => interval::binary(op, ty, out[a], out[b]),
                Node::Cmp(op, _, a, b) => interval::compare(op, out[a], out[b]),
                Node::Logic(LogicOp::And, a, b) => interval::and(out[a], out[b]),
                Node::Logic(LogicOp::Or, a, b) => interval::or(out[a], out[b]),
                Node::Cast(_, to, a) => interval::cast(to, out[a]),
            };
            out.push(v);
        }
    }

    /// Concrete, trap-free evaluation; `point` holds raw bits per variable.
    pub fn eval_point(&self, point: &[u32], out: &mut Vec<u32>) {
        out.clear();
        for n in &self.nodes {
            let v = match *n {
                Node::Const(_, bits) => bits,
                Node::Bool(b) => b as u32,
                Node::Var(i, _) => point[i],
                Node::Neg(ty, a) => types::eval_un(UnOp::Neg, ty, out[a]),
                Node::BitNot(ty, a) => types::eval_un(UnOp::BitNot, ty, out[a]),
                Node::Not(a) => (out[a] == 0) as u32,
                Node::Bin(op, ty, a, b) => types::eval_bin_total(op, ty, out[a], out[b]),
                Node::Cmp(op, ty, a, b) => types::eval_cmp(op, ty, out[a], out[b]) as u32,
                Node::Logic(LogicOp::And, a, b) => out[a] & out[b],
                Node::Logic(LogicOp::Or, a, b) => out[a] | out[b],
                Node::Cast(from, to, a) => types::cast(from, to, out[a]),
            };
            out.push(v);
        }
    }
}

/// A variable's remaining values: `lo..=hi` in numeric space, restricted to
/// `x ≡ r (mod m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Dom {
    pub lo: i128,
    pub hi: i128,
    pub m: i128,
    pub r: i128,
}

impl Dom {
    pub fn full(ty: IntTy) -> Dom {
        Dom { lo: ty.min() as i128, hi: ty.max() as i128, m: 1, r: 0 }
    }

    /// Moves both bounds onto the residue class; false if nothing is left.
    pub fn align(&mut self) -> bool {
        self.lo += (self.r - self.lo).rem_euclid(self.m);
        self.hi -= (self.hi - self.r).rem_euclid(self.m);
        self.lo <= self.hi
    }

    pub fn count(&self) -> u128 {
        if self.lo > self.hi {
            0
        } else {
            ((self.hi - self.lo) / self.m + 1) as u128
        }
    }

    /// Intersects with `x ≡ r (mod m)`; false when inconsistent.
    pub fn add_residue(&mut self, m: i128, r: i128) -> bool {
        let g = gcd(self.m, m);
        let (r1, r2) = (self.r, r.rem_euclid(m));
        if (r2 - r1).rem_euclid(g) != 0 {
            return false;
        }
        let (m1g, m2g) = (self.m / g, m / g);
        let t = ((r2 - r1) / g).rem_euclid(m2g) * inverse(m1g.rem_euclid(m2g), m2g) % m2g.max(1);
        let lcm = self.m * m2g;
        self.r = (r1 + self.m * t).rem_euclid(lcm);
        self.m = lcm;
        true
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Inverse of `a` modulo `m` (`a` and `m` coprime); 0 when `m == 1`.
fn inverse(a: i128, m: i128) -> i128 {
    if m == 1 {
        return 0;
    }
    let (mut old_r, mut r) = (a, m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(m)
}

/// Tightens `doms[v]` with `v op c` (numeric `c`); false when empty.
pub(crate) fn tighten(d: &mut Dom, op: CmpOp, c: i128) -> bool {
    match op {
        CmpOp::Eq => {
            d.lo = d.lo.max(c);
            d.hi = d.hi.min(c);
        }
        CmpOp::Ne => {
            if d.lo == c {
                d.lo += 1;
            }
            if d.hi == c {
                d.hi -= 1;
            }
        }
        CmpOp::Lt => d.hi = d.hi.min(c - 1),
        CmpOp::Le => d.hi = d.hi.min(c),
        CmpOp::Gt => d.lo = d.lo.max(c + 1),
        CmpOp::Ge => d.lo = d.lo.max(c),
    }
    d.align()
}

/// Intersects with the solutions of `v % k == c` under truncating remainder.
pub(crate) fn tighten_residue(d: &mut Dom, k: i128, c: i128) -> bool {
    let k = k.abs();
    if c.abs() >= k {
        return false;
    }
    if c > 0 {
        d.lo = d.lo.max(1);
    } else if c < 0 {
        d.hi = d.hi.min(-1);
    }
    d.add_residue(k, c) && d.align()
}
