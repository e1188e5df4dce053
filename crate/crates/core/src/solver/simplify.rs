use crate::dut::{types, BinOp, CmpOp, IntTy, LogicOp, Ty, UnOp};
use crate::sym::{SymExpr, SymRef};
use std::collections::HashMap;
use std::sync::Arc;

/// Semantics-preserving rewriting: constant folding, double negation,
/// identity laws and folding of `x op c1 op c2` chains.
pub fn simplify(e: &SymRef) -> SymRef {
    Simplifier::default().run(e)
}

#[derive(Default)]
pub(crate) struct Simplifier {
    pub rewrites: u64,
    /// Keyed by address; the key's owner is kept alive alongside the result.
    memo: HashMap<*const SymExpr, (SymRef, SymRef)>,
}

fn as_const(e: &SymExpr) -> Option<(IntTy, u32)> {
    match e {
        SymExpr::Const { ty, bits } => Some((*ty, *bits)),
        _ => None,
    }
}

fn as_bool(e: &SymExpr) -> Option<bool> {
    match e {
        SymExpr::Bool(b) => Some(*b),
        _ => None,
    }
}

fn commutative(op: BinOp) -> bool {
    matches!(op, BinOp::Add | BinOp::Mul | BinOp::And | BinOp::Or | BinOp::Xor)
}

impl Simplifier {
    pub fn run(&mut self, e: &SymRef) -> SymRef {
        let key = Arc::as_ptr(e);
        if let Some((_, done)) = self.memo.get(&key) {
            return done.clone();
        }
        let out = self.step(e);
        self.memo.insert(key, (e.clone(), out.clone()));
        out
    }

    fn hit(&mut self, e: SymRef) -> SymRef {
        self.rewrites += 1;
        e
    }

    fn step(&mut self, e: &SymRef) -> SymRef {
        match &**e {
            SymExpr::Const { .. } | SymExpr::Bool(_) | SymExpr::Var { .. } => e.clone(),
            SymExpr::Unary { op, arg } => {
                let a = self.run(arg);
                self.unary(*op, a)
            }
            SymExpr::Binary { op, lhs, rhs } => {
                let (a, b) = (self.run(lhs), self.run(rhs));
                self.binary(*op, a, b)
            }
            SymExpr::Compare { op, lhs, rhs } => {
                let (a, b) = (self.run(lhs), self.run(rhs));
                self.compare(*op, a, b)
            }
            SymExpr::BoolOp { op, lhs, rhs } => {
                let (a, b) = (self.run(lhs), self.run(rhs));
                self.logic(*op, a, b)
            }
            SymExpr::Cast { ty, arg } => {
                let a = self.run(arg);
                if let Some((from, bits)) = as_const(&a) {
                    return self.hit(SymExpr::konst(*ty, types::cast(from, *ty, bits)));
                }
                if a.ty() == Ty::Int(*ty) {
                    return self.hit(a);
                }
                SymExpr::cast(*ty, a)
            }
        }
    }

    fn unary(&mut self, op: UnOp, a: SymRef) -> SymRef {
        if op == UnOp::Not {
            if let Some(b) = as_bool(&a) {
                return self.hit(SymExpr::boolean(!b));
            }
            return match &*a {
                SymExpr::Unary { op: UnOp::Not, arg } => self.hit(arg.clone()),
                SymExpr::Compare { op, lhs, rhs } => self.hit(SymExpr::compare(op.negate(), lhs.clone(), rhs.clone())),
                _ => SymExpr::not(a),
            };
        }
        if let Some((ty, bits)) = as_const(&a) {
            return self.hit(SymExpr::konst(ty, types::eval_un(op, ty, bits)));
        }
        if let SymExpr::Unary { op: inner, arg } = &*a {
            if *inner == op {
                return self.hit(arg.clone());
            }
        }
        SymExpr::unary(op, a)
    }

    fn binary(&mut self, op: BinOp, a: SymRef, b: SymRef) -> SymRef {
        let Ty::Int(ty) = a.ty() else { return SymExpr::binary(op, a, b) };
        let konst = |bits: u32| SymExpr::konst(ty, bits);
        match (as_const(&a), as_const(&b)) {
            (Some((_, x)), Some((_, y))) => return self.hit(konst(types::eval_bin_total(op, ty, x, y))),
            (Some(_), None) if commutative(op) => return self.binary(op, b, a),
            _ => {}
        }
        if let Some((_, c)) = as_const(&b) {
            let mask = ty.mask();
            let identity = match op {
                BinOp::Add | BinOp::Sub | BinOp::Or | BinOp::Xor | BinOp::Shl | BinOp::Shr => c == 0,
                BinOp::Mul | BinOp::Div => c == 1,
                BinOp::And => c == mask,
                BinOp::Rem => false,
            };
            if identity {
                return self.hit(a);
            }
            let absorbing = match op {
                BinOp::Mul | BinOp::And => (c == 0).then_some(0),
                BinOp::Or => (c == mask).then_some(mask),
                BinOp::Rem => (c == 1).then_some(0),
                BinOp::Shl => (c >= ty.bits as u32).then_some(0),
                BinOp::Shr if !ty.signed => (c >= ty.bits as u32).then_some(0),
                _ => None,
            };
            if let Some(v) = absorbing {
                return self.hit(konst(v));
            }
            if let SymExpr::Binary { op: inner, lhs: x, rhs: c1 } = &*a {
                if let Some((_, c1)) = as_const(c1) {
                    let fold = |o: BinOp, p: u32, q: u32| types::eval_bin_total(o, ty, p, q);
                    let chain = match (inner, op) {
                        (BinOp::Add, BinOp::Add) => Some((BinOp::Add, fold(BinOp::Add, c1, c))),
                        (BinOp::Sub, BinOp::Add) => Some((BinOp::Add, fold(BinOp::Sub, c, c1))),
                        (BinOp::Add, BinOp::Sub) => Some((BinOp::Add, fold(BinOp::Sub, c1, c))),
                        (BinOp::Sub, BinOp::Sub) => Some((BinOp::Sub, fold(BinOp::Add, c1, c))),
                        (BinOp::Mul, BinOp::Mul) | (BinOp::And, BinOp::And) | (BinOp::Or, BinOp::Or) | (BinOp::Xor, BinOp::Xor) => {
                            Some((op, fold(op, c1, c)))
                        }
                        _ => None,
                    };
                    if let Some((o, k)) = chain {
                        self.rewrites += 1;
                        return self.binary(o, x.clone(), konst(k));
                    }
                }
            }
        }
        if a == b {
            match op {
                BinOp::Sub | BinOp::Xor => return self.hit(konst(0)),
                BinOp::And | BinOp::Or => return self.hit(a),
                _ => {}
            }
        }
        SymExpr::binary(op, a, b)
    }

    fn compare(&mut self, op: CmpOp, a: SymRef, b: SymRef) -> SymRef {
        let Ty::Int(ty) = a.ty() else { return SymExpr::compare(op, a, b) };
        if let (Some((_, x)), Some((_, y))) = (as_const(&a), as_const(&b)) {
            return self.hit(SymExpr::boolean(types::eval_cmp(op, ty, x, y)));
        }
        if a == b {
            return self.hit(SymExpr::boolean(matches!(op, CmpOp::Eq | CmpOp::Le | CmpOp::Ge)));
        }
        if as_const(&a).is_some() {
            return self.compare(op.swap(), b, a);
        }
        // Adding a constant is a bijection, so it can move across an equality.
        if let (CmpOp::Eq | CmpOp::Ne, Some((_, c))) = (op, as_const(&b)) {
            if let SymExpr::Binary { op: inner @ (BinOp::Add | BinOp::Sub | BinOp::Xor), lhs: x, rhs: c1 } = &*a {
                if let Some((_, c1)) = as_const(c1) {
                    let undo = match inner {
                        BinOp::Add => BinOp::Sub,
                        BinOp::Sub => BinOp::Add,
                        _ => BinOp::Xor,
                    };
                    self.rewrites += 1;
                    let k = SymExpr::konst(ty, types::eval_bin_total(undo, ty, c, c1));
                    return self.compare(op, x.clone(), k);
                }
            }
        }
        SymExpr::compare(op, a, b)
    }

    fn logic(&mut self, op: LogicOp, a: SymRef, b: SymRef) -> SymRef {
        let (absorbing, neutral) = match op {
            LogicOp::And => (false, true),
            LogicOp::Or => (true, false),
        };
        for (x, other) in [(&a, &b), (&b, &a)] {
            match as_bool(x) {
                Some(v) if v == absorbing => return self.hit(SymExpr::boolean(absorbing)),
                Some(v) if v == neutral => return self.hit(other.clone()),
                _ => {}
            }
        }
        if a == b {
            return self.hit(a);
        }
        SymExpr::logic(op, a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c8(v: u32) -> SymRef {
        SymExpr::konst(IntTy::U8, v)
    }

    #[test]
    fn constant_folding() {
        let e = SymExpr::binary(BinOp::Add, c8(2), c8(3));
        assert_eq!(*simplify(&e), *c8(5));
    }

    #[test]
    fn double_negation() {
        let q = SymExpr::compare(CmpOp::Lt, SymExpr::var("x", IntTy::U8), c8(4));
        assert_eq!(simplify(&SymExpr::not(SymExpr::not(q.clone()))), q);
        let r = SymExpr::not(SymExpr::not(SymExpr::logic(LogicOp::And, q.clone(), q.clone())));
        assert_eq!(simplify(&r), q);
    }

    #[test]
    fn identity_laws() {
        let a = SymExpr::var("a", IntTy::U8);
        let e = SymExpr::binary(BinOp::Mul, SymExpr::binary(BinOp::Add, a.clone(), c8(0)), c8(1));
        assert_eq!(simplify(&e), a);
    }

    #[test]
    fn constant_chains_fold() {
        let a = SymExpr::var("a", IntTy::U8);
        let e = SymExpr::binary(BinOp::Sub, SymExpr::binary(BinOp::Add, a.clone(), c8(200)), c8(100));
        assert_eq!(simplify(&e), SymExpr::binary(BinOp::Add, a.clone(), c8(100)));
        let eq = SymExpr::compare(CmpOp::Eq, SymExpr::binary(BinOp::Add, a.clone(), c8(1)), c8(0));
        assert_eq!(simplify(&eq), SymExpr::compare(CmpOp::Eq, a, c8(255)));
    }
}
