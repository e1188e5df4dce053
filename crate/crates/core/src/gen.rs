//! Random well-typed predicates, for differential testing of the solver.

use crate::dut::{BinOp, CmpOp, IntTy, LogicOp, UnOp};
use crate::sym::{SymExpr, SymRef};
use rand::seq::SliceRandom;
use rand::Rng;

const BIN_OPS: [BinOp; 10] = [
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::Div,
    BinOp::Rem,
    BinOp::And,
    BinOp::Or,
    BinOp::Xor,
    BinOp::Shl,
    BinOp::Shr,
];
const CMP_OPS: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];

/// Constants skewed towards small magnitudes and type boundaries.
pub fn constant<R: Rng>(rng: &mut R, ty: IntTy) -> SymRef {
    let v: i64 = match rng.gen_range(0..6) {
        0 => rng.gen_range(0..=3),
        1 => rng.gen_range(0..=16),
        2 => *[ty.min(), ty.max(), ty.min() + 1, ty.max() - 1, -1].choose(rng).unwrap(),
        3 => rng.gen_range(1..=12),
        _ => rng.gen_range(ty.min()..=ty.max()),
    };
    SymExpr::konst(ty, ty.from_i64(v))
}

/// An integer expression of type `ty` over `vars`; leaves of another width
/// are cast.
pub fn int_expr<R: Rng>(rng: &mut R, vars: &[(&str, IntTy)], ty: IntTy, depth: u32) -> SymRef {
    if depth == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.6) {
            let (name, vt) = *vars.choose(rng).unwrap();
            let v = SymExpr::var(name, vt);
            if vt == ty {
                v
            } else {
                SymExpr::cast(ty, v)
            }
        } else {
            constant(rng, ty)
        };
    }
    match rng.gen_range(0..10) {
        0 => {
            let op = if rng.gen_bool(0.5) { UnOp::Neg } else { UnOp::BitNot };
            SymExpr::unary(op, int_expr(rng, vars, ty, depth - 1))
        }
        1 => {
            let from = *IntTy::ALL[..4].choose(rng).unwrap();
            SymExpr::cast(ty, int_expr(rng, vars, from, depth - 1))
        }
        _ => {
            let op = *BIN_OPS.choose(rng).unwrap();
            let lhs = int_expr(rng, vars, ty, depth - 1);
            // Constant right operands keep most predicates tractable and meaningful.
            let rhs = if rng.gen_bool(0.6) { constant(rng, ty) } else { int_expr(rng, vars, ty, depth - 1) };
            SymExpr::binary(op, lhs, rhs)
        }
    }
}

pub fn bool_expr<R: Rng>(rng: &mut R, vars: &[(&str, IntTy)], depth: u32) -> SymRef {
    match rng.gen_range(0..8) {
        0 if depth > 0 => SymExpr::not(bool_expr(rng, vars, depth - 1)),
        1 if depth > 0 => {
            let op = if rng.gen_bool(0.5) { LogicOp::And } else { LogicOp::Or };
            SymExpr::logic(op, bool_expr(rng, vars, depth - 1), bool_expr(rng, vars, depth - 1))
        }
        _ => {
            let ty = if rng.gen_bool(0.8) { vars[0].1 } else { *IntTy::ALL[..4].choose(rng).unwrap() };
            let op = *CMP_OPS.choose(rng).unwrap();
            let lhs = int_expr(rng, vars, ty, depth.max(1));
            let rhs = if rng.gen_bool(0.7) { constant(rng, ty) } else { int_expr(rng, vars, ty, depth.saturating_sub(1)) };
            SymExpr::compare(op, lhs, rhs)
        }
    }
}

/// One to three conjuncts over a single variable `x` of type `ty`.
pub fn single_var_predicate<R: Rng>(rng: &mut R, ty: IntTy) -> Vec<SymRef> {
    let vars = [("x", ty)];
    let n = rng.gen_range(1..=3);
    (0..n)
        .map(|_| {
            let depth = rng.gen_range(1..=3);
            bool_expr(rng, &vars, depth)
        })
        .collect()
}
