//! Sound interval abstraction of MiniDUT integer semantics.
//!
//! Intervals live in the numeric space of their type: unsigned values in
//! `[0, 2^w)`, signed values in `[-2^(w-1), 2^(w-1))`. Booleans use `[0, 1]`.

use crate::dut::{types, BinOp, CmpOp, IntTy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Iv {
    pub lo: i64,
    pub hi: i64,
}

pub const TRUE: Iv = Iv { lo: 1, hi: 1 };
pub const FALSE: Iv = Iv { lo: 0, hi: 0 };
pub const UNKNOWN: Iv = Iv { lo: 0, hi: 1 };

impl Iv {
    pub fn point(v: i64) -> Iv {
        Iv { lo: v, hi: v }
    }

    pub fn full(ty: IntTy) -> Iv {
        Iv { lo: ty.min(), hi: ty.max() }
    }

    pub fn is_point(self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Maps an exact mathematical range onto `ty` modulo `2^w`. Ranges that wrap
/// part-way collapse to the full type range.
pub fn wrap(ty: IntTy, lo: i128, hi: i128) -> Iv {
    let m = 1i128 << ty.bits;
    if hi - lo + 1 >= m {
        return Iv::full(ty);
    }
    let base = ty.min() as i128;
    let k = (lo - base).div_euclid(m);
    let (l, h) = (lo - k * m, hi - k * m);
    if h <= ty.max() as i128 {
        Iv { lo: l as i64, hi: h as i64 }
    } else {
        Iv::full(ty)
    }
}

fn span(vals: impl IntoIterator<Item = i128>) -> (i128, i128) {
    vals.into_iter().fold((i128::MAX, i128::MIN), |(l, h), v| (l.min(v), h.max(v)))
}

/// `2^k - 1` for the smallest `k` with `v <= 2^k - 1`.
fn ones_above(v: i64) -> i64 {
    debug_assert!(v >= 0);
    if v == 0 {
        0
    } else {
        (1i64 << (64 - (v as u64).leading_zeros())) - 1
    }
}

pub fn neg(ty: IntTy, a: Iv) -> Iv {
    wrap(ty, -(a.hi as i128), -(a.lo as i128))
}

pub fn bit_not(ty: IntTy, a: Iv) -> Iv {
    // Unsigned: !x = mask - x. Signed: ~x = -x - 1. Both are exact reflections.
    if ty.signed {
        Iv { lo: -a.hi - 1, hi: -a.lo - 1 }
    } else {
        let m = ty.mask() as i64;
        Iv { lo: m - a.hi, hi: m - a.lo }
    }
}

pub fn binary(op: BinOp, ty: IntTy, a: Iv, b: Iv) -> Iv {
    if a.is_point() && b.is_point() {
        let bits = types::eval_bin_total(op, ty, ty.from_i64(a.lo), ty.from_i64(b.lo));
        return Iv::point(ty.to_i64(bits));
    }
    let (al, ah, bl, bh) = (a.lo as i128, a.hi as i128, b.lo as i128, b.hi as i128);
    match op {
        BinOp::Add => wrap(ty, al + bl, ah + bh),
        BinOp::Sub => wrap(ty, al - bh, ah - bl),
        BinOp::Mul => {
            let (l, h) = span([al * bl, al * bh, ah * bl, ah * bh]);
            wrap(ty, l, h)
        }
        BinOp::Div => div(ty, al, ah, bl, bh),
        BinOp::Rem => rem(ty, a, b),
        BinOp::And => {
            if a.lo >= 0 && b.lo >= 0 {
                Iv { lo: 0, hi: a.hi.min(b.hi) }
            } else if a.lo >= 0 {
                Iv { lo: 0, hi: a.hi }
            } else if b.lo >= 0 {
                Iv { lo: 0, hi: b.hi }
            } else {
                Iv::full(ty)
            }
        }
        BinOp::Or if a.lo >= 0 && b.lo >= 0 => Iv { lo: a.lo.max(b.lo), hi: ones_above(a.hi.max(b.hi)) },
        BinOp::Xor if a.lo >= 0 && b.lo >= 0 => Iv { lo: 0, hi: ones_above(a.hi.max(b.hi)) },
        BinOp::Or | BinOp::Xor => Iv::full(ty),
        BinOp::Shl => match shift_amount(ty, b) {
            Some(k) if k >= ty.bits as u32 => FALSE,
            Some(k) => wrap(ty, al << k, ah << k),
            None => Iv::full(ty),
        },
        BinOp::Shr => match shift_amount(ty, b) {
            Some(k) if !ty.signed && k >= ty.bits as u32 => FALSE,
            Some(k) => {
                let k = k.min(ty.bits as u32 - 1);
                Iv { lo: a.lo >> k, hi: a.hi >> k }
            }
            // A right shift moves every value towards zero (or -1).
            None if a.lo >= 0 => Iv { lo: 0, hi: a.hi },
            None if a.hi < 0 => Iv { lo: a.lo, hi: -1 },
            None => a,
        },
    }
}

fn shift_amount(ty: IntTy, b: Iv) -> Option<u32> {
    b.is_point().then(|| ty.from_i64(b.lo))
}

/// Truncating division with `x / 0 = 0`.
fn div(ty: IntTy, al: i128, ah: i128, bl: i128, bh: i128) -> Iv {
    let mut pieces = Vec::with_capacity(2);
    if bl <= -1 {
        pieces.push((bl, bh.min(-1)));
    }
    if bh >= 1 {
        pieces.push((bl.max(1), bh));
    }
    let (mut lo, mut hi) = if bl <= 0 && 0 <= bh { (0, 0) } else { (i128::MAX, i128::MIN) };
    for (pl, ph) in pieces {
        // For a fixed sign of the divisor the quotient is monotone in each
        // argument, so the extremes sit on the corners.
        let (l, h) = span([al / pl, al / ph, ah / pl, ah / ph]);
        lo = lo.min(l);
        hi = hi.max(h);
    }
    wrap(ty, lo, hi)
}

/// Remainder takes the sign of the dividend, `|x % y| < |y|`, and `x % 0 = 0`.
fn rem(_ty: IntTy, a: Iv, b: Iv) -> Iv {
    if b.is_point() {
        let k = b.lo.unsigned_abs() as i64;
        if k == 0 {
            return FALSE;
        }
        let nonneg = |lo: i64, hi: i64| {
            if hi - lo < k && lo % k <= hi % k {
                Iv { lo: lo % k, hi: hi % k }
            } else {
                Iv { lo: 0, hi: hi.min(k - 1) }
            }
        };
        return if a.lo >= 0 {
            nonneg(a.lo, a.hi)
        } else if a.hi <= 0 {
            let r = nonneg(-a.hi, -a.lo);
            Iv { lo: -r.hi, hi: -r.lo }
        } else {
            Iv { lo: a.lo.max(-(k - 1)), hi: a.hi.min(k - 1) }
        };
    }
    let m = (b.lo.unsigned_abs()).max(b.hi.unsigned_abs()) as i64;
    if m == 0 {
        return FALSE;
    }
    Iv { lo: a.lo.max(-(m - 1)).min(0), hi: a.hi.min(m - 1).max(0) }
}

pub fn cast(to: IntTy, a: Iv) -> Iv {
    wrap(to, a.lo as i128, a.hi as i128)
}

pub fn compare(op: CmpOp, a: Iv, b: Iv) -> Iv {
    let known = |t: bool, f: bool| {
        if t {
            TRUE
        } else if f {
            FALSE
        } else {
            UNKNOWN
        }
    };
    match op {
        CmpOp::Eq => known(a.is_point() && b.is_point() && a.lo == b.lo, a.hi < b.lo || b.hi < a.lo),
        CmpOp::Ne => known(a.hi < b.lo || b.hi < a.lo, a.is_point() && b.is_point() && a.lo == b.lo),
        CmpOp::Lt => known(a.hi < b.lo, a.lo >= b.hi),
        CmpOp::Le => known(a.hi <= b.lo, a.lo > b.hi),
        CmpOp::Gt => known(a.lo > b.hi, a.hi <= b.lo),
        CmpOp::Ge => known(a.lo >= b.hi, a.hi < b.lo),
    }
}

pub fn not(a: Iv) -> Iv {
    Iv { lo: 1 - a.hi, hi: 1 - a.lo }
}

pub fn and(a: Iv, b: Iv) -> Iv {
    Iv { lo: a.lo & b.lo, hi: a.hi & b.hi }
}

pub fn or(a: Iv, b: Iv) -> Iv {
    Iv { lo: a.lo | b.lo, hi: a.hi | b.hi }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ty_strategy() -> impl Strategy<Value = IntTy> {
        prop::sample::select(vec![IntTy::U8, IntTy::I8, IntTy::U16, IntTy::I16])
    }

    fn op_strategy() -> impl Strategy<Value = BinOp> {
        prop::sample::select(vec![
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
        ])
    }

    /// An interval of `ty` plus a member, all drawn from raw seeds.
    fn pick(ty: IntTy, x: u32, y: u32, z: u32) -> (Iv, i64) {
        let (a, b) = (ty.to_i64(x & ty.mask()), ty.to_i64(y & ty.mask()));
        let iv = Iv { lo: a.min(b), hi: a.max(b) };
        let width = (iv.hi - iv.lo) as u64 + 1;
        (iv, iv.lo + (z as u64 % width) as i64)
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap(IntTy::U8, 250, 260), Iv::full(IntTy::U8));
        assert_eq!(wrap(IntTy::U8, 256, 260), Iv { lo: 0, hi: 4 });
        assert_eq!(wrap(IntTy::I8, 128, 128), Iv::point(-128));
        assert_eq!(wrap(IntTy::U16, -3, -1), Iv { lo: 65533, hi: 65535 });
    }

    #[test]
    fn residue_of_narrow_range_is_exact() {
        assert_eq!(binary(BinOp::Rem, IntTy::U8, Iv { lo: 12, hi: 14 }, Iv::point(10)), Iv { lo: 2, hi: 4 });
        assert_eq!(binary(BinOp::Rem, IntTy::I8, Iv { lo: -14, hi: -12 }, Iv::point(10)), Iv { lo: -4, hi: -2 });
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(4000))]

        #[test]
        fn binary_ops_are_sound(ty in ty_strategy(), op in op_strategy(),
                                a in any::<(u32, u32, u32)>(), b in any::<(u32, u32, u32)>(),
                                point_b in any::<bool>()) {
            let (ia, va) = pick(ty, a.0, a.1, a.2);
            let (ib, vb) = if point_b { let v = ty.to_i64(b.0 & ty.mask()); (Iv::point(v), v) } else { pick(ty, b.0, b.1, b.2) };
            let r = binary(op, ty, ia, ib);
            let v = ty.to_i64(types::eval_bin_total(op, ty, ty.from_i64(va), ty.from_i64(vb)));
            prop_assert!(r.contains(v), "{ty} {va} {} {vb} = {v} not in {r:?} ({ia:?}, {ib:?})", op.symbol());
        }

        #[test]
        fn unary_and_cast_are_sound(ty in ty_strategy(), to in ty_strategy(), a in any::<(u32, u32, u32)>()) {
            let (ia, va) = pick(ty, a.0, a.1, a.2);
            let bits = ty.from_i64(va);
            prop_assert!(neg(ty, ia).contains(ty.to_i64(types::eval_un(crate::dut::UnOp::Neg, ty, bits))));
            prop_assert!(bit_not(ty, ia).contains(ty.to_i64(types::eval_un(crate::dut::UnOp::BitNot, ty, bits))));
            prop_assert!(cast(to, ia).contains(to.to_i64(types::cast(ty, to, bits))));
        }

        #[test]
        fn comparisons_are_sound(ty in ty_strategy(), a in any::<(u32, u32, u32)>(), b in any::<(u32, u32, u32)>()) {
            let (ia, va) = pick(ty, a.0, a.1, a.2);
            let (ib, vb) = pick(ty, b.0, b.1, b.2);
            for op in [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge] {
                let truth = op.holds(va, vb) as i64;
                prop_assert!(compare(op, ia, ib).contains(truth));
            }
        }
    }
}
