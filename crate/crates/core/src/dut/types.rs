//! Fixed-width integer types and the arithmetic shared by every evaluator.
//!
//! Values travel as `u32` bit patterns masked to their width. Signedness only
//! matters for division, remainder, right shift, comparison and widening.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntTy {
    pub bits: u8,
    pub signed: bool,
}

impl IntTy {
    pub const U8: IntTy = IntTy { bits: 8, signed: false };
    pub const I8: IntTy = IntTy { bits: 8, signed: true };
    pub const U16: IntTy = IntTy { bits: 16, signed: false };
    pub const I16: IntTy = IntTy { bits: 16, signed: true };
    pub const U32: IntTy = IntTy { bits: 32, signed: false };
    pub const I32: IntTy = IntTy { bits: 32, signed: true };

    pub const ALL: [IntTy; 6] = [
        IntTy::U8,
        IntTy::I8,
        IntTy::U16,
        IntTy::I16,
        IntTy::U32,
        IntTy::I32,
    ];

    pub fn from_name(name: &str) -> Option<IntTy> {
        IntTy::ALL.into_iter().find(|t| t.name() == name)
    }

    pub fn name(self) -> &'static str {
        match (self.bits, self.signed) {
            (8, false) => "u8",
            (8, true) => "i8",
            (16, false) => "u16",
            (16, true) => "i16",
            (32, false) => "u32",
            _ => "i32",
        }
    }

    pub fn bytes(self) -> usize {
        self.bits as usize / 8
    }

    pub fn mask(self) -> u32 {
        if self.bits == 32 {
            u32::MAX
        } else {
            (1u32 << self.bits) - 1
        }
    }

    pub fn min(self) -> i64 {
        if self.signed {
            -(1i64 << (self.bits - 1))
        } else {
            0
        }
    }

    pub fn max(self) -> i64 {
        if self.signed {
            (1i64 << (self.bits - 1)) - 1
        } else {
            (1i64 << self.bits) - 1
        }
    }

    /// Number of distinct values.
    pub fn cardinality(self) -> u64 {
        1u64 << self.bits
    }

    /// Numeric value of a bit pattern.
    pub fn to_i64(self, bits: u32) -> i64 {
        let bits = bits & self.mask();
        if self.signed && bits >> (self.bits - 1) & 1 == 1 {
            bits as i64 - (1i64 << self.bits)
        } else {
            bits as i64
        }
    }

    /// Bit pattern of a numeric value, wrapping modulo 2^bits.
    pub fn from_i64(self, v: i64) -> u32 {
        (v as u64 as u32) & self.mask()
    }

    pub fn contains(self, v: i64) -> bool {
        v >= self.min() && v <= self.max()
    }
}

impl fmt::Display for IntTy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ty {
    Bool,
    Int(IntTy),
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Bool => f.write_str("bool"),
            Ty::Int(t) => t.fmt(f),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    And,
    Or,
    Xor,
    Shl,
    Shr,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Xor => "^",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        Some(match s {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Rem,
            "&" => BinOp::And,
            "|" => BinOp::Or,
            "^" => BinOp::Xor,
            "<<" => BinOp::Shl,
            ">>" => BinOp::Shr,
            _ => return None,
        })
    }

    pub fn is_division(self) -> bool {
        matches!(self, BinOp::Div | BinOp::Rem)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<CmpOp> {
        Some(match s {
            "==" => CmpOp::Eq,
            "!=" => CmpOp::Ne,
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            ">" => CmpOp::Gt,
            ">=" => CmpOp::Ge,
            _ => return None,
        })
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    /// The operator that gives the same answer with operands swapped.
    pub fn swap(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            other => other,
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    /// Two's complement negation.
    Neg,
    /// Bitwise complement.
    BitNot,
    /// Boolean negation.
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogicOp {
    And,
    Or,
}

impl LogicOp {
    pub fn symbol(self) -> &'static str {
        match self {
            LogicOp::And => "&&",
            LogicOp::Or => "||",
        }
    }
}

/// Evaluates a binary operator. `None` means division or remainder by zero.
pub fn eval_bin(op: BinOp, ty: IntTy, a: u32, b: u32) -> Option<u32> {
    let mask = ty.mask();
    let (a, b) = (a & mask, b & mask);
    let r = match op {
        BinOp::Add => a.wrapping_add(b),
        BinOp::Sub => a.wrapping_sub(b),
        BinOp::Mul => a.wrapping_mul(b),
        BinOp::Div | BinOp::Rem => {
            if b == 0 {
                return None;
            }
            if ty.signed {
                let (x, y) = (ty.to_i64(a), ty.to_i64(b));
                let v = if op == BinOp::Div { x / y } else { x % y };
                ty.from_i64(v)
            } else if op == BinOp::Div {
                a / b
            } else {
                a % b
            }
        }
        BinOp::And => a & b,
        BinOp::Or => a | b,
        BinOp::Xor => a ^ b,
        BinOp::Shl => {
            if b >= ty.bits as u32 {
                0
            } else {
                a << b
            }
        }
        BinOp::Shr => {
            if ty.signed {
                let x = ty.to_i64(a);
                let k = b.min(ty.bits as u32 - 1);
                ty.from_i64(x >> k)
            } else if b >= ty.bits as u32 {
                0
            } else {
                a >> b
            }
        }
    };
    Some(r & mask)
}

/// Trap-free variant used by the solver: `x / 0 = 0` and `x % 0 = 0`.
pub fn eval_bin_total(op: BinOp, ty: IntTy, a: u32, b: u32) -> u32 {
    eval_bin(op, ty, a, b).unwrap_or(0)
}

pub fn eval_un(op: UnOp, ty: IntTy, a: u32) -> u32 {
    match op {
        UnOp::Neg => 0u32.wrapping_sub(a) & ty.mask(),
        UnOp::BitNot => !a & ty.mask(),
        UnOp::Not => (a == 0) as u32,
    }
}

pub fn eval_cmp(op: CmpOp, ty: IntTy, a: u32, b: u32) -> bool {
    op.holds(ty.to_i64(a), ty.to_i64(b))
}

/// Converts between integer types: sign- or zero-extend, then truncate.
pub fn cast(from: IntTy, to: IntTy, a: u32) -> u32 {
    to.from_i64(from.to_i64(a))
}
