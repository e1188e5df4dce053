//! Symbolic expressions over the `symbolic` inputs of a program.

use crate::dut::{types, BinOp, CmpOp, IntTy, LogicOp, Ty, UnOp};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub type SymRef = Arc<SymExpr>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SymExpr {
    Const { ty: IntTy, bits: u32 },
    Bool(bool),
    Var { name: Arc<str>, ty: IntTy },
    /// `Neg` and `BitNot` over integers, `Not` over booleans.
    Unary { op: UnOp, arg: SymRef },
    Binary { op: BinOp, lhs: SymRef, rhs: SymRef },
    Compare { op: CmpOp, lhs: SymRef, rhs: SymRef },
    BoolOp { op: LogicOp, lhs: SymRef, rhs: SymRef },
    Cast { ty: IntTy, arg: SymRef },
}

impl SymExpr {
    pub fn konst(ty: IntTy, bits: u32) -> SymRef {
        Arc::new(SymExpr::Const { ty, bits: bits & ty.mask() })
    }

    pub fn var(name: &str, ty: IntTy) -> SymRef {
        Arc::new(SymExpr::Var { name: Arc::from(name), ty })
    }

    pub fn boolean(b: bool) -> SymRef {
        Arc::new(SymExpr::Bool(b))
    }

    pub fn unary(op: UnOp, arg: SymRef) -> SymRef {
        Arc::new(SymExpr::Unary { op, arg })
    }

    pub fn not(arg: SymRef) -> SymRef {
        SymExpr::unary(UnOp::Not, arg)
    }

    pub fn binary(op: BinOp, lhs: SymRef, rhs: SymRef) -> SymRef {
        Arc::new(SymExpr::Binary { op, lhs, rhs })
    }

    pub fn compare(op: CmpOp, lhs: SymRef, rhs: SymRef) -> SymRef {
        Arc::new(SymExpr::Compare { op, lhs, rhs })
    }

    pub fn logic(op: LogicOp, lhs: SymRef, rhs: SymRef) -> SymRef {
        Arc::new(SymExpr::BoolOp { op, lhs, rhs })
    }

    pub fn cast(ty: IntTy, arg: SymRef) -> SymRef {
        Arc::new(SymExpr::Cast { ty, arg })
    }

    /// `e` when `want` is true, `¬e` otherwise.
    pub fn directed(e: &SymRef, want: bool) -> SymRef {
        if want {
            e.clone()
        } else {
            SymExpr::not(e.clone())
        }
    }

    /// Result type, assuming the expression is well formed.
    pub fn ty(&self) -> Ty {
        match self {
            SymExpr::Const { ty, .. } | SymExpr::Var { ty, .. } | SymExpr::Cast { ty, .. } => Ty::Int(*ty),
            SymExpr::Bool(_) | SymExpr::Compare { .. } | SymExpr::BoolOp { .. } => Ty::Bool,
            SymExpr::Unary { op: UnOp::Not, .. } => Ty::Bool,
            SymExpr::Unary { arg, .. } => arg.ty(),
            SymExpr::Binary { lhs, .. } => lhs.ty(),
        }
    }

    /// Checks operand types; returns the expression's type.
    pub fn check(&self) -> Result<Ty, String> {
        let int = |e: &SymExpr| match e.check()? {
            Ty::Int(t) => Ok(t),
            Ty::Bool => Err(format!("integer operand expected in {e}")),
        };
        let boolean = |e: &SymExpr| match e.check()? {
            Ty::Bool => Ok(()),
            t => Err(format!("boolean operand expected, found {t} in {e}")),
        };
        match self {
            SymExpr::Const { ty, .. } | SymExpr::Var { ty, .. } => Ok(Ty::Int(*ty)),
            SymExpr::Bool(_) => Ok(Ty::Bool),
            SymExpr::Unary { op: UnOp::Not, arg } => boolean(arg).map(|_| Ty::Bool),
            SymExpr::Unary { arg, .. } => int(arg).map(Ty::Int),
            SymExpr::Binary { lhs, rhs, .. } | SymExpr::Compare { lhs, rhs, .. } => {
                let (a, b) = (int(lhs)?, int(rhs)?);
                if a != b {
                    return Err(format!("operand widths differ ({a} vs {b}) in {self}"));
                }
                Ok(if matches!(self, SymExpr::Binary { .. }) { Ty::Int(a) } else { Ty::Bool })
            }
            SymExpr::BoolOp { lhs, rhs, .. } => {
                boolean(lhs)?;
                boolean(rhs)?;
                Ok(Ty::Bool)
            }
            SymExpr::Cast { ty, arg } => int(arg).map(|_| Ty::Int(*ty)),
        }
    }

    /// Trap-free evaluation; booleans evaluate to 0 or 1.
    pub fn eval(&self, env: &dyn Fn(&str) -> Option<u32>) -> Option<u32> {
        Some(match self {
            SymExpr::Const { bits, .. } => *bits,
            SymExpr::Bool(b) => *b as u32,
            SymExpr::Var { name, ty } => env(name)? & ty.mask(),
            SymExpr::Unary { op: UnOp::Not, arg } => (arg.eval(env)? == 0) as u32,
            SymExpr::Unary { op, arg } => match arg.ty() {
                Ty::Int(t) => types::eval_un(*op, t, arg.eval(env)?),
                Ty::Bool => return None,
            },
            SymExpr::Binary { op, lhs, rhs } => {
                let Ty::Int(t) = lhs.ty() else { return None };
                types::eval_bin_total(*op, t, lhs.eval(env)?, rhs.eval(env)?)
            }
            SymExpr::Compare { op, lhs, rhs } => {
                let Ty::Int(t) = lhs.ty() else { return None };
                types::eval_cmp(*op, t, lhs.eval(env)?, rhs.eval(env)?) as u32
            }
            SymExpr::BoolOp { op, lhs, rhs } => {
                let (a, b) = (lhs.eval(env)?, rhs.eval(env)?);
                match op {
                    LogicOp::And => a & b,
                    LogicOp::Or => a | b,
                }
            }
            SymExpr::Cast { ty, arg } => {
                let Ty::Int(from) = arg.ty() else { return None };
                types::cast(from, *ty, arg.eval(env)?)
            }
        })
    }

    pub fn eval_in(&self, model: &BTreeMap<String, u32>) -> Option<u32> {
        self.eval(&|n| model.get(n).copied())
    }

    /// Symbolic variables with their types, sorted by name.
    pub fn vars(&self) -> BTreeMap<String, IntTy> {
        let mut out = BTreeMap::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeMap<String, IntTy>) {
        match self {
            SymExpr::Var { name, ty } => {
                out.insert(name.to_string(), *ty);
            }
            SymExpr::Const { .. } | SymExpr::Bool(_) => {}
            SymExpr::Unary { arg, .. } | SymExpr::Cast { arg, .. } => arg.collect_vars(out),
            SymExpr::Binary { lhs, rhs, .. } | SymExpr::Compare { lhs, rhs, .. } | SymExpr::BoolOp { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
        }
    }

    /// Node count, counting shared subterms once per occurrence.
    pub fn size(&self) -> usize {
        match self {
            SymExpr::Const { .. } | SymExpr::Bool(_) | SymExpr::Var { .. } => 1,
            SymExpr::Unary { arg, .. } | SymExpr::Cast { arg, .. } => 1 + arg.size(),
            SymExpr::Binary { lhs, rhs, .. } | SymExpr::Compare { lhs, rhs, .. } | SymExpr::BoolOp { lhs, rhs, .. } => {
                1 + lhs.size() + rhs.size()
            }
        }
    }
}

/// S-expression rendering, the predicate dump format.
impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymExpr::Const { ty, bits } => write!(f, "(const {ty} {})", ty.to_i64(*bits)),
            SymExpr::Bool(b) => write!(f, "{b}"),
            SymExpr::Var { name, ty } => write!(f, "(var {name} {ty})"),
            SymExpr::Unary { op, arg } => {
                let name = match op {
                    UnOp::Neg => "neg",
                    UnOp::BitNot => "~",
                    UnOp::Not => "not",
                };
                write!(f, "({name} {arg})")
            }
            SymExpr::Binary { op, lhs, rhs } => write!(f, "({} {lhs} {rhs})", op.symbol()),
            SymExpr::Compare { op, lhs, rhs } => write!(f, "({} {lhs} {rhs})", op.symbol()),
            SymExpr::BoolOp { op, lhs, rhs } => {
                let name = match op {
                    LogicOp::And => "and",
                    LogicOp::Or => "or",
                };
                write!(f, "({name} {lhs} {rhs})")
            }
            SymExpr::Cast { ty, arg } => write!(f, "(cast {ty} {arg})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("predicate parse error: {0}")]
pub struct SexprError(pub String);

/// Parses one expression in the dump format.
pub fn parse_sexpr(text: &str) -> Result<SymRef, SexprError> {
    let tokens = tokenize(text);
    let mut at = 0;
    let e = parse_tokens(&tokens, &mut at)?;
    if at != tokens.len() {
        return Err(SexprError(format!("trailing input after expression: `{}`", tokens[at])));
    }
    e.check().map_err(SexprError)?;
    Ok(e)
}

/// Parses a dump file: one conjunct per line, `;` starts a comment.
pub fn parse_conjuncts(text: &str) -> Result<Vec<SymRef>, SexprError> {
    text.lines()
        .map(|l| l.split(';').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(parse_sexpr)
        .collect()
}

fn tokenize(text: &str) -> Vec<String> {
    text.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(str::to_string).collect()
}

fn parse_tokens(t: &[String], at: &mut usize) -> Result<SymRef, SexprError> {
    let tok = t.get(*at).ok_or_else(|| SexprError("unexpected end of input".into()))?;
    *at += 1;
    match tok.as_str() {
        "true" => return Ok(SymExpr::boolean(true)),
        "false" => return Ok(SymExpr::boolean(false)),
        "(" => {}
        other => return Err(SexprError(format!("unexpected token `{other}`"))),
    }
    let head = t.get(*at).cloned().ok_or_else(|| SexprError("unexpected end of input".into()))?;
    *at += 1;
    let word = |at: &mut usize| -> Result<String, SexprError> {
        let w = t.get(*at).cloned().ok_or_else(|| SexprError("unexpected end of input".into()))?;
        *at += 1;
        Ok(w)
    };
    let ty_of = |w: &str| IntTy::from_name(w).ok_or_else(|| SexprError(format!("unknown type `{w}`")));
    let e = match head.as_str() {
        "const" => {
            let ty = ty_of(&word(at)?)?;
            let v: i64 = word(at)?.parse().map_err(|_| SexprError("bad constant".into()))?;
            if v < ty.min() || v > ty.max() {
                return Err(SexprError(format!("constant {v} out of range for {ty}")));
            }
            SymExpr::konst(ty, ty.from_i64(v))
        }
        "var" => {
            let name = word(at)?;
            let ty = ty_of(&word(at)?)?;
            SymExpr::var(&name, ty)
        }
        "cast" => {
            let ty = ty_of(&word(at)?)?;
            SymExpr::cast(ty, parse_tokens(t, at)?)
        }
        "neg" => SymExpr::unary(UnOp::Neg, parse_tokens(t, at)?),
        "~" => SymExpr::unary(UnOp::BitNot, parse_tokens(t, at)?),
        "not" => SymExpr::not(parse_tokens(t, at)?),
        "and" | "or" => {
            let op = if head == "and" { LogicOp::And } else { LogicOp::Or };
            let l = parse_tokens(t, at)?;
            SymExpr::logic(op, l, parse_tokens(t, at)?)
        }
        op => {
            if let Some(b) = BinOp::from_symbol(op) {
                let l = parse_tokens(t, at)?;
                SymExpr::binary(b, l, parse_tokens(t, at)?)
            } else if let Some(c) = CmpOp::from_symbol(op) {
                let l = parse_tokens(t, at)?;
                SymExpr::compare(c, l, parse_tokens(t, at)?)
            } else {
                return Err(SexprError(format!("unknown operator `{op}`")));
            }
        }
    };
    match t.get(*at).map(String::as_str) {
        Some(")") => {
            *at += 1;
            Ok(e)
        }
        _ => Err(SexprError(format!("expected `)` after ({head} ...)"))),
    }
}
