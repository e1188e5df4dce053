//! Source-level syntax tree, as written. Types are resolved during lowering.

use super::error::Pos;
use super::types::{BinOp, CmpOp, IntTy, LogicOp, UnOp};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Module {
    pub inputs: Vec<InputDecl>,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputDecl {
    pub name: String,
    pub ty: IntTy,
    pub symbolic: bool,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    /// `ty name [= init];`
    Local { ty: IntTy, name: String, init: Option<Expr> },
    Assign { name: String, value: Expr },
    If { cond: Expr, then_body: Vec<Stmt>, else_body: Option<Vec<Stmt>> },
    While { cond: Expr, body: Vec<Stmt> },
    Return,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Int(u64),
    Bool(bool),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    Logic(LogicOp, Box<Expr>, Box<Expr>),
    Cast(IntTy, Box<Expr>),
}

impl Stmt {
    /// Number of `if`/`while` statements, nested ones included.
    pub fn count_conditionals(stmts: &[Stmt]) -> usize {
        stmts
            .iter()
            .map(|s| match &s.kind {
                StmtKind::If { then_body, else_body, .. } => {
                    1 + Stmt::count_conditionals(then_body)
                        + else_body.as_deref().map_or(0, Stmt::count_conditionals)
                }
                StmtKind::While { body, .. } => 1 + Stmt::count_conditionals(body),
                _ => 0,
            })
            .sum()
    }
}
