//! Typed control-flow graph produced by lowering.

use super::ast;
use super::types::{BinOp, CmpOp, IntTy, LogicOp, Ty, UnOp};
use std::sync::Arc;

pub type BlockId = usize;
pub type VarId = usize;
pub type EdgeId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Int { ty: IntTy, bits: u32 },
    Bool(bool),
    Var { id: VarId, ty: IntTy },
    /// `Neg` or `BitNot` over an integer.
    Unary { op: UnOp, ty: IntTy, arg: Box<Expr> },
    Not(Box<Expr>),
    Binary { op: BinOp, ty: IntTy, lhs: Box<Expr>, rhs: Box<Expr> },
    /// `ty` is the operand type.
    Compare { op: CmpOp, ty: IntTy, lhs: Box<Expr>, rhs: Box<Expr> },
    Logic { op: LogicOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Cast { from: IntTy, to: IntTy, arg: Box<Expr> },
}

impl Expr {
    pub fn ty(&self) -> Ty {
        match self {
            Expr::Int { ty, .. } | Expr::Var { ty, .. } | Expr::Unary { ty, .. } | Expr::Binary { ty, .. } => {
                Ty::Int(*ty)
            }
            Expr::Cast { to, .. } => Ty::Int(*to),
            Expr::Bool(_) | Expr::Not(_) | Expr::Compare { .. } | Expr::Logic { .. } => Ty::Bool,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assign {
    pub var: VarId,
    pub value: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Terminator {
    Goto(BlockId),
    CondBranch { cond: Expr, then_block: BlockId, else_block: BlockId },
    Return,
    /// Bug sink.
    Fail,
}

impl Terminator {
    /// Successors in edge order: true edge first for branches.
    pub fn successors(&self) -> Vec<BlockId> {
        match self {
            Terminator::Goto(b) => vec![*b],
            Terminator::CondBranch { then_block, else_block, .. } => vec![*then_block, *else_block],
            Terminator::Return | Terminator::Fail => vec![],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasicBlock {
    pub id: BlockId,
    pub stmts: Vec<Assign>,
    pub term: Terminator,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InputDecl {
    pub name: String,
    pub ty: IntTy,
    pub symbolic: bool,
    pub var: VarId,
    /// Byte offset of this input within a test case.
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarInfo {
    pub name: String,
    pub ty: IntTy,
}

#[derive(Clone, Debug)]
pub struct Program {
    pub name: String,
    pub inputs: Vec<InputDecl>,
    pub vars: Vec<VarInfo>,
    pub blocks: Vec<BasicBlock>,
    pub entry: BlockId,
    /// Source line of each block's terminator.
    pub lines: Vec<u32>,
    pub(crate) module: Arc<ast::Module>,
}

/// Structural equality: source positions are ignored.
impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.inputs == other.inputs
            && self.vars == other.vars
            && self.blocks == other.blocks
            && self.entry == other.entry
    }
}

impl Eq for Program {}

impl Program {
    /// Total serialized input length in bytes.
    pub fn input_len(&self) -> usize {
        self.inputs.iter().map(|i| i.ty.bytes()).sum()
    }

    /// Number of distinct inputs, as a power of two.
    pub fn input_bits(&self) -> u32 {
        self.inputs.iter().map(|i| i.ty.bits as u32).sum()
    }

    pub fn has_symbolic_inputs(&self) -> bool {
        self.inputs.iter().any(|i| i.symbolic)
    }

    pub fn ast(&self) -> &ast::Module {
        &self.module
    }

    pub fn input(&self, name: &str) -> Option<&InputDecl> {
        self.inputs.iter().find(|i| i.name == name)
    }

    pub fn branch_count(&self) -> usize {
        self.blocks
            .iter()
            .filter(|b| matches!(b.term, Terminator::CondBranch { .. }))
            .count()
    }
}
