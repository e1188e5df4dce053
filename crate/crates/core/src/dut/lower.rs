//! Type checking and lowering of the syntax tree to a CFG.

use super::ast::{self, ExprKind, StmtKind};
use super::error::{DutError, Pos};
use super::program::{Assign, BasicBlock, BlockId, Expr, InputDecl, Program, Terminator, VarId, VarInfo};
use super::types::{IntTy, Ty, UnOp};
use std::collections::HashMap;
use std::sync::Arc;

pub fn lower(name: &str, module: ast::Module) -> Result<Program, DutError> {
    let mut cx = Lowering::default();
    let mut inputs = Vec::new();
    let mut offset = 0;
    for decl in &module.inputs {
        let var = cx.declare(&decl.name, decl.ty, decl.pos)?;
        inputs.push(InputDecl { name: decl.name.clone(), ty: decl.ty, symbolic: decl.symbolic, var, offset });
        offset += decl.ty.bytes();
    }

    let entry = cx.new_block();
    let exit = cx.stmts(&module.body, entry)?;
    if let Some(b) = exit {
        cx.terminate(b, Terminator::Return, 0);
    }

    let (blocks, lines) = cx.finish();
    Ok(Program { name: name.to_string(), inputs, vars: cx.vars, blocks, entry: 0, lines, module: Arc::new(module) })
}

#[derive(Default)]
struct RawBlock {
    stmts: Vec<Assign>,
    term: Option<(Terminator, u32)>,
}

#[derive(Default)]
struct Lowering {
    vars: Vec<VarInfo>,
    names: HashMap<String, VarId>,
    blocks: Vec<RawBlock>,
}

impl Lowering {
    fn declare(&mut self, name: &str, ty: IntTy, pos: Pos) -> Result<VarId, DutError> {
        if self.names.contains_key(name) {
            return Err(DutError::type_error(pos, format!("`{name}` is already declared")));
        }
        let id = self.vars.len();
        self.vars.push(VarInfo { name: name.to_string(), ty });
        self.names.insert(name.to_string(), id);
        Ok(id)
    }

    fn lookup(&self, name: &str, pos: Pos) -> Result<(VarId, IntTy), DutError> {
        match self.names.get(name) {
            Some(&id) => Ok((id, self.vars[id].ty)),
            None => Err(DutError::type_error(pos, format!("undeclared variable `{name}`"))),
        }
    }

    fn new_block(&mut self) -> BlockId {
        self.blocks.push(RawBlock::default());
        self.blocks.len() - 1
    }

    fn terminate(&mut self, b: BlockId, term: Terminator, line: u32) {
        debug_assert!(self.blocks[b].term.is_none());
        self.blocks[b].term = Some((term, line));
    }

    /// Lowers `stmts` starting in `cur`; returns the open block control falls
    /// out of, or `None` when every path has terminated.
    fn stmts(&mut self, stmts: &[ast::Stmt], mut cur: BlockId) -> Result<Option<BlockId>, DutError> {
        for (i, s) in stmts.iter().enumerate() {
            match self.stmt(s, cur)? {
                Some(next) => cur = next,
                None => {
                    // Code after `return`/`fail` is still checked, then dropped as unreachable.
                    let dead = self.new_block();
                    if let Some(b) = self.stmts(&stmts[i + 1..], dead)? {
                        self.terminate(b, Terminator::Return, 0);
                    }
                    return Ok(None);
                }
            }
        }
        Ok(Some(cur))
    }

    fn stmt(&mut self, s: &ast::Stmt, cur: BlockId) -> Result<Option<BlockId>, DutError> {
        let line = s.pos.line;
        match &s.kind {
            StmtKind::Local { ty, name, init } => {
                let value = match init {
                    Some(e) => self.expr(e, Some(Ty::Int(*ty)))?,
                    None => Expr::Int { ty: *ty, bits: 0 },
                };
                let var = self.declare(name, *ty, s.pos)?;
                self.blocks[cur].stmts.push(Assign { var, value });
                Ok(Some(cur))
            }
            StmtKind::Assign { name, value } => {
                let (var, ty) = self.lookup(name, s.pos)?;
                let value = self.expr(value, Some(Ty::Int(ty)))?;
                self.blocks[cur].stmts.push(Assign { var, value });
                Ok(Some(cur))
            }
            StmtKind::If { cond, then_body, else_body } => {
                let cond = self.condition(cond)?;
                let then_block = self.new_block();
                let else_block = self.new_block();
                self.terminate(cur, Terminator::CondBranch { cond, then_block, else_block }, line);
                let then_end = self.stmts(then_body, then_block)?;
                let else_end = match else_body {
                    Some(body) => self.stmts(body, else_block)?,
                    None => Some(else_block),
                };
                if then_end.is_none() && else_end.is_none() {
                    return Ok(None);
                }
                let join = self.new_block();
                for end in [then_end, else_end].into_iter().flatten() {
                    self.terminate(end, Terminator::Goto(join), line);
                }
                Ok(Some(join))
            }
            StmtKind::While { cond, body } => {
                let cond = self.condition(cond)?;
                let header = self.new_block();
                self.terminate(cur, Terminator::Goto(header), line);
                let body_block = self.new_block();
                let exit = self.new_block();
                self.terminate(header, Terminator::CondBranch { cond, then_block: body_block, else_block: exit }, line);
                if let Some(end) = self.stmts(body, body_block)? {
                    self.terminate(end, Terminator::Goto(header), line);
                }
                Ok(Some(exit))
            }
            StmtKind::Return => {
                self.terminate(cur, Terminator::Return, line);
                Ok(None)
            }
            StmtKind::Fail => {
                self.terminate(cur, Terminator::Fail, line);
                Ok(None)
            }
        }
    }

    fn condition(&self, e: &ast::Expr) -> Result<Expr, DutError> {
        match self.infer(e)? {
            Some(Ty::Bool) => self.expr(e, Some(Ty::Bool)),
            Some(t) => Err(DutError::type_error(e.pos, format!("branch condition must be boolean, found {t}"))),
            None => Err(DutError::type_error(e.pos, "branch condition must be boolean, found an integer")),
        }
    }

    /// Type of `e` if it is determined bottom-up; `None` for literal-only
    /// integer expressions, which take their type from context.
    fn infer(&self, e: &ast::Expr) -> Result<Option<Ty>, DutError> {
        Ok(match &e.kind {
            ExprKind::Int(_) => None,
            ExprKind::Bool(_) | ExprKind::Compare(..) | ExprKind::Logic(..) => Some(Ty::Bool),
            ExprKind::Var(name) => Some(Ty::Int(self.lookup(name, e.pos)?.1)),
            ExprKind::Unary(UnOp::Not, _) => Some(Ty::Bool),
            ExprKind::Unary(_, arg) => self.infer(arg)?,
            ExprKind::Binary(_, lhs, rhs) => match self.infer(lhs)? {
                Some(t) => Some(t),
                None => self.infer(rhs)?,
            },
            ExprKind::Cast(to, _) => Some(Ty::Int(*to)),
        })
    }

    fn expect(found: Ty, expected: Option<Ty>, pos: Pos) -> Result<(), DutError> {
        match expected {
            Some(t) if t != found => Err(DutError::type_error(pos, format!("expected {t}, found {found}"))),
            _ => Ok(()),
        }
    }

    fn int_operand_type(&self, lhs: &ast::Expr, rhs: &ast::Expr, fallback: IntTy) -> Result<IntTy, DutError> {
        let t = match self.infer(lhs)? {
            Some(t) => Some(t),
            None => self.infer(rhs)?,
        };
        match t {
            Some(Ty::Int(t)) => Ok(t),
            Some(Ty::Bool) => Err(DutError::type_error(lhs.pos, "arithmetic on a boolean operand")),
            None => Ok(fallback),
        }
    }

    fn expr(&self, e: &ast::Expr, expected: Option<Ty>) -> Result<Expr, DutError> {
        let pos = e.pos;
        match &e.kind {
            ExprKind::Int(v) => match expected {
                Some(Ty::Int(ty)) => {
                    if *v > ty.mask() as u64 {
                        return Err(DutError::type_error(pos, format!("literal {v} does not fit in {ty}")));
                    }
                    Ok(Expr::Int { ty, bits: *v as u32 })
                }
                Some(Ty::Bool) => Err(DutError::type_error(pos, "expected bool, found an integer literal")),
                None => Ok(Expr::Int { ty: IntTy::I32, bits: *v as u32 }),
            },
            ExprKind::Bool(b) => {
                Self::expect(Ty::Bool, expected, pos)?;
                Ok(Expr::Bool(*b))
            }
            ExprKind::Var(name) => {
                let (id, ty) = self.lookup(name, pos)?;
                Self::expect(Ty::Int(ty), expected, pos)?;
                Ok(Expr::Var { id, ty })
            }
            ExprKind::Unary(UnOp::Not, arg) => {
                Self::expect(Ty::Bool, expected, pos)?;
                Ok(Expr::Not(Box::new(self.expr(arg, Some(Ty::Bool))?)))
            }
            ExprKind::Unary(op, arg) => {
                let ty = match self.infer(arg)?.or(expected) {
                    Some(Ty::Int(t)) => t,
                    Some(Ty::Bool) => return Err(DutError::type_error(pos, "integer operator applied to a boolean")),
                    None => IntTy::I32,
                };
                Self::expect(Ty::Int(ty), expected, pos)?;
                Ok(Expr::Unary { op: *op, ty, arg: Box::new(self.expr(arg, Some(Ty::Int(ty)))?) })
            }
            ExprKind::Binary(op, lhs, rhs) => {
                let fallback = match expected {
                    Some(Ty::Int(t)) => t,
                    _ => IntTy::I32,
                };
                let ty = self.int_operand_type(lhs, rhs, fallback)?;
                Self::expect(Ty::Int(ty), expected, pos)?;
                let l = self.expr(lhs, Some(Ty::Int(ty)))?;
                let r = self.expr(rhs, Some(Ty::Int(ty)))?;
                Ok(Expr::Binary { op: *op, ty, lhs: Box::new(l), rhs: Box::new(r) })
            }
            ExprKind::Compare(op, lhs, rhs) => {
                Self::expect(Ty::Bool, expected, pos)?;
                let ty = self.int_operand_type(lhs, rhs, IntTy::I32)?;
                let l = self.expr(lhs, Some(Ty::Int(ty)))?;
                let r = self.expr(rhs, Some(Ty::Int(ty)))?;
                Ok(Expr::Compare { op: *op, ty, lhs: Box::new(l), rhs: Box::new(r) })
            }
            ExprKind::Logic(op, lhs, rhs) => {
                Self::expect(Ty::Bool, expected, pos)?;
                let l = self.expr(lhs, Some(Ty::Bool))?;
                let r = self.expr(rhs, Some(Ty::Bool))?;
                Ok(Expr::Logic { op: *op, lhs: Box::new(l), rhs: Box::new(r) })
            }
            ExprKind::Cast(to, arg) => {
                Self::expect(Ty::Int(*to), expected, pos)?;
                let from = match self.infer(arg)? {
                    Some(Ty::Int(t)) => t,
                    Some(Ty::Bool) => return Err(DutError::type_error(pos, "cannot cast a boolean")),
                    None => *to,
                };
                Ok(Expr::Cast { from, to: *to, arg: Box::new(self.expr(arg, Some(Ty::Int(from)))?) })
            }
        }
    }

    /// Drops unreachable blocks and renumbers the rest densely in creation order.
    fn finish(&mut self) -> (Vec<BasicBlock>, Vec<u32>) {
        let raw = std::mem::take(&mut self.blocks);
        let mut reachable = vec![false; raw.len()];
        let mut stack = vec![0];
        reachable[0] = true;
        while let Some(b) = stack.pop() {
            let (term, _) = raw[b].term.as_ref().expect("every block is terminated");
            for s in term.successors() {
                if !reachable[s] {
                    reachable[s] = true;
                    stack.push(s);
                }
            }
        }
        let mut new_id = vec![usize::MAX; raw.len()];
        let mut next = 0;
        for (old, &r) in reachable.iter().enumerate() {
            if r {
                new_id[old] = next;
                next += 1;
            }
        }
        let mut blocks = Vec::with_capacity(next);
        let mut lines = Vec::with_capacity(next);
        for (old, rb) in raw.into_iter().enumerate() {
            if !reachable[old] {
                continue;
            }
            let (term, line) = rb.term.expect("every block is terminated");
            let term = match term {
                Terminator::Goto(b) => Terminator::Goto(new_id[b]),
                Terminator::CondBranch { cond, then_block, else_block } => Terminator::CondBranch {
                    cond,
                    then_block: new_id[then_block],
                    else_block: new_id[else_block],
                },
                t => t,
            };
            blocks.push(BasicBlock { id: new_id[old], stmts: rb.stmts, term });
            lines.push(line);
        }
        (blocks, lines)
    }
}
