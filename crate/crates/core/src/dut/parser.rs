use super::ast::{Expr, ExprKind, InputDecl, Module, Stmt, StmtKind};
use super::error::{DutError, Pos};
use super::lexer::{lex, Tok, Token};
use super::types::{BinOp, CmpOp, IntTy, LogicOp, UnOp};

const KEYWORDS: [&str; 9] = ["input", "symbolic", "if", "else", "while", "return", "fail", "true", "false"];

pub fn parse_module(src: &str) -> Result<Module, DutError> {
    let mut p = Parser { toks: lex(src)?, at: 0 };
    let mut inputs = Vec::new();
    while p.peek_ident("input") {
        inputs.push(p.input_decl()?);
    }
    let mut body = Vec::new();
    while p.peek() != &Tok::Eof {
        body.push(p.stmt()?);
    }
    Ok(Module { inputs, body })
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn peek_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    fn peek_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(w) => format!("`{w}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), DutError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(DutError::syntax(self.pos(), format!("expected `{p}`, found {}", Self::describe(self.peek()))))
        }
    }

    fn expect_keyword(&mut self, word: &str) -> Result<(), DutError> {
        if self.peek_ident(word) {
            self.bump();
            Ok(())
        } else {
            Err(DutError::syntax(self.pos(), format!("expected `{word}`, found {}", Self::describe(self.peek()))))
        }
    }

    fn ident(&mut self) -> Result<String, DutError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) && IntTy::from_name(&w).is_none() => {
                self.bump();
                Ok(w)
            }
            other => Err(DutError::syntax(pos, format!("expected identifier, found {}", Self::describe(&other)))),
        }
    }

    fn peek_type(&self) -> Option<IntTy> {
        match self.peek() {
            Tok::Ident(w) => IntTy::from_name(w),
            _ => None,
        }
    }

    fn int_type(&mut self) -> Result<IntTy, DutError> {
        match self.peek_type() {
            Some(t) => {
                self.bump();
                Ok(t)
            }
            None => Err(DutError::syntax(self.pos(), format!("expected a type, found {}", Self::describe(self.peek())))),
        }
    }

    fn input_decl(&mut self) -> Result<InputDecl, DutError> {
        let pos = self.pos();
        self.expect_keyword("input")?;
        let ty = self.int_type()?;
        let name = self.ident()?;
        let symbolic = if self.peek_ident("symbolic") {
            self.bump();
            true
        } else {
            false
        };
        self.expect_punct(";")?;
        Ok(InputDecl { name, ty, symbolic, pos })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, DutError> {
        if self.eat_punct("{") {
            let mut stmts = Vec::new();
            while !self.eat_punct("}") {
                if self.peek() == &Tok::Eof {
                    return Err(DutError::syntax(self.pos(), "expected `}`, found end of input"));
                }
                stmts.push(self.stmt()?);
            }
            Ok(stmts)
        } else {
            Ok(vec![self.stmt()?])
        }
    }

    fn stmt(&mut self) -> Result<Stmt, DutError> {
        let pos = self.pos();
        let kind = if self.peek_ident("if") {
            self.bump();
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let then_body = self.block()?;
            let else_body = if self.peek_ident("else") {
                self.bump();
                Some(self.block()?)
            } else {
                None
            };
            StmtKind::If { cond, then_body, else_body }
        } else if self.peek_ident("while") {
            self.bump();
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            StmtKind::While { cond, body: self.block()? }
        } else if self.peek_ident("return") {
            self.bump();
            self.expect_punct(";")?;
            StmtKind::Return
        } else if self.peek_ident("fail") {
            self.bump();
            self.expect_punct(";")?;
            StmtKind::Fail
        } else if self.peek_ident("input") {
            return Err(DutError::syntax(pos, "input declarations must precede all statements"));
        } else if let Some(ty) = self.peek_type() {
            self.bump();
            let name = self.ident()?;
            let init = if self.eat_punct("=") { Some(self.expr()?) } else { None };
            self.expect_punct(";")?;
            StmtKind::Local { ty, name, init }
        } else {
            let name = self.ident()?;
            self.expect_punct("=")?;
            let value = self.expr()?;
            self.expect_punct(";")?;
            StmtKind::Assign { name, value }
        };
        Ok(Stmt { kind, pos })
    }

    pub fn expr(&mut self) -> Result<Expr, DutError> {
        self.logic_or()
    }

    fn logic_or(&mut self) -> Result<Expr, DutError> {
        let mut lhs = self.logic_and()?;
        while self.peek_punct("||") {
            let pos = self.bump().pos;
            let rhs = self.logic_and()?;
            lhs = Expr { kind: ExprKind::Logic(LogicOp::Or, Box::new(lhs), Box::new(rhs)), pos };
        }
        Ok(lhs)
    }

    fn logic_and(&mut self) -> Result<Expr, DutError> {
        let mut lhs = self.comparison()?;
        while self.peek_punct("&&") {
            let pos = self.bump().pos;
            let rhs = self.comparison()?;
            lhs = Expr { kind: ExprKind::Logic(LogicOp::And, Box::new(lhs), Box::new(rhs)), pos };
        }
        Ok(lhs)
    }

    fn comparison(&mut self) -> Result<Expr, DutError> {
        let lhs = self.binary(0)?;
        let op = match self.peek() {
            Tok::Punct(p) => CmpOp::from_symbol(p),
            _ => None,
        };
        let Some(op) = op else { return Ok(lhs) };
        let pos = self.bump().pos;
        let rhs = self.binary(0)?;
        if let Tok::Punct(p) = self.peek() {
            if CmpOp::from_symbol(p).is_some() {
                return Err(DutError::syntax(self.pos(), "comparisons cannot be chained; add parentheses"));
            }
        }
        Ok(Expr { kind: ExprKind::Compare(op, Box::new(lhs), Box::new(rhs)), pos })
    }

    /// Integer operators by precedence level, loosest first.
    const LEVELS: [&'static [BinOp]; 6] = [
        &[BinOp::Or],
        &[BinOp::Xor],
        &[BinOp::And],
        &[BinOp::Shl, BinOp::Shr],
        &[BinOp::Add, BinOp::Sub],
        &[BinOp::Mul, BinOp::Div, BinOp::Rem],
    ];

    fn binary(&mut self, level: usize) -> Result<Expr, DutError> {
        if level == Self::LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            let op = match self.peek() {
                Tok::Punct(p) => BinOp::from_symbol(p).filter(|op| Self::LEVELS[level].contains(op)),
                _ => None,
            };
            let Some(op) = op else { return Ok(lhs) };
            let pos = self.bump().pos;
            let rhs = self.binary(level + 1)?;
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos };
        }
    }

    fn unary(&mut self) -> Result<Expr, DutError> {
        let pos = self.pos();
        let op = if self.peek_punct("-") {
            Some(UnOp::Neg)
        } else if self.peek_punct("~") {
            Some(UnOp::BitNot)
        } else if self.peek_punct("!") {
            Some(UnOp::Not)
        } else {
            None
        };
        match op {
            Some(op) => {
                self.bump();
                let arg = self.unary()?;
                Ok(Expr { kind: ExprKind::Unary(op, Box::new(arg)), pos })
            }
            None => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, DutError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr { kind: ExprKind::Int(v), pos })
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.bump();
                Ok(Expr { kind: ExprKind::Bool(w == "true"), pos })
            }
            Tok::Ident(w) if IntTy::from_name(&w).is_some() => {
                let ty = self.int_type()?;
                self.expect_punct("(")?;
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(Expr { kind: ExprKind::Cast(ty, Box::new(e)), pos })
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                Ok(Expr { kind: ExprKind::Var(name), pos })
            }
            other => Err(DutError::syntax(pos, format!("expected an expression, found {}", Self::describe(&other)))),
        }
    }
}
