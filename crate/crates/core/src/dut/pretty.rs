//! Canonical source rendering of a syntax tree. Reparsing the output yields
//! the same CFG.

use super::ast::{Expr, ExprKind, Module, Stmt, StmtKind};
use super::types::{BinOp, UnOp};
use std::fmt::Write;

pub fn pretty(module: &Module) -> String {
    let mut out = String::new();
    for d in &module.inputs {
        let sym = if d.symbolic { " symbolic" } else { "" };
        let _ = writeln!(out, "input {} {}{};", d.ty, d.name, sym);
    }
    if !module.inputs.is_empty() && !module.body.is_empty() {
        out.push('\n');
    }
    stmts(&mut out, &module.body, 0);
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn stmts(out: &mut String, body: &[Stmt], depth: usize) {
    for s in body {
        stmt(out, s, depth);
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match &s.kind {
        StmtKind::Local { ty, name, init } => match init {
            Some(e) => {
                let _ = writeln!(out, "{ty} {name} = {};", expr(e));
            }
            None => {
                let _ = writeln!(out, "{ty} {name};");
            }
        },
        StmtKind::Assign { name, value } => {
            let _ = writeln!(out, "{name} = {};", expr(value));
        }
        StmtKind::If { cond, then_body, else_body } => {
            let _ = writeln!(out, "if ({}) {{", expr(cond));
            stmts(out, then_body, depth + 1);
            indent(out, depth);
            match else_body {
                Some(body) => {
                    out.push_str("} else {\n");
                    stmts(out, body, depth + 1);
                    indent(out, depth);
                    out.push_str("}\n");
                }
                None => out.push_str("}\n"),
            }
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "while ({}) {{", expr(cond));
            stmts(out, body, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::Return => out.push_str("return;\n"),
        StmtKind::Fail => out.push_str("fail;\n"),
    }
}

/// Binding strength; larger binds tighter.
fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Logic(super::types::LogicOp::Or, ..) => 1,
        ExprKind::Logic(..) => 2,
        ExprKind::Compare(..) => 3,
        ExprKind::Binary(op, ..) => match op {
            BinOp::Or => 4,
            BinOp::Xor => 5,
            BinOp::And => 6,
            BinOp::Shl | BinOp::Shr => 7,
            BinOp::Add | BinOp::Sub => 8,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 9,
        },
        ExprKind::Unary(..) => 10,
        _ => 11,
    }
}

fn operand(e: &Expr, min: u8) -> String {
    let s = expr(e);
    if prec(e) < min {
        format!("({s})")
    } else {
        s
    }
}

pub fn expr(e: &Expr) -> String {
    let p = prec(e);
    match &e.kind {
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Var(n) => n.clone(),
        ExprKind::Unary(op, arg) => {
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::BitNot => "~",
                UnOp::Not => "!",
            };
            format!("{sym}{}", operand(arg, p))
        }
        // Left-associative: the right operand needs parentheses at equal precedence.
        ExprKind::Binary(op, l, r) => format!("{} {} {}", operand(l, p), op.symbol(), operand(r, p + 1)),
        ExprKind::Logic(op, l, r) => format!("{} {} {}", operand(l, p), op.symbol(), operand(r, p + 1)),
        // Comparisons do not chain.
        ExprKind::Compare(op, l, r) => format!("{} {} {}", operand(l, p + 1), op.symbol(), operand(r, p + 1)),
        ExprKind::Cast(ty, arg) => format!("{ty}({})", expr(arg)),
    }
}
