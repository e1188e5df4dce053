//! The MiniDUT language: parsing, type checking, lowering to a CFG and
//! edge instrumentation.

pub mod ast;
mod error;
mod instrument;
mod lexer;
mod lower;
mod parser;
mod pretty;
mod program;
pub mod types;

pub use error::{DutError, Pos};
pub use instrument::{branch_sites, instrument, BranchSite, EdgeTable, InstrumentedProgram};
pub use program::{Assign, BasicBlock, BlockId, EdgeId, Expr, InputDecl, Program, Terminator, VarId, VarInfo};
pub use types::{BinOp, CmpOp, IntTy, LogicOp, Ty, UnOp};

/// Parses MiniDUT source into a program named `main`.
pub fn parse(source: &str) -> Result<Program, DutError> {
    parse_named("main", source)
}

pub fn parse_named(name: &str, source: &str) -> Result<Program, DutError> {
    lower::lower(name, parser::parse_module(source)?)
}

pub fn parse_module(source: &str) -> Result<ast::Module, DutError> {
    parser::parse_module(source)
}

pub fn pretty_module(module: &ast::Module) -> String {
    pretty::pretty(module)
}

impl Program {
    /// Canonical source text; reparsing it yields a structurally equal program.
    pub fn to_source(&self) -> String {
        pretty::pretty(&self.module)
    }
}

/// Parses and instruments in one step.
pub fn load(name: &str, source: &str) -> Result<InstrumentedProgram, DutError> {
    Ok(instrument(parse_named(name, source)?))
}
