use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DutError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("type error at {pos}: {msg}")]
    Type { pos: Pos, msg: String },
}

impl DutError {
    pub fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        DutError::Syntax { pos, msg: msg.into() }
    }

    pub fn type_error(pos: Pos, msg: impl Into<String>) -> Self {
        DutError::Type { pos, msg: msg.into() }
    }

    pub fn pos(&self) -> Pos {
        match self {
            DutError::Syntax { pos, .. } | DutError::Type { pos, .. } => *pos,
        }
    }
}
