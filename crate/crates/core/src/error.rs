use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::Name;

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: duplicate declaration of `{name}`")]
    Duplicate { pos: Pos, name: Name },
    #[error("{pos}: undeclared name `{name}`")]
    Undeclared { pos: Pos, name: Name },
    #[error("unbound context variable `{0}`")]
    UnboundContext(Name),
    #[error("ill-typed: {0}")]
    IllTyped(String),
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("{0}")]
    Tactic(String),
}

impl Error {
    pub fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        Error::Syntax { pos, msg: msg.into() }
    }

    pub fn ill_typed(msg: impl Into<String>) -> Self {
        Error::IllTyped(msg.into())
    }

    pub fn tactic(msg: impl Into<String>) -> Self {
        Error::Tactic(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
