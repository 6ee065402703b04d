//! Kernel language frontend: surface syntax, AST, and control-flow-graph form.
//!
//! The surface syntax is C-like (`kernel(int A[]) { ... }` with `if`,
//! `while`, `barrier`, `assume`, `assert`). Parsing desugars structured
//! control flow into a CFG whose branch arms are guarded by `assume(b)` /
//! `assume(!b)` nodes, and hoists array reads out of expressions into
//! explicit load commands, so the command set downstream is exactly:
//! scalar assignment, array store, array load, barrier, assume, assert.

mod ast;
mod cfg;
mod lexer;
mod lower;
mod parser;
mod pretty;

pub use ast::*;
pub use cfg::{build_cfg, CfgIssue};
pub use lexer::{Lexer, Token, TokenKind};
pub use parser::parse_kernel;
pub use pretty::print_kernel;

use serde::{Deserialize, Serialize};
use std::fmt;

/// A source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A frontend diagnostic with its source location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub pos: Pos,
    pub message: String,
}

impl Diagnostic {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            pos,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}
