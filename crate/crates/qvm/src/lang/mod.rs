//! The assembly language: lexer, parser, pretty printer, and elaborator.
//!
//! The grammar is deliberately straight-line. `REPEAT` with a compile-time
//! count is the only loop, and nothing in the language can branch on data:
//! programs elaborate to a finite, flat instruction list before they run.
//!
//! ```text
//! program := (regdecl | stmt)* ;
//! regdecl := "REG" IDENT INT ;
//! stmt    := "INI" IDENT | "QFT" IDENT | "REA" IDENT
//!          | "ENT" IDENT "," IDENT "," mapspec
//!          | "DIF" IDENT "," intexpr
//!          | "PHA" IDENT "," phase "," intexpr
//!          | "ANN" STRING
//!          | "REPEAT" intexpr "{" stmt* "}" ;
//! mapspec := "MODEXP" "(" intexpr "," intexpr ")" | "TABLE" "(" STRING ")" ;
//! intexpr := INT | "DIM" "(" IDENT ")" | "ISQRT" "(" intexpr ")"
//!          | "GROVER_ITERS" "(" intexpr ")" | intexpr ("+"|"-"|"*") intexpr ;
//! phase   := "PI" | "PI" "*" INT "/" INT | FLOAT ;
//! comment := ";" ... newline
//! ```
//!
//! Source files use the `.qvm` extension.

mod ast;
mod elaborate;
mod lexer;
mod parser;
mod pretty;
mod token;

pub use ast::{IntExpr, MapExpr, PhaseExpr, ProgramAst, Spanned, Stmt};
pub use elaborate::{elaborate, ElabError, ElaboratedProgram, Instr, MAX_UNROLLED_INSTRUCTIONS};
pub use lexer::{tokenize, LexError};
pub use parser::{parse, ParseError};
pub use pretty::pretty_print;
pub use token::{Keyword, Pos, Token, TokenKind};

use std::path::Path;
use thiserror::Error;

/// Any front-end failure, with source position in the message.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LangError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Elab(#[from] ElabError),
}

/// Tokenize, parse, and elaborate in one step. Table and model files are
/// resolved relative to `base_dir`.
pub fn compile(source: &str, base_dir: &Path) -> Result<ElaboratedProgram, LangError> {
    let tokens = tokenize(source)?;
    let ast = parse(&tokens)?;
    Ok(elaborate(&ast, base_dir)?)
}
