//! The abstract syntax tree.

use super::token::Pos;
use crate::state::RegisterDecl;

/// A node plus its source position. Equality compares the node only, so
/// structural AST comparison (the pretty-print round-trip law) ignores
/// positions.
#[derive(Debug, Clone)]
pub struct Spanned<T> {
    pub node: T,
    pub pos: Pos,
}

impl<T> Spanned<T> {
    pub fn new(node: T, pos: Pos) -> Self {
        Spanned { node, pos }
    }
}

impl<T: PartialEq> PartialEq for Spanned<T> {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

/// A parsed program: register declarations and the statement body. The
/// grammar lets declarations appear anywhere; positions keep enough
/// information for the elaborator to check declaration-before-use.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramAst {
    pub declarations: Vec<Spanned<RegisterDecl>>,
    pub body: Vec<Spanned<Stmt>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Ini { reg: String },
    Qft { reg: String },
    Rea { reg: String },
    Ent { src: String, dst: String, map: MapExpr },
    Dif { reg: String, size: IntExpr },
    Pha { reg: String, phase: PhaseExpr, index: IntExpr },
    Ann { model: String },
    Repeat { count: IntExpr, body: Vec<Spanned<Stmt>> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapExpr {
    ModExp { base: IntExpr, modulus: IntExpr },
    Table { path: String },
}

/// Phase syntax keeps exact pi multiples separate from float literals so
/// the corpus programs never round pi.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseExpr {
    Pi,
    PiRational { num: u64, den: u64 },
    Literal(f64),
}

/// Compile-time integer expressions. There is no parenthesized form in the
/// grammar, so parse trees always have atoms under `*` and left-nested
/// chains of `+`/`-`.
#[derive(Debug, Clone, PartialEq)]
pub enum IntExpr {
    Lit(u64),
    Dim(String),
    Isqrt(Box<IntExpr>),
    GroverIters(Box<IntExpr>),
    Add(Box<IntExpr>, Box<IntExpr>),
    Sub(Box<IntExpr>, Box<IntExpr>),
    Mul(Box<IntExpr>, Box<IntExpr>),
}
