//! Recursive-descent parser.
//!
//! The statement grammar has no conditional, jump, or call form; any token
//! sequence that tries to express one fails here.

use super::ast::{IntExpr, MapExpr, PhaseExpr, ProgramAst, Spanned, Stmt};
use super::token::{Keyword, Pos, Token, TokenKind};
use crate::state::RegisterDecl;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{pos}: expected {expected}, found {found}")]
pub struct ParseError {
    pub pos: Pos,
    pub expected: String,
    pub found: String,
}

struct Cursor<'a> {
    tokens: &'a [Token],
    index: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.index)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.index);
        if t.is_some() {
            self.index += 1;
        }
        t
    }

    fn end_pos(&self) -> Pos {
        self.tokens
            .last()
            .map(|t| Pos { line: t.pos.line, col: t.pos.col + t.lexeme.len() as u32 })
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    fn err(&self, expected: impl Into<String>) -> ParseError {
        match self.peek() {
            Some(t) => ParseError { pos: t.pos, expected: expected.into(), found: t.describe() },
            None => ParseError {
                pos: self.end_pos(),
                expected: expected.into(),
                found: "end of input".into(),
            },
        }
    }

    fn eat_keyword(&mut self, kw: Keyword) -> Result<Pos, ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Keyword(kw) => Ok(self.bump().unwrap().pos),
            _ => Err(self.err(format!("`{}`", kw.as_str()))),
        }
    }

    fn eat_punct(&mut self, c: char) -> Result<Pos, ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Punct(c) => Ok(self.bump().unwrap().pos),
            _ => Err(self.err(format!("`{c}`"))),
        }
    }

    fn at_punct(&self, c: char) -> bool {
        matches!(self.peek(), Some(t) if t.kind == TokenKind::Punct(c))
    }

    fn eat_ident(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => {
                let t = self.bump().unwrap();
                Ok((t.lexeme.clone(), t.pos))
            }
            _ => Err(self.err(what)),
        }
    }

    fn eat_int(&mut self, what: &str) -> Result<(u64, Pos), ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Int => {
                let t = self.bump().unwrap();
                let value = t.lexeme.parse::<u64>().map_err(|_| ParseError {
                    pos: t.pos,
                    expected: "an integer that fits 64 bits".into(),
                    found: t.describe(),
                })?;
                Ok((value, t.pos))
            }
            _ => Err(self.err(what)),
        }
    }

    fn eat_string(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Str => {
                let t = self.bump().unwrap();
                let inner = t.lexeme[1..t.lexeme.len() - 1].to_string();
                Ok((inner, t.pos))
            }
            _ => Err(self.err(what)),
        }
    }
}

pub fn parse(tokens: &[Token]) -> Result<ProgramAst, ParseError> {
    let mut cur = Cursor { tokens, index: 0 };
    let mut declarations = Vec::new();
    let mut body = Vec::new();
    while let Some(t) = cur.peek() {
        if t.kind == TokenKind::Keyword(Keyword::Reg) {
            let pos = cur.eat_keyword(Keyword::Reg)?;
            let (name, _) = cur.eat_ident("a register name")?;
            let (width, wpos) = cur.eat_int("a register width")?;
            let width = u32::try_from(width).map_err(|_| ParseError {
                pos: wpos,
                expected: "a register width".into(),
                found: format!("`{width}`"),
            })?;
            declarations.push(Spanned::new(RegisterDecl::new(name, width), pos));
        } else {
            body.push(statement(&mut cur)?);
        }
    }
    Ok(ProgramAst { declarations, body })
}

fn statement(cur: &mut Cursor) -> Result<Spanned<Stmt>, ParseError> {
    let t = cur.peek().ok_or_else(|| cur.err("an instruction"))?;
    let pos = t.pos;
    let stmt = match t.kind {
        TokenKind::Keyword(Keyword::Ini) => {
            cur.bump();
            Stmt::Ini { reg: cur.eat_ident("a register name")?.0 }
        }
        TokenKind::Keyword(Keyword::Qft) => {
            cur.bump();
            Stmt::Qft { reg: cur.eat_ident("a register name")?.0 }
        }
        TokenKind::Keyword(Keyword::Rea) => {
            cur.bump();
            Stmt::Rea { reg: cur.eat_ident("a register name")?.0 }
        }
        TokenKind::Keyword(Keyword::Ent) => {
            cur.bump();
            let src = cur.eat_ident("a source register")?.0;
            cur.eat_punct(',')?;
            let dst = cur.eat_ident("a destination register")?.0;
            cur.eat_punct(',')?;
            let map = mapspec(cur)?;
            Stmt::Ent { src, dst, map }
        }
        TokenKind::Keyword(Keyword::Dif) => {
            cur.bump();
            let reg = cur.eat_ident("a register name")?.0;
            cur.eat_punct(',')?;
            let size = int_expr(cur)?;
            Stmt::Dif { reg, size }
        }
        TokenKind::Keyword(Keyword::Pha) => {
            cur.bump();
            let reg = cur.eat_ident("a register name")?.0;
            cur.eat_punct(',')?;
            let phase = phase(cur)?;
            cur.eat_punct(',')?;
            let index = int_expr(cur)?;
            Stmt::Pha { reg, phase, index }
        }
        TokenKind::Keyword(Keyword::Ann) => {
            cur.bump();
            Stmt::Ann { model: cur.eat_string("a model file path")?.0 }
        }
        TokenKind::Keyword(Keyword::Repeat) => {
            cur.bump();
            let count = int_expr(cur)?;
            cur.eat_punct('{')?;
            let mut inner = Vec::new();
            while !cur.at_punct('}') {
                if cur.peek().is_none() {
                    return Err(cur.err("`}`"));
                }
                inner.push(statement(cur)?);
            }
            cur.eat_punct('}')?;
            Stmt::Repeat { count, body: inner }
        }
        _ => return Err(cur.err("an instruction")),
    };
    Ok(Spanned::new(stmt, pos))
}

fn mapspec(cur: &mut Cursor) -> Result<MapExpr, ParseError> {
    match cur.peek().map(|t| &t.kind) {
        Some(TokenKind::Keyword(Keyword::Modexp)) => {
            cur.bump();
            cur.eat_punct('(')?;
            let base = int_expr(cur)?;
            cur.eat_punct(',')?;
            let modulus = int_expr(cur)?;
            cur.eat_punct(')')?;
            Ok(MapExpr::ModExp { base, modulus })
        }
        Some(TokenKind::Keyword(Keyword::Table)) => {
            cur.bump();
            cur.eat_punct('(')?;
            let (path, _) = cur.eat_string("a table file path")?;
            cur.eat_punct(')')?;
            Ok(MapExpr::Table { path })
        }
        _ => Err(cur.err("`MODEXP` or `TABLE`")),
    }
}

fn phase(cur: &mut Cursor) -> Result<PhaseExpr, ParseError> {
    match cur.peek().map(|t| &t.kind) {
        Some(TokenKind::Keyword(Keyword::Pi)) => {
            cur.bump();
            if cur.at_punct('*') {
                cur.bump();
                let (num, _) = cur.eat_int("a numerator")?;
                cur.eat_punct('/')?;
                let (den, _) = cur.eat_int("a denominator")?;
                Ok(PhaseExpr::PiRational { num, den })
            } else {
                Ok(PhaseExpr::Pi)
            }
        }
        Some(TokenKind::Float) => {
            let t = cur.bump().unwrap();
            let value = t.lexeme.parse::<f64>().unwrap_or(f64::INFINITY);
            if !value.is_finite() {
                return Err(ParseError {
                    pos: t.pos,
                    expected: "a finite phase literal".into(),
                    found: t.describe(),
                });
            }
            Ok(PhaseExpr::Literal(value))
        }
        _ => Err(cur.err("a phase (`PI`, `PI*p/q`, or a float)")),
    }
}

/// `+` and `-` bind loosest and associate left; `*` binds tighter.
fn int_expr(cur: &mut Cursor) -> Result<IntExpr, ParseError> {
    let mut lhs = int_term(cur)?;
    loop {
        if cur.at_punct('+') {
            cur.bump();
            let rhs = int_term(cur)?;
            lhs = IntExpr::Add(Box::new(lhs), Box::new(rhs));
        } else if cur.at_punct('-') {
            cur.bump();
            let rhs = int_term(cur)?;
            lhs = IntExpr::Sub(Box::new(lhs), Box::new(rhs));
        } else {
            return Ok(lhs);
        }
    }
}

fn int_term(cur: &mut Cursor) -> Result<IntExpr, ParseError> {
    let mut lhs = int_atom(cur)?;
    while cur.at_punct('*') {
        cur.bump();
        let rhs = int_atom(cur)?;
        lhs = IntExpr::Mul(Box::new(lhs), Box::new(rhs));
    }
    Ok(lhs)
}

fn int_atom(cur: &mut Cursor) -> Result<IntExpr, ParseError> {
    match cur.peek().map(|t| &t.kind) {
        Some(TokenKind::Int) => {
            let (value, _) = cur.eat_int("an integer")?;
            Ok(IntExpr::Lit(value))
        }
        Some(TokenKind::Keyword(Keyword::Dim)) => {
            cur.bump();
            cur.eat_punct('(')?;
            let (name, _) = cur.eat_ident("a register name")?;
            cur.eat_punct(')')?;
            Ok(IntExpr::Dim(name))
        }
        Some(TokenKind::Keyword(Keyword::Isqrt)) => {
            cur.bump();
            cur.eat_punct('(')?;
            let inner = int_expr(cur)?;
            cur.eat_punct(')')?;
            Ok(IntExpr::Isqrt(Box::new(inner)))
        }
        Some(TokenKind::Keyword(Keyword::GroverIters)) => {
            cur.bump();
            cur.eat_punct('(')?;
            let inner = int_expr(cur)?;
            cur.eat_punct(')')?;
            Ok(IntExpr::GroverIters(Box::new(inner)))
        }
        _ => Err(cur.err("an integer expression")),
    }
}
