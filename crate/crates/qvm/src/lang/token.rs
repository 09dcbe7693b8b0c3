//! Tokens and source positions.

use std::fmt;

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Reg,
    Ini,
    Qft,
    Rea,
    Ent,
    Dif,
    Pha,
    Ann,
    Repeat,
    Modexp,
    Table,
    Dim,
    Isqrt,
    GroverIters,
    Pi,
}

impl Keyword {
    /// Keywords are upper-case only; anything else is an identifier.
    pub fn lookup(s: &str) -> Option<Keyword> {
        Some(match s {
            "REG" => Keyword::Reg,
            "INI" => Keyword::Ini,
            "QFT" => Keyword::Qft,
            "REA" => Keyword::Rea,
            "ENT" => Keyword::Ent,
            "DIF" => Keyword::Dif,
            "PHA" => Keyword::Pha,
            "ANN" => Keyword::Ann,
            "REPEAT" => Keyword::Repeat,
            "MODEXP" => Keyword::Modexp,
            "TABLE" => Keyword::Table,
            "DIM" => Keyword::Dim,
            "ISQRT" => Keyword::Isqrt,
            "GROVER_ITERS" => Keyword::GroverIters,
            "PI" => Keyword::Pi,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Reg => "REG",
            Keyword::Ini => "INI",
            Keyword::Qft => "QFT",
            Keyword::Rea => "REA",
            Keyword::Ent => "ENT",
            Keyword::Dif => "DIF",
            Keyword::Pha => "PHA",
            Keyword::Ann => "ANN",
            Keyword::Repeat => "REPEAT",
            Keyword::Modexp => "MODEXP",
            Keyword::Table => "TABLE",
            Keyword::Dim => "DIM",
            Keyword::Isqrt => "ISQRT",
            Keyword::GroverIters => "GROVER_ITERS",
            Keyword::Pi => "PI",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident,
    Int,
    Float,
    Str,
    Punct(char),
}

/// One token; `lexeme` reproduces the source slice exactly (strings keep
/// their quotes).
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub pos: Pos,
}

impl Token {
    /// The token as the parser names it in error messages.
    pub fn describe(&self) -> String {
        format!("`{}`", self.lexeme)
    }
}
