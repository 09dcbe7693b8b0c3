//! The lexer. Comments run from `;` to end of line; whitespace separates
//! tokens; positions are 1-based line/column.

use super::token::{Keyword, Pos, Token, TokenKind};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{pos}: {message}")]
pub struct LexError {
    pub pos: Pos,
    pub message: String,
}

struct Scanner<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Scanner<'a> {
    fn new(source: &'a str) -> Self {
        Scanner { chars: source.chars().peekable(), line: 1, col: 1 }
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, pos: Pos, message: impl Into<String>) -> LexError {
        LexError { pos, message: message.into() }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut sc = Scanner::new(source);
    let mut tokens = Vec::new();
    while let Some(c) = sc.peek() {
        if c.is_whitespace() {
            sc.bump();
            continue;
        }
        if c == ';' {
            while let Some(c) = sc.peek() {
                if c == '\n' {
                    break;
                }
                sc.bump();
            }
            continue;
        }
        let pos = sc.pos();
        if is_ident_start(c) {
            let mut lexeme = String::new();
            while let Some(c) = sc.peek() {
                if !is_ident_continue(c) {
                    break;
                }
                lexeme.push(c);
                sc.bump();
            }
            let kind = match Keyword::lookup(&lexeme) {
                Some(kw) => TokenKind::Keyword(kw),
                None => TokenKind::Ident,
            };
            tokens.push(Token { kind, lexeme, pos });
            continue;
        }
        if c.is_ascii_digit() {
            let mut lexeme = String::new();
            let mut is_float = false;
            while let Some(c) = sc.peek() {
                if !c.is_ascii_digit() {
                    break;
                }
                lexeme.push(c);
                sc.bump();
            }
            if sc.peek() == Some('.') {
                is_float = true;
                lexeme.push('.');
                sc.bump();
                let mut digits = 0;
                while let Some(c) = sc.peek() {
                    if !c.is_ascii_digit() {
                        break;
                    }
                    lexeme.push(c);
                    sc.bump();
                    digits += 1;
                }
                if digits == 0 {
                    return Err(sc.error(sc.pos(), "expected digits after decimal point"));
                }
            }
            if matches!(sc.peek(), Some('e') | Some('E')) {
                is_float = true;
                lexeme.push(sc.bump().unwrap());
                if matches!(sc.peek(), Some('+') | Some('-')) {
                    lexeme.push(sc.bump().unwrap());
                }
                let mut digits = 0;
                while let Some(c) = sc.peek() {
                    if !c.is_ascii_digit() {
                        break;
                    }
                    lexeme.push(c);
                    sc.bump();
                    digits += 1;
                }
                if digits == 0 {
                    return Err(sc.error(sc.pos(), "expected digits in exponent"));
                }
            }
            let kind = if is_float { TokenKind::Float } else { TokenKind::Int };
            tokens.push(Token { kind, lexeme, pos });
            continue;
        }
        if c == '"' {
            let mut lexeme = String::from('"');
            sc.bump();
            loop {
                match sc.peek() {
                    Some('"') => {
                        lexeme.push('"');
                        sc.bump();
                        break;
                    }
                    Some('\n') | None => {
                        return Err(sc.error(pos, "unterminated string"));
                    }
                    Some(c) => {
                        lexeme.push(c);
                        sc.bump();
                    }
                }
            }
            tokens.push(Token { kind: TokenKind::Str, lexeme, pos });
            continue;
        }
        if ",{}()+-*/".contains(c) {
            sc.bump();
            tokens.push(Token { kind: TokenKind::Punct(c), lexeme: c.to_string(), pos });
            continue;
        }
        return Err(sc.error(pos, format!("unexpected character `{c}`")));
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_instruction_and_operand() {
        let toks = tokenize("INI R1").unwrap();
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[0].kind, TokenKind::Keyword(Keyword::Ini));
        assert_eq!(toks[1].kind, TokenKind::Ident);
        assert_eq!(toks[1].lexeme, "R1");
    }

    #[test]
    fn pha_line_has_six_tokens() {
        let toks = tokenize("PHA R2, PI, 1").unwrap();
        assert_eq!(toks.len(), 6);
    }

    #[test]
    fn illegal_character_reports_position() {
        let err = tokenize("@").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, col: 1 });
    }

    #[test]
    fn comments_and_whitespace_are_dropped() {
        let toks = tokenize("; header\nINI R ; reset\n\nQFT R\n").unwrap();
        assert_eq!(toks.len(), 4);
        assert_eq!(toks[0].pos, Pos { line: 2, col: 1 });
        assert_eq!(toks[2].pos, Pos { line: 4, col: 1 });
    }

    #[test]
    fn numbers_classify_int_and_float() {
        let toks = tokenize("128 3.25 1e-5 2.5e3").unwrap();
        assert_eq!(toks[0].kind, TokenKind::Int);
        assert_eq!(toks[1].kind, TokenKind::Float);
        assert_eq!(toks[2].kind, TokenKind::Float);
        assert_eq!(toks[3].kind, TokenKind::Float);
        assert_eq!(toks[2].lexeme, "1e-5");
    }

    #[test]
    fn strings_keep_their_quotes() {
        let toks = tokenize("ANN \"model.ising\"").unwrap();
        assert_eq!(toks[1].kind, TokenKind::Str);
        assert_eq!(toks[1].lexeme, "\"model.ising\"");
        assert!(tokenize("ANN \"unterminated").is_err());
    }

    #[test]
    fn lowercase_mnemonics_are_identifiers() {
        let toks = tokenize("ini R1").unwrap();
        assert_eq!(toks[0].kind, TokenKind::Ident);
    }
}
