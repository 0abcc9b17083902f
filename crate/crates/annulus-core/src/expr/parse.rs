//! Hand-rolled tokenizer and recursive-descent parser for the expression
//! grammar.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;

use super::{Arity, ExprAst, Fun, Node, Var};

/// Syntax or name-resolution error, with the byte offset it occurred at.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl ParseError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        ParseError { position, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token together with its start offset.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::Eof, start));
        }
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => return self.number(start),
            c if c.is_ascii_alphabetic() || c == b'_' => return self.ident(start),
            c => {
                return Err(ParseError::new(start, format!("unexpected character `{}`", c as char)))
            }
        };
        self.pos += 1;
        Ok((tok, start))
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        let mut end = self.pos;
        while end < self.src.len() && (self.src[end].is_ascii_digit() || self.src[end] == b'.') {
            end += 1;
        }
        if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
            let mut e = end + 1;
            if e < self.src.len() && (self.src[e] == b'+' || self.src[e] == b'-') {
                e += 1;
            }
            if e < self.src.len() && self.src[e].is_ascii_digit() {
                end = e;
                while end < self.src.len() && self.src[end].is_ascii_digit() {
                    end += 1;
                }
            }
        }
        let text = core::str::from_utf8(&self.src[start..end]).expect("ascii slice");
        let value: f64 = text
            .parse()
            .map_err(|_| ParseError::new(start, format!("malformed number `{text}`")))?;
        self.pos = end;
        Ok((Tok::Num(value), start))
    }

    fn ident(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        let mut end = self.pos;
        while end < self.src.len()
            && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
        {
            end += 1;
        }
        let text = core::str::from_utf8(&self.src[start..end]).expect("ascii slice");
        self.pos = end;
        Ok((Tok::Ident(text.to_owned()), start))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    look: (Tok, usize),
    arity: Arity,
}

pub(super) fn parse(source: &str, arity: Arity) -> Result<ExprAst, ParseError> {
    if source.trim().is_empty() {
        return Err(ParseError::new(0, "empty expression"));
    }
    let mut lexer = Lexer::new(source);
    let look = lexer.next()?;
    let mut p = Parser { lexer, look, arity };
    let root = p.expr()?;
    match p.look.0 {
        Tok::Eof => Ok(ExprAst { arity, root }),
        Tok::RParen => Err(ParseError::new(p.look.1, "unbalanced `)`")),
        ref t => Err(ParseError::new(p.look.1, format!("unexpected token {t:?}"))),
    }
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(Tok, usize), ParseError> {
        let next = self.lexer.next()?;
        Ok(core::mem::replace(&mut self.look, next))
    }

    fn expect_rparen(&mut self, open_pos: usize) -> Result<(), ParseError> {
        match self.look.0 {
            Tok::RParen => {
                self.bump()?;
                Ok(())
            }
            Tok::Eof => Err(ParseError::new(
                self.look.1,
                format!("unbalanced `(` opened at {open_pos}"),
            )),
            ref t => Err(ParseError::new(self.look.1, format!("expected `)`, found {t:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.look.0 {
                Tok::Plus => {
                    self.bump()?;
                    acc = super::fold_add(acc, self.term()?);
                }
                Tok::Minus => {
                    self.bump()?;
                    acc = super::fold_sub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.look.0 {
                Tok::Star => {
                    self.bump()?;
                    acc = super::fold_mul(acc, self.unary()?);
                }
                Tok::Slash => {
                    self.bump()?;
                    acc = super::fold_div(acc, self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if matches!(self.look.0, Tok::Minus) {
            self.bump()?;
            return Ok(super::fold_neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let mut base = self.atom()?;
        while matches!(self.look.0, Tok::Caret) {
            self.bump()?;
            let k = self.exponent()?;
            base = super::fold_pow(base, k);
        }
        Ok(base)
    }

    /// Power exponents are integer literals, optionally negated, optionally
    /// parenthesized: `t^3`, `t^-2`, `t^(-2)`.
    fn exponent(&mut self) -> Result<i32, ParseError> {
        let parens = if matches!(self.look.0, Tok::LParen) {
            let open = self.look.1;
            self.bump()?;
            Some(open)
        } else {
            None
        };
        let negate = if matches!(self.look.0, Tok::Minus) {
            self.bump()?;
            true
        } else {
            false
        };
        let (tok, pos) = self.bump()?;
        let k = match tok {
            Tok::Num(v) if v % 1.0 == 0.0 && v.abs() <= i32::MAX as f64 => v as i32,
            Tok::Num(v) => {
                return Err(ParseError::new(pos, format!("exponent must be an integer, got {v}")))
            }
            t => return Err(ParseError::new(pos, format!("expected integer exponent, found {t:?}"))),
        };
        if let Some(open) = parens {
            self.expect_rparen(open)?;
        }
        Ok(if negate { -k } else { k })
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let (tok, pos) = self.bump()?;
        match tok {
            Tok::Num(v) => Ok(Node::Const(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen(pos)?;
                Ok(inner)
            }
            Tok::Ident(name) => self.name(&name, pos),
            Tok::Eof => Err(ParseError::new(pos, "unexpected end of expression")),
            t => Err(ParseError::new(pos, format!("unexpected token {t:?}"))),
        }
    }

    fn name(&mut self, name: &str, pos: usize) -> Result<Node, ParseError> {
        let fun = match name {
            "sin" => Some(Fun::Sin),
            "cos" => Some(Fun::Cos),
            "exp" => Some(Fun::Exp),
            "ln" => Some(Fun::Ln),
            "sqrt" => Some(Fun::Sqrt),
            "sign" => Some(Fun::Sign),
            _ => None,
        };
        if let Some(fun) = fun {
            let (tok, open) = self.bump()?;
            if !matches!(tok, Tok::LParen) {
                return Err(ParseError::new(open, format!("expected `(` after `{name}`")));
            }
            let arg = self.expr()?;
            self.expect_rparen(open)?;
            return Ok(Node::Fun(fun, Box::new(arg)));
        }
        match (name, self.arity) {
            ("x", Arity::Two) => Ok(Node::Var(Var::X)),
            ("y", Arity::Two) => Ok(Node::Var(Var::Y)),
            ("t", Arity::One) => Ok(Node::Var(Var::X)),
            ("x" | "y", Arity::One) => Err(ParseError::new(
                pos,
                format!("variable `{name}` is not available in a one-variable expression (use `t`)"),
            )),
            ("t", Arity::Two) => Err(ParseError::new(
                pos,
                "variable `t` is not available in a two-variable expression (use `x`, `y`)",
            )),
            _ => Err(ParseError::new(pos, format!("unknown identifier `{name}`"))),
        }
    }
}
