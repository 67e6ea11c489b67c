//! A small expression language for building CRNs on the command line.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor ('*' factor)*
//! factor  := '-' factor | '(' expr ')' | rational | name '(' args ')'
//! ```
//!
//! Rational literals are `p`, `p/q` or `d.ddd`; there is no division
//! operator, so a `/` directly after digits always belongs to the literal.
//! Named calls are resolved through a [`Builtins`] implementation; their
//! arguments are handed over as raw, comma-separated text.

use thiserror::Error;

use super::{Crn, CrnError};
use crate::rational::{Rational, RationalError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("bad arguments to {function}: {message}")]
    BadArguments { function: String, message: String },
    #[error(transparent)]
    Crn(#[from] CrnError),
}

/// Resolves named calls such as `waiting(...)` inside an expression.
pub trait Builtins {
    fn call(&self, name: &str, args: &[&str]) -> Result<Crn, ExprError>;
}

/// Rejects every named call.
pub struct NoBuiltins;

impl Builtins for NoBuiltins {
    fn call(&self, name: &str, _args: &[&str]) -> Result<Crn, ExprError> {
        Err(ExprError::UnknownFunction(name.to_string()))
    }
}

pub fn parse_crn(text: &str, builtins: &dyn Builtins) -> Result<Crn, ExprError> {
    let mut parser = Parser {
        src: text,
        pos: 0,
        builtins,
    };
    let crn = parser.expr()?;
    parser.skip_ws();
    if parser.pos != text.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(crn)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    builtins: &'a dyn Builtins,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ExprError {
        ExprError::Syntax {
            pos: self.pos,
            message: message.to_string(),
        }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn expr(&mut self) -> Result<Crn, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some('-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Crn, ExprError> {
        let mut acc = self.factor()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            acc = acc.mul(&self.factor()?)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Crn, ExprError> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                let inner = self.factor()?;
                Ok(Crn::from_rational(Rational::zero()).sub(&inner))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => self.literal(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.call(),
            Some(_) => Err(self.error("expected a rational, '(' or a function call")),
            None => Err(self.error("unexpected end of expression")),
        }
    }

    fn literal(&mut self) -> Result<Crn, ExprError> {
        let rest = self.rest();
        let mut end = rest
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(rest.len());
        if let Some(sep @ ('/' | '.')) = rest[end..].chars().next() {
            let tail = &rest[end + 1..];
            let digits = tail
                .find(|c: char| !c.is_ascii_digit())
                .unwrap_or(tail.len());
            if digits == 0 {
                self.pos += end + 1;
                return Err(self.error(&format!("expected digits after '{sep}'")));
            }
            end += 1 + digits;
        }
        let value: Rational = rest[..end].parse()?;
        self.pos += end;
        Ok(Crn::from_rational(value))
    }

    fn call(&mut self) -> Result<Crn, ExprError> {
        let src = self.src;
        let rest = &src[self.pos..];
        let name_len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        let name = &rest[..name_len];
        self.pos += name_len;
        if self.peek() != Some('(') {
            return Err(self.error(&format!("expected '(' after {name:?}")));
        }
        let open = self.pos;
        let mut depth = 0usize;
        let mut close = None;
        for (off, c) in self.src[open..].char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        close = Some(open + off);
                        break;
                    }
                }
                _ => {}
            }
        }
        let Some(close) = close else {
            return Err(self.error("unbalanced parentheses in call"));
        };
        let inner = &self.src[open + 1..close];
        let args: Vec<&str> = if inner.trim().is_empty() {
            Vec::new()
        } else {
            split_top_level(inner).into_iter().map(str::trim).collect()
        };
        self.pos = close + 1;
        self.builtins.call(name, &args)
    }
}

fn split_top_level(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}
