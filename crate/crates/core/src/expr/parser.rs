use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use super::{Func, Node, Variables};

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    EmptyInput,
    UnexpectedChar(char),
    UnexpectedEnd,
    Expected(&'static str),
    UnknownIdentifier(String),
    UnknownFunction(String),
    InvalidNumber(String),
    NonConstantExponent,
    InvalidExponent,
    TrailingInput,
    DuplicateVariable(String),
    InvalidVariableName(String),
    NestingTooDeep,
}

/// A parse failure at byte offset `position` of the source text.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at position {}: ", self.position)?;
        match &self.kind {
            ParseErrorKind::EmptyInput => write!(f, "empty expression"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::Expected(what) => write!(f, "expected {what}"),
            ParseErrorKind::UnknownIdentifier(name) => write!(f, "unknown identifier `{name}`"),
            ParseErrorKind::UnknownFunction(name) => write!(f, "unknown function `{name}`"),
            ParseErrorKind::InvalidNumber(text) => write!(f, "invalid number `{text}`"),
            ParseErrorKind::NonConstantExponent => write!(f, "exponent must be a constant"),
            ParseErrorKind::InvalidExponent => write!(f, "exponent does not evaluate to a finite number"),
            ParseErrorKind::TrailingInput => write!(f, "unexpected trailing input"),
            ParseErrorKind::DuplicateVariable(name) => write!(f, "duplicate variable `{name}`"),
            ParseErrorKind::InvalidVariableName(name) => write!(f, "invalid variable name `{name}`"),
            ParseErrorKind::NestingTooDeep => write!(f, "expression nested too deeply"),
        }
    }
}

const MAX_DEPTH: usize = 256;

pub(crate) fn validate_variables<S: AsRef<str>>(names: &[S]) -> Result<Variables, ParseError> {
    let mut seen = HashSet::new();
    for name in names {
        let name = name.as_ref();
        let valid = name
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid || Func::from_name(name).is_some() {
            return Err(ParseError {
                position: 0,
                kind: ParseErrorKind::InvalidVariableName(name.to_string()),
            });
        }
        if !seen.insert(name) {
            return Err(ParseError {
                position: 0,
                kind: ParseErrorKind::DuplicateVariable(name.to_string()),
            });
        }
    }
    Ok(super::make_vars(names))
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
    End,
}

pub(crate) struct Parser<'a> {
    src: &'a str,
    vars: &'a Variables,
    pos: usize,
    tok: Tok,
    tok_start: usize,
    depth: usize,
}

fn err(position: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { position, kind }
}

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &'a str, vars: &'a Variables) -> Self {
        Parser {
            src,
            vars,
            pos: 0,
            tok: Tok::End,
            tok_start: 0,
            depth: 0,
        }
    }

    pub(crate) fn parse(mut self) -> Result<Arc<Node>, ParseError> {
        if self.src.trim().is_empty() {
            return Err(err(0, ParseErrorKind::EmptyInput));
        }
        self.advance()?;
        let node = self.expr()?;
        if self.tok != Tok::End {
            return Err(err(self.tok_start, ParseErrorKind::TrailingInput));
        }
        Ok(node)
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        if self.pos >= bytes.len() {
            self.tok = Tok::End;
            return Ok(());
        }
        let b = bytes[self.pos];
        let single = match b {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            self.pos += 1;
            self.tok = t;
            return Ok(());
        }
        if b.is_ascii_digit() || b == b'.' {
            let start = self.pos;
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
                self.pos += 1;
            }
            if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
                let save = self.pos;
                self.pos += 1;
                if self.pos < bytes.len() && (bytes[self.pos] == b'+' || bytes[self.pos] == b'-') {
                    self.pos += 1;
                }
                let digits = self.pos;
                while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if self.pos == digits {
                    // not an exponent after all; let the identifier path complain
                    self.pos = save;
                }
            }
            let text = &self.src[start..self.pos];
            let value: f64 = text
                .parse()
                .map_err(|_| err(start, ParseErrorKind::InvalidNumber(text.to_string())))?;
            if !value.is_finite() {
                return Err(err(start, ParseErrorKind::InvalidNumber(text.to_string())));
            }
            self.tok = Tok::Num(value);
            return Ok(());
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            let start = self.pos;
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            self.tok = Tok::Ident(self.src[start..self.pos].to_string());
            return Ok(());
        }
        let ch = self.src[self.pos..].chars().next().unwrap_or('\u{fffd}');
        Err(err(self.pos, ParseErrorKind::UnexpectedChar(ch)))
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(err(self.tok_start, ParseErrorKind::NestingTooDeep));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Arc<Node>, ParseError> {
        self.enter()?;
        let mut chain = 0;
        let mut lhs = self.term()?;
        loop {
            if matches!(self.tok, Tok::Plus | Tok::Minus) {
                self.enter()?;
                chain += 1;
            }
            match self.tok {
                Tok::Plus => {
                    self.advance()?;
                    let rhs = self.term()?;
                    lhs = Arc::new(Node::Add(lhs, rhs));
                }
                Tok::Minus => {
                    self.advance()?;
                    let rhs = self.term()?;
                    lhs = Arc::new(Node::Sub(lhs, rhs));
                }
                _ => break,
            }
        }
        self.depth -= 1 + chain;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Arc<Node>, ParseError> {
        let mut chain = 0;
        let mut lhs = self.unary()?.0;
        loop {
            if matches!(self.tok, Tok::Star | Tok::Slash) {
                self.enter()?;
                chain += 1;
            }
            match self.tok {
                Tok::Star => {
                    self.advance()?;
                    let rhs = self.unary()?.0;
                    lhs = Arc::new(Node::Mul(lhs, rhs));
                }
                Tok::Slash => {
                    self.advance()?;
                    let rhs = self.unary()?.0;
                    lhs = Arc::new(Node::Div(lhs, rhs));
                }
                _ => break,
            }
        }
        self.depth -= chain;
        Ok(lhs)
    }

    /// Returns the node and whether it is a bare numeric literal, so that a
    /// leading minus on a literal becomes a negative constant.
    fn unary(&mut self) -> Result<(Arc<Node>, bool), ParseError> {
        if self.tok == Tok::Minus {
            self.enter()?;
            self.advance()?;
            let (operand, literal) = self.unary()?;
            self.depth -= 1;
            if literal {
                if let Node::Const(v) = &*operand {
                    return Ok((Arc::new(Node::Const(-v)), false));
                }
            }
            return Ok((Arc::new(Node::Neg(operand)), false));
        }
        self.power()
    }

    fn power(&mut self) -> Result<(Arc<Node>, bool), ParseError> {
        let (base, literal) = self.primary()?;
        if self.tok != Tok::Caret {
            return Ok((base, literal));
        }
        self.enter()?;
        self.advance()?;
        let exponent_pos = self.tok_start;
        let (exponent, _) = self.unary()?;
        self.depth -= 1;
        if mentions_any(&exponent) {
            return Err(err(exponent_pos, ParseErrorKind::NonConstantExponent));
        }
        let r = exponent
            .eval(&[])
            .map_err(|_| err(exponent_pos, ParseErrorKind::InvalidExponent))?;
        Ok((Arc::new(Node::Pow(base, r)), false))
    }

    fn primary(&mut self) -> Result<(Arc<Node>, bool), ParseError> {
        let start = self.tok_start;
        match std::mem::replace(&mut self.tok, Tok::End) {
            Tok::Num(v) => {
                self.advance()?;
                Ok((Arc::new(Node::Const(v)), true))
            }
            Tok::Ident(name) => {
                self.advance()?;
                if self.tok == Tok::LParen {
                    let f = Func::from_name(&name)
                        .ok_or_else(|| err(start, ParseErrorKind::UnknownFunction(name.clone())))?;
                    self.advance()?;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok((Arc::new(Node::Call(f, arg)), false));
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok((Arc::new(Node::Var(i)), false));
                }
                if name == "pi" {
                    return Ok((Arc::new(Node::Const(std::f64::consts::PI)), false));
                }
                Err(err(start, ParseErrorKind::UnknownIdentifier(name)))
            }
            Tok::LParen => {
                self.advance()?;
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok((inner, false))
            }
            Tok::End => Err(err(start, ParseErrorKind::UnexpectedEnd)),
            other => {
                self.tok = other;
                let ch = self.src[start..].chars().next().unwrap_or('\u{fffd}');
                Err(err(start, ParseErrorKind::UnexpectedChar(ch)))
            }
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if self.tok == Tok::RParen {
            self.advance()
        } else {
            Err(err(self.tok_start, ParseErrorKind::Expected("')'")))
        }
    }
}

fn mentions_any(node: &Node) -> bool {
    match node {
        Node::Const(_) => false,
        Node::Var(_) => true,
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            mentions_any(a) || mentions_any(b)
        }
        Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => mentions_any(a),
    }
}
