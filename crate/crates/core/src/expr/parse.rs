//! Expression grammar.
//!
//! Variables `t`, `y`, `y1`..`y9` (k-th derivative), prime sugar `y'`/`y''`;
//! operators `+ - * / ^` with `^` right-associative; functions
//! `exp ln sin cos sqrt abs`; `|expr|` for absolute value; numeric literals
//! are integers, decimals, or ratios `p/q`. Implicit multiplication is
//! rejected with a hint. All offsets in errors are byte offsets.

use super::{simplify, Expr, FunKind, JetVar, Rat};
use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        offset,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Prime(u32),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Pipe,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    offset: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        while let Some(t) = self.next_token()? {
            out.push(t);
        }
        Ok(out)
    }

    fn next_token(&mut self) -> Result<Option<Spanned>, ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'|' => {
                self.pos += 1;
                Tok::Pipe
            }
            b'\'' => {
                let mut n = 0u32;
                while self.pos < self.src.len() && self.src[self.pos] == b'\'' {
                    n += 1;
                    self.pos += 1;
                }
                Tok::Prime(n)
            }
            b'0'..=b'9' | b'.' => self.lex_number(start)?,
            b'a'..=b'z' | b'A'..=b'Z' => {
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                Tok::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
            }
            other => {
                return err(start, format!("unexpected character '{}'", other as char));
            }
        };
        Ok(Some(Spanned { tok, offset: start }))
    }

    fn lex_number(&mut self, start: usize) -> Result<Tok, ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let mut frac_digits = 0usize;
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            let frac_start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            frac_digits = self.pos - frac_start;
            if frac_digits == 0 {
                return err(start, "expected digits after decimal point");
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if text == "." {
            return err(start, "expected a number");
        }
        let digits: String = text.chars().filter(|c| *c != '.').collect();
        let numer: BigInt = digits
            .parse()
            .map_err(|_| ParseError {
                offset: start,
                message: "malformed number".into(),
            })?;
        let denom = BigInt::from(10u32).pow(frac_digits as u32);
        Ok(Tok::Num(Rat::new(numer, denom)))
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    max_order: u32,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn offset(&self) -> usize {
        self.peek().map(|s| s.offset).unwrap_or(self.end)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        match self.bump() {
            Some(s) if s.tok == want => Ok(()),
            Some(s) => err(s.offset, format!("expected {what}")),
            None => err(self.end, format!("expected {what}, found end of input")),
        }
    }

    fn parse_bp(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_prefix()?;
        loop {
            let (op, l_bp, r_bp) = match self.peek().map(|s| &s.tok) {
                Some(Tok::Plus) => (Tok::Plus, 1, 2),
                Some(Tok::Minus) => (Tok::Minus, 1, 2),
                Some(Tok::Star) => (Tok::Star, 3, 4),
                Some(Tok::Slash) => (Tok::Slash, 3, 4),
                Some(Tok::Caret) => (Tok::Caret, 8, 7),
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    return err(
                        self.offset(),
                        "implicit multiplication is not supported; insert '*' (e.g. '2*t')",
                    );
                }
                _ => break,
            };
            if l_bp < min_bp {
                break;
            }
            self.bump();
            let rhs = self.parse_bp(r_bp)?;
            lhs = match op {
                Tok::Plus => lhs + rhs,
                Tok::Minus => lhs - rhs,
                Tok::Star => lhs * rhs,
                Tok::Slash => lhs / rhs,
                Tok::Caret => Expr::pow(lhs, rhs),
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }

    fn parse_prefix(&mut self) -> Result<Expr, ParseError> {
        let Some(s) = self.bump() else {
            return err(self.end, "expected an expression, found end of input");
        };
        match s.tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Minus => {
                let inner = self.parse_bp(5)?;
                Ok(-inner)
            }
            Tok::LParen => {
                let inner = self.parse_bp(0)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Pipe => {
                let inner = self.parse_bp(0)?;
                self.expect(Tok::Pipe, "closing '|'")?;
                Ok(Expr::fun(FunKind::Abs, inner))
            }
            Tok::Ident(name) => self.parse_ident(&name, s.offset),
            other => err(s.offset, format!("unexpected token {other:?}")),
        }
    }

    fn parse_ident(&mut self, name: &str, offset: usize) -> Result<Expr, ParseError> {
        if let Some(kind) = FunKind::from_name(name) {
            // ln|x| sugar: a function name may take |...| directly.
            match self.peek().map(|s| &s.tok) {
                Some(Tok::LParen) => {
                    self.bump();
                    let arg = self.parse_bp(0)?;
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(Expr::fun(kind, arg));
                }
                Some(Tok::Pipe) => {
                    self.bump();
                    let arg = self.parse_bp(0)?;
                    self.expect(Tok::Pipe, "closing '|'")?;
                    return Ok(Expr::fun(kind, Expr::fun(FunKind::Abs, arg)));
                }
                _ => {
                    return err(
                        self.offset(),
                        format!("function '{name}' expects an argument in parentheses"),
                    )
                }
            }
        }
        let var = self.parse_var(name, offset)?;
        Ok(Expr::Var(var))
    }

    fn parse_var(&mut self, name: &str, offset: usize) -> Result<JetVar, ParseError> {
        let primes = match self.peek().map(|s| &s.tok) {
            Some(Tok::Prime(n)) => {
                let n = *n;
                self.bump();
                n
            }
            _ => 0,
        };
        if name == "t" {
            if primes > 0 {
                return err(offset, "prime notation applies to y only");
            }
            return Ok(JetVar::Time);
        }
        if name == "y" {
            return self.check_order(JetVar::Deriv(primes), offset);
        }
        if let Some(rest) = name.strip_prefix('y') {
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                if primes > 0 {
                    return err(offset, "mixing yk and prime notation is not supported");
                }
                let k: u32 = rest.parse().map_err(|_| ParseError {
                    offset,
                    message: "derivative index out of range".into(),
                })?;
                return self.check_order(JetVar::Deriv(k), offset);
            }
        }
        err(
            offset,
            format!("unknown identifier '{name}' (variables are t, y, y1..; functions exp, ln, sin, cos, sqrt, abs)"),
        )
    }

    fn check_order(&self, v: JetVar, offset: usize) -> Result<JetVar, ParseError> {
        if let JetVar::Deriv(k) = v {
            if k > self.max_order {
                return err(
                    offset,
                    format!(
                        "derivative order {k} exceeds the maximum order {}",
                        self.max_order
                    ),
                );
            }
        }
        Ok(v)
    }
}

/// Parse source text into a canonical expression. `max_order` bounds the
/// derivative indices that may appear.
pub fn parse_expr(src: &str, max_order: u32) -> Result<Expr, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    if toks.is_empty() {
        return err(0, "empty expression");
    }
    let mut p = Parser {
        toks,
        pos: 0,
        max_order,
        end: src.len(),
    };
    let e = p.parse_bp(0)?;
    if let Some(s) = p.peek() {
        return err(s.offset, format!("unexpected trailing token {:?}", s.tok));
    }
    Ok(simplify(&e))
}

/// Parse a literal rational value (integer, decimal, or ratio, with optional
/// leading minus). Used by the ODE file format for base points.
pub(crate) fn parse_rat(src: &str) -> Result<Rat, ParseError> {
    let e = parse_expr(src, 0)?;
    match e {
        Expr::Const(c) => Ok(c),
        _ => err(0, "expected a numeric literal"),
    }
}
