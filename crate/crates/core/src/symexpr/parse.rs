//! Recursive-descent parser for the infix expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := integer | ident | ident '\''* '(' expr ')' | '(' expr ')'
//! ```
//!
//! `sin cos exp log sqrt` are elementary; any other called identifier is an
//! opaque function whose derivative order is the number of primes.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::expr::{ElemFn, Expr, Rational};
use super::ExprError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Prime,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'\'' => Tok::Prime,
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().expect("digits");
                out.push((start, Tok::Int(n)));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ExprError::UnknownToken { offset: start, token: ch.to_string() });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, message: &str) -> Result<T, ExprError> {
        Err(ExprError::Syntax { offset: self.offset(), message: message.to_string() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ExprError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.syntax(&format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Slash => {
                    self.bump();
                    let at = self.offset();
                    let rhs = self.unary()?;
                    acc = acc.checked_div(&rhs).map_err(|_| ExprError::Syntax {
                        offset: at,
                        message: "division by zero".into(),
                    })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let exponent = self.unary()?;
        let k = exponent
            .as_rational()
            .filter(Rational::is_integer)
            .and_then(|r| r.numer().to_i64())
            .ok_or_else(|| ExprError::Syntax { offset: at, message: "exponent must be an integer constant".into() })?;
        base.powi(k).map_err(|_| ExprError::Syntax { offset: at, message: "negative power of zero".into() })
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        match self.bump() {
            Tok::Int(n) => Ok(Expr::rational(Rational::from_integer(n))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let mut order = 0u32;
                while *self.peek() == Tok::Prime {
                    self.bump();
                    order += 1;
                }
                if *self.peek() != Tok::LParen {
                    if order > 0 {
                        return self.syntax("expected '(' after derivative primes");
                    }
                    return Ok(Expr::symbol(&name));
                }
                self.bump();
                let arg = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                match ElemFn::from_name(&name) {
                    Some(f) if order == 0 => Ok(Expr::apply(f, arg)),
                    Some(_) => self.syntax("primes are only allowed on opaque functions"),
                    None => Ok(Expr::opaque(&name, order, arg)),
                }
            }
            Tok::End => self.syntax("unexpected end of input"),
            _ => {
                self.pos -= 1;
                self.syntax("expected a number, identifier, or '('")
            }
        }
    }
}

/// Parses and normalizes an expression.
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.syntax("unexpected trailing input");
    }
    Ok(e)
}
