//! Recursive-descent parser for polynomial text.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' INT)?
//! atom   := INT | IDENT | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{PolySystem, Polynomial};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'^' => out.push((Tok::Caret, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().expect("digits parse");
                out.push((Tok::Int(n), start));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(Error::Syntax { pos: start, msg: format!("unexpected character `{ch}`") });
            }
        }
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    names: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn nvars(&self) -> usize {
        self.names.len()
    }

    fn expr(&mut self) -> Result<Polynomial> {
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

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(-&self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        match self.bump() {
            Tok::Int(n) => {
                let e: u32 = n.try_into().map_err(|_| Error::InvalidExponent { pos: at })?;
                Ok(base.pow(e))
            }
            _ => Err(Error::InvalidExponent { pos: at }),
        }
    }

    fn atom(&mut self) -> Result<Polynomial> {
        let at = self.offset();
        match self.bump() {
            Tok::Int(n) => Ok(Polynomial::constant(self.nvars(), BigRational::from_integer(n))),
            Tok::Ident(name) => match self.names.iter().position(|v| *v == name) {
                Some(i) => Ok(Polynomial::var(self.nvars(), i)),
                None => Err(Error::UnknownVariable { name, pos: at }),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                let close = self.offset();
                match self.bump() {
                    Tok::RParen => Ok(inner),
                    _ => Err(Error::Syntax { pos: close, msg: "expected `)`".into() }),
                }
            }
            Tok::End => Err(Error::Syntax { pos: at, msg: "unexpected end of input".into() }),
            t => Err(Error::Syntax { pos: at, msg: format!("unexpected token {t:?}") }),
        }
    }
}

/// Parses `text` as a polynomial over the named variables.
pub fn parse_poly(text: &str, variables: &[String]) -> Result<Polynomial> {
    let mut parser = Parser { toks: tokenize(text)?, pos: 0, names: variables };
    let poly = parser.expr()?;
    if *parser.peek() != Tok::End {
        return Err(Error::Syntax { pos: parser.offset(), msg: "trailing input".into() });
    }
    Ok(poly)
}

/// Parses each string and collects the results into a system.
pub fn parse_system<S: AsRef<str>>(polys: &[S], variables: &[String]) -> Result<PolySystem> {
    let parsed = polys.iter().map(|t| parse_poly(t.as_ref(), variables)).collect::<Result<Vec<_>>>()?;
    PolySystem::new(variables.len(), parsed)
}
