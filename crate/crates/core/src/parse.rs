//! Recursive-descent parser for the constant grammar and the polynomial text form.
//!
//! ```text
//! const    := term (('+'|'-') term)* ;
//! term     := factor (('*'|'/') factor)* ;
//! factor   := 'sqrt(' uint ')' | 'pi' | 'e' | 'liouville(' uint ')' | rational | '(' const ')' ;
//! rational := ['-'] uint ['/' uint] ;
//! ```
//!
//! Polynomials use the same grammar with the extra factor `x ['^' uint]`.
//! Division is only allowed by factors that fold to a nonzero rational.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::constants::ComputableReal;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
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

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Num(n) => n.to_string(),
            Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '+' => Tok::Plus,
            '-' | '\u{2212}' => Tok::Minus,
            '*' | '\u{00b7}' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                out.push((Tok::Num(digits.parse().expect("ascii digits")), start));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), start));
                continue;
            }
            other => return Err(Error::syntax(start, other.to_string(), "unexpected character")),
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

/// Sparse polynomial in `x` with constant coefficients, keyed by degree.
#[derive(Clone, Debug)]
pub(crate) struct Terms(BTreeMap<u32, ComputableReal>);

impl Terms {
    fn constant(c: ComputableReal) -> Self {
        Self(BTreeMap::from([(0, c)]))
    }

    fn monomial(degree: u32) -> Self {
        Self(BTreeMap::from([(degree, ComputableReal::one())]))
    }

    fn is_constant(&self) -> bool {
        self.0.keys().all(|&d| d == 0)
    }

    fn as_constant(&self) -> ComputableReal {
        self.0.get(&0).cloned().unwrap_or_else(ComputableReal::zero)
    }

    fn add(mut self, other: Terms, negate: bool) -> Self {
        for (d, c) in other.0 {
            let c = if negate { c.neg() } else { c };
            let merged = match self.0.remove(&d) {
                Some(prev) => prev.add(&c),
                None => c,
            };
            self.0.insert(d, merged);
        }
        self
    }

    fn neg(self) -> Self {
        Self(self.0.into_iter().map(|(d, c)| (d, c.neg())).collect())
    }

    pub(crate) fn into_dense(self) -> Vec<ComputableReal> {
        let top = self.0.keys().next_back().copied().unwrap_or(0) as usize;
        let mut out = vec![ComputableReal::zero(); top + 1];
        for (d, c) in self.0 {
            out[d as usize] = c;
        }
        out
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    allow_x: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, message: &str) -> Error {
        Error::syntax(self.pos(), self.peek().text(), message)
    }

    fn expect(&mut self, tok: Tok, message: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(message))
        }
    }

    fn uint(&mut self, message: &str) -> Result<BigInt> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.unexpected(message)),
        }
    }

    fn sum(&mut self) -> Result<Terms> {
        let mut acc = match self.peek() {
            Tok::Plus => {
                self.bump();
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(self.term()?, false);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.add(self.term()?, true);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Terms> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    let pos = self.pos();
                    self.bump();
                    let rhs = self.unary()?;
                    acc = multiply(acc, rhs, pos)?;
                }
                Tok::Slash => {
                    self.bump();
                    let pos = self.pos();
                    let rhs = self.unary()?;
                    let divisor = match (rhs.is_constant(), rhs.as_constant().as_rational()) {
                        (true, Some(r)) => r.clone(),
                        _ => {
                            return Err(Error::syntax(
                                pos,
                                self.toks[self.at.saturating_sub(1)].0.text(),
                                "division only by rational-valued factors",
                            ))
                        }
                    };
                    if divisor.is_zero() {
                        return Err(Error::ZeroDenominator { pos });
                    }
                    acc = Terms(
                        acc.0
                            .into_iter()
                            .map(|(d, c)| c.div_rational(&divisor).map(|c| (d, c)))
                            .collect::<Result<_>>()?,
                    );
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Terms> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Terms> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(n) => {
                // `uint '/' uint` binds as a single rational leaf.
                if *self.peek() == Tok::Slash {
                    if let Tok::Num(d) = &self.toks[self.at + 1].0 {
                        let d = d.clone();
                        let dpos = self.toks[self.at + 1].1;
                        self.bump();
                        self.bump();
                        if d.is_zero() {
                            return Err(Error::ZeroDenominator { pos: dpos });
                        }
                        return Ok(Terms::constant(ComputableReal::rational(BigRational::new(n, d))));
                    }
                }
                Ok(Terms::constant(ComputableReal::integer(n)))
            }
            Tok::LParen => {
                let inner = self.sum()?;
                self.expect(Tok::RParen, "expected ')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "pi" => Ok(Terms::constant(ComputableReal::pi())),
                "e" => Ok(Terms::constant(ComputableReal::e())),
                "sqrt" => {
                    self.expect(Tok::LParen, "expected '(' after sqrt")?;
                    let k = self.uint("sqrt takes a non-negative integer")?;
                    self.expect(Tok::RParen, "expected ')'")?;
                    Ok(Terms::constant(ComputableReal::sqrt(k)?))
                }
                "liouville" => {
                    self.expect(Tok::LParen, "expected '(' after liouville")?;
                    let bpos = self.pos();
                    let b = self.uint("liouville takes an integer base")?;
                    self.expect(Tok::RParen, "expected ')'")?;
                    let base = b.to_u64().unwrap_or(u64::MAX);
                    if base < 2 {
                        return Err(Error::LiouvilleBase { base, pos: bpos });
                    }
                    Ok(Terms::constant(ComputableReal::liouville(base)?))
                }
                "x" if self.allow_x => {
                    let degree = if *self.peek() == Tok::Caret {
                        self.bump();
                        let e = self.uint("expected exponent after '^'")?;
                        e.to_u32().ok_or_else(|| Error::syntax(pos, e.to_string(), "exponent too large"))?
                    } else {
                        1
                    };
                    Ok(Terms::monomial(degree))
                }
                _ => Err(Error::syntax(pos, name, "unknown identifier")),
            },
            other => Err(Error::syntax(pos, other.text(), "expected a number, constant or '('")),
        }
    }
}

fn multiply(a: Terms, b: Terms, pos: usize) -> Result<Terms> {
    if a.0.len() > 1 && b.0.len() > 1 {
        return Err(Error::syntax(pos, "*", "product of two multi-term polynomials is not supported"));
    }
    let mut out = BTreeMap::new();
    for (da, ca) in &a.0 {
        for (db, cb) in &b.0 {
            out.insert(da + db, ca.mul(cb));
        }
    }
    Ok(Terms(out))
}

fn run(text: &str, allow_x: bool) -> Result<Terms> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        allow_x,
    };
    if *p.peek() == Tok::End {
        return Err(p.unexpected("empty expression"));
    }
    let terms = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("unexpected trailing input"));
    }
    Ok(terms)
}

pub fn parse_constant(text: &str) -> Result<ComputableReal> {
    Ok(run(text, false)?.as_constant())
}

pub(crate) fn parse_terms(text: &str) -> Result<Terms> {
    run(text, true)
}
