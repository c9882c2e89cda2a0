//! Polynomial expression language.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary ('*' unary)*
//! unary := '-' unary | power
//! power := atom ('^' UINT)?
//! atom  := INT ('/' INT)? | IDENT | '(' expr ')'
//! ```
//!
//! Whitespace is insignificant. Columns in errors are 1-based.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::ParseError;
use crate::poly::{Poly, Rational, VarContext};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Int(s.parse().expect("digits")), col));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        let t = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '/' => Tok::Slash,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => return Err(ParseError::at(col, format!("unexpected character '{c}'"))),
        };
        out.push((t, col));
        i += 1;
    }
    Ok(out)
}

/// Parsed expression tree; evaluated against an [`ExprRing`].
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rational),
    Var { name: String, column: usize },
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::Star) {
            self.bump();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        let caret_col = self.col();
        self.bump();
        match self.bump() {
            Some((Tok::Int(n), col)) => {
                let e = u32::try_from(&n).map_err(|_| ParseError::at(col, "exponent too large"))?;
                Ok(Expr::Pow(Box::new(base), e))
            }
            _ => Err(ParseError::at(caret_col, "expected a non-negative integer exponent after '^'")),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let col = self.col();
        match self.bump() {
            Some((Tok::Int(n), _)) => {
                if self.peek() == Some(&Tok::Slash) {
                    let slash_col = self.col();
                    self.bump();
                    match self.bump() {
                        Some((Tok::Int(d), dcol)) => {
                            if d.is_zero() {
                                return Err(ParseError::at(dcol, "zero denominator"));
                            }
                            Ok(Expr::Num(Rational::new(n, d)))
                        }
                        _ => Err(ParseError::at(slash_col, "expected an integer denominator after '/'")),
                    }
                } else {
                    Ok(Expr::Num(Rational::from_integer(n)))
                }
            }
            Some((Tok::Ident(name), _)) => Ok(Expr::Var { name, column: col }),
            Some((Tok::LParen, _)) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    _ => Err(ParseError::at(col, "unclosed '('")),
                }
            }
            Some((t, c)) => Err(ParseError::at(c, format!("unexpected token {t:?}"))),
            None => Err(ParseError::at(col, "unexpected end of input")),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end_col: text.chars().count() + 1 };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(ParseError::at(p.col(), "unexpected trailing input"));
    }
    Ok(e)
}

/// A ring in which parsed expressions can be evaluated.
pub trait ExprRing {
    type Value: Clone;
    fn constant(&self, c: Rational) -> Self::Value;
    fn generator(&self, name: &str) -> Option<Self::Value>;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn neg(&self, a: &Self::Value) -> Self::Value;
}

impl Expr {
    pub fn eval<R: ExprRing>(&self, ring: &R) -> Result<R::Value, ParseError> {
        Ok(match self {
            Expr::Num(c) => ring.constant(c.clone()),
            Expr::Var { name, column } => ring
                .generator(name)
                .ok_or_else(|| ParseError::at(*column, format!("undeclared variable `{name}`")))?,
            Expr::Add(a, b) => ring.add(&a.eval(ring)?, &b.eval(ring)?),
            Expr::Sub(a, b) => ring.add(&a.eval(ring)?, &ring.neg(&b.eval(ring)?)),
            Expr::Mul(a, b) => ring.mul(&a.eval(ring)?, &b.eval(ring)?),
            Expr::Neg(a) => ring.neg(&a.eval(ring)?),
            Expr::Pow(a, e) => {
                let base = a.eval(ring)?;
                let mut acc = ring.constant(Rational::one());
                for _ in 0..*e {
                    acc = ring.mul(&acc, &base);
                }
                acc
            }
        })
    }
}

impl ExprRing for VarContext {
    type Value = Poly;

    fn constant(&self, c: Rational) -> Poly {
        Poly::constant(self, c)
    }

    fn generator(&self, name: &str) -> Option<Poly> {
        self.index_of(name).map(|i| Poly::var(self, i).expect("index in range"))
    }

    fn add(&self, a: &Poly, b: &Poly) -> Poly {
        a + b
    }

    fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        a * b
    }

    fn neg(&self, a: &Poly) -> Poly {
        -a
    }
}

pub fn parse_poly(text: &str, vars: &VarContext) -> Result<Poly, ParseError> {
    parse_expr(text)?.eval(vars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat_frac;

    fn xy() -> VarContext {
        VarContext::new(["x", "y"])
    }

    #[test]
    fn reiffen_polynomial() {
        let p = parse_poly("x^4 + y^5 + y^4*x", &xy()).unwrap();
        assert_eq!(p.num_terms(), 3);
        assert_eq!(p.to_string(), "x*y^4 + y^5 + x^4");
    }

    #[test]
    fn cancellation() {
        assert!(parse_poly("x - x", &xy()).unwrap().is_zero());
    }

    #[test]
    fn malformed_exponent() {
        let e = parse_poly("x^", &xy()).unwrap_err();
        assert_eq!(e.column, 2);
    }

    #[test]
    fn undeclared_variable() {
        let e = parse_poly("x + z", &xy()).unwrap_err();
        assert_eq!(e.column, 5);
        assert!(e.message.contains("undeclared"));
    }

    #[test]
    fn precedence_and_rationals() {
        let v = xy();
        let p = parse_poly("-3/4*x^2*y + (x+1)^2 - 2 * x", &v).unwrap();
        let x = Poly::var(&v, 0).unwrap();
        let y = Poly::var(&v, 1).unwrap();
        let expected = &(&(&x.pow(2) * &y).scale(&rat_frac(-3, 4)) + &x.pow(2)) + &Poly::one(&v);
        assert_eq!(p, expected);
        assert!(parse_poly("1/0", &v).is_err());
        assert!(parse_poly("(x", &v).is_err());
        assert!(parse_poly("x y", &v).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(200))]
        #[test]
        fn print_then_parse_is_identity(
            terms in proptest::collection::vec((-20i64..=20, 1i64..=6, 0u32..5, 0u32..5), 0..6)
        ) {
            let v = xy();
            let p = crate::poly::Poly::from_terms(
                &v,
                terms.iter().map(|(n, d, a, b)| (crate::poly::Monomial::from_exponents(vec![*a, *b]), rat_frac(*n, *d))),
            );
            proptest::prop_assert_eq!(parse_poly(&p.to_string(), &v).unwrap(), p);
        }
    }
}
