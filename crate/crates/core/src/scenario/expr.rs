//! Rational expressions in the sequence index `n`.
//!
//! Grammar: sums and products of rational literals (`3`, `1/2`, `0.25`,
//! `1e-9`), the variable `n`, parentheses and unary minus. Division by an
//! expression that vanishes is an evaluation error.

use std::fmt;
use std::str::FromStr;

use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(Rat),
    N,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError(pub String);

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Expr {
    pub fn eval(&self, n: usize) -> Result<Rat, ExprError> {
        Ok(match self {
            Expr::Lit(r) => r.clone(),
            Expr::N => Rat::from_int(n as i64),
            Expr::Neg(a) => -a.eval(n)?,
            Expr::Add(a, b) => &a.eval(n)? + &b.eval(n)?,
            Expr::Sub(a, b) => &a.eval(n)? - &b.eval(n)?,
            Expr::Mul(a, b) => &a.eval(n)? * &b.eval(n)?,
            Expr::Div(a, b) => {
                let d = b.eval(n)?;
                if d.is_zero() {
                    return Err(ExprError(format!("division by zero at n = {n}")));
                }
                &a.eval(n)? / &d
            }
        })
    }

    /// The value when the expression does not mention `n`.
    pub fn constant(&self) -> Option<Rat> {
        if self.mentions_n() {
            None
        } else {
            self.eval(0).ok()
        }
    }

    pub fn mentions_n(&self) -> bool {
        match self {
            Expr::Lit(_) => false,
            Expr::N => true,
            Expr::Neg(a) => a.mentions_n(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.mentions_n() || b.mentions_n(),
        }
    }

    /// A non-negative integer value, for coordinate indices.
    pub fn eval_index(&self, n: usize) -> Result<usize, ExprError> {
        let v = self.eval(n)?;
        match v.to_i64() {
            Some(i) if i >= 0 => Ok(i as usize),
            _ => Err(ExprError(format!("index {v} at n = {n} is not a non-negative integer"))),
        }
    }
}

impl FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Expr, ExprError> {
        let mut p = Parser { src: s, pos: 0 };
        let e = p.sum()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> ExprError {
        ExprError(format!("{what} at offset {} in `{}`", self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut e = self.product()?;
        loop {
            if self.eat('+') {
                e = Expr::Add(Box::new(e), Box::new(self.product()?));
            } else if self.eat('-') {
                e = Expr::Sub(Box::new(e), Box::new(self.product()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut e = self.unary()?;
        loop {
            if self.eat('*') {
                e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
            } else if self.eat('/') {
                e = Expr::Div(Box::new(e), Box::new(self.unary()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        self.skip_ws();
        if self.eat('(') {
            let e = self.sum()?;
            if !self.eat(')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(e);
        }
        match self.peek() {
            Some('n') => {
                self.pos += 1;
                Ok(Expr::N)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
                    self.pos += 1;
                }
                // Exponent: `1e-9`, `2.5E3`.
                if matches!(self.peek(), Some('e' | 'E')) {
                    let save = self.pos;
                    self.pos += 1;
                    if matches!(self.peek(), Some('+' | '-')) {
                        self.pos += 1;
                    }
                    if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                            self.pos += 1;
                        }
                    } else {
                        self.pos = save;
                    }
                }
                let lit = &self.src[start..self.pos];
                lit.parse::<Rat>()
                    .map(Expr::Lit)
                    .map_err(|_| ExprError(format!("bad number `{lit}` in `{}`", self.src)))
            }
            _ => Err(self.error("expected a number, `n` or `(`")),
        }
    }
}
