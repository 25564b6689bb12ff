//! Exactly differentiable expression trees over chart coordinates.
//!
//! Trees are immutable; differentiation returns new trees with no
//! simplification beyond constant folding. The only non-smooth node kinds
//! are `Abs`/`Sgn` of a single designated coordinate (the reflection
//! direction), with the convention sgn(0) = +1, so every interface
//! evaluation is upper-sided.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Coordinate x_i, 1-based.
    Var(usize),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    /// Integer power of a subtree.
    Pow(Arc<Expr>, i32),
    Neg(Arc<Expr>),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Exp(Arc<Expr>),
    Sqrt(Arc<Expr>),
    /// |x_i| of the reflection coordinate.
    Abs(usize),
    /// sgn(x_i) of the reflection coordinate; sgn(0) = +1.
    Sgn(usize),
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn is_const_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    fn is_const_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 1.0)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            _ if a.is_const_zero() => b,
            _ if b.is_const_zero() => a,
            _ => Expr::Add(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
            _ if b.is_const_zero() => a,
            _ if a.is_const_zero() => Expr::neg(b),
            _ => Expr::Sub(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            _ if a.is_const_zero() || b.is_const_zero() => Expr::zero(),
            _ if a.is_const_one() => b,
            _ if b.is_const_one() => a,
            _ => Expr::Mul(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) if *y != 0.0 => Expr::Const(x / y),
            _ if a.is_const_zero() => Expr::zero(),
            _ if b.is_const_one() => a,
            _ => Expr::Div(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn pow(a: Expr, m: i32) -> Expr {
        match (&a, m) {
            (_, 0) => Expr::one(),
            (_, 1) => a,
            (Expr::Const(x), _) => Expr::Const(x.powi(m)),
            _ => Expr::Pow(Arc::new(a), m),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match &a {
            Expr::Const(x) => Expr::Const(-x),
            Expr::Neg(inner) => inner.as_ref().clone(),
            _ => Expr::Neg(Arc::new(a)),
        }
    }

    pub fn sin(a: Expr) -> Expr {
        match &a {
            Expr::Const(x) => Expr::Const(x.sin()),
            _ => Expr::Sin(Arc::new(a)),
        }
    }

    pub fn cos(a: Expr) -> Expr {
        match &a {
            Expr::Const(x) => Expr::Const(x.cos()),
            _ => Expr::Cos(Arc::new(a)),
        }
    }

    pub fn exp(a: Expr) -> Expr {
        match &a {
            Expr::Const(x) => Expr::Const(x.exp()),
            _ => Expr::Exp(Arc::new(a)),
        }
    }

    pub fn sqrt(a: Expr) -> Expr {
        match &a {
            Expr::Const(x) if *x >= 0.0 => Expr::Const(x.sqrt()),
            _ => Expr::Sqrt(Arc::new(a)),
        }
    }

    /// Evaluate at a point (coordinates 1-based in the slice order).
    pub fn eval(&self, p: &[f64]) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => {
                if *i < 1 || *i > p.len() {
                    return Err(Error::IndexOutOfRange {
                        index: *i,
                        n: p.len(),
                    });
                }
                p[*i - 1]
            }
            Expr::Add(a, b) => a.eval(p)? + b.eval(p)?,
            Expr::Sub(a, b) => a.eval(p)? - b.eval(p)?,
            Expr::Mul(a, b) => a.eval(p)? * b.eval(p)?,
            Expr::Div(a, b) => {
                let d = b.eval(p)?;
                if d == 0.0 {
                    return Err(Error::DivisionByZero { point: p.to_vec() });
                }
                a.eval(p)? / d
            }
            Expr::Pow(a, m) => a.eval(p)?.powi(*m),
            Expr::Neg(a) => -a.eval(p)?,
            Expr::Sin(a) => a.eval(p)?.sin(),
            Expr::Cos(a) => a.eval(p)?.cos(),
            Expr::Exp(a) => a.eval(p)?.exp(),
            Expr::Sqrt(a) => a.eval(p)?.sqrt(),
            Expr::Abs(i) => p[*i - 1].abs(),
            // sgn(0) = +1: the interface value is the limit from above.
            Expr::Sgn(i) => {
                if p[*i - 1] >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        })
    }

    /// Exact partial derivative ∂/∂x_i. The chain rule sends abs to sgn and
    /// sgn to 0; away from the interface this is the classical derivative.
    pub fn partial(&self, i: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(j) => {
                if *j == i {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Add(a, b) => Expr::add(a.partial(i), b.partial(i)),
            Expr::Sub(a, b) => Expr::sub(a.partial(i), b.partial(i)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.partial(i), b.as_ref().clone()),
                Expr::mul(a.as_ref().clone(), b.partial(i)),
            ),
            Expr::Div(a, b) => Expr::div(
                Expr::sub(
                    Expr::mul(a.partial(i), b.as_ref().clone()),
                    Expr::mul(a.as_ref().clone(), b.partial(i)),
                ),
                Expr::pow(b.as_ref().clone(), 2),
            ),
            Expr::Pow(a, m) => Expr::mul(
                Expr::mul(
                    Expr::Const(*m as f64),
                    Expr::pow(a.as_ref().clone(), m - 1),
                ),
                a.partial(i),
            ),
            Expr::Neg(a) => Expr::neg(a.partial(i)),
            Expr::Sin(a) => Expr::mul(Expr::cos(a.as_ref().clone()), a.partial(i)),
            Expr::Cos(a) => Expr::neg(Expr::mul(Expr::sin(a.as_ref().clone()), a.partial(i))),
            Expr::Exp(a) => Expr::mul(Expr::exp(a.as_ref().clone()), a.partial(i)),
            Expr::Sqrt(a) => Expr::div(
                a.partial(i),
                Expr::mul(Expr::Const(2.0), Expr::sqrt(a.as_ref().clone())),
            ),
            Expr::Abs(j) => {
                if *j == i {
                    Expr::Sgn(*j)
                } else {
                    Expr::zero()
                }
            }
            Expr::Sgn(_) => Expr::zero(),
        }
    }

    /// Whether the tree contains an abs/sgn node (piecewise across the
    /// interface).
    pub fn has_interface_node(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Abs(_) | Expr::Sgn(_) => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.has_interface_node() || b.has_interface_node()
            }
            Expr::Pow(a, _)
            | Expr::Neg(a)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Exp(a)
            | Expr::Sqrt(a) => a.has_interface_node(),
        }
    }

    /// Largest variable index appearing in the tree (0 if none).
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) | Expr::Abs(i) | Expr::Sgn(i) => *i,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
            Expr::Pow(a, _)
            | Expr::Neg(a)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Exp(a)
            | Expr::Sqrt(a) => a.max_var(),
        }
    }

    /// Substitute x_n := 0 (restriction to the interface hyperplane), using
    /// abs(0) = 0 and sgn(0) = +1.
    pub fn restrict_to_interface(&self, n: usize) -> Expr {
        self.map_coordinate(n, &Expr::zero(), &Expr::zero(), &Expr::one())
    }

    /// Substitute x_n := |x_n| (even reflection of the argument). Existing
    /// abs nodes are idempotent and sgn(|x_n|) = +1.
    pub fn reflect_argument(&self, n: usize) -> Expr {
        self.map_coordinate(n, &Expr::Abs(n), &Expr::Abs(n), &Expr::one())
    }

    fn map_coordinate(&self, n: usize, var: &Expr, abs: &Expr, sgn: &Expr) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(i) => {
                if *i == n {
                    var.clone()
                } else {
                    self.clone()
                }
            }
            Expr::Abs(i) => {
                if *i == n {
                    abs.clone()
                } else {
                    self.clone()
                }
            }
            Expr::Sgn(i) => {
                if *i == n {
                    sgn.clone()
                } else {
                    self.clone()
                }
            }
            Expr::Add(a, b) => Expr::add(
                a.map_coordinate(n, var, abs, sgn),
                b.map_coordinate(n, var, abs, sgn),
            ),
            Expr::Sub(a, b) => Expr::sub(
                a.map_coordinate(n, var, abs, sgn),
                b.map_coordinate(n, var, abs, sgn),
            ),
            Expr::Mul(a, b) => Expr::mul(
                a.map_coordinate(n, var, abs, sgn),
                b.map_coordinate(n, var, abs, sgn),
            ),
            Expr::Div(a, b) => Expr::div(
                a.map_coordinate(n, var, abs, sgn),
                b.map_coordinate(n, var, abs, sgn),
            ),
            Expr::Pow(a, m) => Expr::pow(a.map_coordinate(n, var, abs, sgn), *m),
            Expr::Neg(a) => Expr::neg(a.map_coordinate(n, var, abs, sgn)),
            Expr::Sin(a) => Expr::sin(a.map_coordinate(n, var, abs, sgn)),
            Expr::Cos(a) => Expr::cos(a.map_coordinate(n, var, abs, sgn)),
            Expr::Exp(a) => Expr::exp(a.map_coordinate(n, var, abs, sgn)),
            Expr::Sqrt(a) => Expr::sqrt(a.map_coordinate(n, var, abs, sgn)),
        }
    }

    /// Substitute a general expression for x_j. Fails on abs/sgn nodes of
    /// x_j, which only accept the coordinate itself.
    pub fn substitute_var(&self, j: usize, repl: &Expr) -> Result<Expr> {
        Ok(match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(i) => {
                if *i == j {
                    repl.clone()
                } else {
                    self.clone()
                }
            }
            Expr::Abs(i) | Expr::Sgn(i) => {
                if *i == j {
                    return Err(Error::Invalid(
                        "cannot substitute a general expression into abs/sgn".into(),
                    ));
                }
                self.clone()
            }
            Expr::Add(a, b) => Expr::add(a.substitute_var(j, repl)?, b.substitute_var(j, repl)?),
            Expr::Sub(a, b) => Expr::sub(a.substitute_var(j, repl)?, b.substitute_var(j, repl)?),
            Expr::Mul(a, b) => Expr::mul(a.substitute_var(j, repl)?, b.substitute_var(j, repl)?),
            Expr::Div(a, b) => Expr::div(a.substitute_var(j, repl)?, b.substitute_var(j, repl)?),
            Expr::Pow(a, m) => Expr::pow(a.substitute_var(j, repl)?, *m),
            Expr::Neg(a) => Expr::neg(a.substitute_var(j, repl)?),
            Expr::Sin(a) => Expr::sin(a.substitute_var(j, repl)?),
            Expr::Cos(a) => Expr::cos(a.substitute_var(j, repl)?),
            Expr::Exp(a) => Expr::exp(a.substitute_var(j, repl)?),
            Expr::Sqrt(a) => Expr::sqrt(a.substitute_var(j, repl)?),
        })
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

// Printing with explicit precedence so that print → parse round-trips.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn fmt_child(e: &Expr, parent: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(e) < parent {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Add(a, b) => {
                fmt_child(a, 1, f)?;
                write!(f, " + ")?;
                fmt_child(b, 2, f)
            }
            Expr::Sub(a, b) => {
                fmt_child(a, 1, f)?;
                write!(f, " - ")?;
                fmt_child(b, 2, f)
            }
            Expr::Mul(a, b) => {
                fmt_child(a, 2, f)?;
                write!(f, "*")?;
                fmt_child(b, 3, f)
            }
            Expr::Div(a, b) => {
                fmt_child(a, 2, f)?;
                write!(f, "/")?;
                fmt_child(b, 5, f)
            }
            Expr::Pow(a, m) => {
                fmt_child(a, 5, f)?;
                if *m < 0 {
                    write!(f, "^({m})")
                } else {
                    write!(f, "^{m}")
                }
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                fmt_child(a, 4, f)
            }
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Abs(i) => write!(f, "abs(x{i})"),
            Expr::Sgn(i) => write!(f, "sgn(x{i})"),
        }
    }
}

/// Recursive-descent parser for the expression grammar: identifiers
/// `x1..x9`, decimal literals with optional exponent, `+ - * / ^`,
/// functions `sin cos exp sqrt abs sgn`, parentheses. `abs`/`sgn` accept
/// only the reflection coordinate `x{n}`.
pub fn parse_expression(text: &str, n: usize) -> Result<Expr> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
        n,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    n: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.term()?;
                    lhs = Expr::add(lhs, rhs);
                }
                Some(b'-') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.term()?;
                    lhs = Expr::sub(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.unary()?;
                    lhs = Expr::mul(lhs, rhs);
                }
                Some(b'/') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.unary()?;
                    lhs = Expr::div(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expr::neg(inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let m = self.int_exponent()?;
            return Ok(Expr::pow(base, m));
        }
        Ok(base)
    }

    fn int_exponent(&mut self) -> Result<i32> {
        let mut negate = false;
        let mut paren = false;
        if self.peek() == Some(b'(') {
            paren = true;
            self.pos += 1;
            self.skip_ws();
        }
        if self.peek() == Some(b'-') {
            negate = true;
            self.pos += 1;
        }
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected integer exponent"));
        }
        let digits = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        let m: i32 = digits
            .parse()
            .map_err(|_| self.err("exponent out of range"))?;
        if paren {
            self.skip_ws();
            if self.peek() != Some(b')') {
                return Err(self.err("expected ')' after exponent"));
            }
            self.pos += 1;
        }
        Ok(if negate { -m } else { m })
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            _ => Err(self.err("expected expression")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if self.peek() == Some(b'e') || self.peek() == Some(b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.peek() == Some(b'+') || self.peek() == Some(b'-') {
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
        let s = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        let v: f64 = s.parse().map_err(|_| self.err("malformed number"))?;
        Ok(Expr::Const(v))
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        if let Some(rest) = name.strip_prefix('x') {
            if let Ok(i) = rest.parse::<usize>() {
                if i < 1 || i > self.n {
                    self.pos = start;
                    return Err(self.err(&format!(
                        "variable index {i} out of range for dimension {}",
                        self.n
                    )));
                }
                return Ok(Expr::Var(i));
            }
        }
        match name {
            "sin" | "cos" | "exp" | "sqrt" => {
                let arg = self.func_arg()?;
                Ok(match name {
                    "sin" => Expr::sin(arg),
                    "cos" => Expr::cos(arg),
                    "exp" => Expr::exp(arg),
                    _ => Expr::sqrt(arg),
                })
            }
            "abs" | "sgn" => {
                let arg = self.func_arg()?;
                let Expr::Var(i) = arg else {
                    return Err(self.err(&format!(
                        "{name} accepts only the reflection coordinate x{}",
                        self.n
                    )));
                };
                if i != self.n {
                    return Err(self.err(&format!(
                        "{name} accepts only the reflection coordinate x{}",
                        self.n
                    )));
                }
                Ok(if name == "abs" {
                    Expr::Abs(i)
                } else {
                    Expr::Sgn(i)
                })
            }
            _ => {
                self.pos = start;
                Err(self.err(&format!("unknown identifier '{name}'")))
            }
        }
    }

    fn func_arg(&mut self) -> Result<Expr> {
        self.skip_ws();
        if self.peek() != Some(b'(') {
            return Err(self.err("expected '(' after function name"));
        }
        self.pos += 1;
        let e = self.expr()?;
        self.skip_ws();
        if self.peek() != Some(b')') {
            return Err(self.err("expected ')'"));
        }
        self.pos += 1;
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(e: &Expr, p: &[f64]) -> f64 {
        e.eval(p).unwrap()
    }

    #[test]
    fn parse_simple() {
        let e = parse_expression("sin(x3)", 3).unwrap();
        assert_eq!(e, Expr::Sin(Arc::new(Expr::Var(3))));

        let e = parse_expression("x1^2 - 3*x1*x2^2", 2).unwrap();
        assert!((ev(&e, &[2.0, 1.0]) - (4.0 - 6.0)).abs() < 1e-15);

        let e = parse_expression("sgn(x2)*x1", 2).unwrap();
        assert_eq!(ev(&e, &[3.0, -1.0]), -3.0);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_expression("x1 + @", 2).unwrap_err();
        match err {
            Error::Parse { position, .. } => assert_eq!(position, 5),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(parse_expression("x5", 3).is_err());
        assert!(parse_expression("abs(x1)", 3).is_err());
        assert!(parse_expression("abs(x1 + x3)", 3).is_err());
        assert!(parse_expression("foo(x1)", 3).is_err());
    }

    #[test]
    fn print_parse_round_trip() {
        let samples = [
            "x1^2 - 3*x1*x2^2",
            "sin(x1)*cos(x2) + exp(x1/(1 + x2^2))",
            "sgn(x2)*abs(x2) - sqrt(1 + x1^2)",
            "-(x1 + x2)^3/2.5",
            "1e-3*x1 + 0.25",
        ];
        for s in samples {
            let e = parse_expression(s, 2).unwrap();
            let printed = e.to_string();
            let reparsed = parse_expression(&printed, 2).unwrap();
            assert_eq!(e, reparsed, "round trip failed for {s}: printed {printed}");
        }
    }

    #[test]
    fn eval_sgn_zero_is_plus_one() {
        let e = parse_expression("sgn(x2)*x1", 2).unwrap();
        assert_eq!(ev(&e, &[3.0, 0.0]), 3.0);
        let e = parse_expression("abs(x2)", 2).unwrap();
        assert_eq!(ev(&e, &[0.0, -0.5]), 0.5);
    }

    #[test]
    fn eval_basic() {
        let e = parse_expression("x1^2 + x2", 2).unwrap();
        assert_eq!(ev(&e, &[2.0, 1.0]), 5.0);
    }

    #[test]
    fn division_by_zero_detected() {
        let e = parse_expression("x1/x2", 2).unwrap();
        assert!(matches!(
            e.eval(&[1.0, 0.0]),
            Err(Error::DivisionByZero { .. })
        ));
    }

    #[test]
    fn partial_polynomial() {
        // ∂₁(x1²·x2) = 2·x1·x2
        let e = parse_expression("x1^2*x2", 2).unwrap();
        let d = e.partial(1);
        for p in [[1.0, 2.0], [0.5, -1.5], [3.0, 0.25]] {
            assert!((ev(&d, &p) - 2.0 * p[0] * p[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn partial_abs_is_sgn() {
        let e = Expr::Abs(2);
        assert_eq!(e.partial(2), Expr::Sgn(2));
        assert_eq!(e.partial(1), Expr::zero());
    }

    #[test]
    fn restriction_and_reflection_substitutions() {
        let e = parse_expression("sgn(x2)*x1 + abs(x2) + x2^2", 2).unwrap();
        let r = e.restrict_to_interface(2);
        assert!((ev(&r, &[3.0, 99.0]) - 3.0).abs() < 1e-15);

        let f = parse_expression("x2", 2).unwrap();
        let refl = f.reflect_argument(2);
        assert_eq!(refl, Expr::Abs(2));
        assert_eq!(ev(&refl, &[0.0, -0.7]), 0.7);
    }
}
