//! Complex polynomial potentials `V(x)`.
//!
//! Expressions are parsed from a small infix language:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' uint)?
//! atom   := number | 'i' | 'x' | '(' expr ')' | '-' factor
//! ```
//!
//! Unary minus binds looser than `^`, so `-x^4` is `-(x^4)`.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::grid::Grid;

/// Largest exponent accepted by [`parse_potential`].
pub const DEFAULT_MAX_EXPONENT: u32 = 16;

/// Default relative tolerance of [`validate_pt`].
pub const DEFAULT_PT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {position}: expected {expected}")]
    Syntax {
        position: usize,
        expected: &'static str,
    },
    #[error("exponent {exponent} at offset {position} exceeds the cap {cap}")]
    Overflow {
        position: usize,
        exponent: u64,
        cap: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("potential is not finite at x = {x}")]
pub struct EvalError {
    pub x: f64,
}

/// Expression tree of a potential.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialExpr {
    Const(Complex64),
    /// The imaginary unit `i`.
    I,
    X,
    Neg(Box<PotentialExpr>),
    Add(Box<PotentialExpr>, Box<PotentialExpr>),
    Sub(Box<PotentialExpr>, Box<PotentialExpr>),
    Mul(Box<PotentialExpr>, Box<PotentialExpr>),
    Pow(Box<PotentialExpr>, u32),
}

impl PotentialExpr {
    /// Evaluates the tree at `x` without any error check.
    pub fn value(&self, x: f64) -> Complex64 {
        match self {
            PotentialExpr::Const(c) => *c,
            PotentialExpr::I => Complex64::i(),
            PotentialExpr::X => Complex64::new(x, 0.0),
            PotentialExpr::Neg(a) => -a.value(x),
            PotentialExpr::Add(a, b) => a.value(x) + b.value(x),
            PotentialExpr::Sub(a, b) => a.value(x) - b.value(x),
            PotentialExpr::Mul(a, b) => a.value(x) * b.value(x),
            PotentialExpr::Pow(a, k) => a.value(x).powu(*k),
        }
    }

    /// Values at every interior grid point.
    pub fn sample(&self, grid: &Grid) -> Result<Vec<Complex64>, EvalError> {
        grid.points().map(|x| eval_potential(self, x)).collect()
    }
}

/// Canonical, fully parenthesized form. Parsing it yields an equivalent tree.
impl fmt::Display for PotentialExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialExpr::Const(c) => {
                // `{:?}` on f64 prints the shortest round-tripping decimal.
                match (c.re == 0.0, c.im == 0.0) {
                    (_, true) => write!(f, "({:?})", c.re),
                    (true, false) => write!(f, "({:?}*i)", c.im),
                    (false, false) => write!(f, "({:?}+{:?}*i)", c.re, c.im),
                }
            }
            PotentialExpr::I => write!(f, "i"),
            PotentialExpr::X => write!(f, "x"),
            PotentialExpr::Neg(a) => write!(f, "(-{a})"),
            PotentialExpr::Add(a, b) => write!(f, "({a}+{b})"),
            PotentialExpr::Sub(a, b) => write!(f, "({a}-{b})"),
            PotentialExpr::Mul(a, b) => write!(f, "({a}*{b})"),
            PotentialExpr::Pow(a, k) => write!(f, "({a}^{k})"),
        }
    }
}

pub fn parse_potential(src: &str) -> Result<PotentialExpr, ParseError> {
    parse_potential_with_cap(src, DEFAULT_MAX_EXPONENT)
}

pub fn parse_potential_with_cap(src: &str, max_exponent: u32) -> Result<PotentialExpr, ParseError> {
    let mut parser = Parser {
        src: src.as_bytes(),
        pos: 0,
        cap: max_exponent,
    };
    parser.skip_ws();
    if parser.at_end() {
        return Err(parser.error("expression"));
    }
    let expr = parser.expr()?;
    parser.skip_ws();
    if !parser.at_end() {
        return Err(parser.error("operator or end of input"));
    }
    Ok(expr)
}

pub fn eval_potential(expr: &PotentialExpr, x: f64) -> Result<Complex64, EvalError> {
    let v = expr.value(x);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(EvalError { x })
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    cap: u32,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn error(&self, expected: &'static str) -> ParseError {
        ParseError::Syntax {
            position: self.pos,
            expected,
        }
    }

    fn expr(&mut self) -> Result<PotentialExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = PotentialExpr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = PotentialExpr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<PotentialExpr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            self.skip_ws();
            if self.peek() == Some(b'*') {
                self.pos += 1;
                let rhs = self.factor()?;
                lhs = PotentialExpr::Mul(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<PotentialExpr, ParseError> {
        let base = self.atom()?;
        self.skip_ws();
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("unsigned integer exponent"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let exponent = digits.parse::<u64>().unwrap_or(u64::MAX);
        if exponent > u64::from(self.cap) {
            return Err(ParseError::Overflow {
                position: start,
                exponent,
                cap: self.cap,
            });
        }
        Ok(PotentialExpr::Pow(Box::new(base), exponent as u32))
    }

    fn atom(&mut self) -> Result<PotentialExpr, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'i') => {
                self.pos += 1;
                Ok(PotentialExpr::I)
            }
            Some(b'x') => {
                self.pos += 1;
                Ok(PotentialExpr::X)
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.error("')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'-') => {
                self.pos += 1;
                let inner = self.factor()?;
                Ok(PotentialExpr::Neg(Box::new(inner)))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            _ => Err(self.error("number, 'i', 'x', '(' or '-'")),
        }
    }

    fn number(&mut self) -> Result<PotentialExpr, ParseError> {
        let start = self.pos;
        let mut mantissa_digits = 0;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
            mantissa_digits += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
                mantissa_digits += 1;
            }
        }
        if mantissa_digits == 0 {
            return Err(ParseError::Syntax {
                position: start,
                expected: "digit",
            });
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            if exp_start == self.pos {
                return Err(self.error("exponent digits"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
            position: start,
            expected: "number",
        })?;
        Ok(PotentialExpr::Const(Complex64::new(value, 0.0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtValidation {
    pub pt_symmetric: bool,
    pub imag_nonzero: bool,
    /// `max |V*(-x) - V(x)|` over the grid.
    pub max_violation: f64,
}

/// Samples `V*(-x) = V(x)` and `Im V != 0` on the grid points.
///
/// A point where the potential is not finite counts as an infinite violation.
pub fn validate_pt(expr: &PotentialExpr, grid: &Grid, tol: f64) -> PtValidation {
    let mut max_violation = 0.0_f64;
    let mut max_abs = 0.0_f64;
    let mut max_imag = 0.0_f64;
    for x in grid.points() {
        let (v, v_reflected) = match (eval_potential(expr, x), eval_potential(expr, -x)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                max_violation = f64::INFINITY;
                continue;
            }
        };
        max_violation = max_violation.max((v_reflected.conj() - v).norm());
        max_abs = max_abs.max(v.norm());
        max_imag = max_imag.max(v.im.abs());
    }
    PtValidation {
        pt_symmetric: max_violation <= tol * (1.0 + max_abs),
        imag_nonzero: max_imag > tol,
        max_violation,
    }
}
