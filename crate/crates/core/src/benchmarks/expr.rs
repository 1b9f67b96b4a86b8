//! Parser and evaluator for the small arithmetic grammar used by the
//! multi-fidelity problem definition file.
//!
//! Grammar (usual precedence; `^` binds tightest and is right-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'pi' | 'x'<k> | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | exp | log | abs | sqrt
//! ```
//!
//! Variables are `x1..xd`; `log` is the natural logarithm.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use core::fmt;
use num_traits::Float;

#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    /// Byte offset into the source where parsing failed.
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.position, self.message)
    }
}

impl core::error::Error for ExprError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Abs => v.abs(),
            Func::Sqrt => v.sqrt(),
        }
    }
}

/// Parsed arithmetic expression over variables `x1..xd`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Parses `src` against a fixed input dimension.
    pub fn parse(src: &str, dim: usize) -> Result<Self, ExprError> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
            dim,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }

    /// Evaluates at `x` (length at least the parsed dimension).
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(e) => -e.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Expr::Call(f, e) => f.apply(e.eval(x)),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> ExprError {
        ExprError {
            position: self.pos,
            message: String::from(message),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let expo = self.unary()?;
            Ok(Expr::Pow(Box::new(base), Box::new(expo)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            _ => Err(self.err("expected a number, variable, function, or '('")),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = mark; // bare 'e' belongs to an identifier elsewhere
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| self.err("malformed number"))
    }

    fn ident(&mut self) -> Result<Expr, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
        if name == "pi" {
            return Ok(Expr::Num(core::f64::consts::PI));
        }
        if let Some(rest) = name.strip_prefix('x') {
            if let Ok(k) = rest.parse::<usize>() {
                if k == 0 || k > self.dim {
                    self.pos = start;
                    return Err(self.err("variable index out of range for this dimension"));
                }
                return Ok(Expr::Var(k - 1));
            }
        }
        if let Some(f) = Func::from_name(name) {
            if !self.eat(b'(') {
                return Err(self.err("expected '(' after function name"));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err("expected ')'"));
            }
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        self.pos = start;
        Err(ExprError {
            position: start,
            message: format!("unknown identifier `{name}`"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, dim: usize, x: &[f64]) -> f64 {
        Expr::parse(src, dim).unwrap().eval(x)
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(eval("1+2*3", 0, &[]), 7.0);
        assert_eq!(eval("(1+2)*3", 0, &[]), 9.0);
        assert_eq!(eval("2^3^2", 0, &[]), 512.0); // right-associative
        assert_eq!(eval("-2^2", 0, &[]), -4.0);
        assert_eq!(eval("(-2)^2", 0, &[]), 4.0);
        assert_eq!(eval("7/2/2", 0, &[]), 1.75);
        assert_eq!(eval("1 - 2 - 3", 0, &[]), -4.0);
    }

    #[test]
    fn functions_constants_variables() {
        assert!((eval("sin(pi/2)", 0, &[]) - 1.0).abs() < 1e-15);
        assert!((eval("exp(log(3.5))", 0, &[]) - 3.5).abs() < 1e-12);
        assert_eq!(eval("abs(-4.25)", 0, &[]), 4.25);
        assert_eq!(eval("sqrt(81)", 0, &[]), 9.0);
        assert_eq!(eval("x1*10+x2", 2, &[1.5, 2.0]), 17.0);
        assert_eq!(eval("1e-3 + 2.5e2", 0, &[]), 250.001);
    }

    #[test]
    fn forrester_shape() {
        let e = Expr::parse("(6*x1-2)^2*sin(12*x1-4)", 1).unwrap();
        let x = 0.757_248_757_478_721_8;
        assert!((e.eval(&[x]) - (-6.020_740_055_767_083)).abs() < 1e-9);
    }

    #[test]
    fn errors_carry_positions() {
        let e = Expr::parse("1agh", 0).unwrap_err();
        assert!(e.position > 0);
        assert!(Expr::parse("sin 3", 0).is_err());
        assert!(Expr::parse("x3+1", 2).is_err());
        assert!(Expr::parse("(1+2", 0).is_err());
        assert!(Expr::parse("1+*2", 0).is_err());
        assert!(Expr::parse("", 0).is_err());
    }
}
