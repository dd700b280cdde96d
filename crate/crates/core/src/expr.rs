//! Parser and evaluator for time-dependent coefficient expressions.
//!
//! Grammar (left-associative + − * /, right-associative ^):
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := unary ("^" factor)?
//! unary  := "-" unary | atom
//! atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
//! ```
//!
//! Identifiers: the variable `t`, constants `pi`, `e`, `qi`, `qj`, `qk`
//! (the quaternion imaginary units), and the functions `sin`, `cos`, `exp`,
//! `ln`, `abs`, `sqrt`. Values are quaternions; quaternion-valued entries are
//! built compositionally from real subexpressions and the unit constants.

use crate::error::{Error, Result};
use crate::quat::{self, Quaternion};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Abs,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Const {
    Pi,
    E,
    Qi,
    Qj,
    Qk,
}

/// Abstract syntax tree of a coefficient expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Number(f64),
    Time,
    Constant(Const),
    Neg(Box<Expression>),
    Binary(BinOp, Box<Expression>, Box<Expression>),
    Call(Func, Box<Expression>),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((i, Token::Plus));
                i += 1;
            }
            '-' => {
                out.push((i, Token::Minus));
                i += 1;
            }
            '*' => {
                out.push((i, Token::Star));
                i += 1;
            }
            '/' => {
                out.push((i, Token::Slash));
                i += 1;
            }
            '^' => {
                out.push((i, Token::Caret));
                i += 1;
            }
            '(' => {
                out.push((i, Token::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Token::RParen));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // Optional exponent, consumed only when well-formed so that
                // "2*e" still tokenizes as a product with Euler's constant.
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut k = i + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        i = k;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value = text.parse::<f64>().map_err(|_| Error::Parse {
                    position: start,
                    message: format!("invalid number literal '{text}'"),
                })?;
                out.push((start, Token::Number(value)));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((start, Token::Ident(src[start..i].to_string())));
            }
            _ => {
                return Err(Error::Parse {
                    position: i,
                    message: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [(usize, Token)],
    pos: usize,
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn position(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(p, _)| *p)
            .unwrap_or(self.src_len)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Token, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse {
                position: self.position(),
                message: format!("expected {what}"),
            })
        }
    }

    fn expr(&mut self) -> Result<Expression> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expression::Binary(BinOp::Add, Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expression::Binary(BinOp::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expression> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expression::Binary(BinOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expression::Binary(BinOp::Div, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expression> {
        let base = self.unary()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let exp = self.factor()?;
            Ok(Expression::Binary(BinOp::Pow, Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn unary(&mut self) -> Result<Expression> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            Ok(Expression::Neg(Box::new(self.unary()?)))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Expression> {
        let position = self.position();
        match self.advance() {
            Some(Token::Number(v)) => Ok(Expression::Number(v)),
            Some(Token::Ident(name)) => {
                if self.peek() == Some(&Token::LParen) {
                    let func = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "exp" => Func::Exp,
                        "ln" => Func::Ln,
                        "abs" => Func::Abs,
                        "sqrt" => Func::Sqrt,
                        _ => {
                            return Err(Error::Parse {
                                position,
                                message: format!("unknown function '{name}'"),
                            })
                        }
                    };
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(Token::RParen, "closing ')'")?;
                    Ok(Expression::Call(func, Box::new(arg)))
                } else {
                    match name.as_str() {
                        "t" => Ok(Expression::Time),
                        "pi" => Ok(Expression::Constant(Const::Pi)),
                        "e" => Ok(Expression::Constant(Const::E)),
                        "qi" => Ok(Expression::Constant(Const::Qi)),
                        "qj" => Ok(Expression::Constant(Const::Qj)),
                        "qk" => Ok(Expression::Constant(Const::Qk)),
                        _ => Err(Error::Parse {
                            position,
                            message: format!("unknown identifier '{name}'"),
                        }),
                    }
                }
            }
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "closing ')'")?;
                Ok(inner)
            }
            other => Err(Error::Parse {
                position,
                message: match other {
                    Some(tok) => format!("unexpected token {tok:?}"),
                    None => "unexpected end of input".to_string(),
                },
            }),
        }
    }
}

/// Parses an expression source string into an AST.
pub fn parse(src: &str) -> Result<Expression> {
    let tokens = tokenize(src)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        src_len: src.len(),
    };
    let e = parser.expr()?;
    if parser.pos != tokens.len() {
        return Err(Error::Parse {
            position: parser.position(),
            message: "trailing input after expression".to_string(),
        });
    }
    Ok(e)
}

impl Expression {
    /// Evaluates at time t. Domain failures (division by zero, ln of a
    /// non-positive real, non-real exponents) are reported with t.
    pub fn eval(&self, t: f64) -> Result<Quaternion> {
        let fail = |message: String| Error::Eval { t, message };
        let q = match self {
            Expression::Number(v) => Quaternion::real(*v),
            Expression::Time => Quaternion::real(t),
            Expression::Constant(c) => match c {
                Const::Pi => Quaternion::real(std::f64::consts::PI),
                Const::E => Quaternion::real(std::f64::consts::E),
                Const::Qi => quat::I,
                Const::Qj => quat::J,
                Const::Qk => quat::K,
            },
            Expression::Neg(e) => -e.eval(t)?,
            Expression::Binary(op, a, b) => {
                let x = a.eval(t)?;
                let y = b.eval(t)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        let inv = y.inverse().ok_or_else(|| fail("division by zero".into()))?;
                        x * inv
                    }
                    BinOp::Pow => {
                        if y.imag_norm() > 1e-13 * (1.0 + y.norm()) {
                            return Err(fail("exponent must be real".into()));
                        }
                        x.powf(y.re())
                            .ok_or_else(|| fail("power outside domain".into()))?
                    }
                }
            }
            Expression::Call(f, a) => {
                let x = a.eval(t)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Ln => x
                        .ln()
                        .ok_or_else(|| fail("ln of zero or negative real".into()))?,
                    Func::Abs => Quaternion::real(x.norm()),
                    Func::Sqrt => x
                        .sqrt()
                        .ok_or_else(|| fail("sqrt of negative real".into()))?,
                }
            }
        };
        if !q.is_finite() {
            return Err(fail("expression evaluated to a non-finite value".into()));
        }
        Ok(q)
    }

    /// Renders to a source string that reparses to an equivalent expression.
    pub fn render(&self) -> String {
        match self {
            Expression::Number(v) => {
                if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                    format!("(-{:?})", -v)
                } else {
                    format!("{v:?}")
                }
            }
            Expression::Time => "t".to_string(),
            Expression::Constant(c) => match c {
                Const::Pi => "pi",
                Const::E => "e",
                Const::Qi => "qi",
                Const::Qj => "qj",
                Const::Qk => "qk",
            }
            .to_string(),
            Expression::Neg(e) => format!("(-{})", e.render()),
            Expression::Binary(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                format!("({} {} {})", a.render(), sym, b.render())
            }
            Expression::Call(f, a) => {
                let name = match f {
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                    Func::Exp => "exp",
                    Func::Ln => "ln",
                    Func::Abs => "abs",
                    Func::Sqrt => "sqrt",
                };
                format!("{name}({})", a.render())
            }
        }
    }
}

/// A coefficient entry: an expression together with the left end of its time
/// domain. Continuity on the working interval is probed, not assumed.
#[derive(Debug, Clone)]
pub struct TimeFunction {
    pub expr: Expression,
    pub domain_start: f64,
}

impl TimeFunction {
    pub fn new(expr: Expression, domain_start: f64) -> Self {
        TimeFunction { expr, domain_start }
    }

    pub fn parse(src: &str, domain_start: f64) -> Result<Self> {
        Ok(TimeFunction::new(parse(src)?, domain_start))
    }

    pub fn constant(v: f64) -> Self {
        TimeFunction::new(Expression::Number(v), f64::NEG_INFINITY)
    }

    pub fn eval(&self, t: f64) -> Result<Quaternion> {
        self.expr.eval(t)
    }

    /// Evaluates and requires a real value.
    pub fn eval_real(&self, t: f64) -> Result<f64> {
        let q = self.eval(t)?;
        if q.imag_norm() > 1e-9 * (1.0 + q.norm()) {
            return Err(Error::Eval {
                t,
                message: "value is not real".to_string(),
            });
        }
        Ok(q.re())
    }

    /// Probes continuity on [a, b]: at each of n points, a finite-difference
    /// jump that fails to shrink when the step shrinks flags a discontinuity
    /// (or a domain failure inside the interval).
    pub fn check_continuity(&self, a: f64, b: f64, n: usize) -> Result<()> {
        let h = (b - a) / (n.max(2) as f64);
        let fine = h / 64.0;
        let mut scale = 0.0_f64;
        let mut probes = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let t = a + h * k as f64;
            let v = self.eval(t)?;
            scale = scale.max(v.norm());
            probes.push((t, v));
        }
        let scale = scale.max(1.0);
        for &(t, v) in probes.iter().take(n) {
            let coarse = (self.eval(t + h)? - v).norm();
            if coarse > 0.05 * scale {
                let near = (self.eval(t + fine)? - v).norm();
                if near > 0.5 * coarse {
                    return Err(Error::Eval {
                        t,
                        message: "function appears discontinuous near this point".to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}
