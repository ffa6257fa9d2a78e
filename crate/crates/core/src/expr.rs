//! Recursive-descent parser and evaluator for residual expressions
//! G(x, y, dy), so arbitrary first-order BVPs can be stated on the command
//! line.
//!
//! Grammar (EBNF, whitespace insensitive):
//!
//! ```text
//! expr   := term   { ("+" | "-") term }
//! term   := factor { ("*" | "/") factor }
//! factor := "-" factor | power
//! power  := atom [ "^" factor ]          (right-associative)
//! atom   := number | name "(" expr ")" | name | "(" expr ")"
//! name   := "x" | "y" | "dy" | "exp" | "ln" | "sin" | "cos" | "sqrt" | "abs"
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` parses as `-(x^2)`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::problem::ResidualFn;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier {name:?} at byte offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
}

/// Evaluation failure carrying the offending subexpression in rendered form.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("cannot evaluate {subexpression}: {message}")]
pub struct EvalError {
    pub subexpression: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Dy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        match name {
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            _ => None,
        }
    }
}

/// Syntax tree of a residual expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Variable values for evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Bindings {
    pub x: f64,
    pub y: f64,
    pub dy: f64,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // negative literals need their own parentheses: a bare "-2 ^ 0"
            // would rebind as "-(2 ^ 0)"
            Expr::Num(v) if v.is_sign_negative() => write!(f, "({v})"),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Var(Var::Y) => f.write_str("y"),
            Expr::Var(Var::Dy) => f.write_str("dy"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

/// Unambiguous fully-parenthesized form; `parse(render(e))` rebuilds an
/// equivalent tree.
pub fn render(expr: &Expr) -> String {
    expr.to_string()
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8) -> bool {
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, offset: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset,
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Bin(BinOp::Add, Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Bin(BinOp::Sub, Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Bin(BinOp::Mul, Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Bin(BinOp::Div, Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            // right-associative; the exponent may carry its own unary minus
            let exponent = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.error(self.pos, "expected an expression, found end of input")),
            Some(b'(') => {
                let open = self.pos;
                self.pos += 1;
                let inner = self.expr().map_err(|e| match e {
                    // an unexpected end of input inside parentheses reads
                    // best as an unbalanced parenthesis
                    ParseError::Syntax { offset, .. } if offset >= self.bytes.len() => {
                        self.error(open, "unbalanced parenthesis")
                    }
                    other => other,
                })?;
                if !self.eat(b')') {
                    return Err(self.error(open, "unbalanced parenthesis"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(c) => Err(self.error(
                self.pos,
                format!("unexpected character {:?}", char::from(c)),
            )),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_digit() || *c == b'.')
        {
            self.pos += 1;
        }
        if self.bytes.get(self.pos).is_some_and(|c| *c == b'e' || *c == b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.bytes.get(self.pos).is_some_and(|c| *c == b'+' || *c == b'-') {
                self.pos += 1;
            }
            if self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
                while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
                    self.pos += 1;
                }
            } else {
                // not an exponent after all (e.g. "2*exp(x)" never gets
                // here, but "2e" alone would)
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| self.error(start, format!("invalid number literal {text:?}")))
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap().to_string();
        if self.eat(b'(') {
            let func = Func::from_name(&name).ok_or(ParseError::UnknownIdentifier {
                offset: start,
                name: name.clone(),
            })?;
            let arg = self.expr().map_err(|e| match e {
                ParseError::Syntax { offset, .. } if offset >= self.bytes.len() => {
                    self.error(start, format!("unterminated call to {name}"))
                }
                other => other,
            })?;
            if !self.eat(b')') {
                return Err(self.error(start, format!("unterminated call to {name}")));
            }
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        match name.as_str() {
            "x" => Ok(Expr::Var(Var::X)),
            "y" => Ok(Expr::Var(Var::Y)),
            "dy" => Ok(Expr::Var(Var::Dy)),
            _ => Err(ParseError::UnknownIdentifier { offset: start, name }),
        }
    }
}

/// Parses an expression over the variables `x`, `y`, `dy`.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    if p.peek().is_none() {
        return Err(p.error(0, "empty expression"));
    }
    let expr = p.expr()?;
    if let Some(c) = p.peek() {
        return Err(p.error(p.pos, format!("unexpected trailing character {:?}", char::from(c))));
    }
    Ok(expr)
}

fn check_finite(value: f64, node: &Expr, what: &str) -> Result<f64, EvalError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EvalError {
            subexpression: render(node),
            message: format!("{what} produced a nonfinite value"),
        })
    }
}

/// Evaluates an expression under the given variable bindings. Domain
/// violations (ln or sqrt of a negative, division blowing up, overflow)
/// are reported with the offending subexpression.
pub fn eval(expr: &Expr, env: &Bindings) -> Result<f64, EvalError> {
    match expr {
        Expr::Num(v) => Ok(*v),
        Expr::Var(Var::X) => Ok(env.x),
        Expr::Var(Var::Y) => Ok(env.y),
        Expr::Var(Var::Dy) => Ok(env.dy),
        Expr::Neg(inner) => Ok(-eval(inner, env)?),
        Expr::Bin(op, lhs, rhs) => {
            let l = eval(lhs, env)?;
            let r = eval(rhs, env)?;
            let value = match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => l / r,
                BinOp::Pow => l.powf(r),
            };
            check_finite(value, expr, "the operation")
        }
        Expr::Call(func, arg) => {
            let a = eval(arg, env)?;
            let value = match func {
                Func::Exp => a.exp(),
                Func::Ln => a.ln(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Sqrt => a.sqrt(),
                Func::Abs => a.abs(),
            };
            check_finite(value, expr, "the function")
        }
    }
}

/// Compiles an expression into a shareable residual G(x, y, s); evaluation
/// failures surface as NaN, which downstream consumers flag.
pub fn compile_residual(expr: Expr) -> ResidualFn {
    Arc::new(move |x, y, dy| eval(&expr, &Bindings { x, y, dy }).unwrap_or(f64::NAN))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn eval_str(text: &str, env: &Bindings) -> f64 {
        eval(&parse(text).unwrap(), env).unwrap()
    }

    #[test]
    fn two_token_expression() {
        let e = parse("dy - y").unwrap();
        assert_eq!(
            e,
            Expr::Bin(
                BinOp::Sub,
                Box::new(Expr::Var(Var::Dy)),
                Box::new(Expr::Var(Var::Y))
            )
        );
    }

    #[test]
    fn riccati_residual_at_known_zero() {
        let env = Bindings { x: 0.0, y: 1.0, dy: 1.0 };
        assert_eq!(eval_str("dy - x - y^2", &env), 0.0);
    }

    #[test]
    fn unbalanced_parenthesis_offset() {
        match parse("dy - (") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("expected a syntax error, got {other:?}"),
        }
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(eval_str("2^3^2", &Bindings::default()), 512.0);
    }

    #[test]
    fn power_binds_tighter_than_unary_minus() {
        let env = Bindings { x: 3.0, ..Bindings::default() };
        assert_eq!(eval_str("-x^2", &env), -9.0);
    }

    #[test]
    fn parabola_residual_identity() {
        let env = Bindings { x: 1.0, y: 3.0, dy: -2.0 };
        assert_abs_diff_eq!(eval_str("-(1/4)*dy^2 + 4 - y", &env), 0.0);
    }

    #[test]
    fn domain_violations_are_reported() {
        let env = Bindings { x: -1.0, ..Bindings::default() };
        let err = eval(&parse("ln(x)").unwrap(), &env).unwrap_err();
        assert_eq!(err.subexpression, "ln(x)");
        assert!(eval(&parse("1/x").unwrap(), &Bindings::default()).is_err());
        assert!(eval(&parse("sqrt(x)").unwrap(), &env).is_err());
    }

    #[test]
    fn unknown_identifier_is_named() {
        match parse("dy - z") {
            Err(ParseError::UnknownIdentifier { name, offset }) => {
                assert_eq!(name, "z");
                assert_eq!(offset, 5);
            }
            other => panic!("expected an unknown identifier error, got {other:?}"),
        }
        assert!(matches!(
            parse("tan(x)"),
            Err(ParseError::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn functions_and_numbers() {
        assert_abs_diff_eq!(
            eval_str("exp(1) + sin(0) * cos(0)", &Bindings::default()),
            std::f64::consts::E,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(eval_str("2.5e-1 * 4", &Bindings::default()), 1.0);
        assert_abs_diff_eq!(eval_str("abs(-3) - sqrt(9)", &Bindings::default()), 0.0);
    }

    #[test]
    fn render_round_trips() {
        for text in ["dy - x - y^2", "-(1/4)*dy^2 + 4 - y", "exp(x) - 2^-3"] {
            let e = parse(text).unwrap();
            let again = parse(&render(&e)).unwrap();
            let env = Bindings { x: 0.7, y: -1.3, dy: 2.9 };
            assert_eq!(eval(&e, &env).unwrap(), eval(&again, &env).unwrap());
        }
    }
}
