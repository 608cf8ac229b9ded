//! Expression language for scalar fields over (x, y, z) points.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term   (('+' | '-') term)*
//! term   := unary  (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' exponent)*            -- exponent is an integer literal,
//!                                              optionally signed; chains are
//!                                              left-associative: a^2^3 = (a^2)^3
//! atom   := number | variable | func '(' expr (',' expr)* ')' | '(' expr ')'
//! func   := 'min' | 'max' | 'abs'
//! ```
//!
//! Precedence is `^` > unary `-` > `*` `/` > `+` `-`, all binary operators
//! left-associative. Variables are `x1..xn`, `y1..ym` and `z11..znm` where the
//! first z index is the x-direction (1..n) and the second the y-component
//! (1..m). The shorthands `x` (n=1), `y` (m=1), `z` (n=m=1) and `zL` for `zL1`
//! (m=1) are accepted. Exponents are integer-only so fields stay total on
//! boxes containing negative coordinates.

use std::fmt;
use thiserror::Error;

/// Declared dimensions of the point a field consumes: `n` spatial axes,
/// `m` codomain components, and an n*m gradient block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arity {
    pub n: usize,
    pub m: usize,
}

impl Arity {
    pub fn new(n: usize, m: usize) -> Self {
        Arity { n, m }
    }
}

/// Variable reference with zero-based indices. `Z(l, k)` is the derivative of
/// component `k` in direction `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRef {
    X(usize),
    Y(usize),
    Z(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(VarRef),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset} (line {line}, column {col}): {msg}")]
    Syntax {
        offset: usize,
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("unknown identifier `{name}` at byte {offset} (line {line}, column {col})")]
    UnknownIdent {
        name: String,
        offset: usize,
        line: usize,
        col: usize,
    },
    #[error("variable `{name}` at byte {offset} (line {line}, column {col}) exceeds declared arity n={n}, m={m}")]
    ArityViolation {
        name: String,
        offset: usize,
        line: usize,
        col: usize,
        n: usize,
        m: usize,
    },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero raised to a negative exponent")]
    ZeroToNegativePower,
    #[error("point dimension mismatch: expected n={expected_n}, m={expected_m}")]
    DimensionMismatch {
        expected_n: usize,
        expected_m: usize,
    },
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for (i, c) in src.char_indices() {
        if i >= offset {
            break;
        }
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    arity: Arity,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, arity: Arity) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            arity,
        }
    }

    fn syntax(&self, offset: usize, msg: impl Into<String>) -> ParseError {
        let (line, col) = line_col(self.src, offset);
        ParseError::Syntax {
            offset,
            line,
            col,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    lhs = Expr::Bin(BinOp::Add, Box::new(lhs), Box::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    lhs = Expr::Bin(BinOp::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.parse_unary()?;
                    lhs = Expr::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.parse_unary()?;
                    lhs = Expr::Bin(BinOp::Div, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.parse_unary()?;
            Ok(Expr::Neg(Box::new(inner)))
        } else {
            self.parse_power()
        }
    }

    fn parse_power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.parse_atom()?;
        while self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.parse_exponent()?;
            base = Expr::Pow(Box::new(base), exp);
        }
        Ok(base)
    }

    fn parse_exponent(&mut self) -> Result<i32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let mut negative = false;
        if self.bytes.get(self.pos) == Some(&b'-') {
            negative = true;
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .map_or(false, |b| b.is_ascii_digit())
        {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return Err(self.syntax(start, "expected integer exponent after `^`"));
        }
        let text = &self.src[digits_start..self.pos];
        let value: i32 = text
            .parse()
            .map_err(|_| self.syntax(start, "integer exponent out of range"))?;
        Ok(if negative { -value } else { value })
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.syntax(self.pos, "unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.syntax(self.pos, "expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.parse_number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.parse_ident(),
            Some(c) => Err(self.syntax(self.pos, format!("unexpected character `{}`", c as char))),
        }
    }

    fn parse_number(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .map_or(false, |b| b.is_ascii_digit())
        {
            self.pos += 1;
        }
        if self.bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while self
                .bytes
                .get(self.pos)
                .map_or(false, |b| b.is_ascii_digit())
            {
                self.pos += 1;
            }
        }
        // scientific notation: 1e-3, 2.5E4
        if matches!(self.bytes.get(self.pos), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.bytes.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            let digits_start = self.pos;
            while self
                .bytes
                .get(self.pos)
                .map_or(false, |b| b.is_ascii_digit())
            {
                self.pos += 1;
            }
            if self.pos == digits_start {
                self.pos = mark; // `e` belongs to something else; not a valid exponent
            }
        }
        let text = &self.src[start..self.pos];
        let value: f64 = text
            .parse()
            .map_err(|_| self.syntax(start, format!("invalid number `{text}`")))?;
        Ok(Expr::Const(value))
    }

    fn parse_ident(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .map_or(false, |b| b.is_ascii_alphanumeric() || *b == b'_')
        {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        match name {
            "min" | "max" | "abs" => {
                if self.peek() != Some(b'(') {
                    return Err(self.syntax(self.pos, format!("expected `(` after `{name}`")));
                }
                self.pos += 1;
                let mut args = vec![self.parse_expr()?];
                while self.peek() == Some(b',') {
                    self.pos += 1;
                    args.push(self.parse_expr()?);
                }
                if self.peek() != Some(b')') {
                    return Err(self.syntax(self.pos, "expected `)` to close argument list"));
                }
                self.pos += 1;
                let expect = if name == "abs" { 1 } else { 2 };
                if args.len() != expect {
                    return Err(self.syntax(
                        start,
                        format!("`{name}` takes {expect} argument(s), got {}", args.len()),
                    ));
                }
                let mut it = args.into_iter();
                Ok(match name {
                    "min" => {
                        let a = it.next().unwrap();
                        let b = it.next().unwrap();
                        Expr::Min(Box::new(a), Box::new(b))
                    }
                    "max" => {
                        let a = it.next().unwrap();
                        let b = it.next().unwrap();
                        Expr::Max(Box::new(a), Box::new(b))
                    }
                    _ => Expr::Abs(Box::new(it.next().unwrap())),
                })
            }
            _ => self.resolve_var(name, start),
        }
    }

    fn resolve_var(&self, name: &str, offset: usize) -> Result<Expr, ParseError> {
        let Arity { n, m } = self.arity;
        let (line, col) = line_col(self.src, offset);
        let arity_err = || ParseError::ArityViolation {
            name: name.to_string(),
            offset,
            line,
            col,
            n,
            m,
        };
        let unknown = || ParseError::UnknownIdent {
            name: name.to_string(),
            offset,
            line,
            col,
        };
        let (head, digits) = name.split_at(1);
        let var = match head {
            "x" => {
                if digits.is_empty() {
                    if n == 1 {
                        VarRef::X(0)
                    } else {
                        return Err(arity_err());
                    }
                } else {
                    let i: usize = digits.parse().map_err(|_| unknown())?;
                    if i == 0 || i > n {
                        return Err(arity_err());
                    }
                    VarRef::X(i - 1)
                }
            }
            "y" => {
                if digits.is_empty() {
                    if m == 1 {
                        VarRef::Y(0)
                    } else {
                        return Err(arity_err());
                    }
                } else {
                    let k: usize = digits.parse().map_err(|_| unknown())?;
                    if k == 0 || k > m {
                        return Err(arity_err());
                    }
                    VarRef::Y(k - 1)
                }
            }
            "z" => {
                if digits.is_empty() {
                    if n == 1 && m == 1 {
                        VarRef::Z(0, 0)
                    } else {
                        return Err(arity_err());
                    }
                } else if digits.len() == 1 {
                    // zL is shorthand for zL1 when m = 1
                    let l: usize = digits.parse().map_err(|_| unknown())?;
                    if m != 1 || l == 0 || l > n {
                        return Err(arity_err());
                    }
                    VarRef::Z(l - 1, 0)
                } else if digits.len() == 2 {
                    let l = digits[..1].parse::<usize>().map_err(|_| unknown())?;
                    let k = digits[1..].parse::<usize>().map_err(|_| unknown())?;
                    if l == 0 || l > n || k == 0 || k > m {
                        return Err(arity_err());
                    }
                    VarRef::Z(l - 1, k - 1)
                } else {
                    return Err(unknown());
                }
            }
            _ => return Err(unknown()),
        };
        Ok(Expr::Var(var))
    }
}

/// Parse `source` against the declared arity.
pub fn parse(source: &str, arity: Arity) -> Result<Expr, ParseError> {
    if source.trim().is_empty() {
        return Err(ParseError::Syntax {
            offset: 0,
            line: 1,
            col: 1,
            msg: "empty expression".to_string(),
        });
    }
    let mut parser = Parser::new(source, arity);
    let expr = parser.parse_expr()?;
    parser.skip_ws();
    if parser.pos != parser.bytes.len() {
        return Err(parser.syntax(parser.pos, "trailing input"));
    }
    Ok(expr)
}

fn pow_int(base: f64, exp: i32) -> Result<f64, EvalError> {
    if base == 0.0 && exp < 0 {
        return Err(EvalError::ZeroToNegativePower);
    }
    Ok(base.powi(exp))
}

/// Reference tree-walking evaluator. Kept deliberately naive: the compiled
/// program in [`Program`] must agree with it bit-for-bit.
pub fn eval(expr: &Expr, x: &[f64], y: &[f64], z: &[f64]) -> Result<f64, EvalError> {
    Ok(match expr {
        Expr::Const(c) => *c,
        Expr::Var(VarRef::X(i)) => x[*i],
        Expr::Var(VarRef::Y(k)) => y[*k],
        Expr::Var(VarRef::Z(l, k)) => z[*l * y.len().max(1) + *k],
        Expr::Neg(e) => -eval(e, x, y, z)?,
        Expr::Bin(op, a, b) => {
            let a = eval(a, x, y, z)?;
            let b = eval(b, x, y, z)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    a / b
                }
            }
        }
        Expr::Pow(base, exp) => pow_int(eval(base, x, y, z)?, *exp)?,
        Expr::Min(a, b) => eval(a, x, y, z)?.min(eval(b, x, y, z)?),
        Expr::Max(a, b) => eval(a, x, y, z)?.max(eval(b, x, y, z)?),
        Expr::Abs(a) => eval(a, x, y, z)?.abs(),
    })
}

/// Postorder instruction for the stack evaluator.
#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    LoadX(usize),
    LoadY(usize),
    LoadZ(usize, usize),
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow(i32),
    Min,
    Max,
    Abs,
}

/// Expression compiled to a flat instruction list; evaluation is the hot path
/// when fields are sampled over large grids.
#[derive(Debug, Clone)]
pub struct Program {
    ops: Vec<Op>,
    arity: Arity,
    max_stack: usize,
}

impl Program {
    pub fn compile(expr: &Expr, arity: Arity) -> Self {
        let mut ops = Vec::new();
        fn walk(e: &Expr, ops: &mut Vec<Op>) {
            match e {
                Expr::Const(c) => ops.push(Op::Const(*c)),
                Expr::Var(VarRef::X(i)) => ops.push(Op::LoadX(*i)),
                Expr::Var(VarRef::Y(k)) => ops.push(Op::LoadY(*k)),
                Expr::Var(VarRef::Z(l, k)) => ops.push(Op::LoadZ(*l, *k)),
                Expr::Neg(a) => {
                    walk(a, ops);
                    ops.push(Op::Neg);
                }
                Expr::Bin(op, a, b) => {
                    walk(a, ops);
                    walk(b, ops);
                    ops.push(match op {
                        BinOp::Add => Op::Add,
                        BinOp::Sub => Op::Sub,
                        BinOp::Mul => Op::Mul,
                        BinOp::Div => Op::Div,
                    });
                }
                Expr::Pow(a, k) => {
                    walk(a, ops);
                    ops.push(Op::Pow(*k));
                }
                Expr::Min(a, b) => {
                    walk(a, ops);
                    walk(b, ops);
                    ops.push(Op::Min);
                }
                Expr::Max(a, b) => {
                    walk(a, ops);
                    walk(b, ops);
                    ops.push(Op::Max);
                }
                Expr::Abs(a) => {
                    walk(a, ops);
                    ops.push(Op::Abs);
                }
            }
        }
        walk(expr, &mut ops);
        let mut depth = 0usize;
        let mut max_stack = 0usize;
        for op in &ops {
            match op {
                Op::Const(_) | Op::LoadX(_) | Op::LoadY(_) | Op::LoadZ(_, _) => depth += 1,
                Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Min | Op::Max => depth -= 1,
                Op::Neg | Op::Abs | Op::Pow(_) => {}
            }
            max_stack = max_stack.max(depth);
        }
        Program {
            ops,
            arity,
            max_stack,
        }
    }

    pub fn arity(&self) -> Arity {
        self.arity
    }

    pub fn eval(&self, x: &[f64], y: &[f64], z: &[f64]) -> Result<f64, EvalError> {
        if x.len() != self.arity.n || y.len() != self.arity.m {
            return Err(EvalError::DimensionMismatch {
                expected_n: self.arity.n,
                expected_m: self.arity.m,
            });
        }
        let m = self.arity.m;
        let mut stack = [0.0f64; 32];
        let mut heap;
        let buf: &mut [f64] = if self.max_stack <= 32 {
            &mut stack
        } else {
            heap = vec![0.0; self.max_stack];
            &mut heap
        };
        let mut sp = 0usize;
        for op in &self.ops {
            match *op {
                Op::Const(c) => {
                    buf[sp] = c;
                    sp += 1;
                }
                Op::LoadX(i) => {
                    buf[sp] = x[i];
                    sp += 1;
                }
                Op::LoadY(k) => {
                    buf[sp] = y[k];
                    sp += 1;
                }
                Op::LoadZ(l, k) => {
                    buf[sp] = z[l * m + k];
                    sp += 1;
                }
                Op::Neg => buf[sp - 1] = -buf[sp - 1],
                Op::Abs => buf[sp - 1] = buf[sp - 1].abs(),
                Op::Pow(k) => buf[sp - 1] = pow_int(buf[sp - 1], k)?,
                Op::Add => {
                    sp -= 1;
                    buf[sp - 1] += buf[sp];
                }
                Op::Sub => {
                    sp -= 1;
                    buf[sp - 1] -= buf[sp];
                }
                Op::Mul => {
                    sp -= 1;
                    buf[sp - 1] *= buf[sp];
                }
                Op::Div => {
                    sp -= 1;
                    if buf[sp] == 0.0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    buf[sp - 1] /= buf[sp];
                }
                Op::Min => {
                    sp -= 1;
                    buf[sp - 1] = buf[sp - 1].min(buf[sp]);
                }
                Op::Max => {
                    sp -= 1;
                    buf[sp - 1] = buf[sp - 1].max(buf[sp]);
                }
            }
        }
        Ok(buf[0])
    }
}

fn precedence(expr: &Expr) -> u8 {
    match expr {
        Expr::Bin(BinOp::Add | BinOp::Sub, _, _) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, _, _) => 2,
        Expr::Neg(_) => 3,
        Expr::Pow(_, _) => 4,
        _ => 5,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
            if precedence(e) < min_prec {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Const(c) => {
                if *c == c.trunc() && c.abs() < 1e15 && c.is_finite() {
                    write!(f, "{}", *c as i64)
                } else {
                    write!(f, "{c:e}")
                }
            }
            Expr::Var(VarRef::X(i)) => write!(f, "x{}", i + 1),
            Expr::Var(VarRef::Y(k)) => write!(f, "y{}", k + 1),
            Expr::Var(VarRef::Z(l, k)) => write!(f, "z{}{}", l + 1, k + 1),
            Expr::Neg(a) => {
                write!(f, "-")?;
                child(f, a, 3)
            }
            Expr::Bin(op, a, b) => {
                let (sym, prec) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                };
                child(f, a, prec)?;
                write!(f, "{sym}")?;
                // left-associative: right child needs strictly higher precedence
                child(f, b, prec + 1)
            }
            Expr::Pow(a, k) => {
                child(f, a, 5)?;
                write!(f, "^")?;
                if *k < 0 {
                    write!(f, "-{}", -(*k as i64))
                } else {
                    write!(f, "{k}")
                }
            }
            Expr::Min(a, b) => write!(f, "min({a},{b})"),
            Expr::Max(a, b) => write!(f, "max({a},{b})"),
            Expr::Abs(a) => write!(f, "abs({a})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(src: &str, arity: Arity, x: &[f64], y: &[f64], z: &[f64]) -> f64 {
        let e = parse(src, arity).unwrap();
        eval(&e, x, y, z).unwrap()
    }

    #[test]
    fn precedence_examples() {
        let a = Arity::new(1, 1);
        assert_eq!(ev("1+2*3", a, &[0.0], &[0.0], &[0.0]), 7.0);
        assert_eq!(ev("x1^2", a, &[3.0], &[0.0], &[0.0]), 9.0);
        assert_eq!(ev("-x1^2", a, &[2.0], &[0.0], &[0.0]), -4.0);
        assert_eq!(ev("2^3^2", a, &[0.0], &[0.0], &[0.0]), 64.0);
        assert_eq!(ev("abs(y1)", a, &[0.0], &[-2.0], &[0.0]), 2.0);
    }

    #[test]
    fn paper_field_values() {
        let a = Arity::new(1, 1);
        // double-well density at the constrained point
        assert_eq!(
            ev("min(abs(z1-1),abs(z1+1))", a, &[0.5], &[0.0], &[0.0]),
            1.0
        );
        assert_eq!(ev("y1*(1-y1)", a, &[0.5], &[1.0], &[0.0]), 0.0);
        assert_eq!(
            ev("(7/4)*y1-(3/4)*y1^2", a, &[0.5], &[2.0], &[0.0]),
            0.5
        );
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let a = Arity::new(1, 1);
        let e = parse("1/x1", a).unwrap();
        assert_eq!(
            eval(&e, &[0.0], &[0.0], &[0.0]),
            Err(EvalError::DivisionByZero)
        );
        let e = parse("x1^-1", a).unwrap();
        assert_eq!(
            eval(&e, &[0.0], &[0.0], &[0.0]),
            Err(EvalError::ZeroToNegativePower)
        );
    }

    #[test]
    fn syntax_errors_carry_position() {
        let a = Arity::new(2, 1);
        match parse("x1 + * 3", a) {
            Err(ParseError::Syntax { offset, line, col, .. }) => {
                assert_eq!(offset, 5);
                assert_eq!((line, col), (1, 6));
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse("x1 + w2", a) {
            Err(ParseError::UnknownIdent { name, .. }) => assert_eq!(name, "w2"),
            other => panic!("expected unknown identifier, got {other:?}"),
        }
        match parse("x3 + 1", a) {
            Err(ParseError::ArityViolation { name, .. }) => assert_eq!(name, "x3"),
            other => panic!("expected arity violation, got {other:?}"),
        }
    }

    #[test]
    fn z_index_shorthand() {
        // n=2, m=1: z1/z2 alias z11/z21
        let a = Arity::new(2, 1);
        let v = ev("z1+2*z2", a, &[0.0; 2], &[0.0], &[0.5, 0.25]);
        assert_eq!(v, 1.0);
        let v = ev("z11+2*z21", a, &[0.0; 2], &[0.0], &[0.5, 0.25]);
        assert_eq!(v, 1.0);
    }

    fn arb_expr(depth: u32, arity: Arity) -> BoxedStrategy<Expr> {
        // nonnegative constants only: the parser never produces a negative
        // literal (leading minus parses as Neg), so printable trees keep
        // constants >= 0
        let leaf = prop_oneof![
            (0i64..=8).prop_map(|v| Expr::Const(v as f64 / 2.0)),
            (0..arity.n).prop_map(VarRef::X).prop_map(Expr::Var),
            (0..arity.m).prop_map(VarRef::Y).prop_map(Expr::Var),
            ((0..arity.n), (0..arity.m)).prop_map(|(l, k)| Expr::Var(VarRef::Z(l, k))),
        ];
        leaf.prop_recursive(depth, 64, 4, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone(), prop_oneof![
                    Just(BinOp::Add),
                    Just(BinOp::Sub),
                    Just(BinOp::Mul),
                ])
                .prop_map(|(a, b, op)| Expr::Bin(op, Box::new(a), Box::new(b))),
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (inner.clone(), 0i32..4).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Min(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Max(Box::new(a), Box::new(b))),
                inner.prop_map(|a| Expr::Abs(Box::new(a))),
            ]
        })
        .boxed()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn print_parse_roundtrip(e in arb_expr(5, Arity::new(2, 2))) {
            let printed = e.to_string();
            let reparsed = parse(&printed, Arity::new(2, 2)).unwrap();
            prop_assert_eq!(&reparsed, &e);
            // idempotence: parse . print . parse == parse
            let printed2 = reparsed.to_string();
            prop_assert_eq!(printed, printed2);
        }

        #[test]
        fn compiled_matches_reference_bitwise(
            e in arb_expr(5, Arity::new(2, 2)),
            x in proptest::array::uniform2(-2.0f64..2.0),
            y in proptest::array::uniform2(-2.0f64..2.0),
            z in proptest::array::uniform4(-2.0f64..2.0),
        ) {
            let program = Program::compile(&e, Arity::new(2, 2));
            let reference = eval(&e, &x, &y, &z);
            let compiled = program.eval(&x, &y, &z);
            match (reference, compiled) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
                (Err(ea), Err(eb)) => prop_assert_eq!(ea, eb),
                other => prop_assert!(false, "mismatch: {:?}", other),
            }
        }
    }
}
