//! A small expression language for symbols ψ(x): complex constants, the
//! coordinates r, t2..tn, x1..xn, arithmetic and a few elementary functions.
//!
//! Hand-written recursive descent; precedence is unary minus, then `^`
//! (right-associative), then `*` `/`, then `+` `-`. Errors carry exact byte
//! offsets.

use crate::error::{Error, Result};
use crate::spherical::to_spherical;
use num_complex::Complex64;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    /// Radius |x|.
    R,
    /// Angle θ_j, 2 ≤ j ≤ n.
    Theta(usize),
    /// Cartesian coordinate x_i, 1 ≤ i ≤ n.
    X(usize),
}

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
    Log,
    Sqrt,
    Abs,
    Pow,
}

impl Func {
    fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Pow => "pow",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    ImagUnit,
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    /// Free variables of the expression.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Call(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
            _ => {}
        }
    }

    /// True when evaluation depends on |x| only.
    pub fn is_radial(&self) -> bool {
        self.free_vars().iter().all(|v| matches!(v, Var::R))
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next_tok(&mut self) -> Result<Option<(Tok, usize)>> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                let mut seen_dot = false;
                while end < self.src.len()
                    && (self.src[end].is_ascii_digit() || (self.src[end] == b'.' && !seen_dot))
                {
                    if self.src[end] == b'.' {
                        seen_dot = true;
                    }
                    end += 1;
                }
                // exponent part
                if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
                    let mut e = end + 1;
                    if e < self.src.len() && (self.src[e] == b'+' || self.src[e] == b'-') {
                        e += 1;
                    }
                    if e < self.src.len() && self.src[e].is_ascii_digit() {
                        while e < self.src.len() && self.src[e].is_ascii_digit() {
                            e += 1;
                        }
                        end = e;
                    }
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                let v: f64 = text.parse().map_err(|_| Error::Parse {
                    offset: start,
                    message: format!("malformed number '{text}'"),
                })?;
                self.pos = end;
                Tok::Num(v)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap().to_string();
                self.pos = end;
                Tok::Ident(text)
            }
            other => {
                return Err(Error::Parse {
                    offset: start,
                    message: format!("unexpected character '{}'", other as char),
                })
            }
        };
        Ok(Some((tok, start)))
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end_offset: usize,
    dim: usize,
}

/// Parse `text` into an AST for symbols on 𝔹_n.
pub fn parse(text: &str, n: usize) -> Result<Expr> {
    if text.trim().is_empty() {
        return Err(Error::Parse {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut lx = Lexer::new(text);
    let mut toks = Vec::new();
    while let Some(t) = lx.next_tok()? {
        toks.push(t);
    }
    let mut p = Parser {
        toks,
        idx: 0,
        end_offset: text.len(),
        dim: n,
    };
    let e = p.expr()?;
    if p.idx < p.toks.len() {
        return Err(Error::Parse {
            offset: p.toks[p.idx].1,
            message: "trailing input".into(),
        });
    }
    Ok(e)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.idx)
            .map(|(_, o)| *o)
            .unwrap_or(self.end_offset)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        self.idx += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&want) {
            self.idx += 1;
            Ok(())
        } else {
            Err(Error::Parse {
                offset: self.offset(),
                message: format!("expected {what}"),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.idx += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Bin(BinOp::Add, Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.idx += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Bin(BinOp::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.idx += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.idx += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::Bin(BinOp::Div, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // factor := unary ('^' factor)?   — right-associative
    fn factor(&mut self) -> Result<Expr> {
        let base = self.unary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.idx += 1;
            let exp = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Minus) {
            self.idx += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr> {
        let off = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => self.ident(name, off),
            _ => Err(Error::Parse {
                offset: off,
                message: "expected number, identifier or '('".into(),
            }),
        }
    }

    fn ident(&mut self, name: String, off: usize) -> Result<Expr> {
        if name == "i" {
            return Ok(Expr::ImagUnit);
        }
        let func = match name.as_str() {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            "pow" => Some(Func::Pow),
            _ => None,
        };
        if let Some(f) = func {
            self.expect(Tok::LParen, "'(' after function name")?;
            let mut args = vec![self.expr()?];
            while self.peek() == Some(&Tok::Comma) {
                self.idx += 1;
                args.push(self.expr()?);
            }
            self.expect(Tok::RParen, "')'")?;
            if args.len() != f.arity() {
                return Err(Error::Parse {
                    offset: off,
                    message: format!(
                        "{} takes {} argument(s), got {}",
                        f.name(),
                        f.arity(),
                        args.len()
                    ),
                });
            }
            return Ok(Expr::Call(f, args));
        }
        if name == "r" {
            return Ok(Expr::Var(Var::R));
        }
        if let Some(rest) = name.strip_prefix('t') {
            if let Ok(j) = rest.parse::<usize>() {
                if (2..=self.dim).contains(&j) {
                    return Ok(Expr::Var(Var::Theta(j)));
                }
                return Err(Error::Parse {
                    offset: off,
                    message: format!("angle t{j} out of range for dimension {}", self.dim),
                });
            }
        }
        if let Some(rest) = name.strip_prefix('x') {
            if let Ok(ii) = rest.parse::<usize>() {
                if (1..=self.dim).contains(&ii) {
                    return Ok(Expr::Var(Var::X(ii)));
                }
                return Err(Error::Parse {
                    offset: off,
                    message: format!("coordinate x{ii} out of range for dimension {}", self.dim),
                });
            }
        }
        Err(Error::Parse {
            offset: off,
            message: format!("unknown identifier '{name}'"),
        })
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

const IM_TOL: f64 = 1e-12;

fn require_real_nonneg(v: Complex64, what: &str) -> Result<f64> {
    if v.im.abs() > IM_TOL * (1.0 + v.re.abs()) {
        return Err(Error::NonFinite(format!("{what} of a non-real value {v}")));
    }
    if v.re < 0.0 {
        return Err(Error::NonFinite(format!(
            "{what} of a negative value {}",
            v.re
        )));
    }
    Ok(v.re)
}

fn eval_node(e: &Expr, r: f64, angles: &[f64], x: &[f64]) -> Result<Complex64> {
    Ok(match e {
        Expr::Num(v) => Complex64::new(*v, 0.0),
        Expr::ImagUnit => Complex64::new(0.0, 1.0),
        Expr::Var(Var::R) => Complex64::new(r, 0.0),
        Expr::Var(Var::Theta(j)) => Complex64::new(angles[*j - 2], 0.0),
        Expr::Var(Var::X(i)) => Complex64::new(x[*i - 1], 0.0),
        Expr::Neg(a) => -eval_node(a, r, angles, x)?,
        Expr::Bin(op, a, b) => {
            let va = eval_node(a, r, angles, x)?;
            let vb = eval_node(b, r, angles, x)?;
            match op {
                BinOp::Add => va + vb,
                BinOp::Sub => va - vb,
                BinOp::Mul => va * vb,
                BinOp::Div => {
                    if vb.norm() == 0.0 {
                        return Err(Error::NonFinite("division by zero".into()));
                    }
                    va / vb
                }
                BinOp::Pow => complex_pow(va, vb)?,
            }
        }
        Expr::Call(f, args) => {
            let v0 = eval_node(&args[0], r, angles, x)?;
            match f {
                Func::Sin => v0.sin(),
                Func::Cos => v0.cos(),
                Func::Exp => v0.exp(),
                Func::Log => Complex64::new(require_real_nonneg(v0, "log")?.ln(), 0.0),
                Func::Sqrt => Complex64::new(require_real_nonneg(v0, "sqrt")?.sqrt(), 0.0),
                Func::Abs => Complex64::new(v0.norm(), 0.0),
                Func::Pow => {
                    let v1 = eval_node(&args[1], r, angles, x)?;
                    complex_pow(v0, v1)?
                }
            }
        }
    })
}

/// a^b: integer exponents act on any complex base; otherwise the base must be
/// (numerically) real and nonnegative.
fn complex_pow(a: Complex64, b: Complex64) -> Result<Complex64> {
    if b.im.abs() <= IM_TOL && (b.re.round() - b.re).abs() <= IM_TOL && b.re.abs() < 1e6 {
        let k = b.re.round() as i32;
        if k < 0 && a.norm() == 0.0 {
            return Err(Error::NonFinite("0 raised to a negative power".into()));
        }
        return Ok(a.powi(k));
    }
    let base = require_real_nonneg(a, "non-integer power")?;
    if b.im.abs() <= IM_TOL {
        Ok(Complex64::new(base.powf(b.re), 0.0))
    } else {
        // real-nonneg base, complex exponent: exp(b ln a)
        if base == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok((b * base.ln()).exp())
    }
}

/// Evaluate at a Cartesian point; r and the t-angles are bound via σ^{-1}.
pub fn evaluate(e: &Expr, x: &[f64]) -> Result<Complex64> {
    let g = to_spherical(x);
    eval_node(e, g.r, &g.angles, x)
}

/// Evaluate a radial expression (free variables ⊆ {r}) at radius r.
pub fn evaluate_radial(e: &Expr, r: f64) -> Result<Complex64> {
    eval_node(e, r, &[], &[])
}

// ---------------------------------------------------------------------------
// Canonical printer (fully parenthesized; parse ∘ print = id)
// ---------------------------------------------------------------------------

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, &mut s);
    s
}

fn write_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Num(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::ImagUnit => out.push('i'),
        Expr::Var(Var::R) => out.push('r'),
        Expr::Var(Var::Theta(j)) => {
            let _ = write!(out, "t{j}");
        }
        Expr::Var(Var::X(i)) => {
            let _ = write!(out, "x{i}");
        }
        Expr::Neg(a) => {
            out.push_str("(-");
            write_expr(a, out);
            out.push(')');
        }
        Expr::Bin(op, a, b) => {
            out.push('(');
            write_expr(a, out);
            out.push_str(match op {
                BinOp::Add => " + ",
                BinOp::Sub => " - ",
                BinOp::Mul => " * ",
                BinOp::Div => " / ",
                BinOp::Pow => " ^ ",
            });
            write_expr(b, out);
            out.push(')');
        }
        Expr::Call(f, args) => {
            out.push_str(f.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(a, out);
            }
            out.push(')');
        }
    }
}
