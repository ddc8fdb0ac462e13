//! Expression parser shared by every textual input format.
//!
//! A single grammar covers coefficient literals (`s^(1/2) + 3*s^2`,
//! `1 + pi^3`), Laurent series (`t^3+t^6+t^7`), and rational functions
//! (`(w^2+w)/(w+1)`). Parsing produces a small AST with source spans;
//! per-target evaluators then interpret the AST into the appropriate
//! arithmetic domain and reject constructs that domain cannot represent.

use crate::error::{Error, Result};
use crate::gf::GfField;
use crate::laurent::LaurentSeriesFp;
use crate::poly::{Poly, RationalFn};
use crate::rational::{rat, Rat};
use crate::valued_field::{CoefficientElem, FieldCtx};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl Span {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, col: self.col, msg: msg.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

fn lex(input: &str) -> Result<Vec<(Tok, Span)>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        let span = Span { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                chars.next();
                col += 1;
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    _ => Tok::RParen,
                };
                out.push((tok, span));
            }
            c if c.is_ascii_digit() => {
                let mut value: i64 = 0;
                while let Some(&d) = chars.peek() {
                    let Some(digit) = d.to_digit(10) else { break };
                    chars.next();
                    col += 1;
                    value = value
                        .checked_mul(10)
                        .and_then(|v| v.checked_add(digit as i64))
                        .ok_or_else(|| span.err("integer literal out of range"))?;
                }
                out.push((Tok::Int(value), span));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&d) = chars.peek() {
                    if !(d.is_ascii_alphanumeric() || d == '_') {
                        break;
                    }
                    name.push(d);
                    chars.next();
                    col += 1;
                }
                out.push((Tok::Ident(name), span));
            }
            other => return Err(span.err(format!("unexpected character {other:?}"))),
        }
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AstKind {
    Int(i64),
    Var(String),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, Rat),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ast {
    pub kind: AstKind,
    pub span: Span,
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &(Tok, Span) {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Span> {
        let (t, span) = self.bump();
        if t == tok {
            Ok(span)
        } else {
            Err(span.err(format!("expected {what}, found {t:?}")))
        }
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut lhs = self.term()?;
        loop {
            let (tok, span) = self.peek().clone();
            let kind = match tok {
                Tok::Plus => AstKind::Add as fn(_, _) -> _,
                Tok::Minus => AstKind::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Ast { kind: kind(Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.unary()?;
        loop {
            let (tok, span) = self.peek().clone();
            let kind = match tok {
                Tok::Star => AstKind::Mul as fn(_, _) -> _,
                Tok::Slash => AstKind::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Ast { kind: kind(Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ast> {
        if let (Tok::Minus, span) = self.peek().clone() {
            self.bump();
            let inner = self.unary()?;
            return Ok(Ast { kind: AstKind::Neg(Box::new(inner)), span });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast> {
        let base = self.atom()?;
        if let (Tok::Caret, span) = self.peek().clone() {
            self.bump();
            let exp = self.exponent()?;
            return Ok(Ast { kind: AstKind::Pow(Box::new(base), exp), span });
        }
        Ok(base)
    }

    /// Exponents are rationals, not expressions: `n`, `-n`, or a
    /// parenthesized `a/b` with optional leading sign.
    fn exponent(&mut self) -> Result<Rat> {
        let (tok, span) = self.bump();
        match tok {
            Tok::Int(n) => Ok(rat(n, 1)),
            Tok::Minus => match self.bump() {
                (Tok::Int(n), _) => Ok(rat(-n, 1)),
                (t, s) => Err(s.err(format!("expected integer exponent, found {t:?}"))),
            },
            Tok::LParen => {
                let sign = if self.peek().0 == Tok::Minus {
                    self.bump();
                    -1
                } else {
                    1
                };
                let (t, s) = self.bump();
                let Tok::Int(numer) = t else {
                    return Err(s.err(format!("expected integer, found {t:?}")));
                };
                let denom = if self.peek().0 == Tok::Slash {
                    self.bump();
                    let (t, s) = self.bump();
                    let Tok::Int(d) = t else {
                        return Err(s.err(format!("expected integer, found {t:?}")));
                    };
                    if d == 0 {
                        return Err(s.err("zero denominator in exponent"));
                    }
                    d
                } else {
                    1
                };
                self.expect(Tok::RParen, "closing parenthesis")?;
                Ok(rat(sign * numer, denom))
            }
            t => Err(span.err(format!("expected exponent, found {t:?}"))),
        }
    }

    fn atom(&mut self) -> Result<Ast> {
        let (tok, span) = self.bump();
        match tok {
            Tok::Int(n) => Ok(Ast { kind: AstKind::Int(n), span }),
            Tok::Ident(name) => Ok(Ast { kind: AstKind::Var(name), span }),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "closing parenthesis")?;
                Ok(inner)
            }
            t => Err(span.err(format!("expected value, found {t:?}"))),
        }
    }
}

pub fn parse(input: &str) -> Result<Ast> {
    let toks = lex(input)?;
    let mut parser = Parser { toks, pos: 0 };
    let ast = parser.expr()?;
    let (tok, span) = parser.peek().clone();
    if tok != Tok::Eof {
        return Err(span.err(format!("unexpected trailing {tok:?}")));
    }
    Ok(ast)
}

fn integer_exp(e: Rat, span: Span) -> Result<i64> {
    if !e.is_integer() {
        return Err(span.err("fractional exponent not allowed here"));
    }
    Ok(*e.numer())
}

/// Evaluate a coefficient literal. The generator is `s` (equal
/// characteristic, rational exponents allowed) or `pi` (mixed
/// characteristic, integer exponents).
pub fn eval_coefficient(ctx: &FieldCtx, ast: &Ast) -> Result<CoefficientElem> {
    match &ast.kind {
        AstKind::Int(n) => Ok(CoefficientElem::from_int(ctx, *n)),
        AstKind::Var(name) => match name.as_str() {
            "s" if !ctx.is_mixed() => CoefficientElem::s_term(ctx, ctx.gf.from_int(1), rat(1, 1)),
            "pi" if ctx.is_mixed() => CoefficientElem::pi_term(ctx, 1, 1),
            "s" | "pi" => Err(ast.span.err(format!("generator {name} not available in this field"))),
            other => Err(ast.span.err(format!("unknown coefficient generator {other:?}"))),
        },
        AstKind::Neg(a) => Ok(eval_coefficient(ctx, a)?.neg(ctx)),
        AstKind::Add(a, b) => Ok(eval_coefficient(ctx, a)?.add(ctx, &eval_coefficient(ctx, b)?)),
        AstKind::Sub(a, b) => Ok(eval_coefficient(ctx, a)?.sub(ctx, &eval_coefficient(ctx, b)?)),
        AstKind::Mul(a, b) => Ok(eval_coefficient(ctx, a)?.mul(ctx, &eval_coefficient(ctx, b)?)),
        AstKind::Div(a, b) => {
            let denom = eval_coefficient(ctx, b)?;
            if denom.is_zero() {
                return Err(ast.span.err("division by zero"));
            }
            Ok(eval_coefficient(ctx, a)?.mul(ctx, &denom.inv(ctx)?))
        }
        AstKind::Pow(base, e) => {
            if !e.is_integer() {
                // rational exponents only make sense directly on `s`
                match &base.kind {
                    AstKind::Var(name) if name == "s" && !ctx.is_mixed() => {
                        return CoefficientElem::s_term(ctx, ctx.gf.from_int(1), *e);
                    }
                    _ => return Err(ast.span.err("fractional exponent requires base s")),
                }
            }
            eval_coefficient(ctx, base)?.pow(ctx, *e.numer())
        }
    }
}

/// Evaluate a Laurent series literal in the variable `t` over the residue
/// field. The result is exact (no unknown tail).
pub fn eval_laurent(gf: &GfField, ast: &Ast) -> Result<LaurentSeriesFp> {
    match &ast.kind {
        AstKind::Int(n) => Ok(int_series(gf, *n)),
        AstKind::Var(name) if name == "t" => Ok(LaurentSeriesFp::monomial(gf.from_int(1), 1)),
        AstKind::Var(other) => Err(ast.span.err(format!("unknown series variable {other:?}"))),
        AstKind::Neg(a) => {
            let inner = eval_laurent(gf, a)?;
            Ok(int_series(gf, -1).mul(gf, &inner))
        }
        AstKind::Add(a, b) => Ok(eval_laurent(gf, a)?.add(gf, &eval_laurent(gf, b)?)),
        AstKind::Sub(a, b) => {
            let rhs = int_series(gf, -1).mul(gf, &eval_laurent(gf, b)?);
            Ok(eval_laurent(gf, a)?.add(gf, &rhs))
        }
        AstKind::Mul(a, b) => Ok(eval_laurent(gf, a)?.mul(gf, &eval_laurent(gf, b)?)),
        AstKind::Div(_, _) => Err(ast.span.err("division not supported in series literals")),
        AstKind::Pow(base, e) => {
            let n = integer_exp(*e, ast.span)?;
            // t^n for any n; other bases only non-negative powers
            if let AstKind::Var(name) = &base.kind {
                if name == "t" {
                    return Ok(LaurentSeriesFp::monomial(gf.from_int(1), n));
                }
            }
            if n < 0 {
                return Err(ast.span.err("negative power of a non-monomial series"));
            }
            let b = eval_laurent(gf, base)?;
            let mut acc = int_series(gf, 1);
            for _ in 0..n {
                acc = acc.mul(gf, &b);
            }
            Ok(acc)
        }
    }
}

fn int_series(gf: &GfField, n: i64) -> LaurentSeriesFp {
    LaurentSeriesFp::monomial(gf.from_int(n), 0)
}

/// Evaluate a rational-function literal in the variable `w` over the
/// residue field.
pub fn eval_rational_fn(gf: &GfField, ast: &Ast) -> Result<RationalFn> {
    match &ast.kind {
        AstKind::Int(n) => Ok(RationalFn::from_poly(Poly::constant(gf.from_int(*n)))),
        AstKind::Var(name) if name == "w" => Ok(RationalFn::var()),
        AstKind::Var(other) => Err(ast.span.err(format!("unknown function variable {other:?}"))),
        AstKind::Neg(a) => Ok(eval_rational_fn(gf, a)?.neg(gf)),
        AstKind::Add(a, b) => Ok(eval_rational_fn(gf, a)?.add(gf, &eval_rational_fn(gf, b)?)?),
        AstKind::Sub(a, b) => Ok(eval_rational_fn(gf, a)?.sub(gf, &eval_rational_fn(gf, b)?)?),
        AstKind::Mul(a, b) => Ok(eval_rational_fn(gf, a)?.mul(gf, &eval_rational_fn(gf, b)?)?),
        AstKind::Div(a, b) => {
            let denom = eval_rational_fn(gf, b)?;
            if denom.is_zero() {
                return Err(ast.span.err("division by zero"));
            }
            Ok(eval_rational_fn(gf, a)?.div(gf, &denom)?)
        }
        AstKind::Pow(base, e) => {
            let n = integer_exp(*e, ast.span)?;
            eval_rational_fn(gf, base)?.pow(gf, n)
        }
    }
}

/// Evaluate a polynomial literal in `w`; rejects genuine denominators.
pub fn eval_poly(gf: &GfField, ast: &Ast) -> Result<Poly> {
    let f = eval_rational_fn(gf, ast)?;
    if !f.is_polynomial() {
        return Err(ast.span.err("expected a polynomial, found a denominator"));
    }
    Ok(f.num().clone())
}

pub fn parse_coefficient(ctx: &FieldCtx, input: &str) -> Result<CoefficientElem> {
    eval_coefficient(ctx, &parse(input)?)
}

pub fn parse_laurent(gf: &GfField, input: &str) -> Result<LaurentSeriesFp> {
    eval_laurent(gf, &parse(input)?)
}

pub fn parse_rational_fn(gf: &GfField, input: &str) -> Result<RationalFn> {
    eval_rational_fn(gf, &parse(input)?)
}

pub fn parse_poly(gf: &GfField, input: &str) -> Result<Poly> {
    eval_poly(gf, &parse(input)?)
}
