//! Operator text grammar: parsing and lowering to normal-ordered operators.
//!
//! ```text
//! expr  := term (("+" | "-") term)*
//! term  := unary (("*" | "/") unary)*
//! unary := "-" unary | power
//! power := atom ("^" "-"? INT)?
//! atom  := INT | IDENT | "(" expr ")"
//! ```
//!
//! `*` is the noncommutative operator product. Direction names (`D`, `D1`,
//! `d`, ...) denote the generators `eps * d_i`; every other identifier must
//! name a coefficient (`h`, `q`, `s`, parameters, jets) or be `i`. Division
//! and negative powers are allowed only for invertible coefficients; `A / c`
//! means `c^-1 * A`.

pub mod json;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::exact::{GRat, Rat};
use crate::rings::{DerivKind, DiffRing, Direction, LPoly, RFunc, VarTable, Vars};
use crate::weyl::{DOp, Multi};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.pos, self.msg)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { pos, msg: msg.into() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = src[start..i].parse().expect("digits");
                out.push((Tok::Int(n), start));
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {}
        }
        let t = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => {
                let ch = src[start..].chars().next().unwrap();
                return err(start, format!("unexpected character `{ch}`"));
            }
        };
        out.push((t, start));
        i += 1;
    }
    Ok(out)
}

/// Parse tree of the operator grammar; products keep source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpAst {
    Int(BigInt, usize),
    Ident(String, usize),
    Neg(Box<OpAst>),
    Add(Box<OpAst>, Box<OpAst>),
    Sub(Box<OpAst>, Box<OpAst>),
    Mul(Box<OpAst>, Box<OpAst>),
    Div(Box<OpAst>, Box<OpAst>, usize),
    Pow(Box<OpAst>, i64, usize),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn expr(&mut self) -> Result<OpAst, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    lhs = OpAst::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    lhs = OpAst::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<OpAst, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.at += 1;
                    lhs = OpAst::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    let p = self.pos();
                    self.at += 1;
                    lhs = OpAst::Div(Box::new(lhs), Box::new(self.unary()?), p);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<OpAst, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.at += 1;
            return Ok(OpAst::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<OpAst, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        let p = self.pos();
        self.at += 1;
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.at += 1;
            true
        } else {
            false
        };
        let ep = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.at += 1;
                let e = n.to_i64().filter(|e| *e <= u32::MAX as i64).ok_or(ParseError {
                    pos: ep,
                    msg: "exponent too large".into(),
                })?;
                Ok(OpAst::Pow(Box::new(base), if neg { -e } else { e }, p))
            }
            _ => err(ep, "expected an integer exponent"),
        }
    }

    fn atom(&mut self) -> Result<OpAst, ParseError> {
        let p = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.at += 1;
                Ok(OpAst::Int(n, p))
            }
            Some(Tok::Ident(s)) => {
                self.at += 1;
                Ok(OpAst::Ident(s, p))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return err(self.pos(), "expected `)`");
                }
                self.at += 1;
                Ok(e)
            }
            Some(_) => err(p, "expected a number, identifier or `(`"),
            None => err(p, "unexpected end of input"),
        }
    }
}

pub fn parse_ast(src: &str) -> Result<OpAst, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: src.len(),
    };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return err(p.pos(), "unexpected token");
    }
    Ok(e)
}

/// Identifiers in order of first appearance.
pub fn identifiers(src: &str) -> Result<Vec<String>, ParseError> {
    let mut out: Vec<String> = Vec::new();
    for (t, _) in lex(src)? {
        if let Tok::Ident(s) = t {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

/// Coefficient rings whose elements can be named in text.
pub trait CoeffSyntax: DiffRing {
    /// The ring element denoted by an identifier, if any.
    fn named(ctx: &Self::Ctx, name: &str) -> Option<Self>;
}

impl CoeffSyntax for LPoly {
    fn named(ctx: &Vars, name: &str) -> Option<Self> {
        LPoly::var(ctx, name, 1).ok()
    }
}

impl CoeffSyntax for RFunc {
    fn named(ctx: &Vars, name: &str) -> Option<Self> {
        LPoly::var(ctx, name, 1).ok().map(Into::into)
    }
}

/// Lowers a parse tree to an operator with `r` directions over `ctx`.
pub fn lower<C: CoeffSyntax>(ast: &OpAst, ctx: &C::Ctx, r: usize) -> Result<DOp<C>, ParseError> {
    let scalar = |c: GRat| DOp::from_coeff(ctx, r, C::scalar(ctx, &c));
    let as_coeff = |a: &DOp<C>| -> Option<C> {
        if a.terms().all(|(m, _)| m.total() == 0) {
            Some(a.coeff(&Multi::zero(r)))
        } else {
            None
        }
    };
    let w = |e: crate::weyl::WeylError| ParseError {
        pos: 0,
        msg: e.to_string(),
    };
    Ok(match ast {
        OpAst::Int(n, _) => scalar(GRat::from(Rat::from_integer(n.clone()))),
        OpAst::Ident(name, p) => {
            if name == "i" {
                scalar(GRat::i())
            } else if let Some(k) = (0..r).find(|&k| C::dir_name(ctx, k) == *name) {
                DOp::gen(ctx, r, k)
            } else if let Some(c) = C::named(ctx, name) {
                DOp::from_coeff(ctx, r, c)
            } else {
                return err(*p, format!("unknown identifier `{name}`"));
            }
        }
        OpAst::Neg(a) => lower::<C>(a, ctx, r)?.neg(),
        OpAst::Add(a, b) => lower::<C>(a, ctx, r)?.add(&lower::<C>(b, ctx, r)?).map_err(w)?,
        OpAst::Sub(a, b) => lower::<C>(a, ctx, r)?.sub(&lower::<C>(b, ctx, r)?).map_err(w)?,
        OpAst::Mul(a, b) => lower::<C>(a, ctx, r)?.mul(&lower::<C>(b, ctx, r)?).map_err(w)?,
        OpAst::Div(a, b, p) => {
            let num = lower::<C>(a, ctx, r)?;
            let den = lower::<C>(b, ctx, r)?;
            let inv = as_coeff(&den).and_then(|c| c.inv()).ok_or(ParseError {
                pos: *p,
                msg: "divisor is not an invertible coefficient".into(),
            })?;
            // `A / c` reads as `c^-1 * A`: the coefficient scales from the left.
            DOp::from_coeff(ctx, r, inv).mul(&num).map_err(w)?
        }
        OpAst::Pow(a, e, p) => {
            let base = lower::<C>(a, ctx, r)?;
            if *e >= 0 {
                base.pow(*e as u32).map_err(w)?
            } else {
                let inv = as_coeff(&base).and_then(|c| c.inv()).ok_or(ParseError {
                    pos: *p,
                    msg: "negative power of a non-invertible element".into(),
                })?;
                DOp::from_coeff(ctx, r, inv).pow((-e) as u32).map_err(w)?
            }
        }
    })
}

pub fn parse_dop<C: CoeffSyntax>(src: &str, ctx: &C::Ctx, r: usize) -> Result<DOp<C>, ParseError> {
    lower::<C>(&parse_ast(src)?, ctx, r)
}

/// A coefficient written in the grammar (no direction symbols).
pub fn parse_coeff<C: CoeffSyntax>(src: &str, ctx: &C::Ctx) -> Result<C, ParseError> {
    let op = parse_dop::<C>(src, ctx, 0)?;
    Ok(op.coeff(&Multi::zero(0)))
}

fn indexed(name: &str, stem: &str) -> Option<usize> {
    let rest = name.strip_prefix(stem)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) || rest.starts_with('0') {
        return None;
    }
    rest.parse().ok()
}

/// The variable table implied by the identifiers of operator texts: `h`,
/// then `q` or `q1..qr`, then `s`, then every other identifier (parameters)
/// in sorted order. Returns the table and the direction count `r`.
pub fn infer_quantum_vars(texts: &[&str]) -> Result<(Vars, usize), ParseError> {
    let mut ids = Vec::new();
    for t in texts {
        for id in identifiers(t)? {
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
    }
    let mut r = 1;
    for id in &ids {
        if let Some(k) = indexed(id, "D").or_else(|| indexed(id, "q")) {
            r = r.max(k);
        }
    }
    let reserved = |id: &str| {
        id == "h"
            || id == "i"
            || id == "s"
            || id == "q"
            || id == "D"
            || indexed(id, "D").is_some()
            || indexed(id, "q").is_some()
    };
    let mut params: Vec<String> = ids.iter().filter(|id| !reserved(id)).cloned().collect();
    params.sort();
    let has_s = ids.iter().any(|id| id == "s");
    let has_q = ids.iter().any(|id| id == "q" || indexed(id, "q").is_some());
    if r == 1 && has_s && !has_q {
        let mut names = vec!["h".to_string(), "s".to_string()];
        names.extend(params);
        let dirs = vec![Direction {
            name: "D".into(),
            kind: DerivKind::Euler(vec![(1, crate::exact::rat(1, 2))]),
        }];
        let vt = VarTable::new(names, dirs).map_err(|e| ParseError {
            pos: 0,
            msg: e.to_string(),
        })?;
        return Ok((Arc::new(vt), 1));
    }
    let mut extra: Vec<&str> = Vec::new();
    if has_s && r == 1 {
        extra.push("s");
    }
    extra.extend(params.iter().map(String::as_str));
    Ok((VarTable::quantum(r, &extra), r))
}

/// Parses an operator over the table inferred from its own identifiers.
pub fn parse_quantum_op(src: &str) -> Result<DOp<LPoly>, ParseError> {
    let (vars, r) = infer_quantum_vars(&[src])?;
    parse_dop::<LPoly>(src, &vars, r)
}

/// `Rat` from decimal text `a` or `a/b`.
pub fn parse_rat(src: &str) -> Option<Rat> {
    let src = src.trim();
    match src.split_once('/') {
        Some((a, b)) => {
            let d: BigInt = b.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rat::new(a.trim().parse().ok()?, d))
        }
        None => Some(Rat::from_integer(src.parse().ok()?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::Exp;

    fn v() -> Vars {
        VarTable::quantum(1, &[])
    }

    #[test]
    fn two_term_parse() {
        let a = parse_dop::<LPoly>("D^2 - q", &v(), 1).unwrap();
        let d = DOp::<LPoly>::gen(&v(), 1, 0);
        let q = DOp::from_coeff(&v(), 1, LPoly::var(&v(), "q", 1).unwrap());
        assert_eq!(a, d.pow(2).unwrap().sub(&q).unwrap());
    }

    #[test]
    fn product_is_noncommutative() {
        let a = parse_dop::<LPoly>("D*q", &v(), 1).unwrap();
        let b = parse_dop::<LPoly>("q*D + h*q", &v(), 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "q*D + h*q");
    }

    #[test]
    fn m35_round_trip() {
        let s = "D^4 - 27*q*D^2 - 27*h*q*D - 6*h^2*q";
        let a = parse_dop::<LPoly>(s, &v(), 1).unwrap();
        assert_eq!(a.to_string(), s);
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse_dop::<LPoly>("D^2 - $q", &v(), 1).unwrap_err();
        assert_eq!(e.pos, 6);
        let e = parse_dop::<LPoly>("D^2 - x", &v(), 1).unwrap_err();
        assert_eq!(e.pos, 6);
        let e = parse_dop::<LPoly>("(D + q", &v(), 1).unwrap_err();
        assert_eq!(e.pos, 6);
        let e = parse_dop::<LPoly>("D^", &v(), 1).unwrap_err();
        assert_eq!(e.pos, 2);
        let e = parse_dop::<LPoly>("D^-1", &v(), 1).unwrap_err();
        assert_eq!(e.pos, 1);
        let e = parse_dop::<LPoly>("D/(1+q)", &v(), 1).unwrap_err();
        assert_eq!(e.pos, 1);
    }

    #[test]
    fn negative_power_of_unit() {
        let vv = VarTable::half_power();
        let a = parse_dop::<LPoly>("-2*i*s^-1*D^3 + D", &vv, 1).unwrap();
        assert_eq!(a.to_string(), "-2*i*s^-1*D^3 + D");
        let c = a.coeff(&Multi(vec![3]));
        assert_eq!(
            c,
            LPoly::monomial(&vv, Exp(vec![0, -1]), GRat::new(Rat::zero(), crate::exact::rat_int(-2)))
        );
    }

    #[test]
    fn inferred_tables() {
        let (vars, r) = infer_quantum_vars(&["D^4 - 27*q*D^2 - alpha*h*q*D - beta*h^2*q"]).unwrap();
        assert_eq!(r, 1);
        assert_eq!(vars.names(), &["h", "q", "alpha", "beta"]);
        let (vars, r) = infer_quantum_vars(&["D2^2 - 2*D1*D2 - q2*(1 - q1)"]).unwrap();
        assert_eq!(r, 2);
        assert_eq!(vars.names(), &["h", "q1", "q2"]);
        let (vars, _) = infer_quantum_vars(&["D^4 - 1/2*h*D^3 - 1/4*s^2"]).unwrap();
        assert_eq!(vars.names(), &["h", "s"]);
    }

    #[test]
    fn rational_coefficients() {
        let f = parse_coeff::<RFunc>("q/(q + 1) - 1", &v()).unwrap();
        let expect = RFunc::new(
            LPoly::constant(&v(), GRat::int(-1)),
            LPoly::var(&v(), "q", 1).unwrap().add(&LPoly::one(&v())),
        )
        .unwrap();
        assert_eq!(f, expect);
    }
}
