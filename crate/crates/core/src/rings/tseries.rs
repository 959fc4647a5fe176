//! Truncated multivariate power series.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::exact::{GRat, Rat};

use super::lpoly::{fmt_scaled, join_terms, Exp, LPoly};
use super::vars::{DerivKind, Vars};
use super::{DiffField, DiffRing, RingError};

/// Variable table plus one exclusive truncation bound per variable: every
/// stored exponent `e_v` satisfies `0 <= e_v < trunc[v]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesCtx {
    pub vars: Vars,
    pub trunc: Vec<i32>,
}

impl SeriesCtx {
    pub fn new(vars: Vars, trunc: Vec<i32>) -> Arc<Self> {
        assert_eq!(vars.len(), trunc.len());
        Arc::new(SeriesCtx { vars, trunc })
    }

    fn keeps(&self, e: &Exp) -> bool {
        e.0.iter().zip(&self.trunc).all(|(&k, &t)| k >= 0 && k < t)
    }
}

#[derive(Clone, Debug)]
pub struct TSeries {
    ctx: Arc<SeriesCtx>,
    terms: BTreeMap<Exp, GRat>,
}

impl PartialEq for TSeries {
    fn eq(&self, o: &Self) -> bool {
        self.ctx == o.ctx && self.terms == o.terms
    }
}

impl TSeries {
    pub fn zero(ctx: &Arc<SeriesCtx>) -> Self {
        TSeries {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ctx: &Arc<SeriesCtx>, c: GRat) -> Self {
        Self::monomial(ctx, Exp::zero(ctx.vars.len()), c)
    }

    pub fn monomial(ctx: &Arc<SeriesCtx>, e: Exp, c: GRat) -> Self {
        let mut s = Self::zero(ctx);
        s.add_term(e, &c);
        s
    }

    /// Truncation of a polynomial with nonnegative exponents.
    pub fn from_lpoly(ctx: &Arc<SeriesCtx>, p: &LPoly) -> Result<Self, RingError> {
        if p.vars() != &ctx.vars {
            return Err(RingError::VarTableMismatch);
        }
        let mut s = Self::zero(ctx);
        for (e, c) in p.terms() {
            if e.0.iter().any(|&k| k < 0) {
                return Err(RingError::NotAUnit);
            }
            s.add_term(e.clone(), c);
        }
        Ok(s)
    }

    pub fn to_lpoly(&self) -> LPoly {
        LPoly::from_terms(&self.ctx.vars, self.terms.iter().map(|(e, c)| (e.clone(), c.clone())))
    }

    pub fn ctx(&self) -> &Arc<SeriesCtx> {
        &self.ctx
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &GRat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Exp) -> GRat {
        self.terms.get(e).cloned().unwrap_or_else(GRat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn add_term(&mut self, e: Exp, c: &GRat) {
        if c.is_zero() || !self.ctx.keeps(&e) {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, o: &TSeries) -> TSeries {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c);
        }
        r
    }

    pub fn sub(&self, o: &TSeries) -> TSeries {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> TSeries {
        self.scale(&GRat::int(-1))
    }

    pub fn scale(&self, c: &GRat) -> TSeries {
        let mut r = TSeries::zero(&self.ctx);
        if c.is_zero() {
            return r;
        }
        r.terms = self.terms.iter().map(|(e, d)| (e.clone(), d * c)).collect();
        r
    }

    pub fn mul(&self, o: &TSeries) -> TSeries {
        let mut r = TSeries::zero(&self.ctx);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                r.add_term(e1.add(e2), &(c1 * c2));
            }
        }
        r
    }

    pub fn derive(&self, dir: usize) -> Result<TSeries, RingError> {
        let d = self
            .ctx
            .vars
            .dirs()
            .get(dir)
            .ok_or_else(|| RingError::UnknownDirection(dir.to_string()))?;
        let mut r = TSeries::zero(&self.ctx);
        for (e, c) in &self.terms {
            match &d.kind {
                DerivKind::Euler(ls) => {
                    let mut ev = Rat::zero();
                    for (v, l) in ls {
                        ev += l * Rat::from_integer(e.0[*v].into());
                    }
                    r.add_term(e.clone(), &(c * &GRat::from(ev)));
                }
                DerivKind::Partial(v) => {
                    let k = e.0[*v];
                    if k != 0 {
                        let mut f = e.clone();
                        f.0[*v] -= 1;
                        r.add_term(f, &(c * &GRat::int(k as i64)));
                    }
                }
            }
        }
        Ok(r)
    }

    /// Value with the listed variables set to zero.
    pub fn restrict_zero(&self, vars: &[usize]) -> TSeries {
        let mut r = TSeries::zero(&self.ctx);
        for (e, c) in &self.terms {
            if vars.iter().all(|&v| e.0[v] == 0) {
                r.add_term(e.clone(), c);
            }
        }
        r
    }

    /// Inverse of a series with nonzero constant term.
    pub fn inv(&self) -> Option<TSeries> {
        let zero = Exp::zero(self.ctx.vars.len());
        let c0 = self.terms.get(&zero)?.clone();
        let c0i = c0.inv().ok()?;
        let mut rest = self.clone();
        rest.terms.remove(&zero);
        let x = rest.scale(&-&c0i);
        // 1/(1 - x) = sum x^k; x is nilpotent under the truncation.
        let mut acc = TSeries::constant(&self.ctx, GRat::one());
        let mut pw = acc.clone();
        loop {
            pw = pw.mul(&x);
            if pw.is_zero() {
                break;
            }
            acc = acc.add(&pw);
        }
        Some(acc.scale(&c0i))
    }
}

impl fmt::Display for TSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self
            .terms
            .iter()
            .rev()
            .map(|(e, c)| fmt_scaled(c, &LPoly::fmt_monomial(&self.ctx.vars, e)))
            .collect();
        write!(f, "{}", join_terms(terms))
    }
}

impl DiffRing for TSeries {
    type Ctx = Arc<SeriesCtx>;

    fn ctx(&self) -> Arc<SeriesCtx> {
        self.ctx.clone()
    }
    fn zero(ctx: &Arc<SeriesCtx>) -> Self {
        TSeries::zero(ctx)
    }
    fn one(ctx: &Arc<SeriesCtx>) -> Self {
        TSeries::constant(ctx, GRat::one())
    }
    fn scalar(ctx: &Arc<SeriesCtx>, c: &GRat) -> Self {
        TSeries::constant(ctx, c.clone())
    }
    fn ndirs(ctx: &Arc<SeriesCtx>) -> usize {
        ctx.vars.ndirs()
    }
    fn eps(ctx: &Arc<SeriesCtx>) -> Self {
        match ctx.vars.hbar() {
            Some(h) => TSeries::monomial(ctx, Exp::unit(ctx.vars.len(), h, 1), GRat::one()),
            None => TSeries::constant(ctx, GRat::one()),
        }
    }
    fn is_zero(&self) -> bool {
        TSeries::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        TSeries::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        TSeries::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        TSeries::mul(self, o)
    }
    fn neg(&self) -> Self {
        TSeries::neg(self)
    }
    fn scale(&self, c: &GRat) -> Self {
        TSeries::scale(self, c)
    }
    fn derive(&self, dir: usize) -> Self {
        TSeries::derive(self, dir).expect("direction out of range")
    }
    fn inv(&self) -> Option<Self> {
        TSeries::inv(self)
    }
    fn dir_name(ctx: &Arc<SeriesCtx>, i: usize) -> String {
        ctx.vars.dirs()[i].name.clone()
    }
    fn size_hint(&self) -> usize {
        self.terms.len()
    }
}

impl DiffField for TSeries {}
