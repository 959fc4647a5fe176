//! Normal-ordered differential operators `sum c_a (eps d_1)^a_1 ... (eps d_r)^a_r`.
//!
//! Coefficients come from any [`DiffRing`]; `eps` is the ring's own scale
//! (`h` when the variable table has one, else 1). The first `r` derivations
//! of the ring are the operator directions.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::binomial;
use thiserror::Error;

use crate::exact::{GRat, Rat};
use crate::rings::{join_terms, DiffRing, Exp, LPoly, RFunc, RingError, VarTable, Vars};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeylError {
    #[error("operators live over different coefficient rings or direction counts")]
    Mismatch,
    #[error("{0}")]
    Unsupported(String),
    #[error("no weight given for `{0}`")]
    MissingWeight(String),
    #[error("direction {0} has no image under the specialization")]
    UnmappedDirection(usize),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Derivative multi-index, ordered graded-lex like [`Exp`].
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Multi(pub Vec<u32>);

impl Multi {
    pub fn zero(r: usize) -> Self {
        Multi(vec![0; r])
    }

    pub fn unit(r: usize, i: usize, k: u32) -> Self {
        let mut v = vec![0; r];
        v[i] = k;
        Multi(v)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn add(&self, o: &Multi) -> Multi {
        Multi(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, o: &Multi) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a <= b)
    }

    /// `o - self`, assuming `self` divides `o`.
    pub fn quotient(&self, o: &Multi) -> Multi {
        Multi(self.0.iter().zip(&o.0).map(|(a, b)| b - a).collect())
    }

    /// All `g <= self` componentwise.
    pub fn below(&self) -> Vec<Multi> {
        let mut out = vec![Multi(Vec::new())];
        for &k in &self.0 {
            out = out
                .into_iter()
                .flat_map(|m| {
                    (0..=k).map(move |j| {
                        let mut v = m.0.clone();
                        v.push(j);
                        Multi(v)
                    })
                })
                .collect();
        }
        out
    }
}

impl Ord for Multi {
    fn cmp(&self, o: &Self) -> Ordering {
        self.total().cmp(&o.total()).then_with(|| self.0.cmp(&o.0))
    }
}

impl PartialOrd for Multi {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

#[derive(Clone, Debug)]
pub struct DOp<C: DiffRing> {
    ctx: C::Ctx,
    r: usize,
    terms: BTreeMap<Multi, C>,
}

impl<C: DiffRing> PartialEq for DOp<C> {
    fn eq(&self, o: &Self) -> bool {
        self.ctx == o.ctx && self.r == o.r && self.terms == o.terms
    }
}

fn multi_binomial(a: &Multi, g: &Multi) -> GRat {
    let mut acc = BigInt::from(1);
    for (x, y) in a.0.iter().zip(&g.0) {
        acc *= binomial(BigInt::from(*x), BigInt::from(*y));
    }
    GRat::from(Rat::from_integer(acc))
}

impl<C: DiffRing> DOp<C> {
    pub fn zero(ctx: &C::Ctx, r: usize) -> Self {
        assert!(r <= C::ndirs(ctx), "more operator directions than derivations");
        DOp {
            ctx: ctx.clone(),
            r,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_coeff(ctx: &C::Ctx, r: usize, c: C) -> Self {
        Self::monomial(ctx, r, Multi::zero(r), c)
    }

    pub fn one(ctx: &C::Ctx, r: usize) -> Self {
        Self::from_coeff(ctx, r, C::one(ctx))
    }

    pub fn monomial(ctx: &C::Ctx, r: usize, a: Multi, c: C) -> Self {
        let mut d = Self::zero(ctx, r);
        d.add_term(a, c);
        d
    }

    /// The generator `eps * d_i`.
    pub fn gen(ctx: &C::Ctx, r: usize, i: usize) -> Self {
        Self::monomial(ctx, r, Multi::unit(r, i, 1), C::one(ctx))
    }

    pub fn ctx(&self) -> &C::Ctx {
        &self.ctx
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Multi, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, a: &Multi) -> C {
        self.terms.get(a).cloned().unwrap_or_else(|| C::zero(&self.ctx))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, a: Multi, c: C) {
        assert_eq!(a.0.len(), self.r);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&a) {
            Some(x) => {
                *x = x.add(&c);
                if x.is_zero() {
                    self.terms.remove(&a);
                }
            }
            None => {
                self.terms.insert(a, c);
            }
        }
    }

    fn compatible(&self, o: &Self) -> Result<(), WeylError> {
        if self.r != o.r || self.ctx != o.ctx {
            return Err(WeylError::Mismatch);
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self, WeylError> {
        self.compatible(o)?;
        let mut r = self.clone();
        for (a, c) in &o.terms {
            r.add_term(a.clone(), c.clone());
        }
        Ok(r)
    }

    pub fn sub(&self, o: &Self) -> Result<Self, WeylError> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.neg())
    }

    pub fn scale(&self, c: &GRat) -> Self {
        self.map_coeffs(|x| x.scale(c))
    }

    /// Left multiplication by a coefficient.
    pub fn lmul(&self, c: &C) -> Self {
        self.map_coeffs(|x| c.mul(x))
    }

    pub fn map_coeffs(&self, f: impl Fn(&C) -> C) -> Self {
        let mut r = Self::zero(&self.ctx, self.r);
        for (a, c) in &self.terms {
            r.add_term(a.clone(), f(c));
        }
        r
    }

    /// `(eps d)^a . c` written in normal order.
    fn push_through(&self, a: &Multi, c: &C) -> Vec<(Multi, C)> {
        let eps = C::eps(&self.ctx);
        let mut out = Vec::new();
        for g in a.below() {
            let mut dc = c.clone();
            for (i, &k) in g.0.iter().enumerate() {
                for _ in 0..k {
                    if dc.is_zero() {
                        break;
                    }
                    dc = dc.derive(i);
                }
            }
            if dc.is_zero() {
                continue;
            }
            let w = dc.mul(&eps.pow(g.total())).scale(&multi_binomial(a, &g));
            out.push((g.quotient(a), w));
        }
        out
    }

    /// Normal-ordered product `self * o`.
    pub fn mul(&self, o: &Self) -> Result<Self, WeylError> {
        self.compatible(o)?;
        let mut r = Self::zero(&self.ctx, self.r);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                for (rest, w) in self.push_through(a, cb) {
                    r.add_term(rest.add(b), ca.mul(&w));
                }
            }
        }
        Ok(r)
    }

    pub fn pow(&self, e: u32) -> Result<Self, WeylError> {
        let mut acc = Self::one(&self.ctx, self.r);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// `[self, o] = self*o - o*self`.
    pub fn commutator(&self, o: &Self) -> Result<Self, WeylError> {
        self.mul(o)?.sub(&o.mul(self)?)
    }

    /// Highest power of direction `i` occurring.
    pub fn order_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|a| a.0[i]).max().unwrap_or(0)
    }

    pub fn total_order(&self) -> u32 {
        self.terms.keys().map(Multi::total).max().unwrap_or(0)
    }

    /// Graded-lex leading derivative monomial.
    pub fn leading(&self) -> Option<(&Multi, &C)> {
        self.terms.iter().next_back()
    }

    /// Coefficients of a single-direction operator, indexed by power.
    pub fn univariate_coeffs(&self) -> Result<Vec<C>, WeylError> {
        if self.r != 1 {
            return Err(WeylError::Unsupported("expected one direction".into()));
        }
        let n = self.order_in(0) as usize;
        Ok((0..=n).map(|k| self.coeff(&Multi(vec![k as u32]))).collect())
    }

    /// Formal adjoint of a one-direction operator, with `h_flip` the
    /// coefficient involution (`h -> -h`). The generator maps to itself when
    /// the scale is `h` and to its negative otherwise.
    pub fn adjoint_with(&self, has_h: bool, h_flip: impl Fn(&C) -> C) -> Result<Self, WeylError> {
        if self.r != 1 {
            return Err(WeylError::Unsupported(
                "adjoint is only defined for one direction".into(),
            ));
        }
        let mut out = Self::zero(&self.ctx, 1);
        let g = Self::gen(&self.ctx, 1, 0);
        for (a, c) in &self.terms {
            let k = a.0[0];
            let mut p = g.pow(k)?;
            if !has_h && k % 2 == 1 {
                p = p.neg();
            }
            let term = p.mul(&Self::from_coeff(&self.ctx, 1, h_flip(c)))?;
            out = out.add(&term)?;
        }
        Ok(out)
    }
}

impl DOp<LPoly> {
    pub fn adjoint(&self) -> Result<Self, WeylError> {
        self.adjoint_with(self.ctx.hbar().is_some(), LPoly::flip_hbar)
    }

    /// Total weights of the monomials. Keys are variable names and either a
    /// direction name (`D`, `D1`, ...) or `d` for every direction.
    pub fn weighted_degrees(&self, weights: &HashMap<String, i64>) -> Result<BTreeSet<i64>, WeylError> {
        let vars = &self.ctx;
        let mut gen_w = Vec::with_capacity(self.r);
        let eps_w = match vars.hbar() {
            Some(h) => Some(
                *weights
                    .get(vars.name(h))
                    .ok_or_else(|| WeylError::MissingWeight(vars.name(h).to_string()))?,
            ),
            None => None,
        };
        for i in 0..self.r {
            let name = &vars.dirs()[i].name;
            let w = weights.get(name).or_else(|| weights.get("d")).copied();
            gen_w.push(w);
        }
        let mut out = BTreeSet::new();
        for (a, c) in &self.terms {
            let mut base = 0i64;
            for (i, &k) in a.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let w = gen_w[i].ok_or_else(|| WeylError::MissingWeight(vars.dirs()[i].name.clone()))?;
                base += k as i64 * (w + eps_w.unwrap_or(0));
            }
            for (e, _) in c.terms() {
                let mut t = base;
                for (v, &k) in e.0.iter().enumerate() {
                    if k != 0 {
                        let w = weights
                            .get(vars.name(v))
                            .ok_or_else(|| WeylError::MissingWeight(vars.name(v).to_string()))?;
                        t += k as i64 * w;
                    }
                }
                out.insert(t);
            }
        }
        if out.is_empty() {
            out.insert(0);
        }
        Ok(out)
    }

    /// Replace each `eps d_i` by a commuting symbol and set `h = 0`. The
    /// result lives over the variable table extended by `b` (one direction)
    /// or `b1..br`.
    pub fn shadow(&self) -> Result<LPoly, WeylError> {
        let target = shadow_vars(&self.ctx, self.r);
        let n = self.ctx.len();
        let mut out = LPoly::zero(&target);
        for (a, c) in &self.terms {
            for (e, k) in c.terms() {
                if let Some(h) = self.ctx.hbar() {
                    if e.0[h] != 0 {
                        if e.0[h] < 0 {
                            return Err(WeylError::Unsupported("negative power of h".into()));
                        }
                        continue;
                    }
                }
                let mut f = e.0.clone();
                f.extend(a.0.iter().map(|&x| x as i32));
                debug_assert_eq!(f.len(), n + self.r);
                out = out.add(&LPoly::monomial(&target, Exp(f), k.clone()));
            }
        }
        Ok(out)
    }
}

/// Variable table of the commutative shadow.
pub fn shadow_vars(vars: &VarTable, r: usize) -> Vars {
    let mut names: Vec<String> = vars.names().to_vec();
    if r == 1 {
        names.push("b".into());
    } else {
        names.extend((1..=r).map(|k| format!("b{k}")));
    }
    Arc::new(VarTable::new(names, Vec::new()).expect("shadow symbols are fresh"))
}

/// How one source direction is rewritten by [`specialize`]: `eps d_i` goes
/// to `scale * eps d_target`, or must be absent when `None`.
pub type DirMap = Vec<Option<(usize, GRat)>>;

fn specialize_with<C: DiffRing, D: DiffRing>(
    a: &DOp<C>,
    target_ctx: &D::Ctx,
    target_r: usize,
    dirs: &DirMap,
    coeff: impl Fn(&C) -> Result<D, RingError>,
) -> Result<DOp<D>, WeylError> {
    if dirs.len() != a.r {
        return Err(WeylError::Mismatch);
    }
    let mut out = DOp::zero(target_ctx, target_r);
    for (m, c) in &a.terms {
        let mut scale = GRat::one();
        let mut tm = Multi::zero(target_r);
        for (i, &k) in m.0.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let (t, s) = dirs[i].as_ref().ok_or(WeylError::UnmappedDirection(i))?;
            scale = &scale * &s.pow(k);
            tm.0[*t] += k;
        }
        out.add_term(tm, coeff(c)?.scale(&scale));
    }
    Ok(out)
}

/// Maps coefficients through a variable substitution and each direction
/// through `dirs`; merged directions add their powers.
pub fn specialize(
    a: &DOp<LPoly>,
    map: &HashMap<String, LPoly>,
    target: &Vars,
    target_r: usize,
    dirs: &DirMap,
) -> Result<DOp<LPoly>, WeylError> {
    specialize_with(a, target, target_r, dirs, |c| c.substitute(map, target))
}

pub fn specialize_rfunc(
    a: &DOp<RFunc>,
    map: &HashMap<String, LPoly>,
    target: &Vars,
    target_r: usize,
    dirs: &DirMap,
) -> Result<DOp<RFunc>, WeylError> {
    specialize_with(a, target, target_r, dirs, |c| c.substitute(map, target))
}

impl<C: DiffRing> DOp<C> {
    fn fmt_deriv(&self, a: &Multi) -> String {
        let mut parts = Vec::new();
        for (i, &k) in a.0.iter().enumerate() {
            let name = C::dir_name(&self.ctx, i);
            match k {
                0 => {}
                1 => parts.push(name),
                _ => parts.push(format!("{name}^{k}")),
            }
        }
        parts.join("*")
    }
}

impl<C: DiffRing> fmt::Display for DOp<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = Vec::new();
        for (a, c) in self.terms.iter().rev() {
            let d = self.fmt_deriv(a);
            for (neg, body) in c.fmt_terms() {
                let s = if d.is_empty() {
                    body
                } else if body == "1" {
                    d.clone()
                } else {
                    format!("{body}*{d}")
                };
                out.push((neg, s));
            }
        }
        write!(f, "{}", join_terms(out))
    }
}
