//! Multivariate Laurent polynomials over `GRat`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::exact::{GRat, Rat};

use super::vars::{DerivKind, VarTable, Vars};
use super::{DiffRing, RingError};

/// Exponent vector ordered graded-lex: total degree first, then
/// lexicographically in variable-table order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Exp(pub Vec<i32>);

impl Exp {
    pub fn zero(n: usize) -> Self {
        Exp(vec![0; n])
    }

    pub fn unit(n: usize, i: usize, e: i32) -> Self {
        let mut v = vec![0; n];
        v[i] = e;
        Exp(v)
    }

    pub fn total(&self) -> i64 {
        self.0.iter().map(|&e| e as i64).sum()
    }

    pub fn add(&self, o: &Exp) -> Exp {
        Exp(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Exp) -> Exp {
        Exp(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn divides(&self, o: &Exp) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a <= b)
    }
}

impl Ord for Exp {
    fn cmp(&self, o: &Self) -> Ordering {
        self.total().cmp(&o.total()).then_with(|| self.0.cmp(&o.0))
    }
}

impl PartialOrd for Exp {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

#[derive(Clone, Debug)]
pub struct LPoly {
    vars: Vars,
    terms: BTreeMap<Exp, GRat>,
}

impl PartialEq for LPoly {
    fn eq(&self, o: &Self) -> bool {
        self.vars == o.vars && self.terms == o.terms
    }
}

impl LPoly {
    pub fn zero(vars: &Vars) -> Self {
        LPoly {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Vars, c: GRat) -> Self {
        Self::monomial(vars, Exp::zero(vars.len()), c)
    }

    pub fn one(vars: &Vars) -> Self {
        Self::constant(vars, GRat::one())
    }

    pub fn monomial(vars: &Vars, e: Exp, c: GRat) -> Self {
        assert_eq!(e.0.len(), vars.len());
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        LPoly {
            vars: vars.clone(),
            terms,
        }
    }

    /// The variable `name` to the power `e`.
    pub fn var(vars: &Vars, name: &str, e: i32) -> Result<Self, RingError> {
        let i = vars
            .index(name)
            .ok_or_else(|| RingError::UnknownVariable(name.to_string()))?;
        Ok(Self::monomial(vars, Exp::unit(vars.len(), i, e), GRat::one()))
    }

    pub fn from_terms(vars: &Vars, it: impl IntoIterator<Item = (Exp, GRat)>) -> Self {
        let mut p = Self::zero(vars);
        for (e, c) in it {
            p.add_term(e, &c);
        }
        p
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exp, &GRat)> {
        self.terms.iter()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &Exp) -> GRat {
        self.terms.get(e).cloned().unwrap_or_else(GRat::zero)
    }

    /// Graded-lex leading term.
    pub fn leading(&self) -> Option<(&Exp, &GRat)> {
        self.terms.iter().next_back()
    }

    /// Scalar value when the polynomial is constant.
    pub fn as_constant(&self) -> Option<GRat> {
        match self.terms.len() {
            0 => Some(GRat::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.is_zero().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// `c * x^e` with `c != 0`: the units of the Laurent ring.
    pub fn as_unit_monomial(&self) -> Option<(&Exp, &GRat)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub(crate) fn add_term(&mut self, e: Exp, c: &GRat) {
        if c.is_zero() {
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

    fn check(&self, o: &LPoly) {
        assert!(
            Arc::ptr_eq(&self.vars, &o.vars) || self.vars == o.vars,
            "LPoly variable tables differ"
        );
    }

    pub fn same_vars(&self, o: &LPoly) -> bool {
        Arc::ptr_eq(&self.vars, &o.vars) || self.vars == o.vars
    }

    pub fn add(&self, o: &LPoly) -> LPoly {
        self.check(o);
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c);
        }
        r
    }

    pub fn sub(&self, o: &LPoly) -> LPoly {
        self.check(o);
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), &-c);
        }
        r
    }

    pub fn neg(&self) -> LPoly {
        LPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, o: &LPoly) -> LPoly {
        self.check(o);
        let mut r = LPoly::zero(&self.vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                r.add_term(e1.add(e2), &(c1 * c2));
            }
        }
        r
    }

    pub fn scale(&self, c: &GRat) -> LPoly {
        if c.is_zero() {
            return LPoly::zero(&self.vars);
        }
        LPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, d)| (e.clone(), d * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, e: &Exp, c: &GRat) -> LPoly {
        if c.is_zero() {
            return LPoly::zero(&self.vars);
        }
        LPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(f, d)| (f.add(e), d * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> LPoly {
        let mut acc = LPoly::one(&self.vars);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Integer power; negative exponents need a unit monomial.
    pub fn powi(&self, e: i64) -> Result<LPoly, RingError> {
        if e >= 0 {
            return Ok(self.pow(e as u32));
        }
        let inv = self.inv_unit().ok_or(RingError::NotAUnit)?;
        Ok(inv.pow((-e) as u32))
    }

    pub fn inv_unit(&self) -> Option<LPoly> {
        let (e, c) = self.as_unit_monomial()?;
        let ne = Exp(e.0.iter().map(|x| -x).collect());
        Some(LPoly::monomial(&self.vars, ne, c.inv().ok()?))
    }

    /// Apply direction `dir` of the variable table.
    pub fn derive(&self, dir: usize) -> Result<LPoly, RingError> {
        let d = self
            .vars
            .dirs()
            .get(dir)
            .ok_or_else(|| RingError::UnknownDirection(dir.to_string()))?;
        let mut r = LPoly::zero(&self.vars);
        match &d.kind {
            DerivKind::Euler(ls) => {
                for (e, c) in &self.terms {
                    let mut ev = Rat::zero();
                    for (v, l) in ls {
                        ev += l * Rat::from_integer(e.0[*v].into());
                    }
                    r.add_term(e.clone(), &(c * &GRat::from(ev)));
                }
            }
            DerivKind::Partial(v) => {
                for (e, c) in &self.terms {
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

    /// `theta_i = q_i d/dq_i`; the direction must be of Euler type.
    pub fn theta(&self, dir: usize) -> Result<LPoly, RingError> {
        match self.vars.dirs().get(dir).map(|d| &d.kind) {
            Some(DerivKind::Euler(_)) => self.derive(dir),
            _ => Err(RingError::UnknownDirection(dir.to_string())),
        }
    }

    /// Exact image under the ring map sending the variables listed in `map`
    /// to the given polynomials (all in `target`); every other variable must
    /// also exist in `target` and is sent to itself.
    pub fn substitute(&self, map: &HashMap<String, LPoly>, target: &Vars) -> Result<LPoly, RingError> {
        for img in map.values() {
            if img.vars != *target {
                return Err(RingError::VarTableMismatch);
            }
        }
        let n = self.vars.len();
        let mut images: Vec<LPoly> = Vec::with_capacity(n);
        for i in 0..n {
            let name = self.vars.name(i);
            match map.get(name) {
                Some(p) => images.push(p.clone()),
                None => {
                    images.push(LPoly::var(target, name, 1).map_err(|_| RingError::UnmappedVariable(name.to_string()))?)
                }
            }
        }
        let mut cache: HashMap<(usize, i32), LPoly> = HashMap::new();
        let mut out = LPoly::zero(target);
        for (e, c) in &self.terms {
            let mut t = LPoly::constant(target, c.clone());
            for (i, &k) in e.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let key = (i, k);
                let f = match cache.get(&key) {
                    Some(f) => f.clone(),
                    None => {
                        let f = if k > 0 {
                            images[i].pow(k as u32)
                        } else {
                            images[i]
                                .inv_unit()
                                .ok_or_else(|| RingError::NegativePowerOfNonUnit(self.vars.name(i).to_string()))?
                                .pow((-k) as u32)
                        };
                        cache.insert(key, f.clone());
                        f
                    }
                };
                t = t.mul(&f);
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    /// Same polynomial re-expressed over another table containing every
    /// variable that occurs with a nonzero exponent.
    pub fn reembed(&self, target: &Vars) -> Result<LPoly, RingError> {
        let mut idx = Vec::with_capacity(self.vars.len());
        for name in self.vars.names() {
            idx.push(target.index(name));
        }
        let mut out = LPoly::zero(target);
        for (e, c) in &self.terms {
            let mut f = Exp::zero(target.len());
            for (i, &k) in e.0.iter().enumerate() {
                if k != 0 {
                    let j = idx[i].ok_or_else(|| RingError::UnmappedVariable(self.vars.name(i).to_string()))?;
                    f.0[j] += k;
                }
            }
            out.add_term(f, c);
        }
        Ok(out)
    }

    /// `h -> -h`, identity on every other variable.
    pub fn flip_hbar(&self) -> LPoly {
        match self.vars.hbar() {
            None => self.clone(),
            Some(h) => LPoly {
                vars: self.vars.clone(),
                terms: self
                    .terms
                    .iter()
                    .map(|(e, c)| {
                        let c = if e.0[h] % 2 != 0 { -c } else { c.clone() };
                        (e.clone(), c)
                    })
                    .collect(),
            },
        }
    }

    /// Componentwise minimum exponent over all terms.
    pub fn min_exp(&self) -> Option<Exp> {
        let mut it = self.terms.keys();
        let first = it.next()?.clone();
        Some(it.fold(first, |mut acc, e| {
            for (a, b) in acc.0.iter_mut().zip(&e.0) {
                *a = (*a).min(*b);
            }
            acc
        }))
    }

    pub fn max_exp_of(&self, v: usize) -> Option<i32> {
        self.terms.keys().map(|e| e.0[v]).max()
    }

    /// Exact quotient in the Laurent ring, if `d` divides `self`.
    pub fn exact_div(&self, d: &LPoly) -> Option<LPoly> {
        self.check(d);
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(LPoly::zero(&self.vars));
        }
        if let Some(inv) = d.inv_unit() {
            return Some(self.mul(&inv));
        }
        // Shift both to genuine polynomials without monomial content in `d`.
        let dm = d.min_exp().unwrap();
        let nm = self.min_exp().unwrap();
        let zero = Exp::zero(self.vars.len());
        let dshift = d.mul_monomial(&zero.sub(&dm), &GRat::one());
        let nshift = self.mul_monomial(&zero.sub(&nm), &GRat::one());
        let (lde, ldc) = dshift.leading().map(|(e, c)| (e.clone(), c.clone()))?;
        let ldc_inv = ldc.inv().ok()?;
        let mut rem = nshift;
        let mut quo = LPoly::zero(&self.vars);
        let cap = 100_000usize;
        let mut steps = 0;
        while let Some((e, c)) = rem.leading().map(|(e, c)| (e.clone(), c.clone())) {
            steps += 1;
            if steps > cap || !lde.divides(&e) {
                return None;
            }
            let qe = e.sub(&lde);
            let qc = &c * &ldc_inv;
            rem = rem.sub(&dshift.mul_monomial(&qe, &qc));
            quo.add_term(qe, &qc);
        }
        // self = x^nm * nshift, d = x^dm * dshift.
        Some(quo.mul_monomial(&nm.sub(&dm), &GRat::one()))
    }

    pub fn degree_in(&self, v: usize) -> i32 {
        self.terms.keys().map(|e| e.0[v]).max().unwrap_or(0)
    }

    /// Writes a term's monomial factors (`h*q^2`), empty for the unit.
    pub(crate) fn fmt_monomial(vars: &VarTable, e: &Exp) -> String {
        let mut parts = Vec::new();
        for (i, &k) in e.0.iter().enumerate() {
            match k {
                0 => {}
                1 => parts.push(vars.name(i).to_string()),
                _ => parts.push(format!("{}^{}", vars.name(i), k)),
            }
        }
        parts.join("*")
    }

    /// Terms in descending graded-lex order as `(sign_negative, body)`.
    pub(crate) fn fmt_terms(&self) -> Vec<(bool, String)> {
        self.terms
            .iter()
            .rev()
            .map(|(e, c)| fmt_scaled(c, &LPoly::fmt_monomial(&self.vars, e)))
            .collect()
    }
}

/// Formats `c * body` as a sign and a string with explicit `*`.
pub(crate) fn fmt_scaled(c: &GRat, body: &str) -> (bool, String) {
    if c.is_simple() {
        let neg = c.is_negative_lead();
        let a = if neg { -c } else { c.clone() };
        let s = if body.is_empty() {
            a.to_string()
        } else if a.is_one() {
            body.to_string()
        } else {
            format!("{a}*{body}")
        };
        (neg, s)
    } else if body.is_empty() {
        (false, format!("({c})"))
    } else {
        (false, format!("({c})*{body}"))
    }
}

pub(crate) fn join_terms(terms: Vec<(bool, String)>) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (k, (neg, body)) in terms.into_iter().enumerate() {
        if k == 0 {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        s.push_str(&body);
    }
    s
}

impl fmt::Display for LPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", join_terms(self.fmt_terms()))
    }
}

impl DiffRing for LPoly {
    type Ctx = Vars;

    fn ctx(&self) -> Vars {
        self.vars.clone()
    }
    fn zero(ctx: &Vars) -> Self {
        LPoly::zero(ctx)
    }
    fn one(ctx: &Vars) -> Self {
        LPoly::one(ctx)
    }
    fn scalar(ctx: &Vars, c: &GRat) -> Self {
        LPoly::constant(ctx, c.clone())
    }
    fn ndirs(ctx: &Vars) -> usize {
        ctx.ndirs()
    }
    fn eps(ctx: &Vars) -> Self {
        match ctx.hbar() {
            Some(h) => LPoly::monomial(ctx, Exp::unit(ctx.len(), h, 1), GRat::one()),
            None => LPoly::one(ctx),
        }
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, o: &Self) -> Self {
        LPoly::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        LPoly::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        LPoly::mul(self, o)
    }
    fn neg(&self) -> Self {
        LPoly::neg(self)
    }
    fn scale(&self, c: &GRat) -> Self {
        LPoly::scale(self, c)
    }
    fn derive(&self, dir: usize) -> Self {
        LPoly::derive(self, dir).expect("direction out of range")
    }
    fn inv(&self) -> Option<Self> {
        self.inv_unit()
    }
    fn fmt_terms(&self) -> Vec<(bool, String)> {
        LPoly::fmt_terms(self)
    }
    fn dir_name(ctx: &Vars, i: usize) -> String {
        ctx.dirs()[i].name.clone()
    }
    fn size_hint(&self) -> usize {
        self.terms.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Vars {
        VarTable::quantum(1, &[])
    }

    #[test]
    fn theta_eigenvalues() {
        let v = q();
        let q3 = LPoly::var(&v, "q", 3).unwrap();
        assert_eq!(q3.theta(0).unwrap(), q3.scale(&GRat::int(3)));
        assert!(LPoly::one(&v).theta(0).unwrap().is_zero());
        let f = LPoly::var(&v, "q", -1)
            .unwrap()
            .add(&LPoly::var(&v, "q", 2).unwrap().scale(&GRat::int(5)));
        let expect = LPoly::var(&v, "q", -1)
            .unwrap()
            .neg()
            .add(&LPoly::var(&v, "q", 2).unwrap().scale(&GRat::int(10)));
        assert_eq!(f.theta(0).unwrap(), expect);
    }

    #[test]
    fn theta_unknown_direction() {
        let v = q();
        assert!(LPoly::one(&v).theta(3).is_err());
    }

    #[test]
    fn substitute_specialization() {
        let src = VarTable::quantum(2, &[]);
        let dst = VarTable::half_power();
        let s = LPoly::var(&dst, "s", 1).unwrap();
        let mut map = HashMap::new();
        map.insert("q1".to_string(), LPoly::constant(&dst, GRat::int(-1)));
        map.insert("q2".to_string(), s.scale(&GRat::i()));
        let f = LPoly::var(&src, "q1", 1)
            .unwrap()
            .mul(&LPoly::var(&src, "q2", 1).unwrap());
        assert_eq!(f.substitute(&map, &dst).unwrap(), s.scale(&-GRat::i()));
        let g = LPoly::var(&src, "q2", 2).unwrap();
        assert_eq!(
            g.substitute(&map, &dst).unwrap(),
            LPoly::var(&dst, "s", 2).unwrap().neg()
        );
    }

    #[test]
    fn substitute_identity() {
        let v = VarTable::quantum(2, &[]);
        let f = LPoly::var(&v, "q1", -2)
            .unwrap()
            .add(&LPoly::var(&v, "h", 1).unwrap().scale(&GRat::frac(3, 7)));
        assert_eq!(f.substitute(&HashMap::new(), &v).unwrap(), f);
    }

    #[test]
    fn substitute_negative_power_of_non_unit_fails() {
        let v = q();
        let f = LPoly::var(&v, "q", -1).unwrap();
        let mut map = HashMap::new();
        map.insert("q".to_string(), LPoly::one(&v).add(&LPoly::var(&v, "q", 1).unwrap()));
        assert!(matches!(
            f.substitute(&map, &v),
            Err(RingError::NegativePowerOfNonUnit(_))
        ));
    }

    #[test]
    fn exact_division() {
        let v = VarTable::quantum(2, &[]);
        let q1 = LPoly::var(&v, "q1", 1).unwrap();
        let q2 = LPoly::var(&v, "q2", 1).unwrap();
        let one = LPoly::one(&v);
        let a = one.sub(&q1).mul(&q2);
        let b = q1.add(&q2.pow(2)).add(&one);
        let p = a.mul(&b);
        assert_eq!(p.exact_div(&a), Some(b.clone()));
        assert_eq!(p.exact_div(&b), Some(a.clone()));
        assert_eq!(b.exact_div(&a), None);
        let inv = LPoly::var(&v, "q2", -3).unwrap();
        assert_eq!(p.mul(&inv).exact_div(&b), Some(a.mul(&inv)));
    }

    #[test]
    fn display_order() {
        let v = q();
        let f = LPoly::var(&v, "q", 2).unwrap().scale(&GRat::int(6)).sub(
            &LPoly::var(&v, "h", 1)
                .unwrap()
                .mul(&LPoly::var(&v, "q", 1).unwrap())
                .scale(&GRat::frac(1, 4)),
        );
        assert_eq!(f.to_string(), "-1/4*h*q + 6*q^2");
    }
}
