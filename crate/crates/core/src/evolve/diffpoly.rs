//! Polynomials in the jets of unknown functions.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::exact::GRat;
use crate::rings::{fmt_scaled, join_terms, DiffRing};
use crate::text::CoeffSyntax;

use super::EvolveError;

/// A derivative `d^ord sym` of a dependent symbol; `ord` is indexed by the
/// independent variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Jet {
    pub sym: usize,
    pub ord: Vec<u32>,
}

impl Jet {
    /// Order in the first independent variable.
    pub fn xord(&self) -> u32 {
        self.ord[0]
    }

    pub fn shifted(&self, dir: usize, k: i64) -> Jet {
        let mut j = self.clone();
        j.ord[dir] = (j.ord[dir] as i64 + k) as u32;
        j
    }

    pub fn below(&self, o: &Jet) -> bool {
        self.sym == o.sym && self.ord.iter().zip(&o.ord).all(|(a, b)| a <= b)
    }
}

/// Independent variables, dependent symbols and the printed names of the
/// derivations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetSpace {
    indep: Vec<String>,
    symbols: Vec<String>,
    dirs: Vec<String>,
}

pub type Jets = Arc<JetSpace>;

impl JetSpace {
    pub fn new(indep: &[&str], symbols: &[&str], dirs: &[&str]) -> Result<Jets, EvolveError> {
        if indep.is_empty() || indep.len() != dirs.len() {
            return Err(EvolveError::Space(
                "need one derivation name per independent variable".into(),
            ));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) || indep.contains(s) || dirs.contains(s) {
                return Err(EvolveError::Space(format!("name `{s}` used twice")));
            }
            if s.is_empty() || s.contains('_') || s.ends_with(|c: char| c.is_ascii_digit()) {
                return Err(EvolveError::Space(format!("bad symbol name `{s}`")));
            }
        }
        let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        Ok(Arc::new(JetSpace {
            indep: own(indep),
            symbols: own(symbols),
            dirs: own(dirs),
        }))
    }

    /// Variables `x, t` with derivations `d` and `dt`.
    pub fn xt(symbols: &[&str]) -> Result<Jets, EvolveError> {
        Self::new(&["x", "t"], symbols, &["d", "dt"])
    }

    pub fn indep(&self) -> &[String] {
        &self.indep
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn dirs(&self) -> &[String] {
        &self.dirs
    }

    pub fn symbol(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == name)
    }

    pub fn jet(&self, sym: usize) -> Jet {
        Jet {
            sym,
            ord: vec![0; self.indep.len()],
        }
    }

    /// `u`, `u_x`, `u_xxt`, ...
    pub fn jet_name(&self, j: &Jet) -> String {
        let mut s = self.symbols[j.sym].clone();
        if j.ord.iter().any(|&k| k > 0) {
            s.push('_');
            for (v, &k) in j.ord.iter().enumerate() {
                for _ in 0..k {
                    s.push_str(&self.indep[v]);
                }
            }
        }
        s
    }

    /// Accepts `u`, `u_xxt` and the shorthand `u3` for `u_xxx`.
    pub fn parse_jet(&self, name: &str) -> Option<Jet> {
        let (base, rest) = match name.find('_') {
            Some(p) => (&name[..p], Some(&name[p + 1..])),
            None => {
                let cut = name.trim_end_matches(|c: char| c.is_ascii_digit()).len();
                let (b, digits) = name.split_at(cut);
                let sym = self.symbol(b)?;
                let mut j = self.jet(sym);
                if !digits.is_empty() {
                    j.ord[0] = digits.parse().ok()?;
                }
                return Some(j);
            }
        };
        let sym = self.symbol(base)?;
        let mut j = self.jet(sym);
        let mut rest = rest?;
        if rest.is_empty() {
            return None;
        }
        while !rest.is_empty() {
            let v = (0..self.indep.len())
                .filter(|&v| rest.starts_with(self.indep[v].as_str()))
                .max_by_key(|&v| self.indep[v].len())?;
            j.ord[v] += 1;
            rest = &rest[self.indep[v].len()..];
        }
        Some(j)
    }
}

/// Product of jet powers, sorted by jet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<(Jet, u32)>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let mut m: BTreeMap<Jet, u32> = self.0.iter().cloned().collect();
        for (j, e) in &o.0 {
            *m.entry(j.clone()).or_insert(0) += e;
        }
        Mono(m.into_iter().collect())
    }

    pub fn power_of(&self, j: &Jet) -> u32 {
        self.0.iter().find(|(k, _)| k == j).map_or(0, |(_, e)| *e)
    }

    /// The monomial with the power of `j` changed by `k`.
    fn with_power(&self, j: &Jet, k: i64) -> Mono {
        let mut m: BTreeMap<Jet, u32> = self.0.iter().cloned().collect();
        let e = m.get(j).copied().unwrap_or(0) as i64 + k;
        if e <= 0 {
            m.remove(j);
        } else {
            m.insert(j.clone(), e as u32);
        }
        Mono(m.into_iter().collect())
    }
}

impl Ord for Mono {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree().cmp(&o.degree()).then_with(|| self.0.cmp(&o.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Rewrite `jet := value`, applied also to every derivative of `jet`.
pub type Rule = (Jet, DiffPoly);

#[derive(Clone, Debug, PartialEq)]
pub struct DiffPoly {
    ctx: Jets,
    terms: BTreeMap<Mono, GRat>,
}

impl DiffPoly {
    pub fn zero(ctx: &Jets) -> Self {
        DiffPoly {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ctx: &Jets, c: GRat) -> Self {
        Self::from_terms(ctx, [(Mono::one(), c)])
    }

    pub fn from_jet(ctx: &Jets, j: Jet) -> Self {
        Self::from_terms(ctx, [(Mono(vec![(j, 1)]), GRat::one())])
    }

    /// The symbol itself, undifferentiated.
    pub fn symbol(ctx: &Jets, name: &str) -> Option<Self> {
        ctx.symbol(name).map(|s| Self::from_jet(ctx, ctx.jet(s)))
    }

    pub fn from_terms(ctx: &Jets, it: impl IntoIterator<Item = (Mono, GRat)>) -> Self {
        let mut p = Self::zero(ctx);
        for (m, c) in it {
            p.add_term(m, &c);
        }
        p
    }

    pub fn ctx(&self) -> &Jets {
        &self.ctx
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &GRat)> {
        self.terms.iter()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<GRat> {
        match self.terms.len() {
            0 => Some(GRat::zero()),
            1 => self.terms.get(&Mono::one()).cloned(),
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<(&Mono, &GRat)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, m: Mono, c: &GRat) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m).or_insert_with(GRat::zero);
        *e += c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c);
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&GRat::int(-1))
    }

    pub fn scale(&self, c: &GRat) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ctx);
        }
        DiffPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(&self.ctx);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                r.add_term(m1.mul(m2), &(c1 * c2));
            }
        }
        r
    }

    pub fn mul_mono(&self, m: &Mono, c: &GRat) -> Self {
        Self::from_terms(&self.ctx, self.terms.iter().map(|(k, x)| (k.mul(m), x * c)))
    }

    /// Total derivative along independent variable `dir`.
    pub fn derive(&self, dir: usize) -> Self {
        let mut r = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            for (j, e) in &m.0 {
                let rest = m.with_power(j, -1);
                let t = rest.mul(&Mono(vec![(j.shifted(dir, 1), 1)]));
                r.add_term(t, &(c * &GRat::int(*e as i64)));
            }
        }
        r
    }

    /// Applies `D_dir` `k` times.
    pub fn derive_n(&self, dir: usize, k: u32) -> Self {
        (0..k).fold(self.clone(), |p, _| p.derive(dir))
    }

    /// Partial derivative with respect to one jet, as a polynomial variable.
    pub fn partial(&self, j: &Jet) -> Self {
        let mut r = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            let e = m.power_of(j);
            if e > 0 {
                r.add_term(m.with_power(j, -1), &(c * &GRat::int(e as i64)));
            }
        }
        r
    }

    pub fn jets(&self) -> BTreeSet<Jet> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(j, _)| j.clone()))
            .collect()
    }

    pub fn involves_symbol(&self, sym: usize) -> bool {
        self.jets().iter().any(|j| j.sym == sym)
    }

    pub fn degree_in(&self, j: &Jet) -> u32 {
        self.terms.keys().map(|m| m.power_of(j)).max().unwrap_or(0)
    }

    /// Splits `self = a * j + b` when `self` has degree at most one in `j`.
    pub fn linear_in(&self, j: &Jet) -> Option<(DiffPoly, DiffPoly)> {
        if self.degree_in(j) > 1 {
            return None;
        }
        let a = self.partial(j);
        let b = self.sub(&a.mul(&Self::from_jet(&self.ctx, j.clone())));
        Some((a, b))
    }

    /// Substitutes `value` for the jet in a rule and `D^k value` for each of
    /// its derivatives, repeating until no rule applies.
    pub fn substitute(&self, rules: &[Rule]) -> Self {
        let mut cur = self.clone();
        for _ in 0..64 {
            let mut changed = false;
            let mut out = Self::zero(&self.ctx);
            for (m, c) in &cur.terms {
                let mut acc = Self::constant(&self.ctx, c.clone());
                for (j, e) in &m.0 {
                    let rep = rules.iter().find(|(r, _)| r.below(j)).map(|(r, v)| {
                        let mut v = v.clone();
                        for (dir, (&a, &b)) in j.ord.iter().zip(&r.ord).enumerate() {
                            v = v.derive_n(dir, a - b);
                        }
                        v
                    });
                    let base = match rep {
                        Some(v) => {
                            changed = true;
                            v
                        }
                        None => Self::from_jet(&self.ctx, j.clone()),
                    };
                    for _ in 0..*e {
                        acc = acc.mul(&base);
                    }
                }
                out = out.add(&acc);
            }
            cur = out;
            if !changed {
                return cur;
            }
        }
        cur
    }

    /// `F` with `D_x F = self`, found by peeling off the highest jet, when
    /// `self` is an exact derivative of this form.
    pub fn integrate_x(&self) -> Option<DiffPoly> {
        let mut p = self.clone();
        let mut acc = Self::zero(&self.ctx);
        for _ in 0..64 {
            if p.is_zero() {
                return (acc.derive(0) == *self).then_some(acc);
            }
            let top = p.jets().into_iter().max_by_key(|j| (j.xord(), j.clone()))?;
            if top.xord() == 0 {
                return None;
            }
            let (a, _) = p.linear_in(&top)?;
            let lower = top.shifted(0, -1);
            let mut f = Self::zero(&self.ctx);
            for (m, c) in &a.terms {
                let e = m.power_of(&lower) as i64;
                f.add_term(m.with_power(&lower, 1), &(c * &GRat::frac(1, e + 1)));
            }
            p = p.sub(&f.derive(0));
            acc = acc.add(&f);
        }
        None
    }

    pub fn fmt_mono(ctx: &JetSpace, m: &Mono) -> String {
        let parts: Vec<String> =
            m.0.iter()
                .map(|(j, e)| {
                    let n = ctx.jet_name(j);
                    if *e == 1 {
                        n
                    } else {
                        format!("{n}^{e}")
                    }
                })
                .collect();
        parts.join("*")
    }

    pub(crate) fn fmt_terms(&self) -> Vec<(bool, String)> {
        self.terms
            .iter()
            .rev()
            .map(|(m, c)| fmt_scaled(c, &Self::fmt_mono(&self.ctx, m)))
            .collect()
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", join_terms(self.fmt_terms()))
    }
}

impl DiffRing for DiffPoly {
    type Ctx = Jets;

    fn ctx(&self) -> Jets {
        self.ctx.clone()
    }
    fn zero(ctx: &Jets) -> Self {
        DiffPoly::zero(ctx)
    }
    fn one(ctx: &Jets) -> Self {
        DiffPoly::constant(ctx, GRat::one())
    }
    fn scalar(ctx: &Jets, c: &GRat) -> Self {
        DiffPoly::constant(ctx, c.clone())
    }
    fn ndirs(ctx: &Jets) -> usize {
        ctx.indep.len()
    }
    fn eps(ctx: &Jets) -> Self {
        DiffPoly::constant(ctx, GRat::one())
    }
    fn is_zero(&self) -> bool {
        DiffPoly::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        DiffPoly::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        DiffPoly::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        DiffPoly::mul(self, o)
    }
    fn neg(&self) -> Self {
        DiffPoly::neg(self)
    }
    fn scale(&self, c: &GRat) -> Self {
        DiffPoly::scale(self, c)
    }
    fn derive(&self, dir: usize) -> Self {
        DiffPoly::derive(self, dir)
    }
    fn inv(&self) -> Option<Self> {
        let c = self.as_constant()?;
        c.inv().ok().map(|i| DiffPoly::constant(&self.ctx, i))
    }
    fn fmt_terms(&self) -> Vec<(bool, String)> {
        DiffPoly::fmt_terms(self)
    }
    fn dir_name(ctx: &Jets, i: usize) -> String {
        ctx.dirs[i].clone()
    }
    fn size_hint(&self) -> usize {
        self.terms.len()
    }
}

impl CoeffSyntax for DiffPoly {
    fn named(ctx: &Jets, name: &str) -> Option<Self> {
        ctx.parse_jet(name).map(|j| DiffPoly::from_jet(ctx, j))
    }
}
