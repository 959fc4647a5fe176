//! Rational functions: pairs of Laurent polynomials.
//!
//! No multivariate gcd is taken. Equality is decided by cross-multiplication,
//! and the stored pair is only tidied: monomial denominators are folded into
//! the numerator, the denominator loses its monomial content and gets leading
//! coefficient 1, and exact divisibility in either direction is cancelled.

use std::fmt;

use crate::exact::GRat;

use super::lpoly::{Exp, LPoly};
use super::vars::Vars;
use super::{DiffField, DiffRing, RingError};

#[derive(Clone, Debug)]
pub struct RFunc {
    num: LPoly,
    den: LPoly,
}

impl PartialEq for RFunc {
    fn eq(&self, o: &Self) -> bool {
        self.num.same_vars(&o.num) && self.num.mul(&o.den) == o.num.mul(&self.den)
    }
}

impl From<LPoly> for RFunc {
    fn from(p: LPoly) -> Self {
        let den = LPoly::one(p.vars());
        RFunc { num: p, den }
    }
}

impl RFunc {
    pub fn new(num: LPoly, den: LPoly) -> Result<Self, RingError> {
        if !num.same_vars(&den) {
            return Err(RingError::VarTableMismatch);
        }
        if den.is_zero() {
            return Err(RingError::DivisionByZero);
        }
        Ok(RFunc { num, den }.normalized())
    }

    pub fn zero(vars: &Vars) -> Self {
        LPoly::zero(vars).into()
    }

    pub fn one(vars: &Vars) -> Self {
        LPoly::one(vars).into()
    }

    pub fn constant(vars: &Vars, c: GRat) -> Self {
        LPoly::constant(vars, c).into()
    }

    pub fn num(&self) -> &LPoly {
        &self.num
    }

    pub fn den(&self) -> &LPoly {
        &self.den
    }

    pub fn vars(&self) -> &Vars {
        self.num.vars()
    }

    /// The numerator when the denominator is 1.
    pub fn as_lpoly(&self) -> Option<LPoly> {
        if self.den.as_constant().is_some_and(|c| c.is_one()) {
            Some(self.num.clone())
        } else {
            self.num.exact_div(&self.den)
        }
    }

    fn normalized(self) -> Self {
        let RFunc { mut num, mut den } = self;
        let vars = num.vars().clone();
        if num.is_zero() {
            return RFunc::zero(&vars);
        }
        if let Some(inv) = den.inv_unit() {
            return RFunc {
                num: num.mul(&inv),
                den: LPoly::one(&vars),
            };
        }
        if let Some(q) = num.exact_div(&den) {
            return q.into();
        }
        let shift = Exp::zero(vars.len()).sub(&den.min_exp().unwrap());
        den = den.mul_monomial(&shift, &GRat::one());
        num = num.mul_monomial(&shift, &GRat::one());
        if num.nterms() > 1 || num.as_unit_monomial().is_none() {
            if let Some(q) = den.exact_div(&num) {
                num = LPoly::one(&vars);
                den = q;
                if let Some(inv) = den.inv_unit() {
                    return RFunc {
                        num: inv,
                        den: LPoly::one(&vars),
                    };
                }
                let shift = Exp::zero(vars.len()).sub(&den.min_exp().unwrap());
                den = den.mul_monomial(&shift, &GRat::one());
                num = num.mul_monomial(&shift, &GRat::one());
            }
        }
        let lc = den.leading().unwrap().1.inv().expect("nonzero leading coefficient");
        RFunc {
            num: num.scale(&lc),
            den: den.scale(&lc),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &RFunc) -> RFunc {
        if self.den == o.den {
            return RFunc {
                num: self.num.add(&o.num),
                den: self.den.clone(),
            }
            .normalized();
        }
        RFunc {
            num: self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
        .normalized()
    }

    pub fn sub(&self, o: &RFunc) -> RFunc {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RFunc {
        RFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &RFunc) -> RFunc {
        if self.is_zero() || o.is_zero() {
            return RFunc::zero(self.vars());
        }
        RFunc {
            num: self.num.mul(&o.num),
            den: self.den.mul(&o.den),
        }
        .normalized()
    }

    pub fn scale(&self, c: &GRat) -> RFunc {
        if c.is_zero() {
            return RFunc::zero(self.vars());
        }
        RFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn inv(&self) -> Option<RFunc> {
        if self.is_zero() {
            return None;
        }
        Some(
            RFunc {
                num: self.den.clone(),
                den: self.num.clone(),
            }
            .normalized(),
        )
    }

    pub fn derive(&self, dir: usize) -> Result<RFunc, RingError> {
        let dn = self.num.derive(dir)?;
        let dd = self.den.derive(dir)?;
        if dd.is_zero() {
            return Ok(RFunc {
                num: dn,
                den: self.den.clone(),
            }
            .normalized());
        }
        Ok(RFunc {
            num: dn.mul(&self.den).sub(&self.num.mul(&dd)),
            den: self.den.mul(&self.den),
        }
        .normalized())
    }

    pub fn flip_hbar(&self) -> RFunc {
        RFunc {
            num: self.num.flip_hbar(),
            den: self.den.flip_hbar(),
        }
        .normalized()
    }

    pub fn substitute(
        &self,
        map: &std::collections::HashMap<String, LPoly>,
        target: &Vars,
    ) -> Result<RFunc, RingError> {
        RFunc::new(self.num.substitute(map, target)?, self.den.substitute(map, target)?)
    }
}

impl fmt::Display for RFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant().is_some_and(|c| c.is_one()) {
            write!(f, "{}", self.num)
        } else {
            let n = if self.num.nterms() == 1 && self.num.as_constant().is_none() {
                self.num.to_string()
            } else {
                format!("({})", self.num)
            };
            write!(f, "{n}/({})", self.den)
        }
    }
}

impl DiffRing for RFunc {
    type Ctx = Vars;

    fn ctx(&self) -> Vars {
        self.vars().clone()
    }
    fn zero(ctx: &Vars) -> Self {
        RFunc::zero(ctx)
    }
    fn one(ctx: &Vars) -> Self {
        RFunc::one(ctx)
    }
    fn scalar(ctx: &Vars, c: &GRat) -> Self {
        RFunc::constant(ctx, c.clone())
    }
    fn ndirs(ctx: &Vars) -> usize {
        ctx.ndirs()
    }
    fn eps(ctx: &Vars) -> Self {
        <LPoly as DiffRing>::eps(ctx).into()
    }
    fn is_zero(&self) -> bool {
        RFunc::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        RFunc::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        RFunc::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        RFunc::mul(self, o)
    }
    fn neg(&self) -> Self {
        RFunc::neg(self)
    }
    fn scale(&self, c: &GRat) -> Self {
        RFunc::scale(self, c)
    }
    fn derive(&self, dir: usize) -> Self {
        RFunc::derive(self, dir).expect("direction out of range")
    }
    fn inv(&self) -> Option<Self> {
        RFunc::inv(self)
    }
    fn fmt_terms(&self) -> Vec<(bool, String)> {
        if self.den.as_constant().is_some_and(|c| c.is_one()) {
            self.num.fmt_terms()
        } else {
            vec![(false, format!("({})/({})", self.num, self.den))]
        }
    }
    fn dir_name(ctx: &Vars, i: usize) -> String {
        ctx.dirs()[i].name.clone()
    }
    fn size_hint(&self) -> usize {
        self.num.nterms() + self.den.nterms()
    }
}

impl DiffField for RFunc {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::VarTable;

    fn v() -> Vars {
        VarTable::quantum(1, &[])
    }

    fn q(e: i32) -> LPoly {
        LPoly::var(&v(), "q", e).unwrap()
    }

    #[test]
    fn monomial_denominator_folds() {
        let f = RFunc::new(LPoly::one(&v()).add(&q(1)), q(2).scale(&GRat::int(3))).unwrap();
        assert!(f.den().as_constant().unwrap().is_one());
        assert_eq!(f.num(), &q(-2).add(&q(-1)).scale(&GRat::frac(1, 3)));
    }

    #[test]
    fn cancels_exact_factor() {
        let a = LPoly::one(&v()).add(&q(1));
        let f = RFunc::new(a.mul(&a), a.scale(&GRat::int(2))).unwrap();
        assert_eq!(f.as_lpoly(), Some(a.scale(&GRat::frac(1, 2))));
        let g = RFunc::new(a.scale(&GRat::int(5)), a.mul(&q(1).sub(&LPoly::one(&v())))).unwrap();
        assert_eq!(g.num().as_constant(), Some(GRat::int(5)));
    }

    #[test]
    fn quotient_rule() {
        let a = LPoly::one(&v()).add(&q(1));
        let f = RFunc::new(LPoly::one(&v()), a.clone()).unwrap();
        let expect = RFunc::new(q(1).neg(), a.mul(&a)).unwrap();
        assert_eq!(f.derive(0).unwrap(), expect);
    }

    #[test]
    fn display() {
        let a = LPoly::one(&v()).add(&q(1));
        let f = RFunc::new(q(1), a).unwrap();
        assert_eq!(f.to_string(), "q/(q + 1)");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn poly() -> impl Strategy<Value = LPoly> {
            proptest::collection::vec((-2i32..3, 0i32..2, -4i64..5), 1..4).prop_map(|ts| {
                let vars = v();
                LPoly::from_terms(&vars, ts.into_iter().map(|(a, b, c)| (Exp(vec![b, a]), GRat::int(c))))
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]
            #[test]
            fn cross_multiplication_agrees_with_normal_form(a in poly(), b in poly(), c in poly()) {
                prop_assume!(!b.is_zero() && !c.is_zero());
                let x = RFunc::new(a.mul(&c), b.mul(&c)).unwrap();
                let y = RFunc::new(a.clone(), b.clone()).unwrap();
                prop_assert_eq!(&x, &y);
                let z = x.sub(&y);
                prop_assert!(z.is_zero());
                prop_assert_eq!(z.num().nterms(), 0);
            }

            #[test]
            fn derivation_leibniz(a in poly(), b in poly(), c in poly()) {
                prop_assume!(!b.is_zero());
                let x = RFunc::new(a, b).unwrap();
                let y = RFunc::from(c);
                let lhs = x.mul(&y).derive(0).unwrap();
                let rhs = x.derive(0).unwrap().mul(&y).add(&x.mul(&y.derive(0).unwrap()));
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
