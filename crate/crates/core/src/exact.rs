//! Exact scalars: arbitrary-precision rationals and Gaussian rationals.
//!
//! `Rat` is `num_rational::BigRational`, which is always kept in lowest
//! terms with a positive denominator. `GRat` is a pair of such rationals
//! with `i^2 = -1`. Equality is componentwise on reduced forms, so two
//! values are equal iff their representations coincide.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rat = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("division by zero")]
    DivisionByZero,
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GRat {
    pub re: Rat,
    pub im: Rat,
}

impl GRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        GRat { re, im }
    }

    pub fn zero() -> Self {
        GRat::new(Rat::zero(), Rat::zero())
    }

    pub fn one() -> Self {
        GRat::new(Rat::one(), Rat::zero())
    }

    pub fn i() -> Self {
        GRat::new(Rat::zero(), Rat::one())
    }

    pub fn int(n: i64) -> Self {
        GRat::from(rat_int(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        GRat::from(rat(n, d))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GRat::new(self.re.clone(), -self.im.clone())
    }

    /// |z|^2 = re^2 + im^2.
    pub fn norm_sqr(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Result<Self, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let n = self.norm_sqr();
        Ok(GRat::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn checked_div(&self, other: &GRat) -> Result<Self, ExactError> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = GRat::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Integer power allowing negative exponents (nonzero base).
    pub fn powi(&self, e: i64) -> Result<Self, ExactError> {
        if e >= 0 {
            Ok(self.pow(e as u32))
        } else {
            Ok(self.inv()?.pow((-e) as u32))
        }
    }

    /// True when the value prints as a single signed factor (no `+`/`-` inside).
    pub(crate) fn is_simple(&self) -> bool {
        self.re.is_zero() || self.im.is_zero()
    }

    /// Sign of the leading component, used when printing sums.
    pub(crate) fn is_negative_lead(&self) -> bool {
        if self.re.is_zero() {
            self.im.is_negative()
        } else {
            self.im.is_zero() && self.re.is_negative()
        }
    }
}

impl From<Rat> for GRat {
    fn from(r: Rat) -> Self {
        GRat::new(r, Rat::zero())
    }
}

impl From<i64> for GRat {
    fn from(n: i64) -> Self {
        GRat::int(n)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<GRat> for GRat {
            type Output = GRat;
            fn $m(self, o: GRat) -> GRat {
                (&self).$m(&o)
            }
        }
        impl $tr<&GRat> for GRat {
            type Output = GRat;
            fn $m(self, o: &GRat) -> GRat {
                (&self).$m(o)
            }
        }
    };
}

impl Add<&GRat> for &GRat {
    type Output = GRat;
    fn add(self, o: &GRat) -> GRat {
        GRat::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub<&GRat> for &GRat {
    type Output = GRat;
    fn sub(self, o: &GRat) -> GRat {
        GRat::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul<&GRat> for &GRat {
    type Output = GRat;
    fn mul(self, o: &GRat) -> GRat {
        if self.im.is_zero() && o.im.is_zero() {
            return GRat::from(&self.re * &o.re);
        }
        GRat::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }
}

/// Panics on division by zero; use [`GRat::checked_div`] for a fallible form.
impl Div<&GRat> for &GRat {
    type Output = GRat;
    fn div(self, o: &GRat) -> GRat {
        self.checked_div(o).expect("GRat division by zero")
    }
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for GRat {
    type Output = GRat;
    fn neg(self) -> GRat {
        GRat::new(-self.re, -self.im)
    }
}

impl Neg for &GRat {
    type Output = GRat;
    fn neg(self) -> GRat {
        GRat::new(-self.re.clone(), -self.im.clone())
    }
}

impl AddAssign<&GRat> for GRat {
    fn add_assign(&mut self, o: &GRat) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&GRat> for GRat {
    fn sub_assign(&mut self, o: &GRat) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl MulAssign<&GRat> for GRat {
    fn mul_assign(&mut self, o: &GRat) {
        *self = &*self * o;
    }
}

fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Writes `a/b`, `a/b*i`, `i`, `-i`, or `a/b - c/d*i`.
impl fmt::Display for GRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let im_part = |im: &Rat| -> String {
            if im.is_one() {
                "i".to_string()
            } else if (-im).is_one() {
                "-i".to_string()
            } else {
                format!("{}*i", fmt_rat(im))
            }
        };
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rat(&self.re)),
            (true, false) => write!(f, "{}", im_part(&self.im)),
            (false, false) => {
                let abs_im = self.im.abs();
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "{} {} {}", fmt_rat(&self.re), sign, im_part(&abs_im))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i_squared() {
        assert_eq!(&GRat::i() * &GRat::i(), GRat::int(-1));
    }

    #[test]
    fn rational_add() {
        assert_eq!(GRat::frac(1, 2) + GRat::frac(1, 3), GRat::frac(5, 6));
    }

    #[test]
    fn conjugate_product() {
        let a = GRat::one() + GRat::i();
        let b = GRat::one() - GRat::i();
        assert_eq!(a * b, GRat::int(2));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(GRat::one().checked_div(&GRat::zero()), Err(ExactError::DivisionByZero));
    }

    #[test]
    fn reduced_representation() {
        let a = GRat::frac(2, 4);
        assert_eq!(a.re.numer(), &BigInt::from(1));
        assert_eq!(a.re.denom(), &BigInt::from(2));
        let b = GRat::frac(3, -6);
        assert_eq!(b.re.denom(), &BigInt::from(2));
        assert_eq!(b.re.numer(), &BigInt::from(-1));
    }

    #[test]
    fn display() {
        let z = GRat::new(rat(3, 2), rat(-1, 4));
        assert_eq!(z.to_string(), "3/2 - 1/4*i");
        assert_eq!(GRat::i().to_string(), "i");
        assert_eq!((-GRat::i()).to_string(), "-i");
        assert_eq!(GRat::frac(-7, 3).to_string(), "-7/3");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn grat() -> impl Strategy<Value = GRat> {
            (-20i64..20, 1i64..9, -20i64..20, 1i64..9).prop_map(|(a, b, c, d)| GRat::new(rat(a, b), rat(c, d)))
        }

        proptest! {
            #[test]
            fn associativity(a in grat(), b in grat(), c in grat()) {
                prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
                prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            }

            #[test]
            fn distributivity(a in grat(), b in grat(), c in grat()) {
                prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            }

            #[test]
            fn inverse(a in grat()) {
                prop_assume!(!a.is_zero());
                prop_assert_eq!(&a * &a.inv().unwrap(), GRat::one());
            }

            #[test]
            fn canonical_equality(a in -30i64..30, b in 1i64..12, k in 1i64..6) {
                let x = GRat::frac(a, b);
                let y = GRat::frac(a * k, b * k);
                prop_assert_eq!(&x, &y);
                prop_assert_eq!(x.to_string(), y.to_string());
            }
        }
    }
}
