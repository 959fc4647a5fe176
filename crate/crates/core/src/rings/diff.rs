use std::fmt;

use crate::exact::GRat;

/// Commutative coefficient ring equipped with commuting derivations.
///
/// Every coefficient domain (Laurent polynomials, rational functions,
/// truncated series, differential polynomials) implements this, so operator
/// algebra and connection code is written once. `Ctx` carries whatever a
/// value needs to build zeros and units (variable tables, truncations).
pub trait DiffRing: Clone + PartialEq + fmt::Debug + fmt::Display {
    type Ctx: Clone + PartialEq + fmt::Debug;

    fn ctx(&self) -> Self::Ctx;
    fn zero(ctx: &Self::Ctx) -> Self;
    fn one(ctx: &Self::Ctx) -> Self;
    fn scalar(ctx: &Self::Ctx, c: &GRat) -> Self;

    /// Number of derivations available on the ring.
    fn ndirs(ctx: &Self::Ctx) -> usize;

    /// The scale `eps` of the operator generators `eps * d_i`: `h` in the
    /// quantum setting, `1` otherwise. Derivations kill it.
    fn eps(ctx: &Self::Ctx) -> Self;

    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: &GRat) -> Self;
    fn derive(&self, dir: usize) -> Self;

    /// Inverse when the element is a unit of the ring.
    fn inv(&self) -> Option<Self>;

    fn is_one(&self) -> bool {
        self.sub(&Self::one(&self.ctx())).is_zero()
    }

    fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(&self.ctx());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Printed summands as `(negative, body)`, leading sign pulled out.
    fn fmt_terms(&self) -> Vec<(bool, String)> {
        if self.is_zero() {
            Vec::new()
        } else {
            vec![(false, format!("({self})"))]
        }
    }

    /// Printed name of operator direction `i`.
    fn dir_name(_ctx: &Self::Ctx, i: usize) -> String {
        format!("D{}", i + 1)
    }

    /// Weight used to pick simple pivots in elimination; smaller is simpler.
    fn size_hint(&self) -> usize {
        1
    }
}

/// A differential ring in which every nonzero element is invertible.
pub trait DiffField: DiffRing {
    fn div(&self, o: &Self) -> Option<Self> {
        o.inv().map(|i| self.mul(&i))
    }
}
