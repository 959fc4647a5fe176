//! Quotients of differential polynomials.

use std::fmt;

use crate::exact::GRat;
use crate::rings::{DiffField, DiffRing};
use crate::text::CoeffSyntax;

use super::diffpoly::{DiffPoly, Jet, Jets, Mono};

/// `num / den`; equality is by cross-multiplication.
#[derive(Clone, Debug)]
pub struct DiffRat {
    num: DiffPoly,
    den: DiffPoly,
}

impl PartialEq for DiffRat {
    fn eq(&self, o: &Self) -> bool {
        self.num.mul(&o.den) == o.num.mul(&self.den)
    }
}

impl From<DiffPoly> for DiffRat {
    fn from(p: DiffPoly) -> Self {
        let one = DiffPoly::constant(p.ctx(), GRat::one());
        DiffRat { num: p, den: one }
    }
}

/// Smallest power of every jet across all terms.
fn common_mono(polys: &[&DiffPoly]) -> Mono {
    let mut first = true;
    let mut acc: Vec<(Jet, u32)> = Vec::new();
    for p in polys {
        for (m, _) in p.terms() {
            if first {
                acc = m.0.clone();
                first = false;
            } else {
                acc = acc
                    .into_iter()
                    .filter_map(|(j, e)| {
                        let k = m.power_of(&j).min(e);
                        (k > 0).then_some((j, k))
                    })
                    .collect();
            }
        }
    }
    Mono(acc)
}

fn divide_mono(p: &DiffPoly, d: &Mono) -> DiffPoly {
    let terms = p.terms().map(|(m, c)| {
        let rest =
            m.0.iter()
                .filter_map(|(j, e)| {
                    let k = e - d.power_of(j);
                    (k > 0).then(|| (j.clone(), k))
                })
                .collect();
        (Mono(rest), c.clone())
    });
    DiffPoly::from_terms(p.ctx(), terms)
}

impl DiffRat {
    pub fn new(num: DiffPoly, den: DiffPoly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        Some(DiffRat { num, den }.normalized())
    }

    pub fn num(&self) -> &DiffPoly {
        &self.num
    }

    pub fn den(&self) -> &DiffPoly {
        &self.den
    }

    pub fn as_poly(&self) -> Option<DiffPoly> {
        let c = self.den.as_constant()?;
        Some(self.num.scale(&c.inv().ok()?))
    }

    fn normalized(self) -> Self {
        let ctx = self.num.ctx().clone();
        if self.num.is_zero() {
            return DiffRat::from(DiffPoly::zero(&ctx));
        }
        let g = common_mono(&[&self.num, &self.den]);
        let (mut num, mut den) = (divide_mono(&self.num, &g), divide_mono(&self.den, &g));
        let lead = den.leading().map(|(_, c)| c.clone()).expect("nonzero");
        let li = lead.inv().expect("nonzero");
        num = num.scale(&li);
        den = den.scale(&li);
        if let Some((_, nc)) = num.leading() {
            if num.nterms() == den.nterms() && num == den.scale(nc) {
                return DiffRat::from(DiffPoly::constant(&ctx, nc.clone()));
            }
        }
        DiffRat { num, den }
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return DiffRat {
                num: self.num.add(&o.num),
                den: self.den.clone(),
            }
            .normalized();
        }
        DiffRat {
            num: self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
        .normalized()
    }

    pub fn neg(&self) -> Self {
        DiffRat {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        DiffRat {
            num: self.num.mul(&o.num),
            den: self.den.mul(&o.den),
        }
        .normalized()
    }

    pub fn derive(&self, dir: usize) -> Self {
        let num = self
            .num
            .derive(dir)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derive(dir)));
        DiffRat {
            num,
            den: self.den.mul(&self.den),
        }
        .normalized()
    }

    pub fn inv(&self) -> Option<Self> {
        if self.num.is_zero() {
            return None;
        }
        Some(
            DiffRat {
                num: self.den.clone(),
                den: self.num.clone(),
            }
            .normalized(),
        )
    }
}

fn paren(p: &DiffPoly) -> String {
    if p.nterms() == 1 && p.terms().all(|(_, c)| c.is_one()) {
        p.to_string()
    } else {
        format!("({p})")
    }
}

impl fmt::Display for DiffRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_poly() {
            Some(p) => write!(f, "{p}"),
            None => write!(f, "{}/{}", paren(&self.num), paren(&self.den)),
        }
    }
}

impl DiffRing for DiffRat {
    type Ctx = Jets;

    fn ctx(&self) -> Jets {
        self.num.ctx().clone()
    }
    fn zero(ctx: &Jets) -> Self {
        DiffRat::from(DiffPoly::zero(ctx))
    }
    fn one(ctx: &Jets) -> Self {
        DiffRat::from(DiffPoly::constant(ctx, GRat::one()))
    }
    fn scalar(ctx: &Jets, c: &GRat) -> Self {
        DiffRat::from(DiffPoly::constant(ctx, c.clone()))
    }
    fn ndirs(ctx: &Jets) -> usize {
        ctx.indep().len()
    }
    fn eps(ctx: &Jets) -> Self {
        Self::one(ctx)
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        DiffRat::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        DiffRat::add(self, &o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        DiffRat::mul(self, o)
    }
    fn neg(&self) -> Self {
        DiffRat::neg(self)
    }
    fn scale(&self, c: &GRat) -> Self {
        DiffRat {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
        .normalized()
    }
    fn derive(&self, dir: usize) -> Self {
        DiffRat::derive(self, dir)
    }
    fn inv(&self) -> Option<Self> {
        DiffRat::inv(self)
    }
    fn fmt_terms(&self) -> Vec<(bool, String)> {
        match self.as_poly() {
            Some(p) => p.fmt_terms(),
            None => {
                let (neg, num) = if self.num.nterms() == 1 {
                    self.num.fmt_terms().remove(0)
                } else {
                    (false, format!("({})", self.num))
                };
                vec![(neg, format!("{num}/{}", paren(&self.den)))]
            }
        }
    }
    fn dir_name(ctx: &Jets, i: usize) -> String {
        ctx.dirs()[i].clone()
    }
    fn size_hint(&self) -> usize {
        self.num.nterms() + self.den.nterms()
    }
}

impl DiffField for DiffRat {}

impl CoeffSyntax for DiffRat {
    fn named(ctx: &Jets, name: &str) -> Option<Self> {
        DiffPoly::named(ctx, name).map(DiffRat::from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::JetSpace;
    use crate::text::parse_coeff;

    fn r(s: &str) -> DiffRat {
        parse_coeff::<DiffRat>(s, &JetSpace::new(&["x"], &["u", "v"], &["d"]).unwrap()).unwrap()
    }

    #[test]
    fn cancels_monomials() {
        let x = r("u_x*u/u^2");
        assert_eq!(x.to_string(), "u_x/u");
        assert_eq!(x, r("u_x/u"));
        assert_eq!(r("(u + v)/(2*u + 2*v)").to_string(), "1/2");
    }

    #[test]
    fn quotient_rule() {
        assert_eq!(r("1/u").derive(0), r("-u_x/u^2"));
        assert_eq!(r("u_x/u").derive(0), r("(u*u_xx - u_x^2)/u^2"));
    }

    #[test]
    fn printing_in_operators() {
        let sp = JetSpace::new(&["x"], &["u", "v"], &["d"]).unwrap();
        let op = crate::text::parse_dop::<DiffRat>("d^2 - u_x/u*d - u*v", &sp, 1).unwrap();
        assert_eq!(op.to_string(), "d^2 - u_x/u*d - u*v");
    }
}
