use crate::rings::DiffRing;
use crate::weyl::{DOp, Multi};

use super::DmodError;

/// Rewriting step cap; exceeding it means the relations do not reduce.
pub const REDUCE_CAP: usize = 10_000;

/// Which reducible monomial is rewritten next.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MonomialChoice {
    #[default]
    LargestFirst,
    SmallestFirst,
}

/// Which relation is used when several leading monomials divide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RelationChoice {
    #[default]
    First,
    Last,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Strategy {
    pub monomial: MonomialChoice,
    pub relation: RelationChoice,
}

/// `D / (T_1, ..., T_u)` with a designated leading monomial per relation.
#[derive(Clone, Debug)]
pub struct Presentation<C: DiffRing> {
    ctx: C::Ctx,
    r: usize,
    relations: Vec<DOp<C>>,
    leads: Vec<Multi>,
    lead_inv: Vec<C>,
    basis: Vec<Multi>,
}

impl<C: DiffRing> Presentation<C> {
    /// Uses each relation's graded-lex leading monomial.
    pub fn new(relations: Vec<DOp<C>>) -> Result<Self, DmodError> {
        let leads = relations
            .iter()
            .map(|t| t.leading().map(|(m, _)| m.clone()).ok_or(DmodError::ZeroRelation))
            .collect::<Result<Vec<_>, _>>()?;
        Self::with_leads(relations, leads)
    }

    pub fn with_leads(relations: Vec<DOp<C>>, leads: Vec<Multi>) -> Result<Self, DmodError> {
        let first = relations.first().ok_or(DmodError::ZeroRelation)?;
        let ctx = first.ctx().clone();
        let r = first.r();
        if leads.len() != relations.len() {
            return Err(DmodError::Dimension("one leading monomial per relation".into()));
        }
        let mut lead_inv = Vec::new();
        for (t, m) in relations.iter().zip(&leads) {
            if t.ctx() != &ctx || t.r() != r {
                return Err(DmodError::Weyl(crate::weyl::WeylError::Mismatch));
            }
            let c = t.coeff(m);
            if c.is_zero() {
                return Err(DmodError::LeadNotPresent(t.to_string()));
            }
            lead_inv.push(c.inv().ok_or_else(|| DmodError::NonUnitLead(t.to_string()))?);
        }
        for (i, a) in leads.iter().enumerate() {
            for (j, b) in leads.iter().enumerate() {
                if i != j && a.divides(b) {
                    return Err(DmodError::RedundantLead(i, j));
                }
            }
        }
        let mut bound = vec![None; r];
        for m in &leads {
            let nz: Vec<usize> = (0..r).filter(|&i| m.0[i] > 0).collect();
            if nz.len() == 1 {
                let i = nz[0];
                bound[i] = Some(bound[i].map_or(m.0[i], |b: u32| b.min(m.0[i])));
            }
        }
        let bound: Vec<u32> = bound
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or(DmodError::InfiniteRank)?;
        let top = Multi(bound.iter().map(|b| b - 1).collect());
        let mut basis: Vec<Multi> = top
            .below()
            .into_iter()
            .filter(|m| !leads.iter().any(|l| l.divides(m)))
            .collect();
        basis.sort();
        Ok(Presentation {
            ctx,
            r,
            relations,
            leads,
            lead_inv,
            basis,
        })
    }

    pub fn ctx(&self) -> &C::Ctx {
        &self.ctx
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn relations(&self) -> &[DOp<C>] {
        &self.relations
    }

    pub fn leads(&self) -> &[Multi] {
        &self.leads
    }

    /// Standard monomials, ascending graded-lex.
    pub fn basis(&self) -> &[Multi] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis_ops(&self) -> Vec<DOp<C>> {
        self.basis
            .iter()
            .map(|m| DOp::monomial(&self.ctx, self.r, m.clone(), C::one(&self.ctx)))
            .collect()
    }

    pub fn reduce(&self, a: &DOp<C>) -> Result<Vec<C>, DmodError> {
        self.reduce_with(a, Strategy::default())
    }

    /// Normal form of `a` as coefficients on the standard monomials.
    pub fn reduce_with(&self, a: &DOp<C>, strat: Strategy) -> Result<Vec<C>, DmodError> {
        let nf = self.normal_form(a, strat)?;
        Ok(self.basis.iter().map(|m| nf.coeff(m)).collect())
    }

    /// Normal form as an operator supported on the standard monomials.
    pub fn normal_form(&self, a: &DOp<C>, strat: Strategy) -> Result<DOp<C>, DmodError> {
        if a.ctx() != &self.ctx || a.r() != self.r {
            return Err(DmodError::Weyl(crate::weyl::WeylError::Mismatch));
        }
        let mut cur = a.clone();
        for _ in 0..REDUCE_CAP {
            let pick = |m: &Multi| -> Option<usize> {
                let mut ks = (0..self.leads.len()).filter(|&k| self.leads[k].divides(m));
                match strat.relation {
                    RelationChoice::First => ks.next(),
                    RelationChoice::Last => ks.last(),
                }
            };
            let found = match strat.monomial {
                MonomialChoice::LargestFirst => cur
                    .terms()
                    .rev()
                    .find_map(|(m, c)| pick(m).map(|k| (m.clone(), c.clone(), k))),
                MonomialChoice::SmallestFirst => cur
                    .terms()
                    .find_map(|(m, c)| pick(m).map(|k| (m.clone(), c.clone(), k))),
            };
            let Some((m, c, k)) = found else {
                return Ok(cur);
            };
            let shift = self.leads[k].quotient(&m);
            let left = DOp::monomial(&self.ctx, self.r, shift, c.mul(&self.lead_inv[k]));
            cur = cur.sub(&left.mul(&self.relations[k])?)?;
        }
        Err(DmodError::NonTerminating(REDUCE_CAP))
    }
}
