//! Evolution equations from extending a one-variable D-module by a relation
//! `d_t - P`.
//!
//! `T1` and `P` are operators in `d = d/dx` over differential polynomials in
//! the jets of the unknowns, on the space with independent variables
//! `x, t`. The connection on `[1], [d], ..., [d^s]` is the companion matrix
//! of `T1` along `x` and the reductions of `d^i P` along `t`; its curvature
//! is linear in the `t`-jets, which are solved for.

mod diffpoly;
mod diffrat;

pub use diffpoly::{DiffPoly, Jet, JetSpace, Jets, Mono, Rule};
pub use diffrat::DiffRat;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::dmod::{companion, ConnData, DmodError, Presentation};
use crate::exact::GRat;
use crate::rings::linalg::Matrix;
use crate::text::{identifiers, parse_dop, ParseError};
use crate::weyl::{DOp, WeylError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolveError {
    #[error("{0}")]
    Space(String),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Dmod(#[from] DmodError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
}

/// `sym_t = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionEq {
    pub symbol: String,
    pub rhs: DiffPoly,
}

impl fmt::Display for EvolutionEq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_t = {}", self.symbol, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extension {
    /// Matrices along `x` and `t` on `[1], [d], ..., [d^s]`.
    pub omega: [Matrix<DiffPoly>; 2],
    /// `D_x Omega_t - D_t Omega_x + [Omega_x, Omega_t]`.
    pub residual: Matrix<DiffPoly>,
    /// Nonzero curvature entries free of `t`-jets: relations forced on `P`.
    pub constraints: Vec<DiffPoly>,
    /// Auxiliary symbols solved from the constraints, integration constants
    /// taken to be zero.
    pub eliminated: Vec<(String, DiffPoly)>,
    pub evolution: Vec<EvolutionEq>,
    /// Entries still nonzero after every substitution.
    pub unresolved: Vec<DiffPoly>,
}

impl Extension {
    /// True when the evolution and eliminations close the curvature.
    pub fn closed(&self) -> bool {
        self.unresolved.is_empty()
    }

    /// Rewrite rules for the eliminated symbols and evolved `t`-jets.
    pub fn rules(&self) -> Vec<Rule> {
        let ctx = self.residual.ctx();
        let mut out = Vec::new();
        for (name, v) in &self.eliminated {
            let s = ctx.symbol(name).expect("known symbol");
            out.push((ctx.jet(s), v.clone()));
        }
        for e in &self.evolution {
            let s = ctx.symbol(&e.symbol).expect("known symbol");
            out.push((ctx.jet(s).shifted(1, 1), e.rhs.clone()));
        }
        out
    }
}

fn check_space(ctx: &Jets) -> Result<(), EvolveError> {
    if ctx.indep().len() < 2 {
        return Err(EvolveError::Space(
            "extension needs independent variables x and t".into(),
        ));
    }
    Ok(())
}

fn symbols_of(op: &DOp<DiffPoly>) -> BTreeSet<usize> {
    op.terms()
        .flat_map(|(_, c)| c.jets().into_iter().map(|j| j.sym))
        .collect()
}

fn has_t_jets(p: &DiffPoly) -> bool {
    p.jets().iter().any(|j| j.ord[1] > 0)
}

/// Solves `c = 0` for an auxiliary symbol occurring through a single jet
/// with constant coefficient, integrating in `x` as needed.
fn eliminate(c: &DiffPoly, sym: usize) -> Option<DiffPoly> {
    let js: Vec<Jet> = c.jets().into_iter().filter(|j| j.sym == sym).collect();
    let [j] = js.as_slice() else { return None };
    if j.ord[1] != 0 || j.ord[2..].iter().any(|&k| k > 0) {
        return None;
    }
    let (a, b) = c.linear_in(j)?;
    let a = a.as_constant().filter(|a| !a.is_zero())?;
    let mut v = b.scale(&-a.inv().ok()?);
    for _ in 0..j.xord() {
        v = v.integrate_x()?;
    }
    Some(v)
}

/// Extends `D_x/(T1)` by `d_t - P` and derives the evolution that makes the
/// result flat.
pub fn extend(t1: &DOp<DiffPoly>, p: &DOp<DiffPoly>) -> Result<Extension, EvolveError> {
    let ctx = t1.ctx().clone();
    check_space(&ctx)?;
    if t1.r() != 1 || p.r() != 1 {
        return Err(EvolveError::Shape("T1 and P must be operators in d alone".into()));
    }
    let n = t1.order_in(0) as usize;
    if p.order_in(0) as usize >= n.max(1) {
        return Err(EvolveError::Shape(format!("P must have order below {n}")));
    }
    let ox = companion(t1, 0)?.omega()[0].clone();
    let pres = Presentation::new(vec![t1.clone()])?;
    let mut ot = Matrix::zeros(&ctx, n, n);
    let d = DOp::gen(&ctx, 1, 0);
    let mut di = DOp::one(&ctx, 1);
    for i in 0..n {
        for (k, c) in pres.reduce(&di.mul(p)?)?.into_iter().enumerate() {
            ot.set(k, i, c);
        }
        di = di.mul(&d)?;
    }
    let conn = ConnData::new(&ctx, vec![ox.clone(), ot.clone()], vec![])?;
    let rep = conn.flatness_check()?;
    let mut residual = Matrix::zeros(&ctx, n, n);
    if let Some(pr) = rep.residuals.first() {
        for (k, j, v) in &pr.entries {
            residual.set(*k, *j, v.clone());
        }
    }

    let evolving = symbols_of(t1);
    let entries: Vec<DiffPoly> = residual.nonzero_entries().into_iter().map(|(_, _, v)| v).collect();
    let constraints: Vec<DiffPoly> = entries.iter().filter(|e| !has_t_jets(e)).cloned().collect();

    let mut rules: Vec<Rule> = Vec::new();
    let mut eliminated = Vec::new();
    for c in &constraints {
        let c = c.substitute(&rules);
        if c.is_zero() {
            continue;
        }
        let aux = c
            .jets()
            .into_iter()
            .map(|j| j.sym)
            .filter(|s| !evolving.contains(s))
            .collect::<BTreeSet<_>>();
        for s in aux {
            if let Some(v) = eliminate(&c, s) {
                eliminated.push((ctx.symbols()[s].clone(), v.clone()));
                rules.push((ctx.jet(s), v));
                break;
            }
        }
    }

    let mut evolution = Vec::new();
    for &s in &evolving {
        let ut = ctx.jet(s).shifted(1, 1);
        for e in &entries {
            let e = e.substitute(&rules);
            let tj: Vec<Jet> = e.jets().into_iter().filter(|j| j.ord[1] > 0).collect();
            if tj != [ut.clone()] {
                continue;
            }
            let Some((a, b)) = e.linear_in(&ut) else { continue };
            let Some(a) = a.as_constant().filter(|a| !a.is_zero()) else {
                continue;
            };
            let rhs = b.scale(&-a.inv().expect("nonzero"));
            rules.push((ut.clone(), rhs.clone()));
            evolution.push(EvolutionEq {
                symbol: ctx.symbols()[s].clone(),
                rhs,
            });
            break;
        }
    }

    let unresolved = entries
        .iter()
        .map(|e| e.substitute(&rules))
        .filter(|e| !e.is_zero())
        .collect();
    Ok(Extension {
        omega: [ox, ot],
        residual,
        constraints,
        eliminated,
        evolution,
        unresolved,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaxBracket {
    /// `[P, T1]` in normal order.
    pub commutator: DOp<DiffPoly>,
    /// Its remainder modulo `T1` on `1, d, ..., d^s`.
    pub reduced: Vec<DiffPoly>,
}

pub fn lax_bracket(p: &DOp<DiffPoly>, t1: &DOp<DiffPoly>) -> Result<LaxBracket, EvolveError> {
    let commutator = p.commutator(t1)?;
    let pres = Presentation::new(vec![t1.clone()])?;
    let reduced = pres.reduce(&commutator)?;
    Ok(LaxBracket { commutator, reduced })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyReport {
    /// For each generator `T_i`, the remainder of `[d_t - P, T_i]` on the
    /// standard monomials.
    pub residuals: Vec<Vec<DiffPoly>>,
}

impl HierarchyReport {
    pub fn consistent(&self) -> bool {
        self.residuals.iter().all(|r| r.iter().all(DiffPoly::is_zero))
    }
}

/// Checks `[d_t - P, T_i] = (T_i)_t - [P, T_i]` against the ideal, where the
/// coefficients are differentiated along the independent variable `t` and
/// then rewritten by `rules` (the evolution, or imposed relations).
pub fn hierarchy_step(
    pres: &Presentation<DiffPoly>,
    t: usize,
    p: &DOp<DiffPoly>,
    rules: &[Rule],
) -> Result<HierarchyReport, EvolveError> {
    let ctx = pres.ctx().clone();
    if t >= ctx.indep().len() || t < pres.r() {
        return Err(EvolveError::Shape(
            "t must be an independent variable not used by the operators".into(),
        ));
    }
    let mut residuals = Vec::new();
    for g in pres.relations() {
        let gt = g.map_coeffs(|c| c.derive(t));
        let r = gt.sub(&p.commutator(g)?)?.map_coeffs(|c| c.substitute(rules));
        residuals.push(pres.reduce(&r)?);
    }
    Ok(HierarchyReport { residuals })
}

/// Applies an operator in `d` to a function given as a differential polynomial.
pub fn apply_to(op: &DOp<DiffPoly>, psi: &DiffPoly) -> DiffPoly {
    let mut acc = DiffPoly::zero(psi.ctx());
    for (m, c) in op.terms() {
        let mut v = psi.clone();
        for (dir, &k) in m.0.iter().enumerate() {
            v = v.derive_n(dir, k);
        }
        acc = acc.add(&c.mul(&v));
    }
    acc
}

/// A space over `x, t` whose symbols are the bases of the jet tokens used in
/// `texts` (`u`, `u1`, `u_xx` all name `u`).
pub fn infer_jets(texts: &[&str]) -> Result<Jets, EvolveError> {
    let mut syms: Vec<String> = Vec::new();
    for t in texts {
        for id in identifiers(t)? {
            if id == "d" || id == "dt" || id == "i" {
                continue;
            }
            let base = match id.find('_') {
                Some(p) => id[..p].to_string(),
                None => id.trim_end_matches(|c: char| c.is_ascii_digit()).to_string(),
            };
            if !syms.contains(&base) {
                syms.push(base);
            }
        }
    }
    syms.sort();
    let refs: Vec<&str> = syms.iter().map(String::as_str).collect();
    JetSpace::xt(&refs)
}

/// Parses operators in `d` over an inferred jet space.
pub fn parse_jet_ops(texts: &[&str]) -> Result<(Jets, Vec<DOp<DiffPoly>>), EvolveError> {
    let ctx = infer_jets(texts)?;
    let ops = texts
        .iter()
        .map(|t| parse_dop::<DiffPoly>(t, &ctx, 1))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((ctx, ops))
}

/// `1/2 g_xxx + g u_x + 2 g_x u` for `T1 = d^2 + u`, `P = f + g d`, with
/// `g` an arbitrary differential polynomial in the space of `u`.
pub fn general_rhs(u: &DiffPoly, g: &DiffPoly) -> DiffPoly {
    let gx = g.derive(0);
    g.derive_n(0, 3)
        .scale(&GRat::frac(1, 2))
        .add(&g.mul(&u.derive(0)))
        .add(&gx.mul(u).scale(&GRat::int(2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kdv_sign_follows_the_curvature() {
        let (_, ops) = parse_jet_ops(&["d^2 + u", "1/2*u1 - u*d"]).unwrap();
        let ext = extend(&ops[0], &ops[1]).unwrap();
        assert!(ext.closed());
        assert_eq!(ext.evolution[0].to_string(), "u_t = -3*u*u_x - 1/2*u_xxx");
    }

    #[test]
    fn constant_p_gives_static_u() {
        let (_, ops) = parse_jet_ops(&["d^2 + u", "3"]).unwrap();
        let ext = extend(&ops[0], &ops[1]).unwrap();
        assert_eq!(ext.evolution[0].to_string(), "u_t = 0");
    }
}
