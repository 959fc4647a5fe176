//! Gauge normalization of a monomial-basis connection to a connection whose
//! matrices are independent of `h` (a pure `1/h` pole once the generators
//! `h d_i` are divided by `h`).
//!
//! The gauge is `G = sum_m q^m G^(m)` with `G^(0) = I` and each `G^(m)`
//! polynomial in `h`. Writing `Omega = sum_m q^m M^(m)` and
//! `omega = sum_m q^m w^(m)`, the condition `G Omega - h dG = omega G` at the
//! monomial `q^m` reads
//!
//! ```text
//! w^(m) + M^(0) X - X M^(0) + h lambda(m) X
//!     = M^(m) + sum_{0<a<m} G^(a) M^(m-a) - sum_{0<b<m} w^(m-b) G^(b)
//! ```
//!
//! with `X = G^(m)`, `lambda(m)` the eigenvalue of the direction on `q^m`.
//! Each monomial is one exact linear system over the rationals.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::dmod::{connection_in_basis, ConnData, DmodError, Presentation};
use crate::exact::GRat;
use crate::rings::linalg::{inverse, solve_scalar, Matrix, ScalarSolve};
use crate::rings::{DerivKind, Exp, LPoly, RFunc, RingError, VarTable, Vars};
use crate::weyl::{DOp, WeylError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BirkhoffError {
    #[error("not normalizable: {0}")]
    NotNormalizable(String),
    #[error("entry ({0}, {1}) of matrix {2} is not a polynomial")]
    NotPolynomial(usize, usize, usize),
    #[error("{0}")]
    Unsupported(String),
    #[error("missing weight for `{0}`")]
    MissingWeight(String),
    #[error(transparent)]
    Dmod(#[from] DmodError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// `G = Q_0 (I + h Q_1 + ... + h^N Q_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeSeries {
    /// The full gauge matrix.
    pub g: Matrix<LPoly>,
    /// `Q_0, ..., Q_N`.
    pub q: Vec<Matrix<RFunc>>,
}

impl GaugeSeries {
    /// The `h`-length `N`.
    pub fn len(&self) -> usize {
        self.q.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub gauge: GaugeSeries,
    /// The normalized connection; its matrices do not involve `h`.
    pub omega: ConnData<LPoly>,
    /// `P'_i = sum_j (G^-1)_{ji} P_j`.
    pub basis: Vec<DOp<LPoly>>,
}

fn to_poly(m: &Matrix<RFunc>, vars: &Vars, which: usize) -> Result<Matrix<LPoly>, BirkhoffError> {
    let mut out = Matrix::zeros(vars, m.nrows(), m.ncols());
    for (i, j, x) in m.nonzero_entries() {
        out.set(i, j, x.as_lpoly().ok_or(BirkhoffError::NotPolynomial(i, j, which))?);
    }
    Ok(out)
}

/// Matrices of `h d_i` on the given operators, which must be polynomial.
pub fn monomial_connection(p: &Presentation<LPoly>, basis: &[DOp<LPoly>]) -> Result<ConnData<LPoly>, BirkhoffError> {
    let vars = p.ctx();
    let c = connection_in_basis(p, basis, vars, |x: &LPoly| RFunc::from(x.clone()))?;
    let omega = c
        .omega()
        .iter()
        .enumerate()
        .map(|(i, m)| to_poly(m, vars, i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ConnData::new(vars, omega, c.labels().to_vec())?)
}

/// Splits a polynomial into `q`-monomial (with the `h` slot zeroed) and
/// `h`-polynomial coefficient.
fn split_h(p: &LPoly, h: usize, hv: &Vars) -> Result<BTreeMap<Exp, LPoly>, BirkhoffError> {
    let mut out: BTreeMap<Exp, LPoly> = BTreeMap::new();
    for (e, c) in p.terms() {
        if e.0.iter().enumerate().any(|(v, &k)| k < 0 && v != h) || e.0[h] < 0 {
            return Err(BirkhoffError::Unsupported(format!("negative exponent in `{p}`")));
        }
        let mut qe = e.clone();
        qe.0[h] = 0;
        let t = LPoly::monomial(hv, Exp(vec![e.0[h]]), c.clone());
        let slot = out.entry(qe).or_insert_with(|| LPoly::zero(hv));
        *slot = slot.add(&t);
    }
    Ok(out)
}

type HMat = Matrix<LPoly>;

/// Coefficients of `q^m` of each matrix, as matrices over `h` alone.
fn split_matrix(m: &Matrix<LPoly>, h: usize, hv: &Vars) -> Result<BTreeMap<Exp, HMat>, BirkhoffError> {
    let n = m.nrows();
    let mut out: BTreeMap<Exp, HMat> = BTreeMap::new();
    for (i, j, x) in m.nonzero_entries() {
        for (qe, c) in split_h(&x, h, hv)? {
            out.entry(qe).or_insert_with(|| Matrix::zeros(hv, n, n)).set(i, j, c);
        }
    }
    Ok(out)
}

fn weight_of(e: &Exp, w: &[i64]) -> i64 {
    e.0.iter().zip(w).map(|(&k, &x)| k as i64 * x).sum()
}

/// Weights `w_k` of the basis vectors from the homogeneity of the entries:
/// entry `(k, j)` of direction `i` has weight `w_j + w(h d_i) - w_k`.
fn basis_weights(om: &ConnData<LPoly>, vw: &[i64], gen_w: &[i64]) -> Vec<Option<i64>> {
    let n = om.rank();
    let mut w = vec![None; n];
    w[0] = Some(0);
    let mut changed = true;
    while changed {
        changed = false;
        for (i, m) in om.omega().iter().enumerate() {
            for (k, j, x) in m.nonzero_entries() {
                let Some((e, _)) = x.terms().next() else { continue };
                let d = weight_of(e, vw);
                match (w[k], w[j]) {
                    (None, Some(wj)) => {
                        w[k] = Some(wj + gen_w[i] - d);
                        changed = true;
                    }
                    (Some(wk), None) => {
                        w[j] = Some(wk + d - gen_w[i]);
                        changed = true;
                    }
                    _ => {}
                }
            }
        }
    }
    w
}

/// All exponent vectors over `free` variables with weight at most `bound`,
/// zero-weight variables capped at `cap`, excluding zero, by total degree.
fn monomials(nv: usize, free: &[usize], vw: &[i64], bound: i64, cap: i32) -> Vec<Exp> {
    let mut out = vec![Exp::zero(nv)];
    for &v in free {
        let mut next = Vec::new();
        for e in &out {
            let mut k = 0;
            loop {
                let mut f = e.clone();
                f.0[v] = k;
                if weight_of(&f, vw) > bound || (vw[v] == 0 && k > cap) {
                    break;
                }
                next.push(f);
                k += 1;
            }
        }
        out = next;
    }
    out.retain(|e| !e.is_zero());
    out.sort_by(|a, b| a.total().cmp(&b.total()).then(a.cmp(b)));
    out
}

fn hdeg(m: &HMat) -> i32 {
    m.nonzero_entries()
        .iter()
        .map(|(_, _, x)| x.degree_in(0))
        .max()
        .unwrap_or(-1)
}

/// Normalizes `om` (matrices of `h d_i` on the operators `basis`). `weights`
/// maps variable names and `d` (or direction names) to weights; they bound
/// the `q`-degrees of the gauge.
pub fn hbar_normalize(
    om: &ConnData<LPoly>,
    basis: &[DOp<LPoly>],
    weights: &HashMap<String, i64>,
) -> Result<Normalized, BirkhoffError> {
    let vars = om.ctx().clone();
    let n = om.rank();
    let r = om.r();
    if basis.len() != n {
        return Err(DmodError::Dimension(format!("{} basis operators for rank {n}", basis.len())).into());
    }
    let h = vars
        .hbar()
        .ok_or_else(|| BirkhoffError::Unsupported("normalization needs the variable h".into()))?;
    let mut lambdas = Vec::with_capacity(r);
    for d in &vars.dirs()[..r] {
        match &d.kind {
            DerivKind::Euler(ls) => lambdas.push(ls.clone()),
            DerivKind::Partial(_) => {
                return Err(BirkhoffError::Unsupported(format!(
                    "direction {} is not of Euler type",
                    d.name
                )))
            }
        }
    }
    let wt = |name: &str| {
        weights
            .get(name)
            .copied()
            .ok_or_else(|| BirkhoffError::MissingWeight(name.into()))
    };
    let vw: Vec<i64> = vars.names().iter().map(|v| wt(v)).collect::<Result<_, _>>()?;
    let gen_w: Vec<i64> = vars.dirs()[..r]
        .iter()
        .map(|d| wt(&d.name).or_else(|_| wt("d")).map(|w| w + vw[h]))
        .collect::<Result<_, _>>()?;
    if vw.iter().enumerate().any(|(v, &w)| v != h && w < 0) {
        return Err(BirkhoffError::Unsupported("negative variable weight".into()));
    }
    let bw = basis_weights(om, &vw, &gen_w);
    let bound = match (bw.iter().flatten().max(), bw.iter().flatten().min()) {
        (Some(a), Some(b)) if bw.iter().all(Option::is_some) => a - b,
        _ => {
            return Err(BirkhoffError::NotNormalizable(
                "basis weights are not determined by the matrices".into(),
            ))
        }
    };

    let hv: Vars = Arc::new(VarTable::new(vec!["h".into()], vec![])?);
    let mats: Vec<BTreeMap<Exp, HMat>> = om
        .omega()
        .iter()
        .map(|m| split_matrix(m, h, &hv))
        .collect::<Result<_, _>>()?;
    let zero_exp = Exp::zero(vars.len());
    let zero = Matrix::zeros(&hv, n, n);
    let m0: Vec<HMat> = mats
        .iter()
        .map(|m| m.get(&zero_exp).cloned().unwrap_or_else(|| zero.clone()))
        .collect();
    if m0.iter().any(|m| hdeg(m) > 0) {
        return Err(BirkhoffError::NotNormalizable("the q-free part depends on h".into()));
    }
    let m0c: Vec<Vec<Vec<GRat>>> = m0
        .iter()
        .map(|m| {
            m.rows()
                .iter()
                .map(|row| row.iter().map(|x| x.coeff(&Exp(vec![0]))).collect())
                .collect()
        })
        .collect();

    let free: Vec<usize> = (0..vars.len()).filter(|&v| v != h).collect();
    let cap = om
        .omega()
        .iter()
        .flat_map(|m| m.nonzero_entries())
        .flat_map(|(_, _, x)| free.iter().map(move |&v| x.degree_in(v)).collect::<Vec<_>>())
        .max()
        .unwrap_or(0)
        * n as i32;
    let degrees = monomials(vars.len(), &free, &vw, bound, cap);

    let mut gs: BTreeMap<Exp, HMat> = BTreeMap::new();
    gs.insert(zero_exp.clone(), Matrix::identity(&hv, n));
    let mut ws: Vec<BTreeMap<Exp, HMat>> = m0
        .iter()
        .map(|m| BTreeMap::from([(zero_exp.clone(), m.clone())]))
        .collect();

    for m in &degrees {
        let below = |a: &Exp| a.0.iter().zip(&m.0).all(|(x, y)| x <= y) && a != m;
        let mut rhs = Vec::with_capacity(r);
        for i in 0..r {
            let mut acc = mats[i].get(m).cloned().unwrap_or_else(|| zero.clone());
            for (a, ga) in gs.iter().filter(|(a, _)| !a.is_zero() && below(a)) {
                if let Some(mm) = mats[i].get(&m.sub(a)) {
                    acc = acc.add(&ga.mul(mm)?)?;
                }
                if let Some(wm) = ws[i].get(&m.sub(a)) {
                    acc = acc.sub(&wm.mul(ga)?)?;
                }
            }
            rhs.push(acc);
        }
        let k = rhs.iter().map(hdeg).max().unwrap_or(-1).max(0) as usize;
        // Unknowns: X[a][b] at h^p for p <= k, then w_i[a][b].
        let nx = n * n * (k + 1);
        let xi = |a: usize, b: usize, p: usize| (a * n + b) * (k + 1) + p;
        let wi = |i: usize, a: usize, b: usize| nx + (i * n + a) * n + b;
        let ncols = nx + r * n * n;
        let mut rows = Vec::new();
        let mut b = Vec::new();
        for i in 0..r {
            let lam: GRat = lambdas[i]
                .iter()
                .map(|(v, l)| GRat::from(l.clone()) * GRat::int(m.0[*v] as i64))
                .fold(GRat::zero(), |s, t| s + t);
            for a in 0..n {
                for c in 0..n {
                    for p in 0..=k + 1 {
                        let mut row = vec![GRat::zero(); ncols];
                        if p == 0 {
                            row[wi(i, a, c)] += &GRat::one();
                        }
                        if p <= k {
                            for l in 0..n {
                                row[xi(l, c, p)] += &m0c[i][a][l];
                                row[xi(a, l, p)] -= &m0c[i][l][c];
                            }
                        }
                        if p >= 1 {
                            row[xi(a, c, p - 1)] += &lam;
                        }
                        rows.push(row);
                        b.push(rhs[i].get(a, c).coeff(&Exp(vec![p as i32])));
                    }
                }
            }
        }
        let x = match solve_scalar(rows, b, ncols) {
            ScalarSolve::Consistent { x, .. } => x,
            ScalarSolve::Inconsistent => {
                let mono = LPoly::monomial(&vars, m.clone(), GRat::one());
                return Err(BirkhoffError::NotNormalizable(format!("no gauge term at {mono}")));
            }
        };
        let mut g = zero.clone();
        for a in 0..n {
            for c in 0..n {
                let terms = (0..=k).map(|p| (Exp(vec![p as i32]), x[xi(a, c, p)].clone()));
                g.set(a, c, LPoly::from_terms(&hv, terms));
            }
        }
        if !g.is_zero() {
            gs.insert(m.clone(), g);
        }
        for (i, w) in ws.iter_mut().enumerate() {
            let wm = Matrix::from_fn(&hv, n, n, |a, c| LPoly::constant(&hv, x[wi(i, a, c)].clone()));
            if !wm.is_zero() {
                w.insert(m.clone(), wm);
            }
        }
    }

    // Reassemble G over the full table.
    let mut g: Matrix<LPoly> = Matrix::zeros(&vars, n, n);
    let mut by_h: BTreeMap<i32, Matrix<LPoly>> = BTreeMap::new();
    for (m, gm) in &gs {
        for (a, c, x) in gm.nonzero_entries() {
            for (e, coef) in x.terms() {
                let mut full = m.clone();
                full.0[h] = e.0[0];
                let t = LPoly::monomial(&vars, full.clone(), coef.clone());
                g.set(a, c, g.get(a, c).add(&t));
                full.0[h] = 0;
                let slot = by_h.entry(e.0[0]).or_insert_with(|| Matrix::zeros(&vars, n, n));
                let t = LPoly::monomial(&vars, full, coef.clone());
                slot.set(a, c, slot.get(a, c).add(&t));
            }
        }
    }

    let lift = |m: &Matrix<LPoly>| m.map(&vars, |x| RFunc::from(x.clone()));
    let gauged = om.map(&vars, |x| RFunc::from(x.clone())).gauge(&lift(&g))?;
    let mut omega = Vec::with_capacity(r);
    for (i, m) in gauged.omega().iter().enumerate() {
        let p = to_poly(m, &vars, i)?;
        if p.nonzero_entries().iter().any(|(_, _, x)| x.degree_in(h) != 0) {
            return Err(BirkhoffError::NotNormalizable(format!(
                "the gauged matrix {i} still involves h beyond the weight bound"
            )));
        }
        omega.push(p);
    }

    let q0 = lift(by_h.get(&0).expect("G^(0) = I"));
    let q0i = inverse(&q0).ok_or(DmodError::Singular)?;
    let top = by_h.keys().max().copied().unwrap_or(0);
    let mut q = vec![q0];
    for p in 1..=top {
        let gp = by_h.get(&p).map(lift).unwrap_or_else(|| Matrix::zeros(&vars, n, n));
        q.push(q0i.mul(&gp)?);
    }

    let gi = to_poly(&inverse(&lift(&g)).ok_or(DmodError::Singular)?, &vars, 0)?;
    let mut new_basis = Vec::with_capacity(n);
    for i in 0..n {
        let mut op = DOp::zero(&vars, basis[0].r());
        for (j, pj) in basis.iter().enumerate() {
            let c = gi.get(j, i);
            if !c.is_zero() {
                op = op.add(&pj.lmul(c))?;
            }
        }
        new_basis.push(op);
    }
    let labels = new_basis.iter().map(|b| b.to_string()).collect();
    Ok(Normalized {
        gauge: GaugeSeries { g, q },
        omega: ConnData::new(&vars, omega, labels)?,
        basis: new_basis,
    })
}
