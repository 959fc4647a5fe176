use crate::rings::linalg::{inverse, rank, solve_in_span, Matrix};
use crate::rings::{DiffField, DiffRing};
use crate::weyl::{DOp, Multi};

use super::{DmodError, Presentation};

/// Matrices of the generators `eps d_i` on a basis, plus printable labels.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnData<C: DiffRing> {
    ctx: C::Ctx,
    omega: Vec<Matrix<C>>,
    labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairResidual<C> {
    pub i: usize,
    pub j: usize,
    /// Nonzero entries `(row, col, value)`.
    pub entries: Vec<(usize, usize, C)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatnessReport<C> {
    pub residuals: Vec<PairResidual<C>>,
}

impl<C> FlatnessReport<C> {
    pub fn is_flat(&self) -> bool {
        self.residuals.iter().all(|r| r.entries.is_empty())
    }
}

impl<C: DiffRing> ConnData<C> {
    pub fn new(ctx: &C::Ctx, omega: Vec<Matrix<C>>, labels: Vec<String>) -> Result<Self, DmodError> {
        let n = omega.first().map_or(labels.len(), |m| m.nrows());
        if omega.len() > C::ndirs(ctx) {
            return Err(DmodError::Dimension("more matrices than derivations".into()));
        }
        for m in &omega {
            if !m.is_square() || m.nrows() != n {
                return Err(DmodError::Dimension(
                    "connection matrices must be square of one size".into(),
                ));
            }
        }
        let labels = if labels.is_empty() {
            (0..n).map(|k| format!("e{k}")).collect()
        } else {
            labels
        };
        if labels.len() != n {
            return Err(DmodError::Dimension("one label per basis vector".into()));
        }
        Ok(ConnData {
            ctx: ctx.clone(),
            omega,
            labels,
        })
    }

    /// Connection whose dual carries the matrix system `d_i Y = A_i Y`:
    /// `Omega_i = A_i^t`.
    pub fn from_matrix_system(ctx: &C::Ctx, a: Vec<Matrix<C>>, labels: Vec<String>) -> Result<Self, DmodError> {
        Self::new(ctx, a.iter().map(Matrix::transpose).collect(), labels)
    }

    /// The matrices `A_i = Omega_i^t` of the associated matrix system.
    pub fn matrix_system(&self) -> Vec<Matrix<C>> {
        self.omega.iter().map(Matrix::transpose).collect()
    }

    pub fn ctx(&self) -> &C::Ctx {
        &self.ctx
    }

    pub fn omega(&self) -> &[Matrix<C>] {
        &self.omega
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.rank());
        self.labels = labels;
        self
    }

    /// Number of directions.
    pub fn r(&self) -> usize {
        self.omega.len()
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn unit_vector(&self, k: usize) -> Vec<C> {
        (0..self.rank())
            .map(|i| if i == k { C::one(&self.ctx) } else { C::zero(&self.ctx) })
            .collect()
    }

    /// `eps * d_dir(v) + Omega_dir v`.
    pub fn act(&self, dir: usize, v: &[C]) -> Result<Vec<C>, DmodError> {
        let m = self
            .omega
            .get(dir)
            .ok_or_else(|| DmodError::Dimension(format!("no direction {dir}")))?;
        let eps = C::eps(&self.ctx);
        let w = m.mul_vec(v)?;
        Ok(v.iter().zip(w).map(|(x, y)| eps.mul(&x.derive(dir)).add(&y)).collect())
    }

    /// Image of `v` under a normal-ordered operator.
    pub fn apply_op(&self, op: &DOp<C>, v: &[C]) -> Result<Vec<C>, DmodError> {
        if op.r() > self.r() {
            return Err(DmodError::Dimension(
                "operator has more directions than the connection".into(),
            ));
        }
        let mut out = vec![C::zero(&self.ctx); self.rank()];
        for (m, c) in op.terms() {
            let mut w = v.to_vec();
            for (i, &k) in m.0.iter().enumerate().rev() {
                for _ in 0..k {
                    w = self.act(i, &w)?;
                }
            }
            for (o, x) in out.iter_mut().zip(&w) {
                *o = o.add(&c.mul(x));
            }
        }
        Ok(out)
    }

    /// `R_ij = eps (d_i Omega_j - d_j Omega_i) + [Omega_i, Omega_j]` for all
    /// `i < j`.
    pub fn flatness_check(&self) -> Result<FlatnessReport<C>, DmodError> {
        let eps = C::eps(&self.ctx);
        let mut residuals = Vec::new();
        for i in 0..self.r() {
            for j in i + 1..self.r() {
                let (a, b) = (&self.omega[i], &self.omega[j]);
                let curv = b.derive(i).sub(&a.derive(j))?.scale_by(&eps);
                let res = curv.add(&a.commutator(b)?)?;
                residuals.push(PairResidual {
                    i,
                    j,
                    entries: res.nonzero_entries(),
                });
            }
        }
        Ok(FlatnessReport { residuals })
    }

    pub fn map<D: DiffRing>(&self, ctx: &D::Ctx, f: impl Fn(&C) -> D) -> ConnData<D> {
        ConnData {
            ctx: ctx.clone(),
            omega: self.omega.iter().map(|m| m.map(ctx, &f)).collect(),
            labels: self.labels.clone(),
        }
    }
}

impl<F: DiffField> ConnData<F> {
    /// Connection on the basis `P_i = sum_j (G^-1)_{ji} P_j`:
    /// `Omega' = G Omega G^-1 - eps d(G) G^-1`.
    pub fn gauge(&self, g: &Matrix<F>) -> Result<ConnData<F>, DmodError> {
        if g.nrows() != self.rank() || !g.is_square() {
            return Err(DmodError::Dimension("gauge matrix size".into()));
        }
        let gi = inverse(g).ok_or(DmodError::Singular)?;
        let eps = F::eps(&self.ctx);
        let mut omega = Vec::with_capacity(self.r());
        for (i, m) in self.omega.iter().enumerate() {
            let conj = g.mul(m)?.mul(&gi)?;
            let corr = g.derive(i).mul(&gi)?.scale_by(&eps);
            omega.push(conj.sub(&corr)?);
        }
        Ok(ConnData {
            ctx: self.ctx.clone(),
            omega,
            labels: self.labels.clone(),
        })
    }
}

/// Companion matrix of a monic one-direction operator of order `n`: ones
/// on the subdiagonal, last column `-a_0, ..., -a_{n-1}`.
pub fn companion<C: DiffRing>(t: &DOp<C>, dir: usize) -> Result<ConnData<C>, DmodError> {
    if t.terms()
        .any(|(m, _)| m.0.iter().enumerate().any(|(i, &k)| i != dir && k > 0))
    {
        return Err(DmodError::Dimension("operator involves other directions".into()));
    }
    let n = t.order_in(dir) as usize;
    let ctx = t.ctx();
    if n == 0 || !t.coeff(&Multi::unit(t.r(), dir, n as u32)).is_one() {
        return Err(DmodError::NotMonic);
    }
    let mut m = Matrix::zeros(ctx, n, n);
    for k in 0..n {
        if k + 1 < n {
            m.set(k + 1, k, C::one(ctx));
        }
        m.set(k, n - 1, t.coeff(&Multi::unit(t.r(), dir, k as u32)).neg());
    }
    let mut omega = vec![Matrix::zeros(ctx, n, n); dir + 1];
    omega[dir] = m;
    let labels = (0..n)
        .map(|k| match k {
            0 => "1".to_string(),
            1 => C::dir_name(ctx, dir),
            _ => format!("{}^{k}", C::dir_name(ctx, dir)),
        })
        .collect();
    ConnData::new(ctx, omega, labels)
}

/// Matrices on the standard monomials of a presentation.
pub fn connection_from_presentation<C: DiffRing>(p: &Presentation<C>) -> Result<ConnData<C>, DmodError> {
    let ops = p.basis_ops();
    let n = ops.len();
    let mut omega = Vec::with_capacity(p.r());
    for i in 0..p.r() {
        let g = DOp::gen(p.ctx(), p.r(), i);
        let mut m = Matrix::zeros(p.ctx(), n, n);
        for (j, b) in ops.iter().enumerate() {
            for (k, c) in p.reduce(&g.mul(b)?)?.into_iter().enumerate() {
                m.set(k, j, c);
            }
        }
        omega.push(m);
    }
    ConnData::new(p.ctx(), omega, ops.iter().map(|o| o.to_string()).collect())
}

/// Matrices on an arbitrary basis of operators, computed over the field
/// `F` that `lift` maps coefficients into.
pub fn connection_in_basis<C: DiffRing, F: DiffField>(
    p: &Presentation<C>,
    ops: &[DOp<C>],
    fctx: &F::Ctx,
    lift: impl Fn(&C) -> F,
) -> Result<ConnData<F>, DmodError> {
    let n = p.rank();
    if ops.len() != n {
        return Err(DmodError::Dimension(format!(
            "{} basis operators for rank {n}",
            ops.len()
        )));
    }
    let mut b = Matrix::zeros(fctx, n, n);
    for (j, o) in ops.iter().enumerate() {
        for (k, c) in p.reduce(o)?.iter().enumerate() {
            b.set(k, j, lift(c));
        }
    }
    let bi = inverse(&b).ok_or(DmodError::Singular)?;
    let mut omega = Vec::with_capacity(p.r());
    for i in 0..p.r() {
        let g = DOp::gen(p.ctx(), p.r(), i);
        let mut img = Matrix::zeros(fctx, n, n);
        for (j, o) in ops.iter().enumerate() {
            for (k, c) in p.reduce(&g.mul(o)?)?.iter().enumerate() {
                img.set(k, j, lift(c));
            }
        }
        omega.push(bi.mul(&img)?);
    }
    ConnData::new(fctx, omega, ops.iter().map(|o| o.to_string()).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cyclic<F: DiffField> {
    /// Monic operator annihilating the start vector.
    pub op: DOp<F>,
    /// `basis_ops[k]` is the operator whose action on the start vector gives
    /// basis vector `k`. Empty when the iterates became dependent early.
    pub basis_ops: Vec<DOp<F>>,
    /// Order at which the iterates became dependent, when below the rank.
    pub early_dependence: Option<usize>,
}

/// Scalar equation for basis vector `start` along direction `dir`.
pub fn cyclic_extract<F: DiffField>(c: &ConnData<F>, start: usize, dir: usize) -> Result<Cyclic<F>, DmodError> {
    let n = c.rank();
    if start >= n || dir >= c.r() {
        return Err(DmodError::Dimension("start vector or direction out of range".into()));
    }
    let ctx = c.ctx();
    let r = c.r();
    let mut iters = vec![c.unit_vector(start)];
    let mut order = n;
    for k in 1..=n {
        let next = c.act(dir, &iters[k - 1])?;
        iters.push(next);
        if k < n {
            let m = Matrix::from_fn(ctx, n, k + 1, |i, j| iters[j][i].clone());
            if rank(&m) <= k {
                order = k;
                break;
            }
        }
    }
    let vmat = Matrix::from_fn(ctx, n, order, |i, j| iters[j][i].clone());
    let x = solve_in_span(&vmat, &iters[order])?
        .ok_or_else(|| DmodError::Unverified("iterate outside the span of its predecessors".into()))?;
    let mut op = DOp::monomial(ctx, r, Multi::unit(r, dir, order as u32), F::one(ctx));
    for (j, xj) in x.iter().enumerate() {
        op.add_term(Multi::unit(r, dir, j as u32), xj.neg());
    }
    let check = c.apply_op(&op, &c.unit_vector(start))?;
    if check.iter().any(|v| !v.is_zero()) {
        return Err(DmodError::Unverified(format!(
            "extracted `{op}` does not annihilate the start vector"
        )));
    }
    if order < n {
        return Ok(Cyclic {
            op,
            basis_ops: Vec::new(),
            early_dependence: Some(order),
        });
    }
    let vinv = inverse(&vmat).ok_or(DmodError::Singular)?;
    let basis_ops = (0..n)
        .map(|i| {
            let mut b = DOp::zero(ctx, r);
            for j in 0..n {
                b.add_term(Multi::unit(r, dir, j as u32), vinv.get(j, i).clone());
            }
            b
        })
        .collect();
    Ok(Cyclic {
        op,
        basis_ops,
        early_dependence: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::GRat;
    use crate::rings::{LPoly, RFunc, VarTable, Vars};

    fn v() -> Vars {
        VarTable::quantum(1, &[])
    }

    fn rq(e: i32, k: i64) -> RFunc {
        LPoly::var(&v(), "q", e).unwrap().scale(&GRat::int(k)).into()
    }

    fn cp1() -> DOp<RFunc> {
        let d = DOp::<RFunc>::gen(&v(), 1, 0);
        d.pow(2).unwrap().sub(&DOp::from_coeff(&v(), 1, rq(1, 1))).unwrap()
    }

    #[test]
    fn companion_of_cp1() {
        let c = companion(&cp1(), 0).unwrap();
        let z = RFunc::zero(&v());
        let one = RFunc::one(&v());
        assert_eq!(
            c.omega()[0],
            Matrix::from_rows(&v(), vec![vec![z.clone(), rq(1, 1)], vec![one, z]]).unwrap()
        );
    }

    #[test]
    fn companion_rejects_non_monic() {
        let t = cp1().scale(&GRat::int(2));
        assert_eq!(companion(&t, 0), Err(DmodError::NotMonic));
    }

    #[test]
    fn cyclic_roundtrip_cp1() {
        let c = companion(&cp1(), 0).unwrap();
        let cy = cyclic_extract(&c, 0, 0).unwrap();
        assert_eq!(cy.op, cp1());
        assert_eq!(cy.early_dependence, None);
    }

    #[test]
    fn early_dependence_is_flagged() {
        let z = RFunc::zero(&v());
        let m = Matrix::from_rows(&v(), vec![vec![z.clone(), z.clone()], vec![z.clone(), z]]).unwrap();
        let c = ConnData::new(&v(), vec![m], vec![]).unwrap();
        let cy = cyclic_extract(&c, 0, 0).unwrap();
        assert_eq!(cy.early_dependence, Some(1));
        assert_eq!(cy.op, DOp::gen(&v(), 1, 0));
    }

    #[test]
    fn zero_connection_is_flat() {
        let vv = VarTable::quantum(2, &[]);
        let z = Matrix::<RFunc>::zeros(&vv, 2, 2);
        let c = ConnData::new(&vv, vec![z.clone(), z], vec![]).unwrap();
        assert!(c.flatness_check().unwrap().is_flat());
    }

    #[test]
    fn trivial_gauges() {
        let c = companion(&cp1(), 0).unwrap();
        assert_eq!(c.gauge(&Matrix::identity(&v(), 2)).unwrap(), c);
        let g = Matrix::identity(&v(), 2).scale(&GRat::frac(-3, 7));
        assert_eq!(c.gauge(&g).unwrap(), c);
        let sing = Matrix::<RFunc>::zeros(&v(), 2, 2);
        assert_eq!(c.gauge(&sing), Err(DmodError::Singular));
    }
}
