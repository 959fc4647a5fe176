//! Dense matrices over coefficient rings and exact linear solving.

use std::fmt;

use crate::exact::GRat;

use super::{DiffField, DiffRing, RingError};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<R: DiffRing> {
    ctx: R::Ctx,
    rows: Vec<Vec<R>>,
    ncols: usize,
}

impl<R: DiffRing> Matrix<R> {
    pub fn zeros(ctx: &R::Ctx, n: usize, m: usize) -> Self {
        Matrix {
            ctx: ctx.clone(),
            rows: vec![vec![R::zero(ctx); m]; n],
            ncols: m,
        }
    }

    pub fn identity(ctx: &R::Ctx, n: usize) -> Self {
        let mut a = Self::zeros(ctx, n, n);
        for i in 0..n {
            a.rows[i][i] = R::one(ctx);
        }
        a
    }

    pub fn from_rows(ctx: &R::Ctx, rows: Vec<Vec<R>>) -> Result<Self, RingError> {
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(RingError::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix {
            ctx: ctx.clone(),
            rows,
            ncols,
        })
    }

    /// Builds an `n x m` matrix from an entry function.
    pub fn from_fn(ctx: &R::Ctx, n: usize, m: usize, mut f: impl FnMut(usize, usize) -> R) -> Self {
        let rows = (0..n).map(|i| (0..m).map(|j| f(i, j)).collect()).collect();
        Matrix {
            ctx: ctx.clone(),
            rows,
            ncols: m,
        }
    }

    pub fn ctx(&self) -> &R::Ctx {
        &self.ctx
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols
    }

    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.rows[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.rows[i][j] = v;
    }

    pub fn rows(&self) -> &[Vec<R>] {
        &self.rows
    }

    pub fn column(&self, j: usize) -> Vec<R> {
        self.rows.iter().map(|r| r[j].clone()).collect()
    }

    pub fn map<S: DiffRing>(&self, ctx: &S::Ctx, f: impl Fn(&R) -> S) -> Matrix<S> {
        Matrix {
            ctx: ctx.clone(),
            rows: self.rows.iter().map(|r| r.iter().map(&f).collect()).collect(),
            ncols: self.ncols,
        }
    }

    pub fn try_map<S: DiffRing, E>(&self, ctx: &S::Ctx, f: impl Fn(&R) -> Result<S, E>) -> Result<Matrix<S>, E> {
        let mut rows = Vec::with_capacity(self.nrows());
        for r in &self.rows {
            rows.push(r.iter().map(&f).collect::<Result<Vec<_>, E>>()?);
        }
        Ok(Matrix {
            ctx: ctx.clone(),
            rows,
            ncols: self.ncols,
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.ctx, self.ncols, self.nrows(), |i, j| self.rows[j][i].clone())
    }

    fn same_shape(&self, o: &Self) -> Result<(), RingError> {
        if self.nrows() != o.nrows() || self.ncols != o.ncols {
            return Err(RingError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.nrows(),
                self.ncols,
                o.nrows(),
                o.ncols
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self, RingError> {
        self.same_shape(o)?;
        Ok(Self::from_fn(&self.ctx, self.nrows(), self.ncols, |i, j| {
            self.rows[i][j].add(&o.rows[i][j])
        }))
    }

    pub fn sub(&self, o: &Self) -> Result<Self, RingError> {
        self.same_shape(o)?;
        Ok(Self::from_fn(&self.ctx, self.nrows(), self.ncols, |i, j| {
            self.rows[i][j].sub(&o.rows[i][j])
        }))
    }

    pub fn mul(&self, o: &Self) -> Result<Self, RingError> {
        if self.ncols != o.nrows() {
            return Err(RingError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.nrows(),
                self.ncols,
                o.nrows(),
                o.ncols
            )));
        }
        Ok(Self::from_fn(&self.ctx, self.nrows(), o.ncols, |i, j| {
            let mut acc = R::zero(&self.ctx);
            for k in 0..self.ncols {
                let a = &self.rows[i][k];
                if a.is_zero() || o.rows[k][j].is_zero() {
                    continue;
                }
                acc = acc.add(&a.mul(&o.rows[k][j]));
            }
            acc
        }))
    }

    pub fn mul_vec(&self, v: &[R]) -> Result<Vec<R>, RingError> {
        if v.len() != self.ncols {
            return Err(RingError::DimensionMismatch("vector length".into()));
        }
        Ok(self
            .rows
            .iter()
            .map(|r| {
                let mut acc = R::zero(&self.ctx);
                for (a, b) in r.iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b));
                    }
                }
                acc
            })
            .collect())
    }

    /// `[self, o] = self*o - o*self`.
    pub fn commutator(&self, o: &Self) -> Result<Self, RingError> {
        self.mul(o)?.sub(&o.mul(self)?)
    }

    pub fn scale(&self, c: &GRat) -> Self {
        self.map(&self.ctx, |x| x.scale(c))
    }

    pub fn scale_by(&self, c: &R) -> Self {
        self.map(&self.ctx, |x| x.mul(c))
    }

    pub fn derive(&self, dir: usize) -> Self {
        self.map(&self.ctx, |x| x.derive(dir))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.iter().all(|x| x.is_zero()))
    }

    /// Positions and values of nonzero entries in row-major order.
    pub fn nonzero_entries(&self) -> Vec<(usize, usize, R)> {
        let mut out = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            for (j, x) in r.iter().enumerate() {
                if !x.is_zero() {
                    out.push((i, j, x.clone()));
                }
            }
        }
        out
    }
}

impl<R: DiffRing> fmt::Display for Matrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, x) in r.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LinSolve<F> {
    Solution(Vec<F>),
    Singular { rank: usize },
}

/// Row-echelon elimination with the simplest available pivot in each
/// column. Returns the reduced rows, the pivot columns, and the transformed
/// right-hand sides.
fn eliminate<F: DiffField>(
    mut a: Vec<Vec<F>>,
    mut b: Vec<Vec<F>>,
    ncols: usize,
) -> (Vec<Vec<F>>, Vec<usize>, Vec<Vec<F>>) {
    let n = a.len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == n {
            break;
        }
        let best = (row..n)
            .filter(|&i| !a[i][col].is_zero())
            .min_by_key(|&i| a[i][col].size_hint());
        let Some(p) = best else { continue };
        a.swap(row, p);
        b.swap(row, p);
        let inv = a[row][col].inv().expect("nonzero field element is invertible");
        for x in a[row].iter_mut() {
            *x = x.mul(&inv);
        }
        for x in b[row].iter_mut() {
            *x = x.mul(&inv);
        }
        for i in 0..n {
            if i == row || a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].clone();
            for k in 0..ncols {
                if !a[row][k].is_zero() {
                    let t = a[row][k].mul(&f);
                    a[i][k] = a[i][k].sub(&t);
                }
            }
            for k in 0..b[i].len() {
                if !b[row][k].is_zero() {
                    let t = b[row][k].mul(&f);
                    b[i][k] = b[i][k].sub(&t);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots, b)
}

/// Solves the square system `a x = b`, verifying the solution by
/// back-substitution.
pub fn linsolve<F: DiffField>(a: &Matrix<F>, b: &[F]) -> Result<LinSolve<F>, RingError> {
    if !a.is_square() || b.len() != a.nrows() {
        return Err(RingError::DimensionMismatch(format!(
            "{}x{} system with {} right-hand sides",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let n = a.nrows();
    let rhs = b.iter().map(|x| vec![x.clone()]).collect();
    let (_, pivots, red) = eliminate(a.rows.clone(), rhs, n);
    if pivots.len() < n {
        return Ok(LinSolve::Singular { rank: pivots.len() });
    }
    let x: Vec<F> = red.into_iter().map(|mut r| r.remove(0)).collect();
    let check = a.mul_vec(&x)?;
    assert!(
        check.iter().zip(b).all(|(l, r)| l.sub(r).is_zero()),
        "back-substitution failed"
    );
    Ok(LinSolve::Solution(x))
}

/// Solves `a x = b` for an `n x k` matrix with independent columns; `None`
/// when `b` is outside the column span.
pub fn solve_in_span<F: DiffField>(a: &Matrix<F>, b: &[F]) -> Result<Option<Vec<F>>, RingError> {
    if b.len() != a.nrows() {
        return Err(RingError::DimensionMismatch("right-hand side length".into()));
    }
    let rhs = b.iter().map(|x| vec![x.clone()]).collect();
    let (_, pivots, red) = eliminate(a.rows.clone(), rhs, a.ncols());
    if pivots.len() < a.ncols() {
        return Err(RingError::DimensionMismatch("columns are dependent".into()));
    }
    if red[pivots.len()..].iter().any(|r| !r[0].is_zero()) {
        return Ok(None);
    }
    Ok(Some(
        red.into_iter().take(pivots.len()).map(|mut r| r.remove(0)).collect(),
    ))
}

pub fn rank<F: DiffField>(a: &Matrix<F>) -> usize {
    let (_, pivots, _) = eliminate(a.rows.clone(), vec![Vec::new(); a.nrows()], a.ncols());
    pivots.len()
}

pub fn inverse<F: DiffField>(a: &Matrix<F>) -> Option<Matrix<F>> {
    if !a.is_square() {
        return None;
    }
    let n = a.nrows();
    let id = Matrix::<F>::identity(&a.ctx, n);
    let (_, pivots, inv) = eliminate(a.rows.clone(), id.rows, n);
    if pivots.len() < n {
        return None;
    }
    Some(Matrix {
        ctx: a.ctx.clone(),
        rows: inv,
        ncols: n,
    })
}

/// Result of solving a possibly non-square scalar system.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarSolve {
    /// A solution with every free unknown set to zero, and the number of
    /// free unknowns.
    Consistent {
        x: Vec<GRat>,
        free: usize,
    },
    Inconsistent,
}

/// Exact Gauss-Jordan on a dense scalar system with `ncols` unknowns.
pub fn solve_scalar(mut a: Vec<Vec<GRat>>, mut b: Vec<GRat>, ncols: usize) -> ScalarSolve {
    let n = a.len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == n {
            break;
        }
        let Some(p) = (row..n).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        b.swap(row, p);
        let inv = a[row][col].inv().expect("nonzero pivot");
        for x in a[row].iter_mut() {
            *x = &*x * &inv;
        }
        b[row] = &b[row] * &inv;
        for i in 0..n {
            if i == row || a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].clone();
            for k in col..ncols {
                if !a[row][k].is_zero() {
                    let t = &a[row][k] * &f;
                    a[i][k] -= &t;
                }
            }
            let t = &b[row] * &f;
            b[i] -= &t;
        }
        pivots.push(col);
        row += 1;
    }
    if b[row..].iter().any(|x| !x.is_zero()) {
        return ScalarSolve::Inconsistent;
    }
    let mut x = vec![GRat::zero(); ncols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = b[r].clone();
    }
    ScalarSolve::Consistent {
        free: ncols - pivots.len(),
        x,
    }
}
