//! Genus-zero potential of the projective plane: rational curve counts, the
//! associativity equation and the big quantum connection.
//!
//! Series live in `t0, q, t2, h` with `q = e^{t1}`. The directions are
//! `d/dt0`, `q d/dq` and `d/dt2`. A coefficient of `q^d` is exact for
//! `d <= dmax`: the `t2`-degree of every such coefficient is below `3 dmax`,
//! which the truncation keeps.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::dmod::{ConnData, DmodError};
use crate::exact::{GRat, Rat};
use crate::rings::linalg::Matrix;
use crate::rings::{DerivKind, Direction, Exp, SeriesCtx, TSeries, VarTable};
use crate::weyl::DOp;

const T0: usize = 0;
const Q: usize = 1;
const T2: usize = 2;
const H: usize = 3;
const H_TRUNC: i32 = 6;

fn binom(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

fn factorial(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * k)
}

/// `N_1, ..., N_dmax`: the number of rational plane curves of degree `d`
/// through `3d - 1` general points.
pub fn kontsevich(dmax: usize) -> Vec<BigInt> {
    let mut n: Vec<BigInt> = Vec::with_capacity(dmax);
    for d in 1..=dmax as i64 {
        if d == 1 {
            n.push(BigInt::one());
            continue;
        }
        let mut acc = BigInt::zero();
        for i in 1..d {
            let j = d - i;
            let c = binom(3 * d - 4, 3 * i - 2) * (i * i * j * j) - binom(3 * d - 4, 3 * i - 1) * (i * i * i * j);
            acc += c * &n[i as usize - 1] * &n[j as usize - 1];
        }
        assert!(acc.is_positive(), "N_{d} must be a positive integer");
        n.push(acc);
    }
    n
}

/// Series context for potentials truncated at `q^dmax`.
pub fn gw_ctx(dmax: usize) -> Arc<SeriesCtx> {
    let one = || Rat::one();
    let names = ["t0", "q", "t2", "h"].iter().map(|s| s.to_string()).collect();
    let dirs = vec![
        Direction {
            name: "D0".into(),
            kind: DerivKind::Partial(T0),
        },
        Direction {
            name: "D1".into(),
            kind: DerivKind::Euler(vec![(Q, one())]),
        },
        Direction {
            name: "D2".into(),
            kind: DerivKind::Partial(T2),
        },
    ];
    let vars = Arc::new(VarTable::new(names, dirs).expect("well-formed table"));
    SeriesCtx::new(vars, vec![1, dmax as i32 + 1, 3 * dmax as i32 + 1, H_TRUNC])
}

/// `1/2 (t0 t1^2 + t0^2 t2) + sum_d N_d q^d t2^{3d-1} / (3d-1)!`.
#[derive(Debug, Clone, PartialEq)]
pub struct GWPotential {
    dmax: usize,
    n: Vec<BigInt>,
    ctx: Arc<SeriesCtx>,
}

impl GWPotential {
    pub fn new(dmax: usize) -> Self {
        Self::with_invariants(kontsevich(dmax))
    }

    /// A potential of the same shape with arbitrary coefficients `N_d`.
    pub fn with_invariants(n: Vec<BigInt>) -> Self {
        let dmax = n.len();
        GWPotential {
            dmax,
            n,
            ctx: gw_ctx(dmax),
        }
    }

    pub fn dmax(&self) -> usize {
        self.dmax
    }

    pub fn invariants(&self) -> &[BigInt] {
        &self.n
    }

    pub fn ctx(&self) -> &Arc<SeriesCtx> {
        &self.ctx
    }

    /// Partial derivative along the listed directions (each in `0..3`),
    /// of total order at least three.
    pub fn partial(&self, idx: &[usize]) -> TSeries {
        assert!(
            idx.len() >= 3 && idx.iter().all(|&i| i < 3),
            "need three or more indices in 0..3"
        );
        let count = |k: usize| idx.iter().filter(|&&i| i == k).count() as i64;
        let (c0, c1, c2) = (count(0), count(1), count(2));
        let mut s = TSeries::zero(&self.ctx);
        if idx.len() == 3 && ((c0, c1, c2) == (1, 2, 0) || (c0, c1, c2) == (2, 0, 1)) {
            s = TSeries::constant(&self.ctx, GRat::one());
        }
        if c0 > 0 {
            return s;
        }
        for (k, nd) in self.n.iter().enumerate() {
            let d = k as i64 + 1;
            let e = 3 * d - 1 - c2;
            if e < 0 {
                continue;
            }
            let num = nd * BigInt::from(d).pow(c1 as u32);
            let c = GRat::from(Rat::new(num, factorial(e)));
            s = s.add(&TSeries::monomial(&self.ctx, Exp(vec![0, d as i32, e as i32, 0]), c));
        }
        s
    }

    pub fn third_partial(&self, i: usize, j: usize, k: usize) -> TSeries {
        self.partial(&[i, j, k])
    }

    /// `F222 + F111 F122 - F112^2`.
    pub fn wdvv_residual(&self) -> TSeries {
        let f = |i, j, k| self.third_partial(i, j, k);
        f(2, 2, 2)
            .add(&f(1, 1, 1).mul(&f(1, 2, 2)))
            .sub(&f(1, 1, 2).mul(&f(1, 1, 2)))
    }

    /// `(omega_i)_{kj} = F_{i, 2-k, j}`: the product by `b_i` on the basis
    /// `1, b, b^2`, paired by the antidiagonal form.
    pub fn big_quantum_connection(&self) -> ConnData<TSeries> {
        let omega = (0..3)
            .map(|i| Matrix::from_fn(&self.ctx, 3, 3, |k, j| self.third_partial(i, 2 - k, j)))
            .collect();
        ConnData::new(&self.ctx, omega, vec!["1".into(), "b".into(), "b^2".into()]).expect("three 3x3 matrices")
    }

    /// `T1` and `T2 = h d_2 - P` built from the potential.
    pub fn relations(&self) -> Result<(DOp<TSeries>, DOp<TSeries>), DmodError> {
        let ctx = &self.ctx;
        let h = TSeries::monomial(ctx, Exp::unit(4, H, 1), GRat::one());
        let d1 = DOp::gen(ctx, 3, 1);
        let d2 = DOp::gen(ctx, 3, 2);
        let c = |x: TSeries| DOp::from_coeff(ctx, 3, x);
        let f111 = self.partial(&[1, 1, 1]);
        let f112 = self.partial(&[1, 1, 2]);
        let f122 = self.partial(&[1, 2, 2]);
        let f1111 = self.partial(&[1, 1, 1, 1]);
        let f1112 = self.partial(&[1, 1, 1, 2]);
        let t1 = d1
            .pow(3)?
            .sub(&c(f111.clone()).mul(&d1.pow(2)?)?)?
            .sub(&c(f112.scale(&GRat::int(2)).add(&h.mul(&f1111))).mul(&d1)?)?
            .sub(&c(f122.add(&h.mul(&f1112))))?;
        let p = d1.pow(2)?.sub(&c(f111).mul(&d1)?)?.sub(&c(f112))?;
        let t2 = d2.sub(&p)?;
        Ok((t1, t2))
    }

    /// The connection at `t0 = t2 = 0` as displayed for the initial
    /// condition, with `q` for `e^{t1}`.
    pub fn initial_condition(&self) -> Vec<Matrix<TSeries>> {
        let ctx = &self.ctx;
        let q = TSeries::monomial(ctx, Exp::unit(4, Q, 1), GRat::one());
        let one = TSeries::constant(ctx, GRat::one());
        let m = |entries: &[(usize, usize, &TSeries)]| {
            let mut m = Matrix::zeros(ctx, 3, 3);
            for (k, j, x) in entries {
                m.set(*k, *j, (*x).clone());
            }
            m
        };
        vec![
            Matrix::identity(ctx, 3),
            m(&[(0, 2, &q), (1, 0, &one), (2, 1, &one)]),
            m(&[(0, 1, &q), (1, 2, &q), (2, 0, &one)]),
        ]
    }

    pub fn reconstruction_check(&self) -> Result<ReconstructionReport, DmodError> {
        let c = self.big_quantum_connection();
        let restricted: Vec<Matrix<TSeries>> = c
            .omega()
            .iter()
            .map(|m| m.map(&self.ctx, |x| x.restrict_zero(&[T0, T2])))
            .collect();
        let initial_ok = restricted == self.initial_condition();
        let flat = c.flatness_check()?;
        let mut bad = Vec::new();
        for pr in &flat.residuals {
            for (_, _, x) in &pr.entries {
                for (e, _) in x.terms() {
                    bad.push(e.0[Q] as usize);
                }
            }
        }
        bad.sort_unstable();
        bad.dedup();
        Ok(ReconstructionReport {
            initial_ok,
            flat: flat.is_flat(),
            bad_degrees: bad,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    /// The restriction to `t0 = t2 = 0` equals the displayed initial condition.
    pub initial_ok: bool,
    /// The full connection is flat to the truncation order.
    pub flat: bool,
    /// `q`-degrees at which a curvature entry is nonzero.
    pub bad_degrees: Vec<usize>,
}

impl ReconstructionReport {
    pub fn pass(&self) -> bool {
        self.initial_ok && self.flat
    }
}

/// Whether the coefficient of each `q^d`, `d = 0..=dmax`, vanishes.
pub fn residual_by_degree(s: &TSeries, dmax: usize) -> Vec<(usize, bool)> {
    (0..=dmax)
        .map(|d| (d, s.terms().all(|(e, _)| e.0[Q] as usize != d)))
        .collect()
}
