//! Built-in quantum D-modules, the crepant specialization and the
//! quantization gate.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dmod::{connection_in_basis, cyclic_extract, ConnData, DmodError, Presentation};
use crate::exact::GRat;
use crate::rings::linalg::{inverse, solve_scalar, Matrix, ScalarSolve};
use crate::rings::{DiffRing, LPoly, RFunc, VarTable, Vars};
use crate::text::{parse_dop, ParseError};
use crate::weyl::{specialize, specialize_rfunc, DOp, DirMap, Multi, WeylError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("unknown space `{0}` (expected CPn, e.g. CP2, or M35, F2, P112)")]
    UnknownSpace(String),
    #[error("stored data of {0} is inconsistent: {1}")]
    Inconsistent(String, String),
    #[error(transparent)]
    Dmod(#[from] DmodError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Ring(#[from] crate::rings::RingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceId {
    /// Complex projective space of the given dimension.
    CPn(usize),
    M35,
    F2,
    P112,
}

impl FromStr for SpaceId {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        match lower.as_str() {
            "m35" => return Ok(SpaceId::M35),
            "f2" => return Ok(SpaceId::F2),
            "p112" => return Ok(SpaceId::P112),
            _ => {}
        }
        let n = lower
            .strip_prefix("cpn(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| lower.strip_prefix("cp"));
        match n.and_then(|n| n.parse::<usize>().ok()) {
            Some(n) if n >= 1 => Ok(SpaceId::CPn(n)),
            _ => Err(CatalogError::UnknownSpace(t.to_string())),
        }
    }
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceId::CPn(n) => write!(f, "CP{n}"),
            SpaceId::M35 => write!(f, "M35"),
            SpaceId::F2 => write!(f, "F2"),
            SpaceId::P112 => write!(f, "P112"),
        }
    }
}

/// A space's quantum D-module with its canonical basis and product matrices.
#[derive(Debug, Clone)]
pub struct SpaceEntry {
    pub id: SpaceId,
    pub vars: Vars,
    pub presentation: Presentation<LPoly>,
    /// Canonical basis operators, one per cohomology class.
    pub basis: Vec<DOp<LPoly>>,
    /// Cohomology names of the basis.
    pub labels: Vec<String>,
    /// Matrices of `h d_i` on the canonical basis (quantum multiplication).
    pub omega: Vec<Matrix<LPoly>>,
    /// Weights of `d` (key `d`), `h`, and the variables.
    pub weights: HashMap<String, i64>,
}

impl SpaceEntry {
    /// The stored matrices as a connection over rational functions.
    pub fn connection(&self) -> ConnData<RFunc> {
        let omega = self
            .omega
            .iter()
            .map(|m| m.map(&self.vars, |x| RFunc::from(x.clone())))
            .collect();
        ConnData::new(&self.vars, omega, self.labels.clone()).expect("well-formed catalog entry")
    }

    /// The principal relation for single-direction spaces.
    pub fn relation(&self) -> &DOp<LPoly> {
        &self.presentation.relations()[0]
    }
}

fn weights(pairs: &[(&str, i64)]) -> HashMap<String, i64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn ops(texts: &[&str], vars: &Vars, r: usize) -> Result<Vec<DOp<LPoly>>, ParseError> {
    texts.iter().map(|t| parse_dop::<LPoly>(t, vars, r)).collect()
}

fn matrix(rows: &[&[&str]], vars: &Vars) -> Result<Matrix<LPoly>, ParseError> {
    let rows = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|e| crate::text::parse_coeff::<LPoly>(e, vars))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::from_rows(vars, rows).expect("square literal"))
}

/// The operator `(hD)^4 - 27 q (hD)^2`, a quantization with the right rank
/// but the wrong products.
pub fn naive_m35() -> DOp<LPoly> {
    parse_dop::<LPoly>("D^4 - 27*q*D^2", &VarTable::quantum(1, &[]), 1).expect("literal")
}

pub fn load(id: SpaceId) -> Result<SpaceEntry, CatalogError> {
    let entry = match id {
        SpaceId::CPn(n) => {
            let vars = VarTable::quantum(1, &[]);
            let rel = parse_dop::<LPoly>(&format!("D^{} - q", n + 1), &vars, 1)?;
            let basis: Vec<DOp<LPoly>> = (0..=n)
                .map(|k| DOp::monomial(&vars, 1, Multi(vec![k as u32]), LPoly::one(&vars)))
                .collect();
            let labels = (0..=n)
                .map(|k| match k {
                    0 => "1".to_string(),
                    1 => "b".to_string(),
                    _ => format!("b^{k}"),
                })
                .collect();
            let mut m = Matrix::zeros(&vars, n + 1, n + 1);
            for k in 0..n {
                m.set(k + 1, k, LPoly::one(&vars));
            }
            m.set(0, n, LPoly::var(&vars, "q", 1).expect("q"));
            SpaceEntry {
                id,
                presentation: Presentation::new(vec![rel])?,
                basis,
                labels,
                omega: vec![m],
                weights: weights(&[("d", 0), ("h", 2), ("q", 2 * (n as i64 + 1))]),
                vars,
            }
        }
        SpaceId::M35 => {
            let vars = VarTable::quantum(1, &[]);
            let rel = parse_dop::<LPoly>("D^4 - 27*q*D^2 - 27*h*q*D - 6*h^2*q", &vars, 1)?;
            let basis = ops(&["1", "D", "D^2 - 6*q", "D^3 - 21*q*D - 6*h*q"], &vars, 1)?;
            let omega = matrix(
                &[
                    &["0", "6*q", "0", "36*q^2"],
                    &["1", "0", "15*q", "0"],
                    &["0", "1", "0", "6*q"],
                    &["0", "0", "1", "0"],
                ],
                &vars,
            )?;
            SpaceEntry {
                id,
                presentation: Presentation::new(vec![rel])?,
                basis,
                labels: ["1", "b", "b^2", "b^3"].map(String::from).to_vec(),
                omega: vec![omega],
                weights: weights(&[("d", 0), ("h", 2), ("q", 4)]),
                vars,
            }
        }
        SpaceId::F2 => {
            let vars = VarTable::quantum(2, &[]);
            let rels = ops(&["D1^2 - q1*q2", "D2*(D2 - 2*D1) - q2*(1 - q1)"], &vars, 2)?;
            let presentation = Presentation::with_leads(rels, vec![Multi(vec![2, 0]), Multi(vec![0, 2])])?;
            let basis = ops(&["1", "D1", "D2", "D1*D2 - q1*q2"], &vars, 2)?;
            let w1 = matrix(
                &[
                    &["0", "q1*q2", "q1*q2", "0"],
                    &["1", "0", "0", "-q1*q2"],
                    &["0", "0", "0", "q1*q2"],
                    &["0", "0", "1", "0"],
                ],
                &vars,
            )?;
            let w2 = matrix(
                &[
                    &["0", "q1*q2", "q2*(1 + q1)", "0"],
                    &["0", "0", "0", "q2*(1 - q1)"],
                    &["1", "0", "0", "q1*q2"],
                    &["0", "1", "2", "0"],
                ],
                &vars,
            )?;
            SpaceEntry {
                id,
                presentation,
                basis,
                labels: ["1", "b1", "b2", "b1*b2"].map(String::from).to_vec(),
                omega: vec![w1, w2],
                weights: weights(&[("d", 0), ("h", 2), ("q1", 0), ("q2", 4)]),
                vars,
            }
        }
        SpaceId::P112 => {
            let vars = VarTable::half_power();
            let rel = parse_dop::<LPoly>("D^4 - 1/2*h*D^3 - 1/4*s^2", &vars, 1)?;
            let basis = ops(&["1", "D", "D^2", "2*s^-1*D^3"], &vars, 1)?;
            let omega = matrix(
                &[
                    &["0", "0", "0", "s/2"],
                    &["1", "0", "0", "0"],
                    &["0", "1", "0", "0"],
                    &["0", "0", "s/2", "0"],
                ],
                &vars,
            )?;
            SpaceEntry {
                id,
                presentation: Presentation::new(vec![rel])?,
                basis,
                labels: ["1", "b", "b^2", "1_{1/2}"].map(String::from).to_vec(),
                omega: vec![omega],
                weights: weights(&[("d", 0), ("h", 2), ("s", 4)]),
                vars,
            }
        }
    };
    self_check(&entry)?;
    Ok(entry)
}

/// The presentation, read in the canonical basis, must give the stored
/// matrices exactly.
fn self_check(e: &SpaceEntry) -> Result<(), CatalogError> {
    let derived = connection_in_basis(&e.presentation, &e.basis, &e.vars, |c: &LPoly| RFunc::from(c.clone()))?;
    let stored = e.connection();
    for (i, (a, b)) in derived.omega().iter().zip(stored.omega()).enumerate() {
        if a != b {
            return Err(CatalogError::Inconsistent(
                e.id.to_string(),
                format!("direction {} derived {a}, stored {b}", i + 1),
            ));
        }
    }
    Ok(())
}

/// One comparison in the crepant pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub got: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrepantReport {
    pub checks: Vec<Check>,
    /// Images of the F2 basis classes written in the P112 basis labels.
    pub correspondence: Vec<(String, String)>,
}

impl CrepantReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn as_poly_op(a: &DOp<RFunc>) -> Option<DOp<LPoly>> {
    let mut out = DOp::zero(a.ctx(), a.r());
    for (m, c) in a.terms() {
        out.add_term(m.clone(), c.as_lpoly()?);
    }
    Some(out)
}

fn check(name: &str, expected: &impl fmt::Display, got: &impl fmt::Display, pass: bool) -> Check {
    Check {
        name: name.to_string(),
        expected: expected.to_string(),
        got: got.to_string(),
        pass,
    }
}

/// Writes a coordinate vector as a combination of labels.
fn combination(coords: &[RFunc], labels: &[String]) -> String {
    let mut terms = Vec::new();
    for (c, l) in coords.iter().zip(labels) {
        if c.is_zero() {
            continue;
        }
        for (neg, body) in c.fmt_terms() {
            let s = if body == "1" {
                l.clone()
            } else if l == "1" {
                body
            } else {
                format!("{body}*{l}")
            };
            terms.push((neg, s));
        }
    }
    crate::rings::join_terms(terms)
}

/// Specializes the F2 D-module at `(q1, q2) = (-1, i s)` with `s^2 = q` and
/// compares with the P112 D-module.
pub fn crepant_pipeline() -> Result<CrepantReport, CatalogError> {
    let f2 = load(SpaceId::F2)?;
    let p112 = load(SpaceId::P112)?;
    let fv = &f2.vars;
    let pv = &p112.vars;
    let mut checks = Vec::new();

    let cy = cyclic_extract(&f2.connection(), 0, 1)?;
    let t1 = as_poly_op(&cy.op)
        .ok_or_else(|| CatalogError::Inconsistent("F2".into(), "T1 has non-polynomial coefficients".into()))?;
    let t1_expected = parse_dop::<LPoly>(
        "D2^4 - 2*q2*(1 + q1)*D2^2 - h*D2^3 - h*q2*(1 + q1)*D2 + q2^2*(1 - q1)^2",
        fv,
        2,
    )?;
    checks.push(check("T1 from F2 in direction 2", &t1_expected, &t1, t1 == t1_expected));

    let p = &cy.basis_ops[1];
    let p_expected = parse_dop::<RFunc>("(D2^3 - (3*q1*q2 + q2)*D2 - h*q2*(1 + q1))/(2*q2*(1 - q1))", fv, 2)?;
    checks.push(check("T2 = D1 - P", &p_expected, p, *p == p_expected));

    let mut map = HashMap::new();
    map.insert("q1".to_string(), LPoly::constant(pv, GRat::int(-1)));
    map.insert("q2".to_string(), LPoly::var(pv, "s", 1).expect("s").scale(&GRat::i()));
    let dirs: DirMap = vec![None, Some((0, GRat::int(2)))];
    let restricted = specialize(&t1, &map, pv, 1, &dirs)?;
    let target = p112.relation().scale(&GRat::int(16));
    checks.push(check(
        "T1 at (q1, q2) = (-1, i*s)",
        &target,
        &restricted,
        restricted == target,
    ));

    let pres = &p112.presentation;
    let mut bmat = Matrix::zeros(pv, 4, 4);
    for (j, b) in p112.basis.iter().enumerate() {
        for (k, c) in pres.reduce(b)?.into_iter().enumerate() {
            bmat.set(k, j, RFunc::from(c));
        }
    }
    let binv = inverse(&bmat).ok_or(DmodError::Singular)?;
    let expected_images = ["1", "-2*i*s^-1*D^3 + D", "2*D", "2*D^2"];
    let expected_classes = ["1", "b - i*1_{1/2}", "2*b", "2*b^2"];
    let mut correspondence = Vec::new();
    for (k, b) in cy.basis_ops.iter().enumerate() {
        let img = specialize_rfunc(b, &map, pv, 1, &dirs)?;
        let img = as_poly_op(&img).ok_or_else(|| {
            CatalogError::Inconsistent(
                "F2".into(),
                format!("restriction of {} is not polynomial", f2.labels[k]),
            )
        })?;
        let nf = pres.normal_form(&img, Default::default())?;
        let want = parse_dop::<LPoly>(expected_images[k], pv, 1)?;
        let name = format!("restriction of {}", f2.basis[k]);
        checks.push(check(&name, &want, &nf, nf == want));
        let coords = binv.mul_vec(&pres.reduce(&nf)?.into_iter().map(RFunc::from).collect::<Vec<_>>())?;
        let class = combination(&coords, &p112.labels);
        checks.push(check(
            &format!("class of {}", f2.labels[k]),
            &expected_classes[k],
            &class,
            class == expected_classes[k],
        ));
        correspondence.push((f2.labels[k].clone(), class));
    }
    Ok(CrepantReport { checks, correspondence })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateReport {
    pub degrees: BTreeSet<i64>,
    pub homogeneous: bool,
    /// Self-adjoint as given (all parameters kept symbolic).
    pub self_adjoint: bool,
    /// Linear conditions on the parameters, each `= 0`.
    pub constraints: Vec<LPoly>,
    /// Parameters fixed by the constraints.
    pub fixed: Vec<(String, GRat)>,
    /// Parameters left free by the constraints.
    pub free: Vec<String>,
    /// False when the constraints have no solution.
    pub solvable: bool,
}

/// Parameter exponents with their coefficients.
type AffineTerms = Vec<(Vec<i32>, GRat)>;

/// Parameters: variables that are neither `h` nor differentiated.
fn parameters(vars: &VarTable) -> Vec<usize> {
    (0..vars.len())
        .filter(|&v| Some(v) != vars.hbar() && !vars.is_moving(v))
        .collect()
}

/// Weighted homogeneity and formal self-adjointness of a one-direction
/// operator. Parameters without a weight get weight 0.
pub fn quantization_gate(t: &DOp<LPoly>, weights: &HashMap<String, i64>) -> Result<GateReport, CatalogError> {
    let vars = t.ctx().clone();
    let params = parameters(&vars);
    let mut w = weights.clone();
    for &p in &params {
        w.entry(vars.name(p).to_string()).or_insert(0);
    }
    let degrees = t.weighted_degrees(&w)?;
    let diff = t.adjoint()?.sub(t)?;

    // Group coefficients of T* - T by their non-parameter monomial; each
    // group must vanish and is affine-linear in the parameters.
    let mut groups: BTreeMap<(Multi, Vec<i32>), AffineTerms> = BTreeMap::new();
    for (m, c) in diff.terms() {
        for (e, k) in c.terms() {
            let mut base = e.0.clone();
            let mut pe = vec![0; params.len()];
            for (j, &p) in params.iter().enumerate() {
                pe[j] = base[p];
                base[p] = 0;
            }
            groups.entry((m.clone(), base)).or_default().push((pe, k.clone()));
        }
    }
    let mut constraints = Vec::new();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut linear = true;
    for terms in groups.values() {
        let mut row = vec![GRat::zero(); params.len()];
        let mut cst = GRat::zero();
        let mut poly = LPoly::zero(&vars);
        for (pe, k) in terms {
            let mut e = vec![0; vars.len()];
            for (j, &p) in params.iter().enumerate() {
                e[p] = pe[j];
            }
            poly = poly.add(&LPoly::monomial(&vars, crate::rings::Exp(e), k.clone()));
            match pe.iter().filter(|&&x| x != 0).count() {
                0 => cst = &cst + k,
                1 if pe.iter().all(|&x| x == 0 || x == 1) => {
                    let j = pe.iter().position(|&x| x == 1).unwrap();
                    row[j] = &row[j] + k;
                }
                _ => linear = false,
            }
        }
        if !poly.is_zero() {
            constraints.push(poly);
            rows.push(row);
            rhs.push(-cst);
        }
    }
    let names: Vec<String> = params.iter().map(|&p| vars.name(p).to_string()).collect();
    let (solvable, fixed, free) = if !linear {
        (true, Vec::new(), names.clone())
    } else {
        match solve_scalar(rows.clone(), rhs.clone(), params.len()) {
            ScalarSolve::Inconsistent => (false, Vec::new(), Vec::new()),
            ScalarSolve::Consistent { x, .. } => {
                let mut fixed = Vec::new();
                let mut free = Vec::new();
                for j in 0..params.len() {
                    // Fixed iff forcing a different value is inconsistent.
                    let mut r2 = rows.clone();
                    let mut b2 = rhs.clone();
                    let mut unit = vec![GRat::zero(); params.len()];
                    unit[j] = GRat::one();
                    r2.push(unit);
                    b2.push(&x[j] + &GRat::one());
                    match solve_scalar(r2, b2, params.len()) {
                        ScalarSolve::Inconsistent => fixed.push((names[j].clone(), x[j].clone())),
                        ScalarSolve::Consistent { .. } => free.push(names[j].clone()),
                    }
                }
                (true, fixed, free)
            }
        }
    };
    Ok(GateReport {
        homogeneous: degrees.len() == 1,
        degrees,
        self_adjoint: diff.is_zero(),
        constraints,
        fixed,
        free,
        solvable,
    })
}
