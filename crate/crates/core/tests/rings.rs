use std::collections::HashMap;

use qdm_core::exact::GRat;
use qdm_core::rings::linalg::{linsolve, rank, LinSolve, Matrix};
use qdm_core::rings::{LPoly, RFunc, VarTable};
use qdm_core::text::parse_coeff;

#[test]
fn gaussian_rationals() {
    let i = GRat::i();
    assert_eq!(&i * &i, GRat::int(-1));
    assert_eq!(&GRat::frac(1, 2) + &GRat::frac(1, 3), GRat::frac(5, 6));
    let a = &GRat::one() + &i;
    let b = &GRat::one() - &i;
    assert_eq!(&a * &b, GRat::int(2));
    assert_eq!(
        (&GRat::frac(3, 2) - &(&GRat::frac(1, 4) * &i)).to_string(),
        "3/2 - 1/4*i"
    );
}

#[test]
fn theta_on_laurent_polynomials() {
    let v = VarTable::quantum(1, &[]);
    let p = |s: &str| parse_coeff::<LPoly>(s, &v).unwrap();
    assert_eq!(p("q^3").theta(0).unwrap(), p("3*q^3"));
    assert!(p("1").theta(0).unwrap().is_zero());
    assert_eq!(p("q^-1 + 5*q^2").theta(0).unwrap(), p("-q^-1 + 10*q^2"));
}

#[test]
fn specialization_values() {
    let src = VarTable::quantum(2, &[]);
    let dst = VarTable::half_power();
    let map: HashMap<String, LPoly> = [("q1", "-1"), ("q2", "i*s")]
        .into_iter()
        .map(|(k, x)| (k.to_string(), parse_coeff::<LPoly>(x, &dst).unwrap()))
        .collect();
    let p = |s: &str| parse_coeff::<LPoly>(s, &src).unwrap();
    let d = |s: &str| parse_coeff::<LPoly>(s, &dst).unwrap();
    assert_eq!(p("q1*q2").substitute(&map, &dst).unwrap(), d("-i*s"));
    assert_eq!(p("q2^2").substitute(&map, &dst).unwrap(), d("-s^2"));
    let ident: HashMap<String, LPoly> = ["h", "q1", "q2"]
        .into_iter()
        .map(|k| (k.to_string(), parse_coeff::<LPoly>(k, &src).unwrap()))
        .collect();
    assert_eq!(p("h*q1^-1 + q2").substitute(&ident, &src).unwrap(), p("h*q1^-1 + q2"));
    let bad: HashMap<String, LPoly> = [("q1".to_string(), d("1 + s")), ("q2".to_string(), d("s"))]
        .into_iter()
        .collect();
    assert!(p("q1^-1").substitute(&bad, &dst).is_err());
}

#[test]
fn linear_systems_over_rational_functions() {
    let v = VarTable::quantum(1, &[]);
    let r = |s: &str| parse_coeff::<RFunc>(s, &v).unwrap();
    let a = Matrix::from_rows(&v, vec![vec![r("q"), r("0")], vec![r("0"), r("1")]]).unwrap();
    match linsolve(&a, &[r("q^2"), r("1")]).unwrap() {
        LinSolve::Solution(x) => assert_eq!(x, [r("q"), r("1")]),
        other => panic!("{other:?}"),
    }
    let b = [r("1 + h"), r("q/(1 + q)")];
    match linsolve(&Matrix::identity(&v, 2), &b).unwrap() {
        LinSolve::Solution(x) => assert_eq!(x, b),
        other => panic!("{other:?}"),
    }
    let s = Matrix::from_rows(&v, vec![vec![r("1"), r("1")], vec![r("1"), r("1")]]).unwrap();
    assert!(matches!(
        linsolve(&s, &[r("1"), r("0")]).unwrap(),
        LinSolve::Singular { .. }
    ));
    assert_eq!(rank(&s), 1);
    assert!(linsolve(&s, &[r("1")]).is_err());
}
