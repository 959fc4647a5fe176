use qdm_core::birkhoff::{hbar_normalize, monomial_connection, BirkhoffError};
use qdm_core::catalog::{load, naive_m35, SpaceId};
use qdm_core::dmod::Presentation;
use qdm_core::rings::linalg::Matrix;
use qdm_core::rings::{LPoly, RFunc};

fn run(id: SpaceId) -> (qdm_core::catalog::SpaceEntry, qdm_core::birkhoff::Normalized) {
    let e = load(id).unwrap();
    let b = e.presentation.basis_ops();
    let om = monomial_connection(&e.presentation, &b).unwrap();
    let res = hbar_normalize(&om, &b, &e.weights).unwrap();
    (e, res)
}

#[test]
fn cpn_monomial_connection_is_companion() {
    for n in 1..=5 {
        let e = load(SpaceId::CPn(n)).unwrap();
        let b = e.presentation.basis_ops();
        let om = monomial_connection(&e.presentation, &b).unwrap();
        let m = &om.omega()[0];
        for k in 0..=n {
            for j in 0..=n {
                let want = if k == j + 1 {
                    "1"
                } else if k == 0 && j == n {
                    "q"
                } else {
                    "0"
                };
                assert_eq!(m.get(k, j).to_string(), want, "CP{n} ({k},{j})");
            }
        }
    }
}

#[test]
fn cpn_gauge_is_identity() {
    for n in 1..=4 {
        let (e, res) = run(SpaceId::CPn(n));
        assert_eq!(res.gauge.g, Matrix::identity(&e.vars, n + 1));
    }
}

#[test]
fn m35_matches_catalog_products() {
    let (e, res) = run(SpaceId::M35);
    assert_eq!(res.omega.omega(), &e.omega[..]);
    assert_eq!(res.basis, e.basis);
}

#[test]
fn m35_soundness_via_gauge() {
    let (e, res) = run(SpaceId::M35);
    let b = e.presentation.basis_ops();
    let om = monomial_connection(&e.presentation, &b).unwrap();
    let lift = |m: &Matrix<LPoly>| m.map(&e.vars, |x| RFunc::from(x.clone()));
    let gauged = om
        .map(&e.vars, |x| RFunc::from(x.clone()))
        .gauge(&lift(&res.gauge.g))
        .unwrap();
    let h = e.vars.index("h").unwrap();
    for (m, w) in gauged.omega().iter().zip(res.omega.omega()) {
        assert_eq!(m, &lift(w));
        for (_, _, x) in m.nonzero_entries() {
            assert_eq!(x.as_lpoly().unwrap().degree_in(h), 0);
        }
    }
}

#[test]
fn m35_shadow_of_basis() {
    let (_, res) = run(SpaceId::M35);
    let c: Vec<String> = res.basis.iter().map(|b| b.shadow().unwrap().to_string()).collect();
    assert_eq!(c, ["1", "b", "b^2 - 6*q", "b^3 - 21*q*b"]);
}

#[test]
fn m35_q_factors_reassemble() {
    // G = Q0 (I + h Q1) must hold as matrices.
    let (e, res) = run(SpaceId::M35);
    let v = &e.vars;
    let h = RFunc::from(LPoly::var(v, "h", 1).unwrap());
    let q = &res.gauge.q;
    let inner = Matrix::identity(v, 4).add(&q[1].scale_by(&h)).unwrap();
    let g = q[0].mul(&inner).unwrap();
    assert_eq!(g, res.gauge.g.map(v, |x| RFunc::from(x.clone())));
}

#[test]
fn naive_quantization_gives_other_products() {
    let e = load(SpaceId::M35).unwrap();
    let p = Presentation::new(vec![naive_m35()]).unwrap();
    let b = p.basis_ops();
    let om = monomial_connection(&p, &b).unwrap();
    let res = hbar_normalize(&om, &b, &e.weights).unwrap();
    assert_ne!(res.omega.omega(), &e.omega[..]);
}

#[test]
fn p112_is_not_normalizable_at_q_zero() {
    // The relation keeps an h D^3 term at s = 0, so no gauge with G = I there
    // can remove h.
    let e = load(SpaceId::P112).unwrap();
    let b = e.presentation.basis_ops();
    let om = monomial_connection(&e.presentation, &b).unwrap();
    let err = hbar_normalize(&om, &b, &e.weights).unwrap_err();
    assert!(matches!(err, BirkhoffError::NotNormalizable(_)), "{err}");
}

#[test]
fn f2_with_monomial_basis() {
    let (e, res) = run(SpaceId::F2);
    let basis: Vec<String> = res.basis.iter().map(|b| b.to_string()).collect();
    assert_eq!(basis, ["1", "D2", "D1", "D1*D2 - q1*q2"]);
    assert!(res.omega.flatness_check().unwrap().is_flat());
    let catalog: Vec<String> = e.basis.iter().map(|b| b.to_string()).collect();
    let mut a = basis.clone();
    let mut c = catalog;
    a.sort();
    c.sort();
    assert_eq!(a, c);
}

#[test]
fn h_dependent_leading_part_is_rejected() {
    let e = load(SpaceId::M35).unwrap();
    let t = qdm_core::text::parse_dop::<LPoly>("D^2 - h*D - q", &e.vars, 1).unwrap();
    let p = Presentation::new(vec![t]).unwrap();
    let b = p.basis_ops();
    let om = monomial_connection(&p, &b).unwrap();
    assert!(matches!(
        hbar_normalize(&om, &b, &e.weights),
        Err(BirkhoffError::NotNormalizable(_))
    ));
}
