use proptest::prelude::*;

use super::*;
use crate::geom::{apply_tensor_dual, lie_bracket};
use crate::symexpr::parse;

fn p(s: &str) -> Expr {
    parse(s).unwrap()
}

fn chart(names: &[&str]) -> Chart {
    Chart::new("t", names).unwrap()
}

fn vf(c: &Chart, comps: &[&str]) -> VectorField {
    VectorField::parse(c, comps).unwrap()
}

fn ctx() -> NumericContext<f64> {
    NumericContext::default()
}

fn structure_b() -> TangentStructure {
    let qv = chart(&["q", "v"]);
    let pls = PartialLinearStructure::new(vf(&qv, &["0", "v"]), vec![p("q")], vec![p("v")]);
    TangentStructure::new(pls, Tensor11::elementary(&qv, 1, 0)).unwrap()
}

fn structure_a() -> TangentStructure {
    let x = chart(&["x1", "x2"]);
    let pls = PartialLinearStructure::new(vf(&x, &["0", "x2"]), vec![p("x1")], vec![p("x2")]);
    TangentStructure::new(pls, Tensor11::elementary(&x, 1, 0)).unwrap()
}

#[test]
fn subalgebra_requires_independent_generators() {
    let qv = chart(&["q", "v"]);
    assert!(BasicSubalgebra::new(&qv, vec![p("q"), p("2*q")], &ctx()).is_err());
    assert!(BasicSubalgebra::new(&qv, vec![p("q")], &ctx()).is_ok());
}

#[test]
fn vertical_distribution_examples() {
    let x = chart(&["x1", "x2"]);
    let a = BasicSubalgebra::new(&x, vec![p("f(x1^2+x2^2)*x1")], &ctx()).unwrap();
    let v = vertical_distribution(&a, &ctx()).unwrap();
    assert_eq!(v, vec![vf(&x, &["-2*x2*x1*f'(x1^2+x2^2)", "2*x1^2*f'(x1^2+x2^2) + f(x1^2+x2^2)"])]);
    assert!(lie_derivative_function(&v[0], &a.generators()[0]).is_zero());

    let a = BasicSubalgebra::new(&x, vec![p("x1")], &ctx()).unwrap();
    assert_eq!(vertical_distribution(&a, &ctx()).unwrap(), vec![vf(&x, &["0", "1"])]);
    let a = BasicSubalgebra::new(&x, vec![p("x1 + x2")], &ctx()).unwrap();
    let v = vertical_distribution(&a, &ctx()).unwrap();
    assert_eq!(v.len(), 1);
    // span of d/dx1 - d/dx2
    assert_eq!(v[0].comp(0), &(-v[0].comp(1)));
}

#[test]
fn projectability_examples() {
    let qv = chart(&["q", "v"]);
    let a = BasicSubalgebra::new(&qv, vec![p("q")], &ctx()).unwrap();
    let t = vf(&qv, &["0", "1"]);
    assert!(is_vertical(&t, &a, &ctx()).unwrap());
    let pr = is_projectable(&t, &a, &ctx()).unwrap();
    assert!(pr.projectable && pr.action == vec![Expr::zero()]);

    let gamma = vf(&qv, &["v", "-q"]);
    assert!(!is_vertical(&gamma, &a, &ctx()).unwrap());
    assert!(!is_projectable(&gamma, &a, &ctx()).unwrap().projectable);

    let y = vf(&qv, &["q", "v"]);
    let pr = is_projectable(&y, &a, &ctx()).unwrap();
    assert!(pr.projectable);
    assert_eq!(pr.action, vec![p("q")]);
}

#[test]
fn degree_examples() {
    let qv = chart(&["q", "v"]);
    let delta = vf(&qv, &["0", "v"]);
    assert_eq!(degree(&p("q"), &delta, &ctx()).unwrap(), Some(0));
    assert_eq!(degree(&p("v"), &delta, &ctx()).unwrap(), Some(1));
    assert_eq!(degree(&p("q*v^2"), &delta, &ctx()).unwrap(), Some(2));
    assert_eq!(degree(&p("v^7"), &delta, &ctx()).unwrap(), None);
    assert_eq!(degree(&p("exp(v)"), &delta, &ctx()).unwrap(), None);
}

#[test]
fn classify_examples() {
    let qv = chart(&["q", "v"]);
    let delta = vf(&qv, &["0", "v"]);
    let lin = vf(&qv, &["b(q)", "a(q)*v"]);
    assert_eq!(classify_field(&lin, &delta, &ctx()).unwrap(), FieldClass::FiberwiseLinear);
    assert_eq!(classify_field(&vf(&qv, &["0", "1"]), &delta, &ctx()).unwrap(), FieldClass::Translational);
    assert_eq!(classify_field(&vf(&qv, &["0", "v^2"]), &delta, &ctx()).unwrap(), FieldClass::Neither);
}

#[test]
fn sode_examples() {
    let qv = chart(&["q", "v"]);
    let a = BasicSubalgebra::new(&qv, vec![p("q")], &ctx()).unwrap();
    let delta = vf(&qv, &["0", "v"]);
    assert!(is_sode_algebraic(&vf(&qv, &["v", "-q"]), &a, &delta, &ctx()).unwrap());
    assert!(!is_sode_algebraic(&vf(&qv, &["1", "0"]), &a, &delta, &ctx()).unwrap());
    assert!(is_sode_algebraic(&vf(&qv, &["v", "q + v"]), &a, &delta, &ctx()).unwrap());
    assert!(matches!(
        is_sode_algebraic(&vf(&qv, &["v", "-q"]), &a, &vf(&qv, &["1", "v"]), &ctx()),
        Err(Error::Precondition(_))
    ));

    let b = structure_b();
    assert!(is_sode_tensorial(&vf(&qv, &["v", "F(q*v) + q^2*v"]), &b, &ctx()).unwrap());
    assert!(!is_sode_tensorial(&vf(&qv, &["1", "0"]), &b, &ctx()).unwrap());
    let sa = structure_a();
    assert!(is_sode_tensorial(&vf(sa.chart(), &["x2", "-x1"]), &sa, &ctx()).unwrap());
}

#[test]
fn build_s_examples() {
    let qv = chart(&["q", "v"]);
    let a = BasicSubalgebra::new(&qv, vec![p("q")], &ctx()).unwrap();
    let s_b = Tensor11::elementary(&qv, 1, 0);
    assert_eq!(build_s_from_sode(&vf(&qv, &["v", "-q"]), &a, &ctx()).unwrap(), s_b);
    assert_eq!(build_s_from_sode(&vf(&qv, &["v", "v^2"]), &a, &ctx()).unwrap(), s_b);
    let x = chart(&["x1", "x2"]);
    let a = BasicSubalgebra::new(&x, vec![p("x1")], &ctx()).unwrap();
    assert_eq!(build_s_from_sode(&vf(&x, &["x2", "-x1"]), &a, &ctx()).unwrap(), Tensor11::elementary(&x, 1, 0));
    let qv_a = BasicSubalgebra::new(&qv, vec![p("q")], &ctx()).unwrap();
    assert!(matches!(build_s_from_sode(&vf(&qv, &["1", "0"]), &qv_a, &ctx()), Err(Error::RankDeficient(_))));
}

#[test]
fn build_s_for_oscillator_generator() {
    // base q = f(r) x1 on the x-chart, with the oscillator as SODE
    let x = chart(&["x1", "x2"]);
    let a = BasicSubalgebra::new(&x, vec![p("f(x1^2+x2^2)*x1")], &ctx()).unwrap();
    let gamma = vf(&x, &["x2", "-x1"]);
    let s = build_s_from_sode(&gamma, &a, &ctx()).unwrap();
    let delta_free = apply_tensor(&s, &gamma).unwrap();
    // S kills dq and S(Gamma) is vertical
    assert!(apply_tensor_dual(&s, &differential(&x, &a.generators()[0])).unwrap().is_zero());
    assert!(is_vertical(&delta_free, &a, &ctx()).unwrap());
    let report = verify_tangent_structure(
        &TangentStructure::new(
            PartialLinearStructure::new(delta_free, vec![a.generators()[0].clone()], vec![p("f(x1^2+x2^2)*x2")]),
            s,
        )
        .unwrap(),
        &ctx(),
    );
    assert!(report.passes(false), "{report:#?}");
}

#[test]
fn lift_and_hat_examples() {
    let b = structure_b();
    let qv = b.chart().clone();
    assert_eq!(vertical_lift(&b, &[p("1")], &ctx()).unwrap(), vf(&qv, &["0", "1"]));
    assert!(vertical_lift(&b, &[p("0")], &ctx()).unwrap().is_zero());
    assert_eq!(vertical_lift(&b, &[p("q")], &ctx()).unwrap(), vf(&qv, &["0", "q"]));
    assert!(matches!(vertical_lift(&b, &[p("v")], &ctx()), Err(Error::NotBasic(_))));

    assert_eq!(hat_oneform(&[p("1")], &b, &ctx()).unwrap(), p("v"));
    assert!(hat_oneform(&[p("0")], &b, &ctx()).unwrap().is_zero());
    let h = hat_oneform(&[p("q")], &b, &ctx()).unwrap();
    assert_eq!(h, p("q*v"));
    assert_eq!(degree(&h, b.delta(), &ctx()).unwrap(), Some(1));
    assert!(matches!(hat_oneform(&[p("v")], &b, &ctx()), Err(Error::NotBasic(_))));
}

#[test]
fn oscillator_structures_pass_all_checks() {
    for t in [structure_a(), structure_b()] {
        let r = verify_tangent_structure(&t, &ctx());
        assert_eq!(r.entries.len(), 7);
        assert!(r.passes(true), "{r:#?}");
    }
}

#[test]
fn broken_structures_fail_the_right_checks() {
    let qv = chart(&["q", "v"]);
    let pls = PartialLinearStructure::new(vf(&qv, &["0", "v"]), vec![p("q")], vec![p("v")]);
    let wrong = TangentStructure::new(pls.clone(), Tensor11::elementary(&qv, 0, 1)).unwrap();
    let r = verify_tangent_structure(&wrong, &ctx());
    assert_eq!(r.get("d:homogeneity").unwrap().verdict, Verdict::Fail);

    let zero = TangentStructure::new(pls.clone(), Tensor11::zero(&qv)).unwrap();
    let r = verify_tangent_structure(&zero, &ctx());
    let failing: Vec<&str> = r.entries.iter().filter(|e| e.verdict == Verdict::Fail).map(|e| e.name.as_str()).collect();
    assert_eq!(failing, vec!["b:rank", "g:sode-exists"]);

    let twisted = TangentStructure::new(pls, Tensor11::parse(&qv, &[&["0", "0"], &["0", "q"]]).unwrap()).unwrap();
    let r = verify_tangent_structure(&twisted, &ctx());
    let n = r.get("c:nijenhuis").unwrap();
    assert_eq!(n.verdict, Verdict::Fail);
    assert_eq!(n.detail.as_deref(), Some("N^v_qv = -q"));
}

#[test]
fn grading_detects_misplaced_zero_section() {
    let qv = chart(&["q", "v"]);
    let pls = PartialLinearStructure::new(vf(&qv, &["0", "v - 1"]), vec![p("q")], vec![p("v - 1")]);
    assert!(check_grading(&pls, &ctx()).unwrap().verdict.passes(true));
    // Delta = (v-1) d/dv with fiber generator v: wrong degree
    let bad = PartialLinearStructure::new(vf(&qv, &["0", "v - 1"]), vec![p("q")], vec![p("v")]);
    assert_eq!(check_grading(&bad, &ctx()).unwrap().verdict, Verdict::Fail);
}

#[test]
fn connection_projector() {
    let qv = chart(&["q", "v"]);
    let a = BasicSubalgebra::new(&qv, vec![p("q")], &ctx()).unwrap();
    // vertical projector along a nonlinear connection: C = dv (x) d/dv + G(q,v) dq (x) d/dv
    let c = Tensor11::parse(&qv, &[&["0", "0"], &["q*v", "1"]]).unwrap();
    assert!(is_vertical_projector(&c, &a, &ctx()).unwrap().verdict.passes(true));
    assert_eq!(is_vertical_projector(&Tensor11::identity(&qv).scale(&Expr::int(2)), &a, &ctx()).unwrap().verdict, Verdict::Fail);
}

fn arb_coef() -> impl Strategy<Value = Expr> {
    let vars = ["q1", "q2", "v1", "v2"];
    prop::collection::vec((-3i64..=3, 0usize..4, 0usize..4, 0u8..=1), 1..=3).prop_map(move |ts| {
        ts.into_iter()
            .map(|(c, i, j, second)| {
                let mut t = &Expr::int(c) * &Expr::symbol(vars[i]);
                if second == 1 {
                    t = &t * &Expr::symbol(vars[j]);
                }
                t
            })
            .sum()
    })
}

fn r4() -> (Chart, TangentStructure, BasicSubalgebra) {
    let c = chart(&["q1", "q2", "v1", "v2"]);
    let pls = PartialLinearStructure::new(vf(&c, &["0", "0", "v1", "v2"]), vec![p("q1"), p("q2")], vec![p("v1"), p("v2")]);
    let mut s = Tensor11::zero(&c);
    s = s.add(&Tensor11::elementary(&c, 2, 0)).unwrap().add(&Tensor11::elementary(&c, 3, 1)).unwrap();
    let a = pls.subalgebra();
    (c, TangentStructure::new(pls, s).unwrap(), a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sode_properties(f1 in arb_coef(), f2 in arb_coef(), g1 in arb_coef(), g2 in arb_coef()) {
        let (c, t, a) = r4();
        let ctx = ctx();
        let gamma = VectorField::new(&c, vec![p("v1"), p("v2"), f1.clone(), f2.clone()]).unwrap();
        let gamma2 = VectorField::new(&c, vec![p("v1"), p("v2"), g1.clone(), g2.clone()]).unwrap();
        prop_assert!(is_sode_tensorial(&gamma, &t, &ctx).unwrap());
        prop_assert!(is_sode_algebraic(&gamma, &a, t.delta(), &ctx).unwrap());
        // affinity: the difference is vertical and both act alike on base functions
        let diff = gamma.sub(&gamma2).unwrap();
        prop_assert!(apply_tensor(&t.s, &diff).unwrap().is_zero());
        for f in a.generators() {
            prop_assert_eq!(lie_derivative_function(&gamma, f), lie_derivative_function(&gamma2, f));
        }
        // [Delta, Gamma] - Gamma is vertical
        let dg = lie_bracket(t.delta(), &gamma).unwrap().sub(&gamma).unwrap();
        prop_assert!(apply_tensor(&t.s, &dg).unwrap().is_zero());
        // S*(d Gamma(f)) = df and S*(df) = 0
        for f in a.generators() {
            let df = differential(&c, f);
            prop_assert!(apply_tensor_dual(&t.s, &df).unwrap().is_zero());
            let dl = differential(&c, &lie_derivative_function(&gamma, f));
            prop_assert!(apply_tensor_dual(&t.s, &dl).unwrap().sub(&df).unwrap().is_zero());
        }
        // S is recovered from any SODE
        prop_assert_eq!(build_s_from_sode(&gamma, &a, &ctx).unwrap(), t.s.clone());
    }

    #[test]
    fn build_s_ignores_vertical_perturbations(w1 in arb_coef(), w2 in arb_coef()) {
        let (c, t, a) = r4();
        let gamma = VectorField::new(&c, vec![p("v1"), p("v2"), p("-q1"), p("-q2")]).unwrap();
        let y = VectorField::new(&c, vec![Expr::zero(), Expr::zero(), w1, w2]).unwrap();
        prop_assert!(is_vertical(&y, &a, &ctx()).unwrap());
        prop_assert_eq!(build_s_from_sode(&gamma.add(&y).unwrap(), &a, &ctx()).unwrap(), t.s.clone());
    }

    #[test]
    fn hat_has_degree_one(a1 in -3i64..3, a2 in 1i64..3) {
        let (_, t, _) = r4();
        let alpha = [&Expr::int(a1) * &p("q1*q2"), &Expr::int(a2) * &p("q2^2 + 1")];
        let h = hat_oneform(&alpha, &t, &ctx()).unwrap();
        prop_assert_eq!(degree(&h, t.delta(), &ctx()).unwrap(), Some(1));
        for f in &t.pls.base {
            prop_assert_eq!(degree(f, t.delta(), &ctx()).unwrap(), Some(0));
        }
    }
}

#[test]
fn vertical_distribution_is_involutive() {
    let c = chart(&["x1", "x2", "x3"]);
    let a = BasicSubalgebra::new(&c, vec![p("f(x1^2+x2^2)*x1 + x3")], &ctx()).unwrap();
    let v = vertical_distribution(&a, &ctx()).unwrap();
    assert_eq!(v.len(), 2);
    for y in &v {
        for z in &v {
            assert!(is_vertical(&lie_bracket(y, z).unwrap(), &a, &ctx()).unwrap());
        }
    }
}
