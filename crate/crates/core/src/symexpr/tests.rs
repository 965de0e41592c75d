use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::numcheck::NumericContext;

fn p(s: &str) -> Expr {
    parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn family() -> Arc<dyn UnaryFunction<f64>> {
    Arc::new(TestFamily)
}

#[test]
fn parse_examples() {
    assert_eq!(p("x1^2 + x2^2"), &Expr::symbol("x1").powi(2).unwrap() + &Expr::symbol("x2").powi(2).unwrap());
    let u = p("x1^2+x2^2");
    assert_eq!(p("f(x1^2+x2^2)*x1"), &Expr::opaque("f", 0, u) * &Expr::symbol("x1"));
    assert_eq!(p("0*x1 + 1"), Expr::one());
    assert_eq!(p("f''(x)"), Expr::opaque("f", 2, Expr::symbol("x")));
    assert_eq!(p("7/2"), Expr::frac(7, 2));
}

#[test]
fn diff_examples() {
    assert_eq!(p("x1^2").diff("x1"), p("2*x1"));
    assert_eq!(p("f(x1^2+x2^2)*x1").diff("x1"), p("2*x1^2*f'(x1^2+x2^2) + f(x1^2+x2^2)"));
    assert_eq!(p("f(x1^2+x2^2)*x2").diff("x1"), p("2*x1*x2*f'(x1^2+x2^2)"));
    assert_eq!(p("sin(x)*exp(x)").diff("x"), p("cos(x)*exp(x) + sin(x)*exp(x)"));
    assert_eq!(p("log(x)").diff("x"), p("1/x"));
    assert_eq!(p("1/(1+x^2)").diff("x"), p("-2*x*(1+x^2)^(-2)"));
}

#[test]
fn substitute_examples() {
    assert_eq!(p("q*v").subs([("q", p("x1")), ("v", p("x2"))]).unwrap(), p("x1*x2"));
    let q = p("f(x1^2+x2^2)*x1");
    assert_eq!(p("q").subs([("q", q.clone())]).unwrap(), q);
    assert_eq!(p("x+y").subs([("x", p("y")), ("y", p("x"))]).unwrap(), p("x+y"));
    let mut b = BTreeMap::new();
    b.insert("x".to_string(), p("y^2"));
    assert_eq!(p("sin(x)*f'(x+1)").substitute(&b).unwrap(), p("sin(y^2)*f'(y^2+1)"));
}

#[test]
fn is_zero_examples() {
    let ctx = NumericContext::<f64>::default();
    let z = is_zero(&p("x1*x2 - x2*x1"), 25, 1e-9, &ctx).unwrap();
    assert_eq!(z.verdict, ZeroVerdict::Zero);
    let e = p("(2*x1^2*f'(x1^2+x2^2)+f(x1^2+x2^2))*(2*x2*x1*f'(x1^2+x2^2)) \
               - (2*x2*x1*f'(x1^2+x2^2))*(2*x1^2*f'(x1^2+x2^2)+f(x1^2+x2^2))");
    assert_eq!(is_zero(&e, 25, 1e-9, &ctx).unwrap().verdict, ZeroVerdict::Zero);
    let e = p("2*x1^2*f'(x1^2+x2^2) + f(x1^2+x2^2)");
    assert_eq!(is_zero(&e, 25, 1e-9, &ctx).unwrap().verdict, ZeroVerdict::Nonzero);
    // at (1,1): u = 2, f(2) = 1/5 + 2, f'(2) = -4/25
    let asg = Assignment::new().with("x1", 1.0).with("x2", 1.0).with_function("f", family());
    let v = eval_numeric(&e, &asg).unwrap();
    assert!((v - (2.0 * -0.16 + 2.2)).abs() < 1e-12, "{v}");
}

#[test]
fn undecided_for_identity_hidden_from_normal_form() {
    let ctx = NumericContext::<f64>::default();
    let e = p("sin(x)^2 + cos(x)^2 - 1");
    assert!(!e.is_zero());
    let r = is_zero(&e, 25, 1e-9, &ctx).unwrap();
    assert_eq!(r.verdict, ZeroVerdict::Undecided);
    assert!(r.verdict.is_probably_zero());
}

#[test]
fn sampling_budget_on_empty_domain() {
    let ctx = NumericContext::<f64>::default();
    let err = is_zero(&p("log(-x^2)"), 5, 1e-9, &ctx).unwrap_err();
    assert!(matches!(err, ExprError::SamplingBudget { attempts: 50, .. }), "{err:?}");
}

#[test]
fn eval_examples() {
    let asg = Assignment::new().with("x1", 3.0).with("x2", 4.0);
    assert_eq!(eval_numeric(&p("x1^2+x2^2"), &asg).unwrap(), 25.0);
    let asg = Assignment::new().with("x1", 1.0).with("x2", 0.0).with_function("f", family());
    assert_eq!(eval_numeric(&p("f(x1^2+x2^2)*x1"), &asg).unwrap(), 2.5);
    assert_eq!(eval_numeric(&p("7/2"), &Assignment::<f64>::new()).unwrap(), 3.5);
    assert!(matches!(eval_numeric(&p("y"), &Assignment::<f64>::new()), Err(ExprError::Uncovered(_))));
}

#[test]
fn cancellation_keeps_normal_form_small() {
    assert_eq!(p("(x*(1+y^2))/(1+y^2)"), p("x"));
    assert_eq!(p("(x^2 - 1)/(x - 1)"), p("x + 1"));
    assert_eq!(p("1/(2+2*x)"), p("1/2 * 1/(1+x)"));
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["x", "y", "z"]).prop_map(Expr::symbol),
        (-3i64..=3).prop_map(Expr::int),
        (1i64..=3, 2i64..=4).prop_map(|(a, b)| Expr::frac(a, b)),
    ];
    leaf.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| a.powi(2).unwrap()),
            inner.clone().prop_map(Expr::sin),
            inner.clone().prop_map(Expr::cos),
            inner.clone().prop_map(|a| Expr::opaque("f", 0, a)),
            inner.clone().prop_map(|a| (Expr::one() + &a * &a).recip().unwrap()),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_parse_round_trip(e in arb_expr()) {
        let text = e.to_string();
        let back = parse(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(&back, &e, "{}", text);
        prop_assert_eq!(parse(&back.to_string()).unwrap(), back);
    }

    #[test]
    fn normalization_idempotent(e in arb_expr()) {
        prop_assert_eq!(&(&e + &Expr::zero()), &e);
        prop_assert_eq!(&(&e * &Expr::one()), &e);
        prop_assert_eq!(e.subs([("w", Expr::symbol("w"))]).unwrap(), e);
    }

    #[test]
    fn diff_is_linear(a in arb_expr(), b in arb_expr(), c1 in -5i64..5, c2 in 1i64..5) {
        let (ka, kb) = (Expr::int(c1), Expr::frac(1, c2));
        let lhs = (&ka * &a + &kb * &b).diff("x");
        let rhs = &ka * &a.diff("x") + &kb * &b.diff("x");
        prop_assert!((&lhs - &rhs).is_zero());
    }

    #[test]
    fn diff_obeys_leibniz(a in arb_expr(), b in arb_expr()) {
        let ctx = NumericContext::<f64>::default();
        let r = (&a * &b).diff("x") - &a * &b.diff("x") - &a.diff("x") * &b;
        let z = is_zero(&r, 25, 1e-9, &ctx).unwrap();
        prop_assert!(z.verdict.is_probably_zero(), "{:?}", z);
    }

    #[test]
    fn diff_matches_finite_difference(e in arb_expr(), x in 0.1f64..2.0, y in -2.0f64..2.0, z in 0.1f64..2.0) {
        let h = 1e-5;
        let asg = |xv: f64| Assignment::new().with("x", xv).with("y", y).with("z", z).with_function("f", family());
        let d = eval_numeric(&e.diff("x"), &asg(x)).unwrap();
        let fd = (eval_numeric(&e, &asg(x + h)).unwrap() - eval_numeric(&e, &asg(x - h)).unwrap()) / (2.0 * h);
        // the central difference itself carries O(h^2 f''') and eps/h errors
        let (_, scale) = eval_with_scale(&e.diff("x"), &asg(x)).unwrap();
        prop_assert!((d - fd).abs() <= 1e-6 * (1.0 + d.abs() + scale), "{} vs {} for {}", d, fd, e);
    }
}

#[test]
fn evaluation_in_single_precision() {
    let asg = Assignment::<f32>::new().with("x1", 1.0).with("x2", 0.0).with_function("f", Arc::new(TestFamily));
    let v: f32 = eval_numeric(&p("f(x1^2+x2^2)*x1"), &asg).unwrap();
    assert!((v - 2.5).abs() < 1e-6);
}
