use std::sync::Arc;

use super::*;
use crate::geom::fault::{Mutant, Mutation};
use crate::geom::{differential, Chart};
use crate::symexpr::{parse, RadialInverse};

fn p(s: &str) -> Expr {
    parse(s).unwrap()
}

fn grad(chart: &Chart, gens: &[&str]) -> Vec<Vec<Expr>> {
    gens.iter().map(|g| differential(chart, &p(g)).comps().to_vec()).collect()
}

#[test]
fn numeric_rank_examples() {
    let ctx = NumericContext::<f64>::default();
    let qv = Chart::new("qv", &["q", "v"]).unwrap();
    assert_eq!(numeric_rank(&grad(&qv, &["q"]), &ctx).unwrap(), RankRange { min: 1, max: 1 });
    assert_eq!(numeric_rank(&grad(&qv, &["q", "2*q"]), &ctx).unwrap(), RankRange { min: 1, max: 1 });
    let x = Chart::new("x", &["x1", "x2"]).unwrap();
    let rows = grad(&x, &["f(x1^2+x2^2)*x1", "f(x1^2+x2^2)*x2"]);
    assert_eq!(numeric_rank(&rows, &ctx).unwrap(), RankRange { min: 2, max: 2 });
}

#[test]
fn generator_jacobian_is_invertible_at_hand_points() {
    // det of the Jacobian of (f(r) x1, f(r) x2) is f (f + 2 r f')
    let x = Chart::new("x", &["x1", "x2"]).unwrap();
    let rows = grad(&x, &["f(x1^2+x2^2)*x1", "f(x1^2+x2^2)*x2"]);
    for &(a, b) in &[(1.0, 1.0), (-0.5, 0.3), (2.0, -1.5), (0.1, 0.1), (-1.9, -0.2)] {
        let asg = Assignment::new().with("x1", a).with("x2", b).with_function("f", Arc::new(TestFamily));
        let m = DenseMatrix::evaluate(&rows, &asg).unwrap();
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let r: f64 = a * a + b * b;
        let f = 1.0 / (1.0 + r * r) + 2.0;
        let fp = -2.0 * r / (1.0 + r * r).powi(2);
        assert!((det - f * (f + 2.0 * r * fp)).abs() < 1e-12);
        assert!(det.abs() > 1.0);
    }
}

#[test]
fn residual_sweep_examples() {
    let ctx = NumericContext::<f64>::default();
    let s = residual_sweep(&[Expr::zero()], &ctx, 1e-9).unwrap();
    assert!(s.pass && s.max_abs == 0.0);
    let s = residual_sweep(&[p("x1*x2 - x2*x1")], &ctx, 1e-9).unwrap();
    assert!(s.pass);
    let s = residual_sweep(&[p("x1 - 1/1000000*x2")], &ctx, 1e-9).unwrap();
    assert!(!s.pass && s.points == ctx.domain.points);
}

#[test]
fn assess_flags_offending_residual() {
    let ctx = NumericContext::<f64>::default();
    let a = assess(&[Expr::zero(), p("sin(x)^2 + cos(x)^2 - 1"), p("x")], &ctx).unwrap();
    assert_eq!(a.verdict, Verdict::Fail);
    assert_eq!(a.offending, Some(2));
    let a = assess(&[p("sin(x)^2 + cos(x)^2 - 1")], &ctx).unwrap();
    assert_eq!(a.verdict, Verdict::ProbablyZero);
    assert!(a.verdict.passes(false) && !a.verdict.passes(true));
}

#[test]
fn sampling_is_deterministic_in_the_seed() {
    let ctx = NumericContext::<f64>::default();
    let e = [p("x^3*f(y) - y*exp(x)")];
    let a = residual_sweep(&e, &ctx, 1e-9).unwrap();
    let b = residual_sweep(&e, &ctx, 1e-9).unwrap();
    assert_eq!(a.max_abs.to_bits(), b.max_abs.to_bits());
    let c = residual_sweep(&e, &ctx.clone().with_seed(7), 1e-9).unwrap();
    assert_ne!(a.max_abs.to_bits(), c.max_abs.to_bits());
}

#[test]
fn default_domain_avoids_zero() {
    let ctx = NumericContext::<f64>::default();
    let syms = [Arc::from("a"), Arc::from("b")].into_iter().collect();
    for i in 0..200 {
        let asg = ctx.assignment(&syms, &Default::default(), i);
        for v in asg.values.values() {
            assert!((0.1..=2.0).contains(&v.abs()), "{v}");
        }
    }
}

#[test]
fn radial_inverse_realizes_radial_inverse_map() {
    let ctx = NumericContext::<f64>::default().with_opaque("g", Arc::new(RadialInverse::new(Arc::new(TestFamily))));
    // x1 = g(q^2+v^2) q composed with q = f(r) x1 returns x1
    let r = p("g(f(x1^2+x2^2)^2*x1^2 + f(x1^2+x2^2)^2*x2^2)*f(x1^2+x2^2)*x1 - x1");
    let a = assess(&[r], &ctx).unwrap();
    assert_eq!(a.verdict, Verdict::ProbablyZero, "{a:?}");
}

#[test]
fn mutation_suite_is_clean_without_mutation_and_catches_each_fault() {
    let ctx = NumericContext::<f64>::default();
    for (name, s) in oracle::mutation_suite(Mutant(Mutation::None), &ctx).unwrap() {
        assert!(s.pass, "{name}: {s:?}");
    }
    for m in Mutation::ALL {
        let caught = oracle::mutation_suite(Mutant(m), &ctx).unwrap().iter().filter(|(_, s)| !s.pass).count();
        assert!(caught >= 1, "{m:?} undetected");
    }
}

#[test]
fn single_precision_oracle() {
    let ctx = NumericContext::<f32>::default();
    let x = Chart::new("x", &["x1", "x2"]).unwrap();
    let rows = grad(&x, &["f(x1^2+x2^2)*x1", "f(x1^2+x2^2)*x2"]);
    assert_eq!(numeric_rank(&rows, &ctx).unwrap(), RankRange { min: 2, max: 2 });
    for (name, s) in oracle::mutation_suite(Mutant(Mutation::None), &ctx).unwrap() {
        assert!(s.pass, "{name}: {s:?}");
    }
}
