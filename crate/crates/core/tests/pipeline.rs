use std::sync::Arc;

use geobundle::bundle::{
    build_s_from_sode, is_sode_algebraic, is_sode_tensorial, vertical_distribution, verify_tangent_structure,
};
use geobundle::cotangent::{
    alternative_hamiltonian_description, canonical_theta_dim, hamiltonian_field, liouville_from_theta,
    poisson_from_omega, verify_cotangent_structure,
};
use geobundle::geom::{lie_derivative_function, pushforward, wedge_top_power};
use geobundle::legendre::{fiber_derivative, geodesic_lagrangian, theta_g, transport_theta};
use geobundle::numcheck::assess;
use geobundle::symexpr::{RadialInverse, TestFamily};
use geobundle::{
    parse, BasicSubalgebra, Chart, CoordinateMap, Expr, Metric, NumericContext32, NumericContext64,
    OneForm, PartialLinearStructure, Tensor11, TangentStructure, VectorField,
};

fn p(s: &str) -> Expr {
    parse(s).unwrap()
}

fn ctx() -> NumericContext64 {
    NumericContext64::default().with_opaque("g", Arc::new(RadialInverse::new(Arc::new(TestFamily))))
}

fn phi() -> CoordinateMap {
    let x = Chart::new("x", &["x1", "x2"]).unwrap();
    let qv = Chart::new("qv", &["q", "v"]).unwrap();
    CoordinateMap::new(
        "phi",
        &x,
        &qv,
        vec![p("f(x1^2+x2^2)*x1"), p("f(x1^2+x2^2)*x2")],
        Some(vec![p("g(q^2+v^2)*q"), p("g(q^2+v^2)*v")]),
    )
    .unwrap()
}

#[test]
fn oscillator_from_generator_to_second_order_field() {
    let ctx = ctx();
    let x = Chart::new("x", &["x1", "x2"]).unwrap();
    let q = p("f(x1^2+x2^2)*x1");
    let a = BasicSubalgebra::new(&x, vec![q.clone()], &ctx).unwrap();
    let vert = vertical_distribution(&a, &ctx).unwrap();
    assert_eq!(vert.len(), 1);
    assert!(lie_derivative_function(&vert[0], &q).is_zero());

    let gamma = VectorField::parse(&x, &["x2", "-x1"]).unwrap();
    let s = build_s_from_sode(&gamma, &a, &ctx).unwrap();
    let delta = geobundle::geom::apply_tensor(&s, &gamma).unwrap();
    let fiber = lie_derivative_function(&gamma, &q);
    let t = TangentStructure::new(PartialLinearStructure::new(delta, vec![q], vec![fiber]), s).unwrap();
    let report = verify_tangent_structure(&t, &ctx);
    assert!(report.passes(false), "{report:?}");
    assert!(is_sode_tensorial(&gamma, &t, &ctx).unwrap());
    assert!(is_sode_algebraic(&gamma, &a, t.delta(), &ctx).unwrap());

    let pushed = pushforward(&phi(), &gamma).unwrap();
    let want = VectorField::parse(phi().target(), &["v", "-q"]).unwrap();
    assert!(assess(pushed.sub(&want).unwrap().comps(), &ctx).unwrap().verdict.passes(false));
}

#[test]
fn oscillator_hamiltonian_transported_by_phi() {
    let ctx = ctx();
    let x = Chart::new("x", &["x1", "x2"]).unwrap();
    let theta = OneForm::parse(&x, &["x2", "0"]).unwrap();
    let omega = geobundle::cotangent::symplectic_form(&theta);
    let lambda = poisson_from_omega(&omega, &ctx).unwrap();
    let h = p("(x1^2+x2^2)/2");
    assert_eq!(hamiltonian_field(&h, &lambda).unwrap(), VectorField::parse(&x, &["x2", "-x1"]).unwrap());
    let alt = alternative_hamiltonian_description(&phi(), &lambda, &h, &ctx).unwrap();
    assert!(alt.agrees.verdict.passes(false), "{:?}", alt.agrees);
    let want = VectorField::parse(phi().target(), &["v", "-q"]).unwrap();
    assert!(assess(alt.pushed_field.sub(&want).unwrap().comps(), &ctx).unwrap().verdict.passes(false));
}

#[test]
fn canonical_structures_in_several_dimensions() {
    let ctx = NumericContext64::default();
    for (n, fact) in [(1, 1), (2, 2), (3, 6), (4, 24)] {
        let c = canonical_theta_dim(n).unwrap();
        assert_eq!(wedge_top_power(&c.omega).unwrap(), Expr::int(fact));
        assert!(verify_cotangent_structure(&c.theta, &c.base, None, &ctx).passes(true));
        assert_eq!(&liouville_from_theta(&c.theta, &ctx).unwrap(), c.delta.as_ref().unwrap());
    }
}

#[test]
fn curved_metric_transports_to_canonical_form() {
    let ctx = NumericContext64::default();
    let t = TangentStructure::adapted(&["q"], &["v"]).unwrap();
    let g = Metric::new(vec![p("q")], vec![vec![p("1 + q^2")]]).unwrap();
    let l = geodesic_lagrangian(&g, &t).unwrap();
    let fl = fiber_derivative(&l, &t, &ctx).unwrap();
    let moved = transport_theta(&fl, &theta_g(&l, &t).unwrap(), &ctx).unwrap();
    let want = OneForm::parse(fl.dual_chart(), &["p", "0"]).unwrap();
    assert!(moved.structure.theta.sub(&want).unwrap().is_zero());
    assert!(moved.report.passes(false));
}

#[test]
fn single_precision_context_agrees_on_worked_example() {
    let ctx = NumericContext32::default().with_opaque("g", Arc::new(RadialInverse::new(Arc::new(TestFamily))));
    let x = Chart::new("x", &["x1", "x2"]).unwrap();
    let pushed = pushforward(&phi(), &VectorField::parse(&x, &["x2", "-x1"]).unwrap()).unwrap();
    let want = VectorField::parse(phi().target(), &["v", "-q"]).unwrap();
    let ctx = NumericContext32 { tolerance: 1e-4, ..ctx };
    assert!(assess(pushed.sub(&want).unwrap().comps(), &ctx).unwrap().verdict.passes(false));
    let qv = Chart::new("qv", &["q", "v"]).unwrap();
    assert!(Tensor11::elementary(&qv, 1, 0).compose(&Tensor11::elementary(&qv, 1, 0)).unwrap().is_zero());
}
