//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the
//! process exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use geobundle::bundle::{is_sode_algebraic, is_sode_tensorial, vertical_distribution, verify_tangent_structure};
use geobundle::cotangent::{
    canonical_theta_dim, jacobi_residuals, liouville_from_theta, poisson_checks, poisson_from_omega,
    symplectic_form, verify_cotangent_structure,
};
use geobundle::geom::fault::{Mutant, Mutation};
use geobundle::geom::{
    apply_tensor, apply_tensor_dual, differential, exterior_derivative, interior_product, lie_bracket,
    lie_derivative_function, lie_derivative_oneform, lie_derivative_tensor11, pushforward, wedge_top_power,
};
use geobundle::legendre::{
    fiber_derivative, geodesic_lagrangian, round_trip_residuals, shifted_structure, theta_g, transport_theta,
};
use geobundle::numcheck::{assess, flow_check_lie_derivative, oracle, LieObject};
use geobundle::symexpr::{RadialInverse, TestFamily};
use geobundle::{
    parse, BasicSubalgebra, Chart, CoordinateMap, Expr, Metric, NumericContext64, OneForm, PartialLinearStructure,
    Tensor11, TangentStructure, VectorField,
};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

type Res<T> = Result<T, Box<dyn std::error::Error>>;

fn p(s: &str) -> Expr {
    parse(s).expect("literal expression")
}

fn radial_ctx() -> NumericContext64 {
    NumericContext64::default().with_opaque("g", Arc::new(RadialInverse::new(Arc::new(TestFamily))))
}

fn ensure(ok: bool, what: &str) -> Res<()> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Res<()> {
    ensure(elapsed < limit, &format!("took {elapsed:?}, limit {limit:?}"))
}

fn criterion1() -> Res<String> {
    let start = Instant::now();
    let ctx = radial_ctx();
    let x = Chart::new("x", &["x1", "x2"])?;
    let q = p("f(x1^2+x2^2)*x1");
    let a = BasicSubalgebra::new(&x, vec![q.clone()], &ctx)?;
    let vert = vertical_distribution(&a, &ctx)?;
    ensure(vert.len() == 1, "vertical distribution has rank 1")?;
    let y = &vert[0];
    ensure(lie_derivative_function(y, &q).is_zero(), "Y(q) is structurally zero")?;
    let want = VectorField::parse(&x, &["-2*x2*x1*f'(x1^2+x2^2)", "2*x1^2*f'(x1^2+x2^2) + f(x1^2+x2^2)"])?;
    let cross = &(y.comp(0) * want.comp(1)) - &(y.comp(1) * want.comp(0));
    ensure(assess(&[cross], &ctx)?.verdict.passes(false), "basis proportional to the expected field")?;
    ensure(!y.is_zero(), "basis field nonzero")?;

    let phi = CoordinateMap::new(
        "phi",
        &x,
        &Chart::new("qv", &["q", "v"])?,
        vec![p("f(x1^2+x2^2)*x1"), p("f(x1^2+x2^2)*x2")],
        Some(vec![p("g(q^2+v^2)*q"), p("g(q^2+v^2)*v")]),
    )?;
    let pushed = pushforward(&phi, &VectorField::parse(&x, &["x2", "-x1"])?)?;
    let target = VectorField::parse(phi.target(), &["v", "-q"])?;
    let res = pushed.sub(&target)?;
    let mut worst = 0.0f64;
    for c in res.comps() {
        let a = assess(std::slice::from_ref(c), &ctx)?;
        ensure(a.verdict.passes(false), "pushforward component vanishes")?;
        ensure(a.summary.points == 25, "25 sample points")?;
        worst = worst.max(a.summary.max_rel);
    }
    ensure(ctx.tolerance == 1e-9 && worst <= 1e-9, "relative residual within 1e-9")?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("max rel residual {worst:.1e}, {elapsed:.2?}"))
}

fn structure(names: [&str; 2]) -> Res<TangentStructure> {
    let c = Chart::new("c", &names)?;
    let delta = VectorField::new(&c, vec![Expr::zero(), Expr::symbol(names[1])])?;
    let pls = PartialLinearStructure::new(delta, vec![Expr::symbol(names[0])], vec![Expr::symbol(names[1])]);
    Ok(TangentStructure::new(pls, Tensor11::elementary(&c, 1, 0))?)
}

fn criterion2() -> Res<String> {
    let start = Instant::now();
    let ctx = NumericContext64::default();
    for names in [["x1", "x2"], ["q", "v"]] {
        let t = structure(names)?;
        let report = verify_tangent_structure(&t, &ctx);
        ensure(report.entries.len() == 7 && report.passes(false), &format!("{names:?}: seven checks pass"))?;
        let gamma = VectorField::new(t.chart(), vec![Expr::symbol(names[1]), -&Expr::symbol(names[0])])?;
        let tensorial = is_sode_tensorial(&gamma, &t, &ctx)?;
        let algebraic = is_sode_algebraic(&gamma, &t.pls.subalgebra(), t.delta(), &ctx)?;
        ensure(tensorial && algebraic, &format!("{names:?}: oscillator is second order by both criteria"))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("2 structures x 7 checks, {elapsed:.2?}"))
}

fn criterion3() -> Res<String> {
    let ctx = NumericContext64::default();
    for (n, fact) in [(1usize, 1i64), (2, 2), (3, 6)] {
        let c = canonical_theta_dim(n)?;
        ensure(verify_cotangent_structure(&c.theta, &c.base, None, &ctx).passes(true), "cotangent checks pass")?;
        ensure(poisson_checks(&c, &ctx)?.passes(true), "Poisson checks pass")?;
        let euler: Vec<Expr> = c
            .chart()
            .coords()
            .iter()
            .map(|s| if s.starts_with('p') { Expr::symbol(s) } else { Expr::zero() })
            .collect();
        let want = VectorField::new(c.chart(), euler)?;
        ensure(liouville_from_theta(&c.theta, &ctx)?.sub(&want)?.is_zero(), "Liouville field recovered exactly")?;
        ensure(wedge_top_power(&c.omega)? == Expr::int(fact), &format!("omega^{n} coefficient {fact}"))?;
    }
    Ok("n = 1, 2, 3".into())
}

fn criterion4() -> Res<String> {
    let ctx = NumericContext64::default();
    let t = TangentStructure::adapted(&["q"], &["v"])?;
    for g in [Metric::identity(vec![p("q")]), Metric::new(vec![p("q")], vec![vec![p("1 + q^2")]])?] {
        let l = geodesic_lagrangian(&g, &t)?;
        let fl = fiber_derivative(&l, &t, &ctx)?;
        let th = theta_g(&l, &t)?;
        let moved = transport_theta(&fl, &th, &ctx)?;
        let canonical = OneForm::parse(fl.dual_chart(), &["p", "0"])?;
        ensure(moved.structure.theta.sub(&canonical)?.is_zero(), &format!("L = {l}: transported form is p dq"))?;
        let rt = round_trip_residuals(&fl, &moved.structure.theta, &th)?;
        ensure(assess(&rt, &ctx)?.verdict.passes(false), "round trip")?;
    }
    let (_, shifted) = shifted_structure(&p("v^2/2"), &p("q^2/2"), &t, &ctx)?;
    let delta = shifted.structure.delta.as_ref().ok_or("no Liouville field")?;
    for c in delta.comps() {
        ensure(c.subs([("p", p("q"))])?.is_zero(), "shifted Liouville field vanishes on p = q")?;
    }
    ensure(!delta.is_zero(), "shifted Liouville field nonzero")?;
    Ok(format!("shifted Delta = {delta}"))
}

fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

fn arb_poly(vars: Vec<String>) -> impl Strategy<Value = Expr> {
    let n = vars.len();
    prop::collection::vec((-3i64..=3, prop::collection::vec(0u8..=2, n)), 1..=3).prop_map(move |terms| {
        terms
            .into_iter()
            .map(|(c, exps)| {
                let mut t = Expr::int(c);
                let mut budget = 2u8;
                for (v, e) in vars.iter().zip(exps) {
                    let e = e.min(budget);
                    budget -= e;
                    t = &t * &Expr::symbol(v).powi(e as i64).unwrap();
                }
                t
            })
            .sum()
    })
}

fn arb_fields() -> impl Strategy<Value = (Chart, Vec<Vec<Expr>>)> {
    (2usize..=3).prop_flat_map(|n| {
        let c = Chart::new("rand", &names(n)).unwrap();
        (Just(c), prop::collection::vec(prop::collection::vec(arb_poly(names(n)), n), 4))
    })
}

fn tangent4() -> Res<(TangentStructure, BasicSubalgebra)> {
    let t = TangentStructure::adapted(&["q1", "q2"], &["v1", "v2"])?;
    let a = t.pls.subalgebra();
    Ok((t, a))
}

fn arb_sode() -> impl Strategy<Value = Vec<Expr>> {
    prop::collection::vec(arb_poly(["q1", "q2", "v1", "v2"].map(String::from).to_vec()), 4)
}

fn sode(f: &[Expr], t: &TangentStructure) -> Res<VectorField> {
    Ok(VectorField::new(t.chart(), vec![p("v1"), p("v2"), f[0].clone(), f[1].clone()])?)
}

/// Draws `n` instances from `s` and counts the ones that fail `check`.
fn suite<S: Strategy>(runner: &mut TestRunner, s: S, n: usize, check: impl Fn(S::Value) -> Res<bool>) -> usize {
    (0..n)
        .filter(|_| {
            let v = s.new_tree(runner).expect("strategy generates").current();
            !matches!(check(v), Ok(true))
        })
        .count()
}

fn criterion5() -> Res<String> {
    let start = Instant::now();
    let ctx = NumericContext64::default();
    let mut runner = TestRunner::new_with_rng(Config::default(), TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let per = 25;
    let mut failures: Vec<(&str, usize)> = Vec::new();

    failures.push(("bracket antisymmetry and Jacobi", suite(&mut runner, arb_fields(), per, |(c, v)| {
        let x = VectorField::new(&c, v[0].clone())?;
        let y = VectorField::new(&c, v[1].clone())?;
        let z = VectorField::new(&c, v[2].clone())?;
        let anti = lie_bracket(&x, &y)?.add(&lie_bracket(&y, &x)?)?;
        let jac = lie_bracket(&x, &lie_bracket(&y, &z)?)?
            .add(&lie_bracket(&y, &lie_bracket(&z, &x)?)?)?
            .add(&lie_bracket(&z, &lie_bracket(&x, &y)?)?)?;
        Ok(anti.is_zero() && jac.is_zero())
    })));

    failures.push(("Cartan formula and flow", suite(&mut runner, arb_fields(), per, |(c, v)| {
        let x = VectorField::new(&c, v[0].clone())?;
        let a = OneForm::new(&c, v[1].clone())?;
        let lhs = lie_derivative_oneform(&x, &a)?;
        let rhs = interior_product(&x, &exterior_derivative(&a))?.add(&differential(&c, &a.contract(&x)?))?;
        let flow = flow_check_lie_derivative(&x, &LieObject::OneForm(a), &LieObject::OneForm(lhs.clone()), &ctx)?;
        Ok(lhs.sub(&rhs)?.is_zero() && flow.pass)
    })));

    failures.push(("d^2 = 0", suite(&mut runner, arb_fields(), per, |(c, v)| {
        Ok(v[0].iter().all(|g| exterior_derivative(&differential(&c, g)).is_zero()))
    })));

    failures.push(("L_X S by brackets", suite(&mut runner, arb_fields(), per, |(c, v)| {
        let x = VectorField::new(&c, v[0].clone())?;
        let y = VectorField::new(&c, v[1].clone())?;
        let s = Tensor11::new(&c, vec![v[2].clone(), v[3].clone(), v[2].iter().rev().cloned().collect()][..c.dim()].to_vec())?;
        let lhs = apply_tensor(&lie_derivative_tensor11(&x, &s)?, &y)?;
        let rhs = lie_bracket(&x, &apply_tensor(&s, &y)?)?.sub(&apply_tensor(&s, &lie_bracket(&x, &y)?)?)?;
        Ok(lhs.sub(&rhs)?.is_zero())
    })));

    let (t, a) = tangent4()?;
    failures.push(("SODE affinity", suite(&mut runner, (arb_sode(), arb_sode()), per, |(f, g)| {
        let (g1, g2) = (sode(&f, &t)?, sode(&g, &t)?);
        let diff = g1.sub(&g2)?;
        let both = is_sode_tensorial(&g1, &t, &ctx)? && is_sode_algebraic(&g1, &a, t.delta(), &ctx)?;
        Ok(both && apply_tensor(&t.s, &diff)?.is_zero())
    })));

    failures.push(("[Delta, Gamma] - Gamma vertical", suite(&mut runner, arb_sode(), per, |f| {
        let g = sode(&f, &t)?;
        let d = lie_bracket(t.delta(), &g)?.sub(&g)?;
        Ok(apply_tensor(&t.s, &d)?.is_zero())
    })));

    failures.push(("S* identities", suite(&mut runner, (arb_sode(), arb_sode()), per, |(f, w)| {
        let g = sode(&f, &t)?;
        let alpha = OneForm::new(t.chart(), w)?;
        let mut ok = apply_tensor_dual(&t.s, &apply_tensor_dual(&t.s, &alpha)?)?.is_zero();
        for q in a.generators() {
            let dq = differential(t.chart(), q);
            ok &= apply_tensor_dual(&t.s, &dq)?.is_zero();
            let lifted = differential(t.chart(), &lie_derivative_function(&g, q));
            ok &= apply_tensor_dual(&t.s, &lifted)?.sub(&dq)?.is_zero();
        }
        Ok(ok)
    })));

    let base = canonical_theta_dim(2)?;
    let qs = ["q1", "q2"].map(String::from).to_vec();
    failures.push(("Lambda Jacobi", suite(&mut runner, arb_poly(qs), per, |f| {
        let theta = OneForm::new(
            base.chart(),
            vec![&p("p1") + &f.diff("q1"), Expr::zero(), &p("p2") + &f.diff("q2"), Expr::zero()],
        )?;
        let lambda = poisson_from_omega(&symplectic_form(&theta), &ctx)?;
        Ok(jacobi_residuals(&lambda).iter().all(Expr::is_zero))
    })));

    let total = failures.len() * per;
    let failed: usize = failures.iter().map(|(_, k)| k).sum();
    let elapsed = start.elapsed();
    let bad: Vec<String> = failures.iter().filter(|(_, k)| *k > 0).map(|(n, k)| format!("{n}: {k}")).collect();
    ensure(failed == 0, &format!("{failed} failures ({})", bad.join("; ")))?;
    ensure(total >= 200, "at least 200 instances")?;
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!("{total} instances, 0 failures, {elapsed:.2?}"))
}

fn criterion6() -> Res<String> {
    let ctx = NumericContext64::default();
    for (name, s) in oracle::mutation_suite(Mutant(Mutation::None), &ctx)? {
        ensure(s.pass, &format!("unmutated {name} passes its oracle"))?;
    }
    let mut missed = Vec::new();
    for m in Mutation::ALL {
        if oracle::mutation_suite(Mutant(m), &ctx)?.iter().all(|(_, s)| s.pass) {
            missed.push(format!("{m:?}"));
        }
    }
    let caught = Mutation::ALL.len() - missed.len();
    ensure(missed.is_empty(), &format!("undetected: {}", missed.join(", ")))?;
    Ok(format!("detected {caught}/{}", Mutation::ALL.len()))
}

fn criterion7() -> Res<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "spec"))
        .collect();
    files.sort();
    let run = || Command::new(env!("CARGO_BIN_EXE_geobundle")).args(["report-all", "--format", "json"]).args(&files).output();
    let (a, b) = (run()?, run()?);
    ensure(a.status.code().is_some_and(|c| c <= 1), "report-all completes")?;
    ensure(!a.stdout.is_empty() && a.stdout == b.stdout, "byte-identical output")?;
    Ok(format!("{} files, {} bytes", files.len(), a.stdout.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Res<String>); 7] = [
        ("vertical basis and pushforward of the oscillator", criterion1),
        ("both tangent structures and the oscillator SODE", criterion2),
        ("canonical cotangent structures", criterion3),
        ("Legendre transport and gauge shift", criterion4),
        ("property suites", criterion5),
        ("planted mutations detected", criterion6),
        ("deterministic JSON reports", criterion7),
    ];
    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(f) {
            Ok(Ok(detail)) => println!("criterion {}: PASS  {title} ({detail})", i + 1),
            Ok(Err(e)) => {
                failed += 1;
                println!("criterion {}: FAIL  {title} ({e})", i + 1);
            }
            Err(_) => {
                failed += 1;
                println!("criterion {}: FAIL  {title} (panicked)", i + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
