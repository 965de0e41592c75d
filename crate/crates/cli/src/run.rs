//! Task execution.

use geobundle::bundle::{
    is_sode_algebraic, is_sode_tensorial, vertical_distribution, verify_tangent_structure, BasicSubalgebra,
};
use geobundle::cotangent::{
    hamiltonian_field, hamiltonian_preserves_omega, hamiltonian_residuals, jacobi_residuals,
    alternative_hamiltonian_description, poisson_checks, poisson_from_omega,
    symplectic_form, verify_cotangent_structure, CotangentStructure,
};
use geobundle::geom::lie_derivative_function;
use geobundle::legendre::{
    canonical_dual_theta, fiber_derivative_named, fouling_composition, gauge_translation_residuals,
    default_momentum_names, geodesic_lagrangian, is_hyperregular, round_trip_residuals, shifted_structure,
    theta_g, theta_g_liouville_residuals, transport_theta, LegendreMap, Metric,
};
use geobundle::numcheck::{assess, numeric_rank};
use geobundle::{CheckEntry, Error, Expr, NumericContext, StructureReport, Verdict, VectorField};

use crate::model::Model;
use crate::spec::Kind;

type Ctx = NumericContext<f64>;

fn entry_from(res: &[Expr], ctx: &Ctx) -> geobundle::Result<CheckEntry> {
    Ok(CheckEntry::from_assessment("", "", &assess(res, ctx)?))
}

/// Runs the file's tasks of kind `only` (all when `None`), in task order.
pub fn run_tasks(model: &Model, only: Option<Kind>, ctx: &Ctx) -> StructureReport {
    let ctx = model.context(ctx);
    let mut report = StructureReport::new();
    for (kind, name) in model.spec.tasks() {
        if only.is_some_and(|k| k != kind) {
            continue;
        }
        let part = match kind {
            Kind::Tangent => tangent(model, &name, &ctx),
            Kind::Cotangent => cotangent(model, &name, &ctx),
            Kind::Vertical => vertical(model, &name, &ctx),
            Kind::Sode => sode(model, &name, &ctx),
            Kind::BuildS => build_s(model, &name, &ctx),
            Kind::Legendre => legendre(model, &name, &ctx),
            Kind::Foul => foul(model, &name, &ctx),
            Kind::Hamiltonian => hamiltonian(model, &name, &ctx),
            _ => unreachable!("not a task kind"),
        };
        report.extend(part.prefixed(&name));
    }
    report
}

fn single_error(name: &str, label: &str, e: impl std::fmt::Display) -> StructureReport {
    let mut r = StructureReport::new();
    r.push(CheckEntry::errored(name, label, e));
    r
}

fn tangent(model: &Model, name: &str, ctx: &Ctx) -> StructureReport {
    match model.tangent(name, ctx) {
        Ok(t) => verify_tangent_structure(&t, ctx),
        Err(e) => single_error("construct", "tangent structure", e),
    }
}

fn cotangent(model: &Model, name: &str, ctx: &Ctx) -> StructureReport {
    let sec = model.section(Kind::Cotangent, name);
    let theta = model.form(sec.word("theta").expect("required"));
    let base = match model.exprs(sec, "base") {
        Ok(b) => b,
        Err(e) => return single_error("construct", "cotangent structure", e),
    };
    let fiber = model.exprs(sec, "fiber").unwrap_or_default();
    let delta = sec.word("delta").map(|d| model.field(d).clone());
    let mut report = verify_cotangent_structure(theta, &base, delta.as_ref(), ctx);
    let poisson = CotangentStructure::new(theta.clone(), base, fiber, delta)
        .and_then(|c| poisson_checks(&c, ctx));
    match poisson {
        Ok(p) => report.extend(p.prefixed("poisson")),
        Err(e) => report.push(CheckEntry::errored("poisson", "Lambda = (W^T)^-1", e)),
    }
    report
}

fn vertical(model: &Model, name: &str, ctx: &Ctx) -> StructureReport {
    let sec = model.section(Kind::Vertical, name);
    let chart = model.chart(sec.word("chart").expect("required"));
    let mut report = StructureReport::new();
    let basis = model
        .exprs(sec, "base")
        .map_err(|e| Error::Precondition(e.message))
        .and_then(|base| Ok((BasicSubalgebra::new(chart, base.clone(), ctx)?, base)))
        .and_then(|(a, base)| Ok((vertical_distribution(&a, ctx)?, base)));
    let (basis, base) = match basis {
        Ok(b) => b,
        Err(e) => return single_error("basis", "Y(f) = 0", e),
    };
    report.run("basis", "Y(f) = 0", || -> geobundle::Result<CheckEntry> {
        let res: Vec<Expr> =
            basis.iter().flat_map(|y| base.iter().map(move |f| lie_derivative_function(y, f))).collect();
        let listed: Vec<String> = basis.iter().map(VectorField::to_string).collect();
        Ok(entry_from(&res, ctx)?.with_detail(listed.join("; ")))
    });
    // informational: the basis need not commute, only span an Abelian family
    report.run("abelian", "[Y_i, Y_j] = 0", || -> geobundle::Result<CheckEntry> {
        let mut res = Vec::new();
        for (i, y) in basis.iter().enumerate() {
            for z in &basis[i + 1..] {
                res.extend(geobundle::geom::lie_bracket(y, z)?.comps().iter().cloned());
            }
        }
        let a = assess(&res, ctx)?;
        let detail = if a.verdict.passes(false) { "returned basis commutes" } else { "returned basis does not commute" };
        Ok(CheckEntry::new("", "", Verdict::Pass).with_summary(&a.summary).with_detail(detail))
    });
    for e in sec.words("expect").unwrap_or(&[]) {
        let want = model.field(e);
        report.run(&format!("expect:{e}"), "expected field in the vertical span", || -> geobundle::Result<CheckEntry> {
            let mut rows: Vec<Vec<Expr>> = basis.iter().map(|y| y.comps().to_vec()).collect();
            let r0 = numeric_rank(&rows, ctx)?;
            rows.push(want.comps().to_vec());
            let r1 = numeric_rank(&rows, ctx)?;
            let ok = r0 == r1 && r0.min == r0.max;
            Ok(CheckEntry::new("", "", Verdict::from_bool(ok)).with_detail(format!("rank {} -> {}", r0.max, r1.max)))
        });
    }
    report
}

fn sode(model: &Model, name: &str, ctx: &Ctx) -> StructureReport {
    let sec = model.section(Kind::Sode, name);
    let gamma = model.field(sec.word("field").expect("required"));
    let t = match model.tangent(sec.word("tangent").expect("required"), ctx) {
        Ok(t) => t,
        Err(e) => return single_error("construct", "tangent structure", e),
    };
    let mut report = StructureReport::new();
    let alg = is_sode_algebraic(gamma, &t.pls.subalgebra(), t.delta(), ctx);
    let ten = is_sode_tensorial(gamma, &t, ctx);
    report.run("algebraic", "X(f) degree 1 and {f, X(f)} coframe", || {
        alg.clone().map(|ok| CheckEntry::new("", "", Verdict::from_bool(ok)))
    });
    report.run("tensorial", "S(X) = Delta", || ten.clone().map(|ok| CheckEntry::new("", "", Verdict::from_bool(ok))));
    if let (Ok(a), Ok(b)) = (&alg, &ten) {
        if a != b {
            report.push(CheckEntry::new("agree", "criteria agree", Verdict::Fail).with_detail(format!(
                "algebraic {a}, tensorial {b}"
            )));
        }
    }
    report
}

fn build_s(model: &Model, name: &str, ctx: &Ctx) -> StructureReport {
    let sec = model.section(Kind::BuildS, name);
    let chart = model.chart(sec.word("chart").expect("required"));
    let gamma = model.field(sec.word("sode").expect("required"));
    let built = model
        .exprs(sec, "base")
        .map_err(|e| Error::Precondition(e.message))
        .and_then(|base| {
            let a = BasicSubalgebra::new(chart, base.clone(), ctx)?;
            let s = geobundle::bundle::build_s_from_sode(gamma, &a, ctx)?;
            let delta = geobundle::geom::apply_tensor(&s, gamma)?;
            let fiber = base.iter().map(|f| lie_derivative_function(gamma, f)).collect();
            geobundle::TangentStructure::new(geobundle::PartialLinearStructure::new(delta, base, fiber), s)
        });
    let t = match built {
        Ok(t) => t,
        Err(e) => return single_error("build", "S from the SODE", e),
    };
    let mut report = StructureReport::new();
    report.push(CheckEntry::new("build", "S from the SODE", Verdict::Pass).with_detail(t.s.to_string()));
    if let Some(e) = sec.word("expect") {
        let want = model.tensor(e);
        report.run("expected", "matches the given S", || -> geobundle::Result<CheckEntry> {
            entry_from(&t.s.sub(want)?.entries().cloned().collect::<Vec<_>>(), ctx)
        });
    }
    report.extend(verify_tangent_structure(&t, ctx));
    report
}

fn legendre_map(model: &Model, name: &str, ctx: &Ctx) -> geobundle::Result<(LegendreMap, Expr)> {
    let sec = model.section(Kind::Legendre, name);
    let t = model.tangent(sec.word("tangent").expect("required"), ctx)?;
    let spec_err = |e: crate::spec::SpecError| Error::Precondition(e.message);
    let l = match model.single(sec, "lagrangian").map_err(spec_err)? {
        Some(l) => l,
        None => {
            let rows: Vec<Vec<Expr>> = sec
                .all("metric")
                .map(|v| match v {
                    crate::spec::Value::Exprs(es) => es.clone(),
                    _ => unreachable!("schema"),
                })
                .collect();
            let g = Metric::new(t.pls.base.clone(), rows)?;
            g.validate(false, ctx)?;
            geodesic_lagrangian(&g, &t)?
        }
    };
    let momenta = match sec.words("momenta") {
        Some(m) => m.to_vec(),
        None => default_momentum_names(t.pls.fiber.len()),
    };
    Ok((fiber_derivative_named(&l, &t, &momenta, ctx)?, l))
}

fn legendre(model: &Model, name: &str, ctx: &Ctx) -> StructureReport {
    let sec = model.section(Kind::Legendre, name);
    let (fl, l) = match legendre_map(model, name, ctx) {
        Ok(x) => x,
        Err(e) => return single_error("fiber-derivative", "p = dL/dv", e),
    };
    let t = &fl.tangent;
    let mut report = StructureReport::new();
    report.run("hyperregular", "det d2L/dv2 != 0", || {
        is_hyperregular(&l, t, ctx).map(|ok| CheckEntry::new("", "", Verdict::from_bool(ok)))
    });
    let th = match theta_g(&l, t) {
        Ok(th) => th,
        Err(e) => {
            report.push(CheckEntry::errored("theta-g", "theta^g = S*(dL)", e));
            return report;
        }
    };
    report.run("theta-g-liouville", "i(Delta) d theta^g = theta^g", || -> geobundle::Result<CheckEntry> {
        Ok(entry_from(&theta_g_liouville_residuals(&th, t)?, ctx)?.with_detail(format!("theta^g = {th}")))
    });
    match transport_theta(&fl, &th, ctx) {
        Ok(moved) => {
            let theta = &moved.structure.theta;
            report.run("transported-canonical", "theta = p_k dq^k", || -> geobundle::Result<CheckEntry> {
                let canon = canonical_dual_theta(&fl)?;
                Ok(entry_from(theta.sub(&canon)?.comps(), ctx)?.with_detail(format!("theta = {theta}")))
            });
            report.run("round-trip", "FL* theta = theta^g", || -> geobundle::Result<CheckEntry> {
                entry_from(&round_trip_residuals(&fl, theta, &th)?, ctx)
            });
            report.extend(moved.report.prefixed("cotangent"));
        }
        Err(e) => report.push(CheckEntry::errored("transport", "(FL^-1)* theta^g", e)),
    }
    if let Some(f) = model.single(sec, "gauge").ok().flatten() {
        match shifted_structure(&l, &f, t, ctx) {
            Ok((shifted, moved)) => {
                report.run("gauge:translation", "FL' = (p + dF) o FL", || -> geobundle::Result<CheckEntry> {
                    entry_from(&gauge_translation_residuals(&fl, &shifted, &f)?, ctx)
                });
                report.run("gauge:zero-section", "Delta' = 0 on p = dF", || -> geobundle::Result<CheckEntry> {
                    let Some(d) = moved.structure.delta.as_ref() else {
                        return Err(Error::Precondition("Liouville field not recovered".into()));
                    };
                    let (momenta, base) = (shifted.momenta(), shifted.base());
                    let on: Vec<(&str, Expr)> = momenta
                        .iter()
                        .zip(&base)
                        .map(|(p, q)| (p.as_symbol().expect("coordinate"), f.diff(q.as_symbol().expect("coordinate"))))
                        .collect();
                    let res = d.comps().iter().map(|c| c.subs(on.clone())).collect::<Result<Vec<_>, _>>()?;
                    Ok(entry_from(&res, ctx)?.with_detail(format!("Delta' = {d}")))
                });
                report.extend(moved.report.prefixed("gauge:cotangent"));
            }
            Err(e) => report.push(CheckEntry::errored("gauge", "L + v^i dF/dq^i", e)),
        }
    }
    report
}

fn foul(model: &Model, name: &str, ctx: &Ctx) -> StructureReport {
    let sec = model.section(Kind::Foul, name);
    let maps = legendre_map(model, sec.word("first").expect("required"), ctx)
        .and_then(|a| Ok((a, legendre_map(model, sec.word("second").expect("required"), ctx)?)));
    let ((fl1, _), (fl2, _)) = match maps {
        Ok(m) => m,
        Err(e) => return single_error("construct", "FL2 o FL1^-1", e),
    };
    let mut report = StructureReport::new();
    let foul = match fouling_composition(&fl1, &fl2, ctx) {
        Ok(f) => f,
        Err(e) => return single_error("construct", "FL2 o FL1^-1", e),
    };
    let forward: Vec<String> = foul.map.forward().iter().map(Expr::to_string).collect();
    report.run("fiber-preserving", "base block is the identity", || -> geobundle::Result<CheckEntry> {
        let res: Vec<Expr> =
            fl1.base().iter().map(|q| {
                let i = foul.map.target().index_of(q.as_symbol().expect("coordinate")).expect("same chart");
                &foul.map.forward()[i] - q
            }).collect();
        Ok(entry_from(&res, ctx)?.with_detail(format!("({})", forward.join(", "))))
    });
    let preserved = foul.preserves_theta.verdict.passes(false);
    let observed = if preserved { "preserved" } else { "not preserved" };
    let verdict = match sec.word("expect_preserves") {
        Some(w) => Verdict::from_bool((w == "true") == preserved),
        None => Verdict::Pass,
    };
    report.push(
        CheckEntry::new("preserves-theta", "pullback of p dq", verdict)
            .with_summary(&foul.preserves_theta.summary)
            .with_detail(format!("{observed}: pulled back to {}", foul.pulled_theta)),
    );
    report
}

fn hamiltonian(model: &Model, name: &str, ctx: &Ctx) -> StructureReport {
    let sec = model.section(Kind::Hamiltonian, name);
    let theta = model.form(sec.word("theta").expect("required"));
    let h = match model.single(sec, "h") {
        Ok(Some(h)) => h,
        Ok(None) => unreachable!("required"),
        Err(e) => return single_error("construct", "Gamma^i = Lambda^ij d_j H", e),
    };
    let omega = symplectic_form(theta);
    let built = poisson_from_omega(&omega, ctx).and_then(|l| Ok((hamiltonian_field(&h, &l)?, l)));
    let (gamma, lambda) = match built {
        Ok(x) => x,
        Err(e) => return single_error("field", "Gamma^i = Lambda^ij d_j H", e),
    };
    let mut report = StructureReport::new();
    report.push(CheckEntry::new("field", "Gamma^i = Lambda^ij d_j H", Verdict::Pass).with_detail(gamma.to_string()));
    report.run("hamilton-equation", "i(Gamma) w = dH", || -> geobundle::Result<CheckEntry> {
        entry_from(&hamiltonian_residuals(&gamma, &omega, &h)?, ctx)
    });
    report.run("preserves-omega", "L_Gamma w = 0", || -> geobundle::Result<CheckEntry> {
        entry_from(&hamiltonian_preserves_omega(&gamma, &omega)?, ctx)
    });
    report.run("jacobi", "[Lambda, Lambda] = 0", || -> geobundle::Result<CheckEntry> {
        entry_from(&jacobi_residuals(&lambda), ctx)
    });
    let mut final_field = gamma.clone();
    if let Some(m) = sec.word("map") {
        let phi = model.map(m);
        match alternative_hamiltonian_description(phi, &lambda, &h, ctx) {
            Ok(alt) => {
                report.push(
                    CheckEntry::from_assessment("alternative", "phi_* Gamma from (phi_* Lambda, H o phi^-1)", &alt.agrees)
                        .with_detail(format!("H' = {}; Gamma' = {}", alt.hamiltonian, alt.field)),
                );
                final_field = alt.pushed_field;
            }
            Err(e) => report.push(CheckEntry::errored("alternative", "phi_* Lambda", e)),
        }
    }
    if let Some(e) = sec.word("expect") {
        let want = model.field(e);
        report.run("expected", "matches the given field", || -> geobundle::Result<CheckEntry> {
            entry_from(final_field.sub(want)?.comps(), ctx)
        });
    }
    report
}
