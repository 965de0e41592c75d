//! Cotangent-side structures: Liouville one-forms, symplectic forms,
//! Poisson bivectors and Hamiltonian vector fields.
//!
//! Sign conventions: `w = -d theta`, `Lambda = (W^T)^-1` for the full
//! component matrix `W` of `w`, `Gamma^i = Lambda^ij d_j H`, so that
//! `i_Gamma w = dH` and `H = (q^2 + p^2)/2` gives `p d/dq - q d/dp`.

use crate::bundle::{vertical_distribution, BasicSubalgebra};
use crate::error::{Error, Result};
use crate::geom::linalg::{self, pivot_ok};
use crate::geom::{
    differential, exterior_derivative, interior_product, lie_derivative_function, lie_derivative_oneform,
    lie_derivative_twoform, pushforward, pushforward_bivector, wedge_top_power, Antisymmetric, Bivector, Chart,
    CoordinateMap, OneForm, TwoForm, VectorField,
};
use crate::numcheck::{assess, Assessment, NumericContext, ResidualSummary, Verdict};
use crate::report::{CheckEntry, StructureReport};
use crate::scalar::Scalar;
use crate::symexpr::{eval_with_scale, Expr};

pub const OMEGA_SIGN: &str = "omega = -d(theta)";
pub const HAMILTONIAN_SIGN: &str = "i(Gamma) omega = dH, Gamma^i = Lambda^ij d_j H";

/// `w = -d theta`.
pub fn symplectic_form(theta: &OneForm) -> TwoForm {
    let d = exterior_derivative(theta);
    TwoForm(d.0.scale(&Expr::int(-1)))
}

/// A one-form `theta` over a chart with declared base generators and,
/// when known, fiber generators and Liouville field.
#[derive(Clone, Debug, PartialEq)]
pub struct CotangentStructure {
    pub theta: OneForm,
    pub omega: TwoForm,
    pub base: Vec<Expr>,
    /// Momentum generators `p_i`; empty when not declared.
    pub fiber: Vec<Expr>,
    pub delta: Option<VectorField>,
}

impl CotangentStructure {
    pub fn new(theta: OneForm, base: Vec<Expr>, fiber: Vec<Expr>, delta: Option<VectorField>) -> Result<Self> {
        if let Some(d) = &delta {
            d.chart().ensure_same(theta.chart())?;
        }
        let omega = symplectic_form(&theta);
        Ok(CotangentStructure { theta, omega, base, fiber, delta })
    }

    pub fn chart(&self) -> &Chart {
        self.theta.chart()
    }
}

/// Interleaved chart `(q1, p1, q2, p2, ...)` with `theta = p_i dq^i`,
/// `w = dq^i ^ dp_i` and `Delta = p_i d/dp_i`. With this ordering the
/// top power of `w` is `+n!`.
pub fn canonical_theta<S: AsRef<str>>(q: &[S], p: &[S]) -> Result<CotangentStructure> {
    if q.len() != p.len() {
        return Err(Error::OddDimension(q.len() + p.len()));
    }
    let names: Vec<&str> = q.iter().zip(p).flat_map(|(a, b)| [a.as_ref(), b.as_ref()]).collect();
    let chart = Chart::new("canonical", &names)?;
    let n = q.len();
    let mut theta = vec![Expr::zero(); 2 * n];
    let mut delta = vec![Expr::zero(); 2 * n];
    for i in 0..n {
        theta[2 * i] = chart.coord(2 * i + 1);
        delta[2 * i + 1] = chart.coord(2 * i + 1);
    }
    let base = (0..n).map(|i| chart.coord(2 * i)).collect();
    let fiber = (0..n).map(|i| chart.coord(2 * i + 1)).collect();
    CotangentStructure::new(
        OneForm::new(&chart, theta)?,
        base,
        fiber,
        Some(VectorField::new(&chart, delta)?),
    )
}

/// Canonical structure on `R^2n` with names `q1.., p1..` (or `q, p` for
/// `n = 1`).
pub fn canonical_theta_dim(n: usize) -> Result<CotangentStructure> {
    let (q, p): (Vec<String>, Vec<String>) = if n == 1 {
        (vec!["q".into()], vec!["p".into()])
    } else {
        (1..=n).map(|i| (format!("q{i}"), format!("p{i}"))).unzip()
    };
    canonical_theta(&q, &p)
}

fn full_matrix(a: &Antisymmetric) -> Vec<Vec<Expr>> {
    a.full()
}

/// The `Delta` with `i_Delta w = -theta`, solved from `W Delta = theta`.
pub fn liouville_from_theta<T: Scalar>(theta: &OneForm, ctx: &NumericContext<T>) -> Result<VectorField> {
    let chart = theta.chart();
    let omega = symplectic_form(theta);
    let w = full_matrix(&omega.0);
    let rhs: Vec<Vec<Expr>> = theta.comps().iter().map(|c| vec![c.clone()]).collect();
    let sol = linalg::solve(&w, &rhs, ctx).map_err(|e| match e {
        Error::RankDeficient(m) => Error::RankDeficient(format!("-d(theta) is degenerate: {m}")),
        other => other,
    })?;
    let delta = VectorField::new(chart, sol.into_iter().map(|mut r| r.remove(0)).collect())?;
    let check = interior_product(&delta, &omega)?.add(theta)?;
    if !assess(check.comps(), ctx)?.verdict.passes(false) {
        return Err(Error::PivotUndecidable("recovered Liouville field fails i(Delta) w = -theta".into()));
    }
    Ok(delta)
}

/// `Lambda = (W^T)^-1`.
pub fn poisson_from_omega<T: Scalar>(omega: &TwoForm, ctx: &NumericContext<T>) -> Result<Bivector> {
    let w = full_matrix(&omega.0);
    let inv = linalg::inverse(&linalg::transpose(&w), ctx)?;
    Ok(Bivector(Antisymmetric::from_full(omega.chart(), &inv)?))
}

/// Residuals of `Lambda W^T - I`.
pub fn poisson_inverse_residuals(lambda: &Bivector, omega: &TwoForm) -> Vec<Expr> {
    let prod = linalg::matmul(&lambda.0.full(), &linalg::transpose(&omega.0.full()));
    let mut out = Vec::new();
    for (i, r) in prod.into_iter().enumerate() {
        for (j, e) in r.into_iter().enumerate() {
            out.push(if i == j { &e - &Expr::one() } else { e });
        }
    }
    out
}

/// `Gamma^i = Lambda^ij d_j H`.
pub fn hamiltonian_field(h: &Expr, lambda: &Bivector) -> Result<VectorField> {
    let chart = lambda.chart();
    let dh = differential(chart, h);
    let n = chart.dim();
    let comps = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| &lambda.get(i, j) * dh.comp(j)).sum())
        .collect();
    VectorField::new(chart, comps)
}

/// Residuals of `i_Gamma w - dH`.
pub fn hamiltonian_residuals(gamma: &VectorField, omega: &TwoForm, h: &Expr) -> Result<Vec<Expr>> {
    let lhs = interior_product(gamma, omega)?;
    Ok(lhs.sub(&differential(gamma.chart(), h))?.comps().to_vec())
}

/// Residuals `sum_m Lambda^im d_m Lambda^jk + cyclic` for `i < j < k`.
pub fn jacobi_residuals(lambda: &Bivector) -> Vec<Expr> {
    let chart = lambda.chart();
    let n = chart.dim();
    let term = |i: usize, j: usize, k: usize| -> Expr {
        (0..n)
            .map(|m| &lambda.get(i, m) * &lambda.get(j, k).diff(&chart.coords()[m]))
            .sum()
    };
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                out.push(&(&term(i, j, k) + &term(j, k, i)) + &term(k, i, j));
            }
        }
    }
    out
}

/// `{f, g} = Lambda(df, dg)`.
pub fn poisson_bracket(lambda: &Bivector, f: &Expr, g: &Expr) -> Result<Expr> {
    let chart = lambda.chart();
    lambda.eval(&differential(chart, f), &differential(chart, g))
}

/// Pushed-forward Hamiltonian data and how it compares with the pushed
/// dynamics.
#[derive(Clone, Debug)]
pub struct AlternativeDescription<T> {
    pub lambda: Bivector,
    pub hamiltonian: Expr,
    /// `hamiltonian_field(H', Lambda')`.
    pub field: VectorField,
    /// `phi_* hamiltonian_field(H, Lambda)`.
    pub pushed_field: VectorField,
    pub agrees: Assessment<T>,
    /// For maps of a chart onto itself: whether the new field equals the
    /// original one.
    pub preserves: Option<Assessment<T>>,
}

/// `Lambda' = phi_* Lambda`, `H' = H o phi^-1`, compared against
/// `phi_* Gamma`.
pub fn alternative_hamiltonian_description<T: Scalar>(
    phi: &CoordinateMap,
    lambda: &Bivector,
    h: &Expr,
    ctx: &NumericContext<T>,
) -> Result<AlternativeDescription<T>> {
    let gamma = hamiltonian_field(h, lambda)?;
    let lambda2 = pushforward_bivector(phi, lambda)?;
    let h2 = phi.in_target(h)?;
    let field = hamiltonian_field(&h2, &lambda2)?;
    let pushed_field = pushforward(phi, &gamma)?;
    let agrees = assess(field.sub(&pushed_field)?.comps(), ctx)?;
    let preserves = if phi.source() == phi.target() {
        Some(assess(field.sub(&gamma)?.comps(), ctx)?)
    } else {
        None
    };
    Ok(AlternativeDescription { lambda: lambda2, hamiltonian: h2, field, pushed_field, agrees, preserves })
}

fn ensure_basic<T: Scalar>(fs: &[Expr], c: &CotangentStructure, ctx: &NumericContext<T>) -> Result<()> {
    let a = BasicSubalgebra::new_unchecked(c.chart(), c.base.clone());
    let res: Vec<Expr> = vertical_distribution(&a, ctx)?
        .iter()
        .flat_map(|y| fs.iter().map(move |f| lie_derivative_function(y, f)))
        .collect();
    if assess(&res, ctx)?.verdict.passes(false) {
        Ok(())
    } else {
        Err(Error::NotBasic(fs.iter().map(Expr::to_string).collect::<Vec<_>>().join(", ")))
    }
}

/// `X^ = p_i X^i` for a base field with components `X^i` along the base
/// generators.
pub fn hat_vectorfield<T: Scalar>(x: &[Expr], c: &CotangentStructure, ctx: &NumericContext<T>) -> Result<Expr> {
    if c.fiber.is_empty() {
        return Err(Error::Precondition("structure has no declared momentum generators".into()));
    }
    if x.len() != c.fiber.len() {
        return Err(Error::Dimension { expected: c.fiber.len(), got: x.len() });
    }
    ensure_basic(x, c, ctx)?;
    Ok(c.fiber.iter().zip(x).map(|(p, xi)| p * xi).sum())
}

/// `e` is nonzero at every sample point (structurally when constant).
pub fn nowhere_zero<T: Scalar>(e: &Expr, ctx: &NumericContext<T>) -> Result<(bool, ResidualSummary<T>)> {
    if let Some(r) = e.as_rational() {
        return Ok((r != num_traits::Zero::zero(), ResidualSummary::exact()));
    }
    let (syms, ops) = NumericContext::<T>::support([e]);
    let vals = ctx.sample_points(&syms, &ops, ctx.domain.points, |asg| eval_with_scale(e, asg))?;
    let ok = vals.iter().all(|&(v, s)| v.abs() > ctx.tolerance * (T::one() + s));
    let min = vals.iter().fold(T::infinity(), |m, &(v, _)| m.min(v.abs()));
    let summary = ResidualSummary { max_abs: min, max_rel: min, points: vals.len(), pass: ok };
    Ok((ok, summary))
}

/// Check labels of [`verify_cotangent_structure`], in order.
pub const COTANGENT_CHECKS: [(&str, &str); 6] = [
    ("a:semibasic", "theta annihilates vertical fields"),
    ("b:nondegenerate", "omega^n != 0"),
    ("c:closed", "d omega = 0"),
    ("d:lagrangian", "vertical distribution Lagrangian"),
    ("e:liouville", "i(Delta) d theta = theta"),
    ("f:kernel", "theta(Delta) = 0"),
];

/// The six cotangent axioms. When no `Delta` is supplied it is recovered
/// with [`liouville_from_theta`].
pub fn verify_cotangent_structure<T: Scalar>(
    theta: &OneForm,
    base: &[Expr],
    delta: Option<&VectorField>,
    ctx: &NumericContext<T>,
) -> StructureReport {
    let mut report = StructureReport::new();
    let chart = theta.chart();
    let dim = chart.dim();
    let omega = symplectic_form(theta);
    let sub = BasicSubalgebra::new_unchecked(chart, base.to_vec());
    let vertical = vertical_distribution(&sub, ctx);
    let [a, b, c, d, e, f] = COTANGENT_CHECKS;

    report.run(a.0, a.1, || -> Result<CheckEntry> {
        let ys = vertical.clone()?;
        let res = ys.iter().map(|y| theta.contract(y)).collect::<Result<Vec<_>>>()?;
        Ok(CheckEntry::from_assessment("", "", &assess(&res, ctx)?))
    });
    report.run(b.0, b.1, || -> Result<CheckEntry> {
        if dim % 2 != 0 {
            return Err(Error::OddDimension(dim));
        }
        let top = wedge_top_power(&omega)?;
        let (ok, summary) = nowhere_zero(&top, ctx)?;
        Ok(CheckEntry::new("", "", Verdict::from_bool(ok)).with_summary(&summary).with_detail(format!("omega^n coefficient {top}")))
    });
    report.run(c.0, c.1, || -> Result<CheckEntry, Error> {
        Ok(CheckEntry::new("", "", Verdict::Pass).with_detail("omega = -d(theta) is exact"))
    });
    report.run(d.0, d.1, || -> Result<CheckEntry> {
        let ys = vertical.clone()?;
        if 2 * ys.len() != dim {
            return Ok(CheckEntry::new("", "", Verdict::Fail)
                .with_detail(format!("vertical distribution has rank {} on dimension {dim}", ys.len())));
        }
        let mut res = Vec::new();
        for (i, y) in ys.iter().enumerate() {
            for z in &ys[i + 1..] {
                res.push(omega.eval(y, z)?);
            }
        }
        Ok(CheckEntry::from_assessment("", "", &assess(&res, ctx)?))
    });
    let supplied = delta.is_some();
    let recovered;
    let delta = match delta {
        Some(d) => Ok(d),
        None => {
            recovered = liouville_from_theta(theta, ctx);
            recovered.as_ref().map_err(Clone::clone)
        }
    };
    report.run(e.0, e.1, || -> Result<CheckEntry> {
        let dl = delta.clone()?;
        let dtheta = exterior_derivative(theta);
        let mut res = interior_product(dl, &dtheta)?.sub(theta)?.comps().to_vec();
        res.extend(lie_derivative_oneform(dl, theta)?.sub(theta)?.comps().iter().cloned());
        res.extend(lie_derivative_twoform(dl, &omega)?.sub(&omega)?.0.upper().iter().cloned());
        let entry = CheckEntry::from_assessment("", "", &assess(&res, ctx)?);
        Ok(if supplied { entry } else { entry.with_detail(format!("Delta recovered from theta: {dl}")) })
    });
    report.run(f.0, f.1, || -> Result<CheckEntry> {
        let dl = delta.clone()?;
        Ok(CheckEntry::from_assessment("", "", &assess(&[theta.contract(dl)?], ctx)?))
    });
    report
}

/// Residuals of the Poisson-side identities for a structure: `Lambda`
/// inverts `w`, Jacobi, and base functions commute.
pub fn poisson_checks<T: Scalar>(c: &CotangentStructure, ctx: &NumericContext<T>) -> Result<StructureReport> {
    let lambda = poisson_from_omega(&c.omega, ctx)?;
    let mut report = StructureReport::new();
    report.run("inverse", "Lambda W^T = I", || -> Result<CheckEntry> {
        Ok(CheckEntry::from_assessment("", "", &assess(&poisson_inverse_residuals(&lambda, &c.omega), ctx)?))
    });
    report.run("jacobi", "[Lambda, Lambda] = 0", || -> Result<CheckEntry> {
        Ok(CheckEntry::from_assessment("", "", &assess(&jacobi_residuals(&lambda), ctx)?))
    });
    report.run("base-commute", "{q^i, q^j} = 0", || -> Result<CheckEntry> {
        let mut res = Vec::new();
        for (i, f) in c.base.iter().enumerate() {
            for g in &c.base[i + 1..] {
                res.push(poisson_bracket(&lambda, f, g)?);
            }
        }
        Ok(CheckEntry::from_assessment("", "", &assess(&res, ctx)?))
    });
    Ok(report)
}

/// `d/dt` of `w` along a Hamiltonian flow: residuals of `L_Gamma w`.
pub fn hamiltonian_preserves_omega(gamma: &VectorField, omega: &TwoForm) -> Result<Vec<Expr>> {
    Ok(lie_derivative_twoform(gamma, omega)?.0.upper().to_vec())
}

/// Whether a degree check passes: `pivot_ok` re-exported for callers that
/// need a single nonzero test on an expression.
pub fn is_nonzero<T: Scalar>(e: &Expr, ctx: &NumericContext<T>) -> Result<bool> {
    pivot_ok(e, ctx)
}
