//! Tangent-side structures: basic subalgebras, vertical distributions,
//! partial linear structures, SODE detection and vertical endomorphisms.

use crate::error::{Error, Result};
use crate::geom::linalg::{self, nullspace};
use crate::geom::{
    apply_tensor, differential, lie_bracket, lie_derivative_function, lie_derivative_tensor11, nijenhuis, Chart,
    Tensor11, VectorField,
};
use crate::numcheck::{assess, numeric_rank, Assessment, DenseMatrix, NumericContext, Verdict};
use crate::report::{CheckEntry, StructureReport};
use crate::scalar::Scalar;
use crate::symexpr::{eval_numeric, Assignment, Expr, ExprError};

fn gradients(chart: &Chart, fs: &[Expr]) -> Vec<Vec<Expr>> {
    fs.iter().map(|f| differential(chart, f).comps().to_vec()).collect()
}

fn vanishes<T: Scalar>(residuals: &[Expr], ctx: &NumericContext<T>) -> Result<bool> {
    Ok(assess(residuals, ctx)?.verdict.passes(false))
}

/// Functions pulled back from a base, given by `r` functionally
/// independent generators.
#[derive(Clone, Debug, PartialEq)]
pub struct BasicSubalgebra {
    chart: Chart,
    generators: Vec<Expr>,
}

impl BasicSubalgebra {
    /// Checks that the `r x n` Jacobian of the generators has rank `r` at
    /// every sample point.
    pub fn new<T: Scalar>(chart: &Chart, generators: Vec<Expr>, ctx: &NumericContext<T>) -> Result<Self> {
        let a = Self::new_unchecked(chart, generators);
        let r = a.generators.len();
        let rank = numeric_rank(&a.jacobian(), ctx)?;
        if rank.min != r {
            return Err(Error::RankDeficient(format!(
                "{r} generators have differential rank {}..{}",
                rank.min, rank.max
            )));
        }
        Ok(a)
    }

    pub fn new_unchecked(chart: &Chart, generators: Vec<Expr>) -> Self {
        BasicSubalgebra { chart: chart.clone(), generators }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn generators(&self) -> &[Expr] {
        &self.generators
    }

    /// Rows `d f_i`.
    pub fn jacobian(&self) -> Vec<Vec<Expr>> {
        gradients(&self.chart, &self.generators)
    }
}

/// Basis of the vertical distribution `{Y : Y(f_i) = 0}`, one field per
/// non-pivot column of the generator Jacobian.
pub fn vertical_distribution<T: Scalar>(a: &BasicSubalgebra, ctx: &NumericContext<T>) -> Result<Vec<VectorField>> {
    let basis = nullspace(&a.jacobian(), ctx)?;
    let fields = basis.into_iter().map(|c| VectorField::new(&a.chart, c)).collect::<Result<Vec<_>>>()?;
    for y in &fields {
        if !is_vertical(y, a, ctx)? {
            return Err(Error::PivotUndecidable(format!("nullspace field {y} is not vertical")));
        }
    }
    Ok(fields)
}

pub fn is_vertical<T: Scalar>(y: &VectorField, a: &BasicSubalgebra, ctx: &NumericContext<T>) -> Result<bool> {
    y.chart().ensure_same(&a.chart)?;
    let res: Vec<Expr> = a.generators.iter().map(|f| lie_derivative_function(y, f)).collect();
    vanishes(&res, ctx)
}

/// Outcome of a projectability test.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub projectable: bool,
    /// `Y(f_i)` for each generator; the projected field's action when
    /// `projectable`.
    pub action: Vec<Expr>,
}

/// `Y` is projectable when every `Y(f_i)` is again a basic function, i.e.
/// annihilated by the vertical distribution.
pub fn is_projectable<T: Scalar>(y: &VectorField, a: &BasicSubalgebra, ctx: &NumericContext<T>) -> Result<Projection> {
    y.chart().ensure_same(&a.chart)?;
    let action: Vec<Expr> = a.generators.iter().map(|f| lie_derivative_function(y, f)).collect();
    let vertical = vertical_distribution(a, ctx)?;
    let res: Vec<Expr> =
        vertical.iter().flat_map(|v| action.iter().map(move |g| lie_derivative_function(v, g))).collect();
    Ok(Projection { projectable: vanishes(&res, ctx)?, action })
}

pub const MAX_DEGREE: u32 = 4;

/// The `k` in `0..=4` with `Delta(g) = k g`, if any.
pub fn degree<T: Scalar>(g: &Expr, delta: &VectorField, ctx: &NumericContext<T>) -> Result<Option<u32>> {
    let dg = lie_derivative_function(delta, g);
    for k in 0..=MAX_DEGREE {
        if vanishes(&[&dg - &(&Expr::int(k as i64) * g)], ctx)? {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldClass {
    /// `[Delta, X] = 0`.
    FiberwiseLinear,
    /// `[Delta, X] = -X`.
    Translational,
    Neither,
}

impl FieldClass {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldClass::FiberwiseLinear => "fiberwise-linear",
            FieldClass::Translational => "translational",
            FieldClass::Neither => "neither",
        }
    }
}

pub fn classify_field<T: Scalar>(x: &VectorField, delta: &VectorField, ctx: &NumericContext<T>) -> Result<FieldClass> {
    let b = lie_bracket(delta, x)?;
    if vanishes(b.comps(), ctx)? {
        return Ok(FieldClass::FiberwiseLinear);
    }
    if vanishes(b.add(x)?.comps(), ctx)? {
        return Ok(FieldClass::Translational);
    }
    Ok(FieldClass::Neither)
}

/// `X(f_i)` has degree one for every generator and `{f_i, X(f_i)}` is a
/// coframe at every sample point.
pub fn is_sode_algebraic<T: Scalar>(
    x: &VectorField,
    a: &BasicSubalgebra,
    delta: &VectorField,
    ctx: &NumericContext<T>,
) -> Result<bool> {
    x.chart().ensure_same(&a.chart)?;
    delta.chart().ensure_same(&a.chart)?;
    let base_degrees: Vec<Expr> = a.generators.iter().map(|f| lie_derivative_function(delta, f)).collect();
    if !vanishes(&base_degrees, ctx)? {
        return Err(Error::Precondition("Delta does not annihilate the base generators".into()));
    }
    let lifted: Vec<Expr> = a.generators.iter().map(|f| lie_derivative_function(x, f)).collect();
    let homogeneity: Vec<Expr> = lifted.iter().map(|g| &lie_derivative_function(delta, g) - g).collect();
    if !vanishes(&homogeneity, ctx)? {
        return Ok(false);
    }
    let all: Vec<Expr> = a.generators.iter().chain(&lifted).cloned().collect();
    let rank = numeric_rank(&gradients(&a.chart, &all), ctx)?;
    Ok(rank.min == a.chart.dim())
}

/// `S(X) = Delta`.
pub fn is_sode_tensorial<T: Scalar>(x: &VectorField, t: &TangentStructure, ctx: &NumericContext<T>) -> Result<bool> {
    let r = apply_tensor(&t.s, x)?.sub(&t.pls.delta)?;
    vanishes(r.comps(), ctx)
}

/// The `S` with `S*(d X(f_i)) = d f_i` and `S*(d f_i) = 0`, i.e.
/// `C S = B` for the coframe `C = [df; dX(f)]` and `B = [0; df]`.
pub fn build_s_from_sode<T: Scalar>(x: &VectorField, a: &BasicSubalgebra, ctx: &NumericContext<T>) -> Result<Tensor11> {
    x.chart().ensure_same(&a.chart)?;
    let n = a.chart.dim();
    let r = a.generators.len();
    if 2 * r != n {
        return Err(Error::Precondition(format!("{r} generators on a chart of dimension {n}")));
    }
    let lifted: Vec<Expr> = a.generators.iter().map(|f| lie_derivative_function(x, f)).collect();
    let df = a.jacobian();
    let mut c = df.clone();
    c.extend(gradients(&a.chart, &lifted));
    let mut b = vec![vec![Expr::zero(); n]; r];
    b.extend(df.iter().cloned());
    let rows = linalg::solve(&c, &b, ctx).map_err(|e| match e {
        Error::RankDeficient(m) => Error::RankDeficient(format!("coframe {{df, dX(f)}}: {m}")),
        other => other,
    })?;
    let s = Tensor11::new(&a.chart, rows)?;
    // re-verify the defining relations
    let st = linalg::matmul(&c, s.rows());
    let res: Vec<Expr> = st.iter().flatten().zip(b.iter().flatten()).map(|(l, r)| l - r).collect();
    if !vanishes(&res, ctx)? {
        return Err(Error::PivotUndecidable("constructed S fails its defining relations".into()));
    }
    Ok(s)
}

/// A complete field `Delta` grading functions, with declared degree-0 and
/// degree-1 generators.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialLinearStructure {
    pub delta: VectorField,
    pub base: Vec<Expr>,
    pub fiber: Vec<Expr>,
}

impl PartialLinearStructure {
    pub fn new(delta: VectorField, base: Vec<Expr>, fiber: Vec<Expr>) -> Self {
        PartialLinearStructure { delta, base, fiber }
    }

    pub fn chart(&self) -> &Chart {
        self.delta.chart()
    }

    pub fn subalgebra(&self) -> BasicSubalgebra {
        BasicSubalgebra::new_unchecked(self.chart(), self.base.clone())
    }

    /// Jacobian of `base` followed by `fiber`.
    pub fn adapted_jacobian(&self) -> Vec<Vec<Expr>> {
        let all: Vec<Expr> = self.base.iter().chain(&self.fiber).cloned().collect();
        gradients(self.chart(), &all)
    }
}

/// A pair `(Delta, S)` with its generators.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentStructure {
    pub pls: PartialLinearStructure,
    pub s: Tensor11,
}

impl TangentStructure {
    pub fn new(pls: PartialLinearStructure, s: Tensor11) -> Result<Self> {
        pls.chart().ensure_same(s.chart())?;
        Ok(TangentStructure { pls, s })
    }

    pub fn chart(&self) -> &Chart {
        self.pls.chart()
    }

    pub fn delta(&self) -> &VectorField {
        &self.pls.delta
    }

    /// Chart `(q1..qn, v1..vn)` with `Delta = v^i d/dv^i` and
    /// `S = dq^i (x) d/dv^i`.
    pub fn adapted<S: AsRef<str>>(base: &[S], fiber: &[S]) -> Result<Self> {
        let n = base.len();
        if fiber.len() != n {
            return Err(Error::Dimension { expected: n, got: fiber.len() });
        }
        let names: Vec<&str> = base.iter().chain(fiber).map(AsRef::as_ref).collect();
        let chart = Chart::new("tangent", &names)?;
        let mut delta = vec![Expr::zero(); 2 * n];
        let mut s = Tensor11::zero(&chart);
        for i in 0..n {
            delta[n + i] = chart.coord(n + i);
            s = s.add(&Tensor11::elementary(&chart, n + i, i))?;
        }
        let pls = PartialLinearStructure::new(
            VectorField::new(&chart, delta)?,
            (0..n).map(|i| chart.coord(i)).collect(),
            (n..2 * n).map(|i| chart.coord(i)).collect(),
        );
        TangentStructure::new(pls, s)
    }
}

pub(crate) fn ensure_basic<T: Scalar>(fs: &[Expr], a: &BasicSubalgebra, ctx: &NumericContext<T>) -> Result<()> {
    let vertical = vertical_distribution(a, ctx)?;
    let res: Vec<Expr> = vertical.iter().flat_map(|v| fs.iter().map(move |f| lie_derivative_function(v, f))).collect();
    if vanishes(&res, ctx)? {
        Ok(())
    } else {
        Err(Error::NotBasic(fs.iter().map(Expr::to_string).collect::<Vec<_>>().join(", ")))
    }
}

/// `w^i d/dv^i` in adapted coordinates `(q, v) = (base, fiber)`, written in
/// the ambient chart: the field `Y` with `Y(q^j) = 0` and `Y(v^j) = w^j`.
/// The components `w^i` are basic functions on the ambient chart.
pub fn vertical_lift<T: Scalar>(t: &TangentStructure, w: &[Expr], ctx: &NumericContext<T>) -> Result<VectorField> {
    let n = t.pls.fiber.len();
    if w.len() != n {
        return Err(Error::Dimension { expected: n, got: w.len() });
    }
    ensure_basic(w, &t.pls.subalgebra(), ctx)?;
    let g = t.pls.adapted_jacobian();
    if g.len() != t.chart().dim() {
        return Err(Error::NotAdapted(format!("{} generators on a chart of dimension {}", g.len(), t.chart().dim())));
    }
    let mut rhs: Vec<Vec<Expr>> = vec![vec![Expr::zero()]; t.pls.base.len()];
    rhs.extend(w.iter().map(|e| vec![e.clone()]));
    let sol = linalg::solve(&g, &rhs, ctx).map_err(|e| Error::NotAdapted(e.to_string()))?;
    VectorField::new(t.chart(), sol.into_iter().map(|mut r| r.remove(0)).collect())
}

/// `alpha^ = v^i alpha_i` for a basic one-form with components `alpha_i`
/// along the base generators.
pub fn hat_oneform<T: Scalar>(alpha: &[Expr], t: &TangentStructure, ctx: &NumericContext<T>) -> Result<Expr> {
    if alpha.len() != t.pls.fiber.len() {
        return Err(Error::Dimension { expected: t.pls.fiber.len(), got: alpha.len() });
    }
    ensure_basic(alpha, &t.pls.subalgebra(), ctx)?;
    Ok(t.pls.fiber.iter().zip(alpha).map(|(v, a)| v * a).sum())
}

/// `C o C = C` and `C(Y) = Y` for every vertical `Y`.
pub fn is_vertical_projector<T: Scalar>(
    c: &Tensor11,
    a: &BasicSubalgebra,
    ctx: &NumericContext<T>,
) -> Result<Assessment<T>> {
    let mut res: Vec<Expr> = c.compose(c)?.sub(c)?.entries().cloned().collect();
    for y in vertical_distribution(a, ctx)? {
        res.extend(apply_tensor(c, &y)?.sub(&y)?.comps().iter().cloned());
    }
    Ok(assess(&res, ctx)?)
}

fn pointwise<T: Scalar, R>(
    chart: &Chart,
    exprs: &[&Expr],
    ctx: &NumericContext<T>,
    f: impl FnMut(&Assignment<T>) -> Result<R, ExprError>,
) -> Result<Vec<R>> {
    let (mut syms, ops) = NumericContext::<T>::support(exprs.iter().copied());
    syms.extend(chart.coords().iter().map(|c| std::sync::Arc::from(c.as_str())));
    Ok(ctx.sample_points(&syms, &ops, ctx.domain.points, f)?)
}

fn eval_rows<T: Scalar>(rows: &[Vec<Expr>], asg: &Assignment<T>) -> Result<DenseMatrix<T>, ExprError> {
    DenseMatrix::evaluate(rows, asg)
}

/// Newton solve of `base(x) = base(x0)`, `fiber(x) = 0` starting at `x0`;
/// returns the zero-section point over `x0`.
fn zero_section_point<T: Scalar>(
    pls: &PartialLinearStructure,
    jac: &[Vec<Expr>],
    asg: &Assignment<T>,
) -> Result<Assignment<T>, ExprError> {
    let chart = pls.chart();
    let gens: Vec<&Expr> = pls.base.iter().chain(&pls.fiber).collect();
    let target: Vec<T> = pls.base.iter().map(|b| eval_numeric(b, asg)).collect::<Result<_, _>>()?;
    let mut cur = asg.clone();
    for _ in 0..60 {
        let mut resid = DenseMatrix::zeros(gens.len(), 1);
        let mut norm = T::zero();
        for (i, g) in gens.iter().enumerate() {
            let v = eval_numeric(g, &cur)?;
            resid[(i, 0)] = if i < target.len() { v - target[i] } else { v };
            norm = norm.max(resid[(i, 0)].abs());
        }
        if norm <= T::epsilon() * T::from_f64_lossy(64.0) {
            return Ok(cur);
        }
        let j = eval_rows(jac, &cur)?;
        let step = crate::numcheck::solve_dense(&j, &resid).ok_or_else(|| ExprError::Domain("singular Newton step".into()))?;
        for (k, c) in chart.coords().iter().enumerate() {
            let x = cur.get(c).unwrap_or_else(T::zero) - step[(k, 0)];
            cur.set(c, x);
        }
    }
    Err(ExprError::Domain("Newton iteration for the zero section did not converge".into()))
}

/// Degree-0 and degree-1 grading of the generators, full rank of their
/// joint Jacobian, and `Delta = 0` exactly on the zero set of the fiber
/// generators.
pub fn check_grading<T: Scalar>(pls: &PartialLinearStructure, ctx: &NumericContext<T>) -> Result<CheckEntry> {
    let name = "grading";
    let mut res: Vec<Expr> = pls.base.iter().map(|f| lie_derivative_function(&pls.delta, f)).collect();
    res.extend(pls.fiber.iter().map(|f| &lie_derivative_function(&pls.delta, f) - f));
    let graded = assess(&res, ctx)?;
    let mut entry = CheckEntry::from_assessment(name, "", &graded);
    if graded.verdict == Verdict::Fail {
        return Ok(entry.with_detail(format!("generator {} has the wrong degree", graded.offending.unwrap_or(0))));
    }
    let n = pls.chart().dim();
    let jac = pls.adapted_jacobian();
    if jac.len() != n {
        entry.verdict = Verdict::Fail;
        return Ok(entry.with_detail(format!("{} generators on a chart of dimension {n}", jac.len())));
    }
    let rank = numeric_rank(&jac, ctx)?;
    if rank.min != n {
        entry.verdict = Verdict::Fail;
        return Ok(entry.with_detail(format!("generator differentials have rank {}..{} < {n}", rank.min, rank.max)));
    }
    let delta = pls.delta.comps();
    let exprs: Vec<&Expr> = jac.iter().flatten().chain(delta).chain(&pls.fiber).collect();
    let tol = ctx.tolerance;
    let outcomes = pointwise(pls.chart(), &exprs, ctx, |asg| {
        let off: Vec<T> = delta.iter().map(|d| eval_numeric(d, asg)).collect::<Result<_, _>>()?;
        let fib: Vec<T> = pls.fiber.iter().map(|f| eval_numeric(f, asg)).collect::<Result<_, _>>()?;
        let zp = zero_section_point(pls, &jac, asg)?;
        let on: Vec<T> = delta.iter().map(|d| eval_numeric(d, &zp)).collect::<Result<_, _>>()?;
        let scale = pls.chart().coords().iter().fold(T::one(), |m, c| m.max(zp.get(c).unwrap_or_else(T::zero).abs()));
        let max = |v: &[T]| v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let vanishes_on = max(&on) <= tol * scale;
        let nonzero_off = max(&fib) <= tol || max(&off) > tol;
        Ok((vanishes_on, nonzero_off, max(&on)))
    })?;
    let worst = outcomes.iter().fold(T::zero(), |m, o| m.max(o.2));
    if outcomes.iter().any(|o| !o.0) {
        entry.verdict = Verdict::Fail;
        return Ok(entry.with_detail(format!("Delta does not vanish on the zero section (|Delta| up to {worst})")));
    }
    if outcomes.iter().any(|o| !o.1) {
        entry.verdict = Verdict::Fail;
        return Ok(entry.with_detail("Delta vanishes off the zero section"));
    }
    Ok(entry)
}

/// Check labels of [`verify_tangent_structure`], in order.
pub const TANGENT_CHECKS: [(&str, &str); 7] = [
    ("a:nilpotent", "S o S = 0"),
    ("b:rank", "Im S = ker S (rank S = n)"),
    ("c:nijenhuis", "N_S = 0"),
    ("d:homogeneity", "L_Delta S = -S"),
    ("e:delta-vertical", "S(Delta) = 0"),
    ("f:grading", "Delta grading of base and fiber generators"),
    ("g:sode-exists", "S(X) = Delta solvable"),
];

/// The seven axioms of a tangent structure `(Delta, S)`, each as a report
/// entry. Failures are entries, never errors.
pub fn verify_tangent_structure<T: Scalar>(t: &TangentStructure, ctx: &NumericContext<T>) -> StructureReport {
    let mut report = StructureReport::new();
    let dim = t.chart().dim();
    let n = dim / 2;
    let s = &t.s;
    let delta = t.delta();
    let [a, b, c, d, e, f, g] = TANGENT_CHECKS;

    report.run(a.0, a.1, || -> Result<CheckEntry> {
        let sq: Vec<Expr> = s.compose(s)?.entries().cloned().collect();
        Ok(CheckEntry::from_assessment("", "", &assess(&sq, ctx)?))
    });
    report.run(b.0, b.1, || -> Result<CheckEntry> {
        if dim % 2 != 0 {
            return Err(Error::OddDimension(dim));
        }
        let rank = numeric_rank(s.rows(), ctx)?;
        let ok = rank.min == n && rank.max == n;
        Ok(CheckEntry::new("", "", Verdict::from_bool(ok))
            .with_detail(format!("rank {}..{} (expected {n})", rank.min, rank.max)))
    });
    report.run(c.0, c.1, || -> Result<CheckEntry> {
        let torsion = nijenhuis(s);
        let entries = torsion.entries();
        let exprs: Vec<Expr> = entries.iter().map(|(_, e)| e.clone()).collect();
        let a = assess(&exprs, ctx)?;
        let mut entry = CheckEntry::from_assessment("", "", &a);
        if let Some(k) = a.offending {
            let ((i, j, l), ex) = &entries[k];
            let names = t.chart().coords();
            entry = entry.with_detail(format!("N^{}_{}{} = {}", names[*i], names[*j], names[*l], ex));
        }
        Ok(entry)
    });
    report.run(d.0, d.1, || -> Result<CheckEntry> {
        let r: Vec<Expr> = lie_derivative_tensor11(delta, s)?.add(s)?.entries().cloned().collect();
        Ok(CheckEntry::from_assessment("", "", &assess(&r, ctx)?))
    });
    report.run(e.0, e.1, || -> Result<CheckEntry> {
        let r = apply_tensor(s, delta)?;
        Ok(CheckEntry::from_assessment("", "", &assess(r.comps(), ctx)?))
    });
    report.run(f.0, f.1, || check_grading(&t.pls, ctx));
    report.run(g.0, g.1, || -> Result<CheckEntry> {
        let mut aug = s.rows().to_vec();
        for (row, d) in aug.iter_mut().zip(delta.comps()) {
            row.push(d.clone());
        }
        let exprs: Vec<&Expr> = aug.iter().flatten().collect();
        let ranks = pointwise(t.chart(), &exprs, ctx, |asg| {
            let m = eval_rows(&aug, asg)?;
            let sm = eval_rows(s.rows(), asg)?;
            Ok((sm.rank(), m.rank()))
        })?;
        let bad = ranks.iter().filter(|(r, ra)| r != ra).count();
        let ok = bad == 0 && ranks.iter().all(|(r, _)| *r == n);
        let mut entry = CheckEntry::new("", "", Verdict::from_bool(ok));
        if !ok {
            entry = entry.with_detail(format!("S(X) = Delta unsolvable or S degenerate at {bad} of {} points", ranks.len()));
        }
        Ok(entry)
    });
    report
}

#[cfg(test)]
mod tests;
