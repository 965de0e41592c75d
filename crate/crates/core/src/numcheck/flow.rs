use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::Result;
use crate::geom::{Chart, OneForm, Tensor11, TwoForm, VectorField};
use crate::scalar::Scalar;
use crate::symexpr::{eval_numeric, Assignment, Expr, ExprError};

use super::{solve_dense, DenseMatrix, NumericContext, ResidualSummary};

/// A tensorial object that can be dragged along a flow.
#[derive(Clone, Debug, PartialEq)]
pub enum LieObject {
    Function(Expr),
    VectorField(VectorField),
    OneForm(OneForm),
    TwoForm(TwoForm),
    Tensor11(Tensor11),
}

impl LieObject {
    fn exprs(&self) -> Vec<Expr> {
        match self {
            LieObject::Function(g) => vec![g.clone()],
            LieObject::VectorField(x) => x.comps().to_vec(),
            LieObject::OneForm(a) => a.comps().to_vec(),
            LieObject::TwoForm(w) => w.0.upper().to_vec(),
            LieObject::Tensor11(s) => s.entries().cloned().collect(),
        }
    }

    fn chart(&self) -> Option<&Chart> {
        match self {
            LieObject::Function(_) => None,
            LieObject::VectorField(x) => Some(x.chart()),
            LieObject::OneForm(a) => Some(a.chart()),
            LieObject::TwoForm(w) => Some(w.chart()),
            LieObject::Tensor11(s) => Some(s.chart()),
        }
    }

    /// Pullback by a map with Jacobian `jac`, given the object's values at
    /// the image point, flattened like [`LieObject::exprs`].
    fn pull<T: Scalar>(&self, at_image: &[T], jac: &DenseMatrix<T>) -> Option<Vec<T>> {
        let n = jac.rows;
        match self {
            LieObject::Function(_) => Some(at_image.to_vec()),
            LieObject::OneForm(_) => Some((0..n).map(|i| (0..n).fold(T::zero(), |s, a| s + at_image[a] * jac[(a, i)])).collect()),
            LieObject::VectorField(_) => {
                let y = DenseMatrix { rows: n, cols: 1, data: at_image.to_vec() };
                solve_dense(jac, &y).map(|m| m.data)
            }
            LieObject::Tensor11(_) => {
                let s = DenseMatrix { rows: n, cols: n, data: at_image.to_vec() };
                solve_dense(jac, &s.mul(jac)).map(|m| m.data)
            }
            LieObject::TwoForm(_) => {
                let mut w = DenseMatrix::zeros(n, n);
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        w[(i, j)] = at_image[k];
                        w[(j, i)] = -at_image[k];
                        k += 1;
                    }
                }
                let full = jac.transpose().mul(&w).mul(jac);
                let mut out = Vec::with_capacity(k);
                for i in 0..n {
                    for j in i + 1..n {
                        out.push(full[(i, j)]);
                    }
                }
                Some(out)
            }
        }
    }
}

pub(crate) fn eval_all<T: Scalar>(exprs: &[Expr], asg: &Assignment<T>) -> Result<Vec<T>, ExprError> {
    exprs.iter().map(|e| eval_numeric(e, asg)).collect()
}

pub(crate) fn coords_of<T: Scalar>(chart: &Chart, asg: &Assignment<T>) -> Vec<T> {
    chart.coords().iter().map(|c| asg.get(c).unwrap_or_else(T::zero)).collect()
}

pub(crate) fn moved<T: Scalar>(chart: &Chart, asg: &Assignment<T>, p: &[T]) -> Assignment<T> {
    let mut out = asg.clone();
    for (c, &v) in chart.coords().iter().zip(p) {
        out.set(c, v);
    }
    out
}

/// `J[a][i] = d exprs[a] / dx^i` by central differences.
pub(crate) fn fd_jacobian<T: Scalar>(
    exprs: &[Expr],
    chart: &Chart,
    asg: &Assignment<T>,
    h: T,
) -> Result<DenseMatrix<T>, ExprError> {
    let p = coords_of(chart, asg);
    let n = chart.dim();
    let two_h = h + h;
    let mut jac = DenseMatrix::zeros(exprs.len(), n);
    for i in 0..n {
        let mut plus = p.clone();
        let mut minus = p.clone();
        plus[i] = plus[i] + h;
        minus[i] = minus[i] - h;
        let fp = eval_all(exprs, &moved(chart, asg, &plus))?;
        let fm = eval_all(exprs, &moved(chart, asg, &minus))?;
        for a in 0..exprs.len() {
            jac[(a, i)] = (fp[a] - fm[a]) / two_h;
        }
    }
    Ok(jac)
}

/// Per-component comparison: `(max |d|, max |d| / max(1, |reference|))`.
pub(crate) fn compare<T: Scalar>(numeric: &[T], reference: &[T]) -> (T, T) {
    numeric.iter().zip(reference).fold((T::zero(), T::zero()), |(a, r), (&x, &y)| {
        let d = (x - y).abs();
        (a.max(d), r.max(d / T::one().max(y.abs())))
    })
}

pub(crate) fn support_with<'a>(
    chart: &Chart,
    exprs: impl IntoIterator<Item = &'a Expr>,
) -> (BTreeSet<Arc<str>>, BTreeSet<Arc<str>>) {
    let (mut syms, ops) = NumericContext::<f64>::support(exprs);
    syms.extend(chart.coords().iter().map(|c| Arc::from(c.as_str())));
    (syms, ops)
}

/// Sweeps `point_residual` over the sample and aggregates against the
/// finite-difference tolerance.
pub(crate) fn fd_sweep<T: Scalar>(
    ctx: &NumericContext<T>,
    syms: &BTreeSet<Arc<str>>,
    ops: &BTreeSet<Arc<str>>,
    mut point_residual: impl FnMut(&Assignment<T>) -> Result<(T, T), ExprError>,
) -> Result<ResidualSummary<T>> {
    let per_point = ctx.sample_points(syms, ops, ctx.domain.points, |asg| point_residual(asg))?;
    let (max_abs, max_rel) =
        per_point.iter().fold((T::zero(), T::zero()), |(a, r), &(pa, pr)| (a.max(pa), r.max(pr)));
    Ok(ResidualSummary { max_abs, max_rel, points: per_point.len(), pass: max_rel <= ctx.fd_tolerance })
}

/// Compares a claimed `L_X object` against the flow definition
/// `d/dt|0 (psi_t^* object)`, where `psi_t(p) = p + t X(p)` is one Euler
/// step of the flow and the `t`-derivative is a central difference with
/// step `T::fd_step()`. `psi_t` agrees with the flow to first order, which
/// is all the derivative at `t = 0` sees.
pub fn flow_check_lie_derivative<T: Scalar>(
    x: &VectorField,
    object: &LieObject,
    claimed: &LieObject,
    ctx: &NumericContext<T>,
) -> Result<ResidualSummary<T>> {
    let chart = x.chart();
    for c in [object.chart(), claimed.chart()].into_iter().flatten() {
        chart.ensure_same(c)?;
    }
    let obj_exprs = object.exprs();
    let claimed_exprs = claimed.exprs();
    let (syms, ops) = support_with(chart, obj_exprs.iter().chain(&claimed_exprs).chain(x.comps()));
    let h = T::fd_step();
    let n = chart.dim();
    fd_sweep(ctx, &syms, &ops, |asg| {
        let p = coords_of(chart, asg);
        let xv = eval_all(x.comps(), asg)?;
        let dx = fd_jacobian(x.comps(), chart, asg, h)?;
        let pulled_at = |t: T| -> Result<Vec<T>, ExprError> {
            let img: Vec<T> = p.iter().zip(&xv).map(|(&pi, &xi)| pi + t * xi).collect();
            let vals = eval_all(&obj_exprs, &moved(chart, asg, &img))?;
            let mut jac = DenseMatrix::identity(n);
            for a in 0..n {
                for i in 0..n {
                    jac[(a, i)] = jac[(a, i)] + t * dx[(a, i)];
                }
            }
            object.pull(&vals, &jac).ok_or_else(|| ExprError::Domain("singular flow Jacobian".into()))
        };
        let fwd = pulled_at(h)?;
        let bwd = pulled_at(-h)?;
        let numeric: Vec<T> = fwd.iter().zip(&bwd).map(|(&a, &b)| (a - b) / (h + h)).collect();
        let symbolic = eval_all(&claimed_exprs, asg)?;
        Ok(compare(&numeric, &symbolic))
    })
}
