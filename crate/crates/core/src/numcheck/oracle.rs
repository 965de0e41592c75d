//! Finite-difference checks of the `geom` operations.
//!
//! Each check evaluates the defining formula numerically, with partial
//! derivatives taken by central differences of the input components, and
//! compares it to a claimed symbolic result. None of them calls
//! [`Expr::diff`](crate::symexpr::Expr::diff).

use crate::error::Result;
use crate::geom::{CoordinateMap, OneForm, Tensor11, Torsion, TwoForm, VectorField};
use crate::scalar::Scalar;
use crate::symexpr::Expr;

use super::flow::{compare, eval_all, fd_jacobian, fd_sweep, moved, support_with};
use super::{flow_check_lie_derivative, DenseMatrix, LieObject, NumericContext, ResidualSummary};

fn two_form_matrix<T: Scalar>(upper: &[T], n: usize) -> DenseMatrix<T> {
    let mut w = DenseMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            w[(i, j)] = upper[k];
            w[(j, i)] = -upper[k];
            k += 1;
        }
    }
    w
}

fn upper_of<T: Scalar>(m: &DenseMatrix<T>) -> Vec<T> {
    let n = m.rows;
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// `[X,Y] = DY X - DX Y`.
pub fn check_lie_bracket<T: Scalar>(
    x: &VectorField,
    y: &VectorField,
    claimed: &VectorField,
    ctx: &NumericContext<T>,
) -> Result<ResidualSummary<T>> {
    let chart = x.chart();
    chart.ensure_same(y.chart())?;
    chart.ensure_same(claimed.chart())?;
    let (syms, ops) = support_with(chart, x.comps().iter().chain(y.comps()).chain(claimed.comps()));
    let n = chart.dim();
    fd_sweep(ctx, &syms, &ops, |asg| {
        let xv = eval_all(x.comps(), asg)?;
        let yv = eval_all(y.comps(), asg)?;
        let dx = fd_jacobian(x.comps(), chart, asg, T::fd_step())?;
        let dy = fd_jacobian(y.comps(), chart, asg, T::fd_step())?;
        let numeric: Vec<T> = (0..n)
            .map(|i| (0..n).fold(T::zero(), |s, j| s + dy[(i, j)] * xv[j] - dx[(i, j)] * yv[j]))
            .collect();
        Ok(compare(&numeric, &eval_all(claimed.comps(), asg)?))
    })
}

/// Flow definition of `L_X a`.
pub fn check_lie_oneform<T: Scalar>(
    x: &VectorField,
    a: &OneForm,
    claimed: &OneForm,
    ctx: &NumericContext<T>,
) -> Result<ResidualSummary<T>> {
    flow_check_lie_derivative(x, &LieObject::OneForm(a.clone()), &LieObject::OneForm(claimed.clone()), ctx)
}

/// Flow definition of `L_X S`.
pub fn check_lie_tensor11<T: Scalar>(
    x: &VectorField,
    s: &Tensor11,
    claimed: &Tensor11,
    ctx: &NumericContext<T>,
) -> Result<ResidualSummary<T>> {
    flow_check_lie_derivative(x, &LieObject::Tensor11(s.clone()), &LieObject::Tensor11(claimed.clone()), ctx)
}

/// `da(e_i, e_j) = d_i a_j - d_j a_i`.
pub fn check_exterior_derivative<T: Scalar>(
    a: &OneForm,
    claimed: &TwoForm,
    ctx: &NumericContext<T>,
) -> Result<ResidualSummary<T>> {
    let chart = a.chart();
    chart.ensure_same(claimed.chart())?;
    let (syms, ops) = support_with(chart, a.comps().iter().chain(claimed.0.upper()));
    let n = chart.dim();
    fd_sweep(ctx, &syms, &ops, |asg| {
        let da = fd_jacobian(a.comps(), chart, asg, T::fd_step())?;
        let mut full = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                full[(i, j)] = da[(j, i)] - da[(i, j)];
            }
        }
        Ok(compare(&upper_of(&full), &eval_all(claimed.0.upper(), asg)?))
    })
}

/// `(i_X w)(Y) = w(X, Y)`, tested on every coordinate `Y`.
pub fn check_interior_product<T: Scalar>(
    x: &VectorField,
    w: &TwoForm,
    claimed: &OneForm,
    ctx: &NumericContext<T>,
) -> Result<ResidualSummary<T>> {
    let chart = x.chart();
    chart.ensure_same(w.chart())?;
    chart.ensure_same(claimed.chart())?;
    let (syms, ops) = support_with(chart, x.comps().iter().chain(w.0.upper()).chain(claimed.comps()));
    let n = chart.dim();
    fd_sweep(ctx, &syms, &ops, |asg| {
        let xv = eval_all(x.comps(), asg)?;
        let wm = two_form_matrix(&eval_all(w.0.upper(), asg)?, n);
        let numeric: Vec<T> = (0..n).map(|j| (0..n).fold(T::zero(), |s, i| s + xv[i] * wm[(i, j)])).collect();
        Ok(compare(&numeric, &eval_all(claimed.comps(), asg)?))
    })
}

/// `(S* a)(Y) = a(S Y)`, tested on every coordinate `Y`.
pub fn check_tensor_dual<T: Scalar>(
    s: &Tensor11,
    a: &OneForm,
    claimed: &OneForm,
    ctx: &NumericContext<T>,
) -> Result<ResidualSummary<T>> {
    let chart = s.chart();
    chart.ensure_same(a.chart())?;
    chart.ensure_same(claimed.chart())?;
    let s_exprs: Vec<Expr> = s.entries().cloned().collect();
    let (syms, ops) = support_with(chart, s_exprs.iter().chain(a.comps()).chain(claimed.comps()));
    let n = chart.dim();
    fd_sweep(ctx, &syms, &ops, |asg| {
        let sv = DenseMatrix { rows: n, cols: n, data: eval_all(&s_exprs, asg)? };
        let av = eval_all(a.comps(), asg)?;
        let numeric: Vec<T> = (0..n)
            .map(|j| {
                // S e_j has components S^i_j
                (0..n).fold(T::zero(), |acc, i| acc + av[i] * sv[(i, j)])
            })
            .collect();
        Ok(compare(&numeric, &eval_all(claimed.comps(), asg)?))
    })
}

/// `(S X)^i = S^i_j X^j`.
pub fn check_apply_tensor<T: Scalar>(
    s: &Tensor11,
    x: &VectorField,
    claimed: &VectorField,
    ctx: &NumericContext<T>,
) -> Result<ResidualSummary<T>> {
    let chart = s.chart();
    chart.ensure_same(x.chart())?;
    chart.ensure_same(claimed.chart())?;
    let s_exprs: Vec<Expr> = s.entries().cloned().collect();
    let (syms, ops) = support_with(chart, s_exprs.iter().chain(x.comps()).chain(claimed.comps()));
    let n = chart.dim();
    fd_sweep(ctx, &syms, &ops, |asg| {
        let sv = DenseMatrix { rows: n, cols: n, data: eval_all(&s_exprs, asg)? };
        let xv = DenseMatrix { rows: n, cols: 1, data: eval_all(x.comps(), asg)? };
        Ok(compare(&sv.mul(&xv).data, &eval_all(claimed.comps(), asg)?))
    })
}

/// `(phi* a)_i = a_a(phi(p)) D phi^a_i`, with `D phi` by central differences.
pub fn check_pullback<T: Scalar>(
    phi: &CoordinateMap,
    a: &OneForm,
    claimed: &OneForm,
    ctx: &NumericContext<T>,
) -> Result<ResidualSummary<T>> {
    let (src, tgt) = (phi.source(), phi.target());
    tgt.ensure_same(a.chart())?;
    src.ensure_same(claimed.chart())?;
    let (mut syms, ops) = support_with(src, phi.forward().iter().chain(a.comps()).chain(claimed.comps()));
    for c in tgt.coords() {
        if src.index_of(c).is_none() {
            syms.remove(c.as_str());
        }
    }
    let n = src.dim();
    fd_sweep(ctx, &syms, &ops, |asg| {
        let image = eval_all(phi.forward(), asg)?;
        let jac = fd_jacobian(phi.forward(), src, asg, T::fd_step())?;
        let av = eval_all(a.comps(), &moved(tgt, asg, &image))?;
        let numeric: Vec<T> = (0..n).map(|i| (0..av.len()).fold(T::zero(), |s, k| s + av[k] * jac[(k, i)])).collect();
        Ok(compare(&numeric, &eval_all(claimed.comps(), asg)?))
    })
}

/// `(phi_* X)(phi(p)) = D phi(p) X(p)`, sampled at source points.
pub fn check_pushforward<T: Scalar>(
    phi: &CoordinateMap,
    x: &VectorField,
    claimed: &VectorField,
    ctx: &NumericContext<T>,
) -> Result<ResidualSummary<T>> {
    let (src, tgt) = (phi.source(), phi.target());
    src.ensure_same(x.chart())?;
    tgt.ensure_same(claimed.chart())?;
    let (mut syms, ops) = support_with(src, phi.forward().iter().chain(x.comps()).chain(claimed.comps()));
    for c in tgt.coords() {
        if src.index_of(c).is_none() {
            syms.remove(c.as_str());
        }
    }
    fd_sweep(ctx, &syms, &ops, |asg| {
        let image = eval_all(phi.forward(), asg)?;
        let jac = fd_jacobian(phi.forward(), src, asg, T::fd_step())?;
        let xv = DenseMatrix { rows: src.dim(), cols: 1, data: eval_all(x.comps(), asg)? };
        let reference = eval_all(claimed.comps(), &moved(tgt, asg, &image))?;
        Ok(compare(&jac.mul(&xv).data, &reference))
    })
}

/// Nijenhuis torsion from its component formula with numeric derivatives
/// of `S`.
pub fn check_nijenhuis<T: Scalar>(
    s: &Tensor11,
    claimed: &Torsion,
    ctx: &NumericContext<T>,
) -> Result<ResidualSummary<T>> {
    let chart = s.chart();
    chart.ensure_same(claimed.chart())?;
    let s_exprs: Vec<Expr> = s.entries().cloned().collect();
    let claimed_entries = claimed.entries();
    let claimed_exprs: Vec<Expr> = claimed_entries.iter().map(|(_, e)| e.clone()).collect();
    let (syms, ops) = support_with(chart, s_exprs.iter().chain(&claimed_exprs));
    let n = chart.dim();
    fd_sweep(ctx, &syms, &ops, |asg| {
        let sv = eval_all(&s_exprs, asg)?;
        // ds[(i*n + j, m)] = d_m S^i_j
        let ds = fd_jacobian(&s_exprs, chart, asg, T::fd_step())?;
        let sij = |i: usize, j: usize| sv[i * n + j];
        let dsij = |i: usize, j: usize, m: usize| ds[(i * n + j, m)];
        let numeric: Vec<T> = claimed_entries
            .iter()
            .map(|&((i, j, k), _)| {
                (0..n).fold(T::zero(), |acc, m| {
                    acc + sij(m, j) * dsij(i, k, m) - sij(m, k) * dsij(i, j, m)
                        - sij(i, m) * (dsij(m, k, j) - dsij(m, j, k))
                })
            })
            .collect();
        Ok(compare(&numeric, &eval_all(&claimed_exprs, asg)?))
    })
}

/// Numeric `d f` at each sample point against a claimed one-form.
pub fn check_differential<T: Scalar>(g: &Expr, claimed: &OneForm, ctx: &NumericContext<T>) -> Result<ResidualSummary<T>> {
    let chart = claimed.chart();
    let (syms, ops) = support_with(chart, std::iter::once(g).chain(claimed.comps()));
    fd_sweep(ctx, &syms, &ops, |asg| {
        let dg = fd_jacobian(std::slice::from_ref(g), chart, asg, T::fd_step())?;
        Ok(compare(&dg.data, &eval_all(claimed.comps(), asg)?))
    })
}

/// Fixed, deliberately asymmetric inputs on R^3 for the mutation suite.
struct Fixtures {
    x: VectorField,
    y: VectorField,
    a: OneForm,
    s: Tensor11,
    w: TwoForm,
    phi: CoordinateMap,
    b: OneForm,
}

fn fixtures() -> Result<Fixtures> {
    use crate::geom::Chart;
    use crate::symexpr::parse;
    let pe = |s: &str| parse(s).expect("fixture expression");
    let c = Chart::new("xyz", &["x", "y", "z"])?;
    let t = Chart::new("uvw", &["u", "v", "w"])?;
    Ok(Fixtures {
        x: VectorField::parse(&c, &["y^2", "x*z + 1", "x - y*z"])?,
        y: VectorField::parse(&c, &["z", "x^2", "x*y"])?,
        a: OneForm::parse(&c, &["y*z", "x^2", "x*z + y"])?,
        s: Tensor11::parse(&c, &[&["y", "x", "1"], &["z^2", "0", "x"], &["x*y", "1", "z"]])?,
        w: TwoForm::from_terms(&c, &[(0, 1, pe("x*y")), (0, 2, pe("z")), (1, 2, pe("x^2 + 1"))]),
        phi: CoordinateMap::new("phi", &c, &t, vec![pe("x + y^2"), pe("y*z"), pe("z + x")], None)?,
        b: OneForm::parse(&t, &["v", "u*w", "u^2"])?,
    })
}

/// Runs every mutable `geom` operation under `mutant` on fixed inputs and
/// checks each result against its numeric oracle. With
/// `Mutant(Mutation::None)` every entry passes; a planted mutation is
/// detected when at least one entry fails.
pub fn mutation_suite<T: Scalar>(
    mutant: crate::geom::fault::Mutant,
    ctx: &NumericContext<T>,
) -> Result<Vec<(&'static str, ResidualSummary<T>)>> {
    let f = fixtures()?;
    Ok(vec![
        ("lie_bracket", check_lie_bracket(&f.x, &f.y, &mutant.lie_bracket(&f.x, &f.y)?, ctx)?),
        ("lie_derivative_oneform", check_lie_oneform(&f.x, &f.a, &mutant.lie_derivative_oneform(&f.x, &f.a)?, ctx)?),
        ("lie_derivative_tensor11", check_lie_tensor11(&f.x, &f.s, &mutant.lie_derivative_tensor11(&f.x, &f.s)?, ctx)?),
        ("exterior_derivative", check_exterior_derivative(&f.a, &mutant.exterior_derivative(&f.a), ctx)?),
        ("interior_product", check_interior_product(&f.x, &f.w, &mutant.interior_product(&f.x, &f.w)?, ctx)?),
        ("apply_tensor_dual", check_tensor_dual(&f.s, &f.a, &mutant.apply_tensor_dual(&f.s, &f.a)?, ctx)?),
        ("pullback", check_pullback(&f.phi, &f.b, &mutant.pullback(&f.phi, &f.b)?, ctx)?),
    ])
}
