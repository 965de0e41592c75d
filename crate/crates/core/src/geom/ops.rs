use crate::error::{Error, Result};
use crate::symexpr::Expr;

use super::fault::Mutation;
use super::{Antisymmetric, Bivector, Chart, CoordinateMap, OneForm, Tensor11, Torsion, TwoForm, VectorField};

fn d(e: &Expr, chart: &Chart, i: usize) -> Expr {
    e.diff(&chart.coords()[i])
}

/// `[X,Y]^i = X^j d_j Y^i - Y^j d_j X^i`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    lie_bracket_m(x, y, Mutation::None)
}

pub(super) fn lie_bracket_m(x: &VectorField, y: &VectorField, m: Mutation) -> Result<VectorField> {
    x.chart.ensure_same(&y.chart)?;
    let c = &x.chart;
    let n = c.dim();
    let comps = (0..n)
        .map(|i| {
            let mut terms = Vec::with_capacity(2 * n);
            for j in 0..n {
                match m {
                    Mutation::BracketIndex => {
                        terms.push(x.comps[j].clone() * d(&y.comps[j], c, i));
                        terms.push(-(y.comps[j].clone() * d(&x.comps[j], c, i)));
                    }
                    Mutation::BracketSign => {
                        terms.push(x.comps[j].clone() * d(&y.comps[i], c, j));
                        terms.push(y.comps[j].clone() * d(&x.comps[i], c, j));
                    }
                    _ => {
                        terms.push(x.comps[j].clone() * d(&y.comps[i], c, j));
                        terms.push(-(y.comps[j].clone() * d(&x.comps[i], c, j)));
                    }
                }
            }
            terms.into_iter().sum()
        })
        .collect();
    VectorField::new(c, comps)
}

/// `X(g) = X^i d_i g`.
pub fn lie_derivative_function(x: &VectorField, g: &Expr) -> Expr {
    let c = &x.chart;
    (0..c.dim()).filter(|&i| !x.comps[i].is_zero()).map(|i| &x.comps[i] * &d(g, c, i)).sum()
}

/// `df`.
pub fn differential(chart: &Chart, g: &Expr) -> OneForm {
    OneForm { chart: chart.clone(), comps: (0..chart.dim()).map(|i| d(g, chart, i)).collect() }
}

/// `(L_X a)_i = X^j d_j a_i + a_j d_i X^j`.
pub fn lie_derivative_oneform(x: &VectorField, a: &OneForm) -> Result<OneForm> {
    lie_derivative_oneform_m(x, a, Mutation::None)
}

pub(super) fn lie_derivative_oneform_m(x: &VectorField, a: &OneForm, m: Mutation) -> Result<OneForm> {
    x.chart.ensure_same(&a.chart)?;
    let c = &x.chart;
    let n = c.dim();
    let comps = (0..n)
        .map(|i| {
            let mut terms = Vec::with_capacity(2 * n);
            for j in 0..n {
                terms.push(&x.comps[j] * &d(&a.comps[i], c, j));
                let transport = match m {
                    Mutation::OneFormLieIndex => &a.comps[j] * &d(&x.comps[i], c, j),
                    _ => &a.comps[j] * &d(&x.comps[j], c, i),
                };
                terms.push(if m == Mutation::OneFormLieSign { -transport } else { transport });
            }
            terms.into_iter().sum()
        })
        .collect();
    OneForm::new(c, comps)
}

/// `(L_X S)^i_j = X^k d_k S^i_j - S^k_j d_k X^i + S^i_k d_j X^k`.
pub fn lie_derivative_tensor11(x: &VectorField, s: &Tensor11) -> Result<Tensor11> {
    lie_derivative_tensor11_m(x, s, Mutation::None)
}

pub(super) fn lie_derivative_tensor11_m(x: &VectorField, s: &Tensor11, m: Mutation) -> Result<Tensor11> {
    x.chart.ensure_same(&s.chart)?;
    let c = &x.chart;
    let n = c.dim();
    let dx: Vec<Vec<Expr>> = (0..n).map(|i| (0..n).map(|k| d(&x.comps[i], c, k)).collect()).collect();
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut terms = Vec::with_capacity(3 * n);
                    for k in 0..n {
                        terms.push(&x.comps[k] * &d(&s.comps[i][j], c, k));
                        let pushed = &s.comps[k][j] * &dx[i][k];
                        terms.push(if m == Mutation::TensorLieSign { pushed } else { -pushed });
                        terms.push(match m {
                            Mutation::TensorLieIndex => &s.comps[i][k] * &dx[j][k],
                            _ => &s.comps[i][k] * &dx[k][j],
                        });
                    }
                    terms.into_iter().sum()
                })
                .collect()
        })
        .collect();
    Tensor11::new(c, rows)
}

/// `(L_X w)_ij = X^k d_k w_ij + w_kj d_i X^k + w_ik d_j X^k`.
pub fn lie_derivative_twoform(x: &VectorField, w: &TwoForm) -> Result<TwoForm> {
    x.chart.ensure_same(w.chart())?;
    let c = &x.chart;
    let n = c.dim();
    let mut out = Antisymmetric::zero(c);
    for i in 0..n {
        for j in i + 1..n {
            let mut terms = Vec::with_capacity(3 * n);
            for k in 0..n {
                terms.push(&x.comps[k] * &d(&w.get(i, j), c, k));
                terms.push(&w.get(k, j) * &d(&x.comps[k], c, i));
                terms.push(&w.get(i, k) * &d(&x.comps[k], c, j));
            }
            out.set(i, j, terms.into_iter().sum());
        }
    }
    Ok(TwoForm(out))
}

/// `(da)_ij = d_i a_j - d_j a_i`.
pub fn exterior_derivative(a: &OneForm) -> TwoForm {
    exterior_derivative_m(a, Mutation::None)
}

pub(super) fn exterior_derivative_m(a: &OneForm, m: Mutation) -> TwoForm {
    let c = &a.chart;
    let n = c.dim();
    let mut out = Antisymmetric::zero(c);
    for i in 0..n {
        for j in i + 1..n {
            let (p, q) = (d(&a.comps[j], c, i), d(&a.comps[i], c, j));
            out.set(i, j, if m == Mutation::ExteriorSign { p + q } else { p - q });
        }
    }
    TwoForm(out)
}

/// `(i_X w)_j = X^i w_ij`.
pub fn interior_product(x: &VectorField, w: &TwoForm) -> Result<OneForm> {
    interior_product_m(x, w, Mutation::None)
}

pub(super) fn interior_product_m(x: &VectorField, w: &TwoForm, m: Mutation) -> Result<OneForm> {
    x.chart.ensure_same(w.chart())?;
    let n = x.chart.dim();
    let comps = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let wij = if m == Mutation::InteriorIndex { w.get(j, i) } else { w.get(i, j) };
                    &x.comps[i] * &wij
                })
                .sum()
        })
        .collect();
    OneForm::new(&x.chart, comps)
}

/// `S(X)^i = S^i_j X^j`.
pub fn apply_tensor(s: &Tensor11, x: &VectorField) -> Result<VectorField> {
    s.chart.ensure_same(&x.chart)?;
    let n = s.chart.dim();
    let comps = (0..n).map(|i| (0..n).map(|j| &s.comps[i][j] * &x.comps[j]).sum()).collect();
    VectorField::new(&s.chart, comps)
}

/// `S*(a)_j = a_i S^i_j`.
pub fn apply_tensor_dual(s: &Tensor11, a: &OneForm) -> Result<OneForm> {
    apply_tensor_dual_m(s, a, Mutation::None)
}

pub(super) fn apply_tensor_dual_m(s: &Tensor11, a: &OneForm, m: Mutation) -> Result<OneForm> {
    s.chart.ensure_same(&a.chart)?;
    let n = s.chart.dim();
    let comps = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let sij = if m == Mutation::DualTranspose { &s.comps[j][i] } else { &s.comps[i][j] };
                    &a.comps[i] * sij
                })
                .sum()
        })
        .collect();
    OneForm::new(&s.chart, comps)
}

/// Nijenhuis torsion
/// `N^i_jk = S^m_j d_m S^i_k - S^m_k d_m S^i_j - S^i_m (d_j S^m_k - d_k S^m_j)`.
pub fn nijenhuis(s: &Tensor11) -> Torsion {
    let c = &s.chart;
    let n = c.dim();
    // ds[i][j][m] = d_m S^i_j
    let ds: Vec<Vec<Vec<Expr>>> =
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|m| d(&s.comps[i][j], c, m)).collect()).collect()).collect();
    let comps = (0..n)
        .map(|i| {
            let mut a = Antisymmetric::zero(c);
            for j in 0..n {
                for k in j + 1..n {
                    let mut terms = Vec::new();
                    for m in 0..n {
                        terms.push(&s.comps[m][j] * &ds[i][k][m]);
                        terms.push(-(&s.comps[m][k] * &ds[i][j][m]));
                        terms.push(-(&s.comps[i][m] * &(&ds[m][k][j] - &ds[m][j][k])));
                    }
                    a.set(j, k, terms.into_iter().sum());
                }
            }
            a
        })
        .collect();
    Torsion { chart: c.clone(), comps }
}

fn jacobian(phi: &CoordinateMap) -> Vec<Vec<Expr>> {
    let src = phi.source();
    phi.forward().iter().map(|f| (0..src.dim()).map(|i| d(f, src, i)).collect()).collect()
}

/// `(phi_* X)^a = (d phi^a/dx^i X^i) o phi^-1`.
pub fn pushforward(phi: &CoordinateMap, x: &VectorField) -> Result<VectorField> {
    phi.source().ensure_same(&x.chart)?;
    let bindings = phi.inverse_bindings()?;
    let jac = jacobian(phi);
    let comps = jac
        .iter()
        .map(|row| {
            let e: Expr = row.iter().zip(&x.comps).map(|(j, xi)| j * xi).sum();
            e.substitute(&bindings).map_err(Error::from)
        })
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(phi.target(), comps)
}

/// `(phi_* L)^ab = (d phi^a/dx^i d phi^b/dx^j L^ij) o phi^-1`.
pub fn pushforward_bivector(phi: &CoordinateMap, l: &Bivector) -> Result<Bivector> {
    phi.source().ensure_same(l.chart())?;
    let bindings = phi.inverse_bindings()?;
    let jac = jacobian(phi);
    let (n, m) = (phi.source().dim(), phi.target().dim());
    let mut out = Antisymmetric::zero(phi.target());
    for a in 0..m {
        for b in a + 1..m {
            let mut terms = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        terms.push(&(&jac[a][i] * &jac[b][j]) * &l.get(i, j));
                    }
                }
            }
            let e: Expr = terms.into_iter().sum();
            out.set(a, b, e.substitute(&bindings)?);
        }
    }
    Ok(Bivector(out))
}

/// `(phi* a)_i = (a_a o phi) d phi^a/dx^i`.
pub fn pullback(phi: &CoordinateMap, a: &OneForm) -> Result<OneForm> {
    pullback_m(phi, a, Mutation::None)
}

pub(super) fn pullback_m(phi: &CoordinateMap, a: &OneForm, m: Mutation) -> Result<OneForm> {
    phi.target().ensure_same(&a.chart)?;
    let bindings = phi.forward_bindings();
    let composed = a.comps.iter().map(|c| c.substitute(&bindings)).collect::<Result<Vec<_>, _>>()?;
    let jac = jacobian(phi);
    let n = phi.source().dim();
    let comps = (0..n)
        .map(|i| {
            composed
                .iter()
                .enumerate()
                .map(|(k, ak)| {
                    let j = if m == Mutation::PullbackTranspose { &jac[i][k] } else { &jac[k][i] };
                    ak * j
                })
                .sum()
        })
        .collect();
    OneForm::new(phi.source(), comps)
}

/// Pullback of a two-form: `(phi* w)_ij = (w_ab o phi) d phi^a/dx^i d phi^b/dx^j`.
pub fn pullback_twoform(phi: &CoordinateMap, w: &TwoForm) -> Result<TwoForm> {
    phi.target().ensure_same(w.chart())?;
    let bindings = phi.forward_bindings();
    let jac = jacobian(phi);
    let (n, m) = (phi.source().dim(), phi.target().dim());
    let mut composed = vec![vec![Expr::zero(); m]; m];
    for (a, row) in composed.iter_mut().enumerate() {
        for (b, slot) in row.iter_mut().enumerate() {
            *slot = w.get(a, b).substitute(&bindings)?;
        }
    }
    let mut out = Antisymmetric::zero(phi.source());
    for i in 0..n {
        for j in i + 1..n {
            let mut terms = Vec::new();
            for (a, row) in composed.iter().enumerate() {
                for (b, wab) in row.iter().enumerate() {
                    if a != b && !wab.is_zero() {
                        terms.push(&(wab * &jac[a][i]) * &jac[b][j]);
                    }
                }
            }
            out.set(i, j, terms.into_iter().sum());
        }
    }
    Ok(TwoForm(out))
}

fn pfaffian(m: &[Vec<Expr>], idx: &[usize]) -> Expr {
    if idx.is_empty() {
        return Expr::one();
    }
    let first = idx[0];
    let mut acc = Vec::new();
    for (pos, &j) in idx.iter().enumerate().skip(1) {
        let a = &m[first][j];
        if a.is_zero() {
            continue;
        }
        let rest: Vec<usize> = idx.iter().copied().filter(|&k| k != first && k != j).collect();
        let term = a * &pfaffian(m, &rest);
        // sign (-1)^(pos+1) with pos counted from 0
        acc.push(if pos % 2 == 1 { term } else { -term });
    }
    acc.into_iter().sum()
}

/// Coefficient of `w^n` relative to `dx^1 ^ ... ^ dx^2n`, i.e. `n! Pf(w)`.
pub fn wedge_top_power(w: &TwoForm) -> Result<Expr> {
    let dim = w.chart().dim();
    if dim % 2 != 0 {
        return Err(Error::OddDimension(dim));
    }
    let full = w.0.full();
    let idx: Vec<usize> = (0..dim).collect();
    let mut fact = Expr::one();
    for k in 2..=(dim / 2) as i64 {
        fact = &fact * &Expr::int(k);
    }
    Ok(&fact * &pfaffian(&full, &idx))
}
