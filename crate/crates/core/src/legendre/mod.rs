//! Metrics on the base, geodesic Lagrangians, fiber derivatives and the
//! transport of `theta^g = S*(dL)` to the dual chart.
//!
//! Everything here works in adapted coordinates: the tangent structure's
//! base and fiber generators must be coordinate symbols of its chart.

use crate::bundle::{ensure_basic, hat_oneform, TangentStructure};
use crate::cotangent::{liouville_from_theta, nowhere_zero, verify_cotangent_structure, CotangentStructure};
use crate::error::{Error, Result};
use crate::geom::linalg::{self, pivot_ok};
use crate::geom::{apply_tensor_dual, differential, exterior_derivative, interior_product, pullback, pushforward};
use crate::geom::{Chart, CoordinateMap, OneForm, VectorField};
use crate::numcheck::{assess, Assessment, DenseMatrix, NumericContext};
use crate::report::StructureReport;
use crate::scalar::Scalar;
use crate::symexpr::Expr;

/// Symmetric `g_jk` over base generators.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    pub base: Vec<Expr>,
    pub g: Vec<Vec<Expr>>,
}

impl Metric {
    pub fn new(base: Vec<Expr>, g: Vec<Vec<Expr>>) -> Result<Self> {
        let n = base.len();
        if g.len() != n {
            return Err(Error::Dimension { expected: n, got: g.len() });
        }
        for (j, row) in g.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, got: row.len() });
            }
            for k in 0..j {
                if row[k] != g[k][j] {
                    return Err(Error::Precondition(format!("metric not symmetric at ({j}, {k})")));
                }
            }
        }
        Ok(Metric { base, g })
    }

    pub fn identity(base: Vec<Expr>) -> Self {
        let n = base.len();
        let g = (0..n)
            .map(|j| (0..n).map(|k| if j == k { Expr::one() } else { Expr::zero() }).collect())
            .collect();
        Metric { base, g }
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// Cholesky at every sample point of the components' support.
    pub fn is_positive_definite<T: Scalar>(&self, ctx: &NumericContext<T>) -> Result<bool> {
        let (syms, ops) = NumericContext::<T>::support(self.g.iter().flatten());
        let ok = ctx.sample_points(&syms, &ops, ctx.domain.points, |asg| {
            Ok(DenseMatrix::evaluate(&self.g, asg)?.is_positive_definite())
        })?;
        Ok(ok.into_iter().all(|b| b))
    }

    /// Errors unless positive definite; with `allow_indefinite` only
    /// invertibility is required.
    pub fn validate<T: Scalar>(&self, allow_indefinite: bool, ctx: &NumericContext<T>) -> Result<()> {
        if allow_indefinite {
            if pivot_ok(&linalg::determinant(&self.g), ctx)? {
                return Ok(());
            }
            return Err(Error::NotHyperregular);
        }
        if self.is_positive_definite(ctx)? {
            Ok(())
        } else {
            Err(Error::Precondition("metric is not positive definite on the sample".into()))
        }
    }
}

/// Chart positions of the base and fiber generators.
fn adapted(t: &TangentStructure) -> Result<(Vec<usize>, Vec<usize>)> {
    let chart = t.chart();
    let find = |gens: &[Expr]| -> Result<Vec<usize>> {
        gens.iter()
            .map(|e| {
                e.as_symbol()
                    .and_then(|s| chart.index_of(s))
                    .ok_or_else(|| Error::NotAdapted(format!("generator {e} is not a coordinate of {}", chart.name())))
            })
            .collect()
    };
    Ok((find(&t.pls.base)?, find(&t.pls.fiber)?))
}

fn fiber_names(t: &TangentStructure) -> Result<Vec<String>> {
    let (_, fib) = adapted(t)?;
    Ok(fib.iter().map(|&i| t.chart().coords()[i].clone()).collect())
}

/// `L_g = g_jk v^j v^k / 2`.
pub fn geodesic_lagrangian(g: &Metric, t: &TangentStructure) -> Result<Expr> {
    if g.base != t.pls.base {
        return Err(Error::Precondition("metric and tangent structure have different base generators".into()));
    }
    let v = &t.pls.fiber;
    let mut acc = Expr::zero();
    for (j, row) in g.g.iter().enumerate() {
        for (k, gjk) in row.iter().enumerate() {
            acc = &acc + &(&(gjk * &v[j]) * &v[k]);
        }
    }
    Ok(&acc * &Expr::frac(1, 2))
}

/// `d^2 L / dv^k dv^l`.
pub fn fiber_hessian(l: &Expr, t: &TangentStructure) -> Result<Vec<Vec<Expr>>> {
    let v = fiber_names(t)?;
    Ok(v.iter().map(|a| v.iter().map(|b| l.diff(a).diff(b)).collect()).collect())
}

/// Fiber derivative `(x, v) -> (x, p = dL/dv)` with its inverse.
#[derive(Clone, Debug)]
pub struct LegendreMap {
    pub map: CoordinateMap,
    pub lagrangian: Expr,
    pub tangent: TangentStructure,
}

impl LegendreMap {
    pub fn dual_chart(&self) -> &Chart {
        self.map.target()
    }

    /// Momentum coordinates of the dual chart.
    pub fn momenta(&self) -> Vec<Expr> {
        let (_, fib) = adapted(&self.tangent).expect("checked at construction");
        fib.iter().map(|&i| self.dual_chart().coord(i)).collect()
    }

    /// Base coordinates of the dual chart.
    pub fn base(&self) -> Vec<Expr> {
        let (base, _) = adapted(&self.tangent).expect("checked at construction");
        base.iter().map(|&i| self.dual_chart().coord(i)).collect()
    }
}

/// `p` for one fiber direction, `p1..pn` otherwise.
pub fn default_momentum_names(n: usize) -> Vec<String> {
    if n == 1 {
        vec!["p".into()]
    } else {
        (1..=n).map(|i| format!("p{i}")).collect()
    }
}

fn dual_chart(t: &TangentStructure, momenta: &[String]) -> Result<Chart> {
    let (_, fib) = adapted(t)?;
    if momenta.len() != fib.len() {
        return Err(Error::Dimension { expected: fib.len(), got: momenta.len() });
    }
    let mut names = t.chart().coords().to_vec();
    for (&i, m) in fib.iter().zip(momenta) {
        names[i] = m.clone();
    }
    Chart::new(&format!("{}*", t.chart().name()), &names)
        .map_err(|_| Error::Precondition(format!("momentum names {momenta:?} clash with the base coordinates")))
}

fn forward_components(l: &Expr, t: &TangentStructure, dual: &Chart) -> Result<Vec<Expr>> {
    let (_, fib) = adapted(t)?;
    let chart = t.chart();
    Ok((0..chart.dim())
        .map(|i| match fib.iter().position(|&f| f == i) {
            Some(_) => l.diff(&chart.coords()[i]),
            None => dual.coord(i),
        })
        .collect())
}

/// Fiber derivative with momenta named by [`default_momentum_names`].
pub fn fiber_derivative<T: Scalar>(l: &Expr, t: &TangentStructure, ctx: &NumericContext<T>) -> Result<LegendreMap> {
    fiber_derivative_named(l, t, &default_momentum_names(t.pls.fiber.len()), ctx)
}

/// Fiber derivative of a Lagrangian at most quadratic in the fibers; the
/// inverse is `v = G^-1 (p - b)` for `p = G v + b`.
pub fn fiber_derivative_named<T: Scalar>(
    l: &Expr,
    t: &TangentStructure,
    momenta: &[String],
    ctx: &NumericContext<T>,
) -> Result<LegendreMap> {
    let dual = dual_chart(t, momenta)?;
    let v = fiber_names(t)?;
    let hess = fiber_hessian(l, t)?;
    if hess.iter().flatten().any(|h| v.iter().any(|s| h.depends_on(s))) {
        return Err(Error::NonQuadratic(l.to_string()));
    }
    let det = linalg::determinant(&hess);
    if !pivot_ok(&det, ctx)? {
        return Err(Error::NotHyperregular);
    }
    let zero_fiber: Vec<(&str, Expr)> = v.iter().map(|s| (s.as_str(), Expr::zero())).collect();
    let shifted: Vec<Vec<Expr>> = v
        .iter()
        .zip(momenta)
        .map(|(s, m)| Ok(vec![&Expr::symbol(m) - &l.diff(s).subs(zero_fiber.clone())?]))
        .collect::<Result<_>>()?;
    let sol = linalg::solve(&hess, &shifted, ctx)?;
    let (_, fib) = adapted(t)?;
    let inverse = (0..dual.dim())
        .map(|i| match fib.iter().position(|&f| f == i) {
            Some(k) => sol[k][0].clone(),
            None => t.chart().coord(i),
        })
        .collect();
    let forward = forward_components(l, t, &dual)?;
    let map = CoordinateMap::new("FL", t.chart(), &dual, forward, Some(inverse))?;
    finish(map, l, t, ctx)
}

/// Fiber derivative with a caller-supplied inverse, for Lagrangians that
/// are not fiber-quadratic. `inverse` lists the tangent-chart coordinates
/// as functions on the dual chart.
pub fn fiber_derivative_with_inverse<T: Scalar>(
    l: &Expr,
    t: &TangentStructure,
    momenta: &[String],
    inverse: Vec<Expr>,
    ctx: &NumericContext<T>,
) -> Result<LegendreMap> {
    let dual = dual_chart(t, momenta)?;
    let forward = forward_components(l, t, &dual)?;
    let map = CoordinateMap::new("FL", t.chart(), &dual, forward, Some(inverse))?;
    finish(map, l, t, ctx)
}

fn finish<T: Scalar>(map: CoordinateMap, l: &Expr, t: &TangentStructure, ctx: &NumericContext<T>) -> Result<LegendreMap> {
    let a = map.check_inverse(ctx)?;
    if !a.verdict.passes(false) {
        return Err(Error::MissingInverse(format!("fiber derivative inverse fails the round trip: {}", a.summary.max_abs)));
    }
    Ok(LegendreMap { map, lagrangian: l.clone(), tangent: t.clone() })
}

/// `theta^g = S*(dL)`.
pub fn theta_g(l: &Expr, t: &TangentStructure) -> Result<OneForm> {
    apply_tensor_dual(&t.s, &differential(t.chart(), l))
}

/// Residuals of `i_Delta d theta^g - theta^g`.
pub fn theta_g_liouville_residuals(theta: &OneForm, t: &TangentStructure) -> Result<Vec<Expr>> {
    Ok(interior_product(t.delta(), &exterior_derivative(theta))?.sub(theta)?.comps().to_vec())
}

/// A one-form transported to the dual chart together with its checks.
#[derive(Clone, Debug)]
pub struct TransportedStructure {
    pub structure: CotangentStructure,
    /// `FL_* Delta` of the tangent structure.
    pub pushed_liouville: VectorField,
    pub report: StructureReport,
}

/// `(FL^-1)* theta`. The attached report verifies the result with the
/// Liouville field recovered from `theta` itself.
pub fn transport_theta<T: Scalar>(fl: &LegendreMap, theta: &OneForm, ctx: &NumericContext<T>) -> Result<TransportedStructure> {
    let inv = fl.map.inverted()?;
    let moved = pullback(&inv, theta)?;
    let pushed_liouville = pushforward(&fl.map, fl.tangent.delta())?;
    let base = fl.base();
    let report = verify_cotangent_structure(&moved, &base, None, ctx);
    let delta = liouville_from_theta(&moved, ctx).ok();
    let structure = CotangentStructure::new(moved, base, fl.momenta(), delta)?;
    Ok(TransportedStructure { structure, pushed_liouville, report })
}

/// Residuals of `FL* (transported theta) - theta`.
pub fn round_trip_residuals(fl: &LegendreMap, transported: &OneForm, theta: &OneForm) -> Result<Vec<Expr>> {
    Ok(pullback(&fl.map, transported)?.sub(theta)?.comps().to_vec())
}

/// `L + v^i dF/dq^i`.
pub fn gauge_shift<T: Scalar>(l: &Expr, f: &Expr, t: &TangentStructure, ctx: &NumericContext<T>) -> Result<Expr> {
    ensure_basic(std::slice::from_ref(f), &t.pls.subalgebra(), ctx)?;
    let (base, _) = adapted(t)?;
    let df: Vec<Expr> = base.iter().map(|&i| f.diff(&t.chart().coords()[i])).collect();
    Ok(l + &hat_oneform(&df, t, ctx)?)
}

/// `theta^g(L)` transported along the fiber derivative of the shifted
/// Lagrangian. Its Liouville field vanishes on `p = dF`.
pub fn shifted_structure<T: Scalar>(
    l: &Expr,
    f: &Expr,
    t: &TangentStructure,
    ctx: &NumericContext<T>,
) -> Result<(LegendreMap, TransportedStructure)> {
    let shifted = fiber_derivative(&gauge_shift(l, f, t, ctx)?, t, ctx)?;
    let moved = transport_theta(&shifted, &theta_g(l, t)?, ctx)?;
    Ok((shifted, moved))
}

/// Residuals of `FL_shifted - tau o FL` with `tau(q, p) = (q, p + dF)`.
pub fn gauge_translation_residuals(fl: &LegendreMap, shifted: &LegendreMap, f: &Expr) -> Result<Vec<Expr>> {
    fl.dual_chart().ensure_same(shifted.dual_chart())?;
    let (base, fib) = adapted(&fl.tangent)?;
    let coords = fl.tangent.chart().coords();
    let mut out = Vec::new();
    for i in 0..fl.dual_chart().dim() {
        let a = &fl.map.forward()[i];
        let b = &shifted.map.forward()[i];
        out.push(match fib.iter().position(|&k| k == i) {
            Some(k) => &(b - a) - &f.diff(&coords[base[k]]),
            None => b - a,
        });
    }
    Ok(out)
}

/// `FL2 o FL1^-1` on the dual chart.
#[derive(Clone, Debug)]
pub struct Fouling<T> {
    pub map: CoordinateMap,
    /// Pullback of `p_k dq^k` along the map.
    pub pulled_theta: OneForm,
    pub preserves_theta: Assessment<T>,
}

pub fn fouling_composition<T: Scalar>(fl1: &LegendreMap, fl2: &LegendreMap, ctx: &NumericContext<T>) -> Result<Fouling<T>> {
    if fl1.tangent != fl2.tangent {
        return Err(Error::Precondition("Legendre maps come from different tangent structures".into()));
    }
    fl1.dual_chart().ensure_same(fl2.dual_chart())?;
    let map = fl2.map.compose_after(&fl1.map.inverted()?)?;
    let theta0 = canonical_dual_theta(fl1)?;
    let pulled_theta = pullback(&map, &theta0)?;
    let preserves_theta = assess(pulled_theta.sub(&theta0)?.comps(), ctx)?;
    Ok(Fouling { map, pulled_theta, preserves_theta })
}

/// `p_k dq^k` on the dual chart.
pub fn canonical_dual_theta(fl: &LegendreMap) -> Result<OneForm> {
    let (base, _) = adapted(&fl.tangent)?;
    let dual = fl.dual_chart();
    let mut comps = vec![Expr::zero(); dual.dim()];
    for (&i, p) in base.iter().zip(fl.momenta()) {
        comps[i] = p;
    }
    OneForm::new(dual, comps)
}

/// Nonvanishing fiber Hessian determinant: a structural pivot test when
/// the Hessian is fiber-independent, sampling otherwise.
pub fn is_hyperregular<T: Scalar>(l: &Expr, t: &TangentStructure, ctx: &NumericContext<T>) -> Result<bool> {
    let v = fiber_names(t)?;
    let det = linalg::determinant(&fiber_hessian(l, t)?);
    if v.iter().any(|s| det.depends_on(s)) {
        Ok(nowhere_zero(&det, ctx)?.0)
    } else {
        pivot_ok(&det, ctx)
    }
}
