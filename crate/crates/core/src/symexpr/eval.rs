use std::collections::BTreeMap;
use std::sync::Arc;

use crate::scalar::Scalar;

use super::expr::{rational_to_f64, Atom, ElemFn, Expr};
use super::ExprError;

/// Numeric realization of an opaque unary function and its derivatives.
pub trait UnaryFunction<T>: Send + Sync {
    /// The `order`-th derivative at `x`, or `None` outside the domain.
    fn eval(&self, order: u32, x: T) -> Option<T>;
}

/// The fixed nowhere-vanishing test family `f(u) = 1/(1+u^2) + 2`.
///
/// Derivatives of every order are exact: `1/(1+u^2) = Im(1/(u-i))`, so the
/// n-th derivative is `(-1)^n n! Im((u-i)^-(n+1))`.
#[derive(Clone, Copy, Debug, Default)]
pub struct TestFamily;

impl<T: Scalar> UnaryFunction<T> for TestFamily {
    fn eval(&self, order: u32, u: T) -> Option<T> {
        let one = T::one();
        let r = (u * u + one).sqrt();
        let phi = (-one).atan2(u);
        let n1 = T::from_u32(order + 1)?;
        // Im((u - i)^-(n+1)) = -r^-(n+1) sin((n+1) phi)
        let im = -(r.powi(-(order as i32 + 1))) * (n1 * phi).sin();
        let mut fact = one;
        for k in 2..=order {
            fact = fact * T::from_u32(k)?;
        }
        let sign = if order % 2 == 0 { one } else { -one };
        let base = sign * fact * im;
        Some(if order == 0 { base + T::from_u32(2)? } else { base })
    }
}

/// Companion of a radial rescaling `x -> f(|x|^2) x`.
///
/// For `s = |y|^2` of the image point, returns `g(s) = 1/f(h(s))` where `h`
/// solves `h f(h)^2 = s`; the inverse map is then `x = g(|y|^2) y`. Requires
/// `u -> u f(u)^2` to be strictly increasing, which holds for
/// [`TestFamily`]. Derivatives beyond first order use central differences.
#[derive(Clone)]
pub struct RadialInverse<T> {
    pub base: Arc<dyn UnaryFunction<T>>,
}

impl<T: Scalar> RadialInverse<T> {
    pub fn new(base: Arc<dyn UnaryFunction<T>>) -> Self {
        RadialInverse { base }
    }

    fn solve_h(&self, s: T) -> Option<T> {
        let two = T::from_u32(2)?;
        let phi = |h: T| -> Option<T> {
            let f = self.base.eval(0, h)?;
            Some(h * f * f - s)
        };
        let (mut lo, mut hi) = (-T::one(), T::one());
        let mut guard = 0;
        while phi(lo)? > T::zero() {
            lo = lo * two;
            guard += 1;
            if guard > 200 {
                return None;
            }
        }
        while phi(hi)? < T::zero() {
            hi = hi * two;
            guard += 1;
            if guard > 400 {
                return None;
            }
        }
        for _ in 0..200 {
            let mid = (lo + hi) / two;
            if phi(mid)? < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= T::epsilon() * (T::one() + mid.abs()) {
                break;
            }
        }
        // Newton polish.
        let mut h = (lo + hi) / two;
        for _ in 0..3 {
            let f = self.base.eval(0, h)?;
            let df = self.base.eval(1, h)?;
            let d = f * f + two * h * f * df;
            if d == T::zero() {
                break;
            }
            h = h - (h * f * f - s) / d;
        }
        Some(h)
    }
}

impl<T: Scalar> UnaryFunction<T> for RadialInverse<T> {
    fn eval(&self, order: u32, s: T) -> Option<T> {
        let two = T::from_u32(2)?;
        match order {
            0 => {
                let h = self.solve_h(s)?;
                Some(T::one() / self.base.eval(0, h)?)
            }
            1 => {
                let h = self.solve_h(s)?;
                let f = self.base.eval(0, h)?;
                let df = self.base.eval(1, h)?;
                let dh = T::one() / (f * f + two * h * f * df);
                Some(-df * dh / (f * f))
            }
            k => {
                let step = T::fd_step().sqrt() * (T::one() + s.abs());
                let a = self.eval(k - 1, s + step)?;
                let b = self.eval(k - 1, s - step)?;
                Some((a - b) / (two * step))
            }
        }
    }
}

/// Values for free symbols and realizations for opaque functions.
#[derive(Clone)]
pub struct Assignment<T> {
    pub values: BTreeMap<Arc<str>, T>,
    pub functions: BTreeMap<Arc<str>, Arc<dyn UnaryFunction<T>>>,
}

impl<T> Default for Assignment<T> {
    fn default() -> Self {
        Assignment { values: BTreeMap::new(), functions: BTreeMap::new() }
    }
}

impl<T: Scalar> Assignment<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: T) -> Self {
        self.values.insert(Arc::from(name), value);
        self
    }

    pub fn with_function(mut self, name: &str, f: Arc<dyn UnaryFunction<T>>) -> Self {
        self.functions.insert(Arc::from(name), f);
        self
    }

    pub fn set(&mut self, name: &str, value: T) {
        self.values.insert(Arc::from(name), value);
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.values.get(name).copied()
    }
}

fn check<T: Scalar>(x: T, what: &str) -> Result<T, ExprError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ExprError::Domain(format!("{what} is not finite")))
    }
}

fn eval_atom<T: Scalar>(a: &Atom, asg: &Assignment<T>) -> Result<T, ExprError> {
    match a {
        Atom::Sym(s) => asg.values.get(s).copied().ok_or_else(|| ExprError::Uncovered(s.to_string())),
        Atom::Sum(d) => eval_numeric(d, asg),
        Atom::Elem(f, arg) => {
            let x = eval_numeric(arg, asg)?;
            let y = match f {
                ElemFn::Sin => x.sin(),
                ElemFn::Cos => x.cos(),
                ElemFn::Exp => x.exp(),
                ElemFn::Log if x <= T::zero() => return Err(ExprError::Domain("log of a non-positive value".into())),
                ElemFn::Log => x.ln(),
                ElemFn::Sqrt if x < T::zero() => return Err(ExprError::Domain("sqrt of a negative value".into())),
                ElemFn::Sqrt => x.sqrt(),
            };
            check(y, f.name())
        }
        Atom::Opaque { name, order, arg } => {
            let x = eval_numeric(arg, asg)?;
            let func = asg.functions.get(name).ok_or_else(|| ExprError::Uncovered(format!("{name}()")))?;
            let y = func
                .eval(*order, x)
                .ok_or_else(|| ExprError::Domain(format!("{name} undefined at {x}")))?;
            check(y, name)
        }
    }
}

/// Evaluates every top-level term; returns `(value, sum of |term|)`.
///
/// The second component is the magnitude scale used for relative
/// residuals: a cancelling sum has a small value but a large scale.
pub fn eval_with_scale<T: Scalar>(e: &Expr, asg: &Assignment<T>) -> Result<(T, T), ExprError> {
    let mut value = T::zero();
    let mut scale = T::zero();
    for (mono, c) in e.terms() {
        let mut t = T::from_f64_lossy(rational_to_f64(c));
        for (a, &k) in mono {
            let x = eval_atom(a, asg)?;
            if k < 0 && x == T::zero() {
                return Err(ExprError::Domain("division by zero".into()));
            }
            t = t * x.powi(k as i32);
        }
        let t = check(t, "term")?;
        value = value + t;
        scale = scale + t.abs();
    }
    Ok((check(value, "value")?, scale))
}

/// IEEE evaluation of `e` under `asg`.
pub fn eval_numeric<T: Scalar>(e: &Expr, asg: &Assignment<T>) -> Result<T, ExprError> {
    eval_with_scale(e, asg).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::parse;

    fn fam() -> Arc<dyn UnaryFunction<f64>> {
        Arc::new(TestFamily)
    }

    #[test]
    fn test_family_derivatives_match_closed_forms() {
        for &u in &[-1.7f64, -0.3, 0.0, 0.4, 2.0] {
            let d1 = -2.0 * u / (1.0 + u * u).powi(2);
            let d2 = (6.0 * u * u - 2.0) / (1.0 + u * u).powi(3);
            let f: &dyn UnaryFunction<f64> = &TestFamily;
            assert!((f.eval(0, u).unwrap() - (1.0 / (1.0 + u * u) + 2.0)).abs() < 1e-14);
            assert!((f.eval(1, u).unwrap() - d1).abs() < 1e-14);
            assert!((f.eval(2, u).unwrap() - d2).abs() < 1e-13);
        }
    }

    #[test]
    fn plain_values() {
        let e = parse("x1^2 + x2^2").unwrap();
        let a = Assignment::new().with("x1", 3.0).with("x2", 4.0);
        assert_eq!(eval_numeric(&e, &a).unwrap(), 25.0);
        assert_eq!(eval_numeric(&Expr::frac(7, 2), &Assignment::<f64>::new()).unwrap(), 3.5);
    }

    #[test]
    fn opaque_at_unit_point() {
        let e = parse("f(x1^2+x2^2)*x1").unwrap();
        let a = Assignment::new().with("x1", 1.0).with("x2", 0.0).with_function("f", fam());
        assert!((eval_numeric(&e, &a).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn single_precision_evaluation() {
        let e = parse("f(x)*x - 1/2").unwrap();
        let a = Assignment::<f32>::new().with("x", 1.0).with_function("f", Arc::new(TestFamily));
        assert!((eval_numeric(&e, &a).unwrap() - 2.0f32).abs() < 1e-6);
    }

    #[test]
    fn radial_inverse_undoes_the_rescaling() {
        let g = RadialInverse { base: fam() };
        for &(x1, x2) in &[(0.3, -1.2), (1.5, 0.7), (-0.2, -0.4)] {
            let r2: f64 = x1 * x1 + x2 * x2;
            let f = TestFamily.eval(0, r2).unwrap();
            let (q, v) = (f * x1, f * x2);
            let s = q * q + v * v;
            let gs = UnaryFunction::<f64>::eval(&g, 0, s).unwrap();
            assert!((gs * q - x1).abs() < 1e-12);
            assert!((gs * v - x2).abs() < 1e-12);
            let h = 1e-6;
            let fd = (g.eval(0, s + h).unwrap() - g.eval(0, s - h).unwrap()) / (2.0 * h);
            assert!((g.eval(1, s).unwrap() - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn uncovered_and_domain_errors() {
        let a = Assignment::<f64>::new().with("x", -1.0);
        assert!(matches!(eval_numeric(&parse("y").unwrap(), &a), Err(ExprError::Uncovered(_))));
        assert!(matches!(eval_numeric(&parse("log(x)").unwrap(), &a), Err(ExprError::Domain(_))));
        assert!(matches!(eval_numeric(&parse("g(x)").unwrap(), &a), Err(ExprError::Uncovered(_))));
        let z = Assignment::<f64>::new().with("x", 0.0);
        assert!(matches!(eval_numeric(&parse("1/x").unwrap(), &z), Err(ExprError::Domain(_))));
    }
}
