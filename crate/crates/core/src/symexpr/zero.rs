use crate::numcheck::NumericContext;
use crate::scalar::Scalar;

use super::{eval_with_scale, Expr, ExprError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroVerdict {
    /// The normal form is the constant 0.
    Zero,
    /// Some sample exceeded the tolerance.
    Nonzero,
    /// Every sample was below tolerance; probably zero.
    Undecided,
}

impl ZeroVerdict {
    /// `Zero` or `Undecided`.
    pub fn is_probably_zero(self) -> bool {
        !matches!(self, ZeroVerdict::Nonzero)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroReport<T> {
    pub verdict: ZeroVerdict,
    pub max_abs: T,
    pub max_rel: T,
    pub samples: usize,
}

/// Structural-then-probabilistic zero test.
///
/// A residual is `nonzero` when `|value| > tolerance * (1 + scale)` at some
/// sample, where `scale` is the sum of the absolute values of its terms.
/// Points that hit a domain error are resampled, up to `10 * trials` draws.
pub fn is_zero<T: Scalar>(
    e: &Expr,
    trials: usize,
    tolerance: T,
    ctx: &NumericContext<T>,
) -> Result<ZeroReport<T>, ExprError> {
    assert!(trials >= 1, "is_zero needs at least one trial");
    assert!(tolerance > T::zero(), "is_zero needs a positive tolerance");
    if e.is_zero() {
        return Ok(ZeroReport { verdict: ZeroVerdict::Zero, max_abs: T::zero(), max_rel: T::zero(), samples: 0 });
    }
    let symbols = e.free_symbols();
    let budget = 10 * trials;
    let mut report = ZeroReport { verdict: ZeroVerdict::Undecided, max_abs: T::zero(), max_rel: T::zero(), samples: 0 };
    let mut last_err = None;
    let mut attempt = 0;
    while report.samples < trials {
        if attempt >= budget {
            return Err(ExprError::SamplingBudget {
                attempts: attempt,
                last: last_err.map(|e: ExprError| e.to_string()).unwrap_or_default(),
            });
        }
        let asg = ctx.assignment(&symbols, &e.opaque_names(), attempt);
        attempt += 1;
        match eval_with_scale(e, &asg) {
            Ok((value, scale)) => {
                report.samples += 1;
                let abs = value.abs();
                let rel = abs / (T::one() + scale);
                report.max_abs = report.max_abs.max(abs);
                report.max_rel = report.max_rel.max(rel);
                if rel > tolerance {
                    report.verdict = ZeroVerdict::Nonzero;
                }
            }
            Err(err @ ExprError::Domain(_)) => last_err = Some(err),
            Err(err) => return Err(err),
        }
    }
    Ok(report)
}
