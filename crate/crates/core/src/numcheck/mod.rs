//! Independent numeric oracle.
//!
//! Random-point sampling, residual sweeps, singular-value rank, and the
//! finite-difference checks that back every symbolic verdict. Nothing here
//! calls the symbolic differentiator except where noted on the function.

mod dense;
mod flow;
pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;
use crate::symexpr::{eval_with_scale, Assignment, Expr, ExprError, TestFamily, UnaryFunction};

pub use dense::{singular_values, solve_dense, DenseMatrix};
pub use flow::{flow_check_lie_derivative, LieObject};

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_POINTS: usize = 25;

/// `[neg.0, neg.1] ∪ [pos.0, pos.1]`, sampled with equal weight per side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalPair<T> {
    pub neg: (T, T),
    pub pos: (T, T),
}

impl<T: Scalar> IntervalPair<T> {
    /// `[-hi, -lo] ∪ [lo, hi]`.
    pub fn symmetric(lo: T, hi: T) -> Self {
        IntervalPair { neg: (-hi, -lo), pos: (lo, hi) }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> T {
        let u = T::from_f64_lossy(rng.gen::<f64>());
        let (a, b) = if rng.gen::<bool>() { self.pos } else { self.neg };
        a + (b - a) * u
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleDomain<T> {
    pub default: IntervalPair<T>,
    pub overrides: BTreeMap<String, IntervalPair<T>>,
    pub points: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for SampleDomain<T> {
    fn default() -> Self {
        SampleDomain {
            default: IntervalPair::symmetric(T::from_f64_lossy(0.1), T::from_f64_lossy(2.0)),
            overrides: BTreeMap::new(),
            points: DEFAULT_POINTS,
            seed: DEFAULT_SEED,
        }
    }
}

impl<T: Scalar> SampleDomain<T> {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_points(mut self, points: usize) -> Self {
        self.points = points;
        self
    }

    pub fn interval_for(&self, symbol: &str) -> IntervalPair<T> {
        self.overrides.get(symbol).copied().unwrap_or(self.default)
    }
}

fn mix(seed: u64, index: usize) -> u64 {
    // splitmix64 step
    let mut z = seed.wrapping_add((index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sampling domain, opaque realizations, and tolerances shared by all checks.
#[derive(Clone)]
pub struct NumericContext<T> {
    pub domain: SampleDomain<T>,
    /// Samples per zero test.
    pub trials: usize,
    /// Relative tolerance for algebraic residuals.
    pub tolerance: T,
    /// Relative tolerance for finite-difference comparisons.
    pub fd_tolerance: T,
    /// Realizations of opaque functions; unlisted names use [`TestFamily`].
    pub opaques: BTreeMap<Arc<str>, Arc<dyn UnaryFunction<T>>>,
}

impl<T: Scalar> Default for NumericContext<T> {
    fn default() -> Self {
        NumericContext {
            domain: SampleDomain::default(),
            trials: DEFAULT_POINTS,
            tolerance: T::algebraic_tolerance(),
            fd_tolerance: T::fd_tolerance(),
            opaques: BTreeMap::new(),
        }
    }
}

impl<T: Scalar> NumericContext<T> {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.domain.seed = seed;
        self
    }

    pub fn with_opaque(mut self, name: &str, f: Arc<dyn UnaryFunction<T>>) -> Self {
        self.opaques.insert(Arc::from(name), f);
        self
    }

    pub fn opaque(&self, name: &str) -> Arc<dyn UnaryFunction<T>> {
        self.opaques.get(name).cloned().unwrap_or_else(|| Arc::new(TestFamily))
    }

    /// The `index`-th sample point over `symbols`, deterministic in the seed.
    pub fn assignment(
        &self,
        symbols: &BTreeSet<Arc<str>>,
        opaques: &BTreeSet<Arc<str>>,
        index: usize,
    ) -> Assignment<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(self.domain.seed, index));
        let mut asg = Assignment::new();
        for s in symbols {
            asg.values.insert(s.clone(), self.domain.interval_for(s).sample(&mut rng));
        }
        for f in opaques {
            asg.functions.insert(f.clone(), self.opaque(f));
        }
        asg
    }

    /// Collects the symbols and opaque names of a family of expressions.
    pub fn support<'a>(exprs: impl IntoIterator<Item = &'a Expr>) -> (BTreeSet<Arc<str>>, BTreeSet<Arc<str>>) {
        let mut syms = BTreeSet::new();
        let mut ops = BTreeSet::new();
        for e in exprs {
            syms.extend(e.free_symbols());
            ops.extend(e.opaque_names());
        }
        (syms, ops)
    }

    /// Draws `count` points on which `eval` succeeds, resampling past domain
    /// errors up to `10 * count` attempts.
    pub fn sample_points<R>(
        &self,
        symbols: &BTreeSet<Arc<str>>,
        opaques: &BTreeSet<Arc<str>>,
        count: usize,
        mut eval: impl FnMut(&Assignment<T>) -> Result<R, ExprError>,
    ) -> Result<Vec<R>, ExprError> {
        let mut out = Vec::with_capacity(count);
        let mut attempt = 0;
        let mut last = String::new();
        while out.len() < count {
            if attempt >= 10 * count.max(1) {
                return Err(ExprError::SamplingBudget { attempts: attempt, last });
            }
            let asg = self.assignment(symbols, opaques, attempt);
            attempt += 1;
            match eval(&asg) {
                Ok(r) => out.push(r),
                Err(ExprError::Domain(m)) => last = m,
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }
}

/// Aggregated residuals over a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualSummary<T> {
    pub max_abs: T,
    pub max_rel: T,
    pub points: usize,
    pub pass: bool,
}

impl<T: Scalar> ResidualSummary<T> {
    pub fn exact() -> Self {
        ResidualSummary { max_abs: T::zero(), max_rel: T::zero(), points: 0, pass: true }
    }

    /// Max-based merge; order independent.
    pub fn merge(self, other: Self) -> Self {
        ResidualSummary {
            max_abs: self.max_abs.max(other.max_abs),
            max_rel: self.max_rel.max(other.max_rel),
            points: self.points.max(other.points),
            pass: self.pass && other.pass,
        }
    }
}

/// Evaluates every residual at every sample point of the context's domain.
///
/// Relative residual is `|r| / (1 + scale)` with `scale` the sum of the
/// absolute term values of `r` at that point.
pub fn residual_sweep<T: Scalar>(
    residuals: &[Expr],
    ctx: &NumericContext<T>,
    tolerance: T,
) -> Result<ResidualSummary<T>, ExprError> {
    assert!(tolerance > T::zero());
    let live: Vec<&Expr> = residuals.iter().filter(|r| !r.is_zero()).collect();
    if live.is_empty() {
        return Ok(ResidualSummary { points: ctx.domain.points, ..ResidualSummary::exact() });
    }
    let (syms, ops) = NumericContext::<T>::support(live.iter().copied());
    let per_point = ctx.sample_points(&syms, &ops, ctx.domain.points, |asg| {
        let mut abs = T::zero();
        let mut rel = T::zero();
        for r in &live {
            let (v, scale) = eval_with_scale(r, asg)?;
            abs = abs.max(v.abs());
            rel = rel.max(v.abs() / (T::one() + scale));
        }
        Ok((abs, rel))
    })?;
    let (max_abs, max_rel) = per_point
        .iter()
        .fold((T::zero(), T::zero()), |(a, r), &(pa, pr)| (a.max(pa), r.max(pr)));
    Ok(ResidualSummary { max_abs, max_rel, points: per_point.len(), pass: max_rel <= tolerance })
}

/// Three-way outcome of a symbolic identity check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Pass,
    ProbablyZero,
    Fail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::ProbablyZero => "probably-zero",
            Verdict::Fail => "fail",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Passing unless `strict` and only probably zero.
    pub fn passes(self, strict: bool) -> bool {
        match self {
            Verdict::Pass => true,
            Verdict::ProbablyZero => !strict,
            Verdict::Fail => false,
        }
    }

    pub fn and(self, other: Verdict) -> Verdict {
        self.max(other)
    }
}

/// Outcome of checking that a family of residuals vanishes.
#[derive(Clone, Debug, PartialEq)]
pub struct Assessment<T> {
    pub verdict: Verdict,
    pub summary: ResidualSummary<T>,
    /// Index of the first residual that failed, when one did.
    pub offending: Option<usize>,
}

/// Structural test first; residuals that survive normalization are swept.
pub fn assess<T: Scalar>(residuals: &[Expr], ctx: &NumericContext<T>) -> Result<Assessment<T>, ExprError> {
    if residuals.iter().all(Expr::is_zero) {
        return Ok(Assessment { verdict: Verdict::Pass, summary: ResidualSummary::exact(), offending: None });
    }
    let summary = residual_sweep(residuals, ctx, ctx.tolerance)?;
    if summary.pass {
        return Ok(Assessment { verdict: Verdict::ProbablyZero, summary, offending: None });
    }
    let mut offending = None;
    for (i, r) in residuals.iter().enumerate() {
        if !r.is_zero() && !residual_sweep(std::slice::from_ref(r), ctx, ctx.tolerance)?.pass {
            offending = Some(i);
            break;
        }
    }
    Ok(Assessment { verdict: Verdict::Fail, summary, offending })
}

/// Minimum and maximum numeric rank over the sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankRange {
    pub min: usize,
    pub max: usize,
}

/// Rank of the matrix of expressions at each sample point, by singular
/// values with threshold `rank_threshold * sigma_max`.
pub fn numeric_rank<T: Scalar>(rows: &[Vec<Expr>], ctx: &NumericContext<T>) -> Result<RankRange, ExprError> {
    if rows.is_empty() {
        return Ok(RankRange { min: 0, max: 0 });
    }
    let (syms, ops) = NumericContext::<T>::support(rows.iter().flatten());
    let ranks = ctx.sample_points(&syms, &ops, ctx.domain.points, |asg| {
        let m = DenseMatrix::evaluate(rows, asg)?;
        Ok(m.rank())
    })?;
    Ok(RankRange {
        min: ranks.iter().copied().min().unwrap_or(0),
        max: ranks.iter().copied().max().unwrap_or(0),
    })
}

#[cfg(test)]
mod tests;
