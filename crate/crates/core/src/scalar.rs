//! Floating-point scalars used by the numeric oracle.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// A floating-point type the numeric oracle can run on: `f32` or `f64`.
///
/// The tolerances are per-type so that the same checks stay meaningful at
/// single precision, where `1e-9` is below machine epsilon.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Relative tolerance for algebraic residuals.
    fn algebraic_tolerance() -> Self;
    /// Relative tolerance for finite-difference comparisons.
    fn fd_tolerance() -> Self;
    /// Step for central differences and flow transport.
    fn fd_step() -> Self;
    /// Singular values below `rank_threshold * sigma_max` count as zero.
    fn rank_threshold() -> Self;

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(Self::nan)
    }
}

impl Scalar for f64 {
    fn algebraic_tolerance() -> Self {
        1e-9
    }
    fn fd_tolerance() -> Self {
        1e-5
    }
    fn fd_step() -> Self {
        1e-5
    }
    fn rank_threshold() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn algebraic_tolerance() -> Self {
        1e-4
    }
    fn fd_tolerance() -> Self {
        5e-2
    }
    fn fd_step() -> Self {
        1e-2
    }
    fn rank_threshold() -> Self {
        1e-4
    }
}
