//! Scalar abstraction for the numerical kernels.
//!
//! Everything in the geometry/sampling layers is generic over [`Real`], so the
//! kernels run at `f32` or `f64`. The statistics and discretization layers
//! (`lawlab`, `geomlab`, `harness`) are pinned to `f64`.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::fmt::{Debug, Display};

/// Floating-point scalar usable by the kernels: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Send + Sync + Debug + Display + 'static
{
    /// Convert an `f64` literal (tolerances, constants). Must not fail for
    /// the magnitudes used in this crate.
    fn lit(x: f64) -> Self;

    /// One standard normal draw.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn to_f64_lossy(self) -> f64;
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}
