//! Scalar abstraction shared by every numeric module.
//!
//! The library is written once against [`Real`] and instantiated for `f64`
//! (the default used by the CLI and the acceptance suite) and `f32`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion from a count.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub(crate) fn norm2<R: Real>(a: &[R]) -> R {
    dot(a, a).sqrt()
}

pub(crate) fn norm_inf<R: Real>(a: &[R]) -> R {
    a.iter().fold(R::zero(), |m, &x| m.max(x.abs()))
}

/// `x`, floored at a few hundred ulps so `f32` instantiations stay usable.
pub fn tolerance<R: Real>(x: f64) -> R {
    R::lit(x).max(R::epsilon() * R::lit(256.0))
}
