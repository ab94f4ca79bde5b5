//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type the solvers are generic over.
///
/// Implemented for `f32` and `f64`. Tolerance defaults depend on the
/// precision, so each implementation carries its own.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Default absolute tolerance for the splitting solver residuals.
    const SOLVER_TOL: f64;
    /// Default tolerance for certificate residuals.
    const CERT_TOL: f64;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const SOLVER_TOL: f64 = 1e-8;
    const CERT_TOL: f64 = 1e-5;
}

impl Scalar for f32 {
    const SOLVER_TOL: f64 = 1e-4;
    const CERT_TOL: f64 = 2e-3;
}

/// Small dense-vector helpers over slices.
pub(crate) mod vec {
    use super::Scalar;

    #[inline]
    pub fn dist2<T: Scalar>(a: &[T], b: &[T]) -> T {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (x - y) * (x - y))
            .fold(T::zero(), |s, v| s + v)
    }

    #[inline]
    pub fn dist<T: Scalar>(a: &[T], b: &[T]) -> T {
        dist2(a, b).sqrt()
    }

    #[inline]
    pub fn norm<T: Scalar>(a: &[T]) -> T {
        a.iter().fold(T::zero(), |s, &v| s + v * v).sqrt()
    }

    #[inline]
    pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
        a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
    }
}
