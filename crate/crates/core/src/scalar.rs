//! Scalar abstraction shared by every numerical module.
//!
//! All routines are written against [`Real`], which is implemented for every
//! nalgebra real field that `num-traits` can convert, in practice `f32` and
//! `f64`. Literal constants go through [`Real::lit`] so the generic code
//! never hard-codes a float width.

use nalgebra::{Complex, RealField};
use num_traits::ToPrimitive;

/// Real scalar usable by the solvers.
pub trait Real: RealField + Copy + Send + Sync + std::fmt::Debug + 'static {
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// Lossy conversion to `f64` for reporting and cost bookkeeping.
    fn to_f64(self) -> f64;

    /// Converts a count into `Self`.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// Unit roundoff of the type.
    fn eps() -> Self {
        Self::default_epsilon()
    }
}

impl<T> Real for T
where
    T: RealField + ToPrimitive + Copy + Send + Sync + std::fmt::Debug + 'static,
{
    #[inline]
    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

/// Complex number over a [`Real`] scalar.
pub type Cplx<T> = Complex<T>;

/// Builds a complex number from real and imaginary parts.
#[inline]
pub fn c<T: Real>(re: T, im: T) -> Cplx<T> {
    Complex::new(re, im)
}

/// Promotes a real to a complex number.
#[inline]
pub fn cr<T: Real>(re: T) -> Cplx<T> {
    Complex::new(re, T::zero())
}

/// Sign of `x` as -1, 0 or 1.
#[inline]
pub fn sgn<T: Real>(x: T) -> i8 {
    if x > T::zero() {
        1
    } else if x < T::zero() {
        -1
    } else {
        0
    }
}
