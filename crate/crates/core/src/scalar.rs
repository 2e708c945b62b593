//! Scalar traits shared by every numerical routine.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, One, ToPrimitive, Zero};
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, Neg, SubAssign};

/// Real floating-point type: implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + num_traits::float::TotalOrder
    + Sum
    + Default
    + Debug
    + Display
    + std::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn c<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in T")
}

/// Converts a count into `T`.
#[inline]
pub fn cu<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in T")
}

/// Field element usable by the banded solver: real or complex.
pub trait Scalar:
    Copy
    + Zero
    + One
    + Neg<Output = Self>
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Debug
    + Send
    + Sync
    + 'static
{
    type Re: Real;
    /// Modulus used for pivot selection.
    fn modulus(self) -> Self::Re;
    /// Embeds a real number.
    fn from_re(x: Self::Re) -> Self;
}

impl<T: Real> Scalar for T {
    type Re = T;
    #[inline]
    fn modulus(self) -> T {
        self.abs()
    }
    #[inline]
    fn from_re(x: T) -> T {
        x
    }
}

impl<T: Real> Scalar for Complex<T> {
    type Re = T;
    #[inline]
    fn modulus(self) -> T {
        self.norm()
    }
    #[inline]
    fn from_re(x: T) -> Self {
        Complex::new(x, T::zero())
    }
}
