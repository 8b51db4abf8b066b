//! Scalar abstraction: the toolkit is generic over the underlying real type.
//!
//! Everything downstream works with `Complex<T>` for some `T: Scalar`; the
//! concrete aliases at the crate root fix `T = f64`, which is what the CLI
//! and the acceptance suite use.

use num_complex::Complex;

/// Real scalar type usable throughout the toolkit.
///
/// Combines the floating-point surface of `num_traits::Float` (needed by
/// `num_complex`), the linear-algebra requirements of `nalgebra::RealField`
/// and the FFT requirements of `rustfft::FftNum`.
pub trait Scalar:
    nalgebra::RealField
    + num_traits::Float
    + num_traits::FloatConst
    + num_traits::ToPrimitive
    + rustfft::FftNum
    + std::iter::Sum
{
    /// Lossy conversion from `f64`, used for tolerances and fixed constants.
    fn of(x: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(x).expect("finite constant")
    }

    fn of_usize(n: usize) -> Self {
        <Self as num_traits::FromPrimitive>::from_usize(n).expect("representable index")
    }
}

impl<T> Scalar for T where
    T: nalgebra::RealField
        + num_traits::Float
        + num_traits::FloatConst
        + num_traits::ToPrimitive
        + rustfft::FftNum
        + std::iter::Sum
{
}

/// Integer power of a complex number by repeated multiplication.
pub fn cpowu<T: Scalar>(z: Complex<T>, n: usize) -> Complex<T> {
    let mut acc = Complex::new(T::one(), T::zero());
    let mut base = z;
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base *= base;
        k >>= 1;
    }
    acc
}

/// Wrap an angle difference into `(-pi, pi]`.
pub fn wrap_angle<T: Scalar>(delta: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut d = delta;
    while d > T::PI() {
        d -= two_pi;
    }
    while d <= -T::PI() {
        d += two_pi;
    }
    d
}
