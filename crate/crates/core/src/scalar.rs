//! Scalar abstraction shared by the grid, field and operator layers.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Sum + Send + Sync + 'static
{
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("representable literal")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("representable integer")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}

/// Surface area of the unit sphere in R^d.
pub fn sphere_area<T: Real>(d: usize) -> T {
    // 2 pi^{d/2} / Gamma(d/2), Gamma at integers and half-integers
    let half = T::lit(0.5);
    let mut gamma = if d % 2 == 0 { T::one() } else { T::PI().sqrt() };
    let mut k = if d % 2 == 0 { T::one() } else { half };
    let target = T::of_usize(d) * half;
    while k < target - half * half {
        gamma = gamma * k;
        k = k + T::one();
    }
    T::lit(2.0) * T::PI().powf(target) / gamma
}

/// Volume of the unit ball in R^d.
pub fn ball_volume<T: Real>(d: usize) -> T {
    sphere_area::<T>(d) / T::of_usize(d)
}
