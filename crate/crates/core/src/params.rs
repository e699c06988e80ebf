//! Equation parameters and the admissible exponent set.

use crate::error::{domain, Result};
use crate::scalar::{lit, Real};
use serde::{Deserialize, Serialize};

/// Dimension, weight exponent and the energy-critical power `alpha = (4-2b)/(d-2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params<T> {
    pub d: usize,
    pub b: T,
    pub alpha: T,
    /// `b < 1 - (d-4)^2/2`, the range in which the threshold results are claimed.
    pub threshold_valid: bool,
}

impl<T: Real> Params<T> {
    pub fn new(d: usize, b: T) -> Result<Self> {
        if !(3..=5).contains(&d) {
            return domain(format!("dimension {d} not in {{3,4,5}}"));
        }
        let dt = T::of_usize(d);
        let bmax = lit::<T>(2.0).min(dt / lit(2.0));
        if !(b > T::zero() && b < bmax) {
            return domain(format!("b = {b} outside (0, {bmax})"));
        }
        let alpha = (lit::<T>(4.0) - lit::<T>(2.0) * b) / (dt - lit(2.0));
        let dm4 = dt - lit(4.0);
        let threshold_valid = b < T::one() - dm4 * dm4 / lit(2.0);
        Ok(Params { d, b, alpha, threshold_valid })
    }

    pub fn dim(&self) -> T {
        T::of_usize(self.d)
    }

    /// Exponent of the critical rescaling `mu^{-(d-2)/2}`.
    pub fn scaling_power(&self) -> T {
        (self.dim() - lit(2.0)) / lit(2.0)
    }

    pub fn exponents(&self) -> ExponentSet<T> {
        ExponentSet::new(self)
    }
}

/// Space-time exponents of the Strichartz-type norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet<T> {
    pub gamma: T,
    pub rho: T,
    pub p: T,
    /// `|(d+2)/(2d) - b/d - alpha/p - 1/rho|`
    pub spatial_defect: T,
    /// `|1/2 - (alpha+1)/gamma|`
    pub time_defect: T,
}

impl<T: Real> ExponentSet<T> {
    pub fn new(pr: &Params<T>) -> Self {
        let d = pr.dim();
        let (a, b) = (pr.alpha, pr.b);
        let two = lit::<T>(2.0);
        let gamma = two * (a + T::one());
        let rho = two * d * (a + T::one()) / (d + two - two * b + two * a);
        let p = two * d * (a + T::one()) / (d - two * b);
        let spatial_defect = ((d + two) / (two * d) - b / d - a / p - T::one() / rho).abs();
        let time_defect = (T::one() / two - (a + T::one()) / gamma).abs();
        ExponentSet { gamma, rho, p, spatial_defect, time_defect }
    }

    /// Dual Strichartz space exponent `2d/(d+2)`.
    pub fn dual_space(d: usize) -> T {
        let d = T::of_usize(d);
        lit::<T>(2.0) * d / (d + lit(2.0))
    }
}
