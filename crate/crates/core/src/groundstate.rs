//! The explicit ground state, its scaling derivative and the energy functionals.

use crate::error::Result;
use crate::field::{grad_norm_sq, weighted_power_integral, RadialField};
use crate::grid::RadialGrid;
use crate::params::{ExponentSet, Params};
use crate::scalar::{lit, Real};
use std::sync::Arc;

/// Closed-form profile `W(r) = (1 + r^{2-b}/((d-2)(d-b)))^{-(d-2)/(2-b)}` and derivatives.
#[derive(Clone, Copy, Debug)]
pub struct Profile<T> {
    d: T,
    b: T,
    c: T,
    p: T,
}

impl<T: Real> Profile<T> {
    pub fn new(pr: &Params<T>) -> Self {
        let d = pr.dim();
        let two = lit::<T>(2.0);
        Profile { d, b: pr.b, c: (d - two) * (d - pr.b), p: (d - two) / (two - pr.b) }
    }

    fn base(&self, r: T) -> T {
        T::one() + r.powf(lit::<T>(2.0) - self.b) / self.c
    }

    pub fn w(&self, r: T) -> T {
        self.base(r).powf(-self.p)
    }

    pub fn dw(&self, r: T) -> T {
        let k = (self.d - lit(2.0)) / self.c;
        -k * r.powf(T::one() - self.b) * self.base(r).powf(-self.p - T::one())
    }

    pub fn d2w(&self, r: T) -> T {
        let k = (self.d - lit(2.0)) / self.c;
        let a = self.base(r);
        let s = lit::<T>(2.0) - self.b;
        -k * r.powf(-self.b)
            * a.powf(-self.p - lit(2.0))
            * ((T::one() - self.b) * a - (self.p + T::one()) * s * r.powf(s) / self.c)
    }

    /// `W_1 = (d-2)/2 W + r W'`, the generator of the critical scaling at `W`.
    pub fn w1(&self, r: T) -> T {
        (self.d - lit(2.0)) / lit(2.0) * self.w(r) + r * self.dw(r)
    }

    /// `(d-2)/2 W_1 + r W_1'`.
    pub fn scaled_w1(&self, r: T) -> T {
        let h = (self.d - lit(2.0)) / lit(2.0);
        let dw1 = self.d / lit(2.0) * self.dw(r) + r * self.d2w(r);
        h * self.w1(r) + r * dw1
    }
}

/// `W` sampled at the cell centres.
pub fn eval_w<T: Real>(pr: &Params<T>, grid: &Arc<RadialGrid<T>>) -> RadialField<T> {
    let prof = Profile::new(pr);
    RadialField::from_real_fn(grid, |r| prof.w(r))
}

/// Per-cell average of `r^{-b}`, with the exterior part of `int r^{-b}|u|^{α+2}`
/// folded into the last cell so that `sum vol_j s_j |u_j|^{α+2}` is the full integral.
pub fn singular_weight<T: Real>(pr: &Params<T>, grid: &RadialGrid<T>) -> Vec<T> {
    let m = grid.moment(-pr.b).expect("b < d");
    let mut s: Vec<T> = m.iter().zip(&grid.vol).map(|(&a, &v)| a / v).collect();
    let (_, gam) = grid.exterior(0);
    let db = pr.dim() - pr.b;
    let tail = grid.omega * gam.powf(pr.alpha + lit(2.0)) * grid.r_max.powf(db) / db;
    let n = grid.n;
    s[n - 1] = s[n - 1] + tail / grid.vol[n - 1];
    s
}

#[derive(Clone, Debug)]
pub struct GroundState<T> {
    pub params: Params<T>,
    pub grid: Arc<RadialGrid<T>>,
    pub profile: Profile<T>,
    pub w: RadialField<T>,
    pub w1: RadialField<T>,
    /// `r^{-b}` cell weights, see [`singular_weight`].
    pub weight: Vec<T>,
    /// `V = r^{-b} W^α` on cells.
    pub potential: Vec<T>,
    pub grad_norm_sq: T,
    pub potential_integral: T,
    pub energy: T,
    /// `|‖∇W‖² - ∫ r^{-b} W^{α+2}| / ‖∇W‖²`.
    pub pohozhaev_residual: T,
    /// `‖ΔW + r^{-b}W^{α+1}‖ / ‖r^{-b}W^{α+1}‖` in `L^{2d/(d+2)}` over the interior cells.
    pub elliptic_residual: T,
}

impl<T: Real> GroundState<T> {
    pub fn new(pr: &Params<T>, grid: &Arc<RadialGrid<T>>) -> Result<Self> {
        let profile = Profile::new(pr);
        let w = eval_w(pr, grid);
        let w1 = RadialField::from_real_fn(grid, |r| profile.w1(r));
        let weight = singular_weight(pr, grid);
        let wr = w.re();
        let potential: Vec<T> = wr.iter().zip(&weight).map(|(&x, &s)| s * x.powf(pr.alpha)).collect();
        let grad = grad_norm_sq(&w);
        let pot = weighted_power_integral(&w, -pr.b, pr.alpha + lit(2.0))?;
        let energy = lit::<T>(0.5) * grad - pot / (pr.alpha + lit(2.0));
        let kw = grid.stiffness_apply(&wr);
        let q = ExponentSet::<T>::dual_space(pr.d);
        let (mut num, mut den) = (T::zero(), T::zero());
        for j in 0..grid.n - 1 {
            let src = potential[j] * wr[j];
            let res = kw[j] / grid.vol[j] - src;
            num = num + grid.vol[j] * res.abs().powf(q);
            den = den + grid.vol[j] * src.abs().powf(q);
        }
        Ok(GroundState {
            params: *pr,
            grid: grid.clone(),
            profile,
            w,
            w1,
            weight,
            potential,
            grad_norm_sq: grad,
            potential_integral: pot,
            energy,
            pohozhaev_residual: (grad - pot).abs() / grad,
            elliptic_residual: (num / den).powf(T::one() / q),
        })
    }

    /// `∫ r^{-b} |u|^{α+2}`.
    pub fn potential_energy(&self, u: &RadialField<T>) -> T {
        let q = self.params.alpha + lit(2.0);
        u.values
            .iter()
            .zip(&self.weight)
            .zip(&self.grid.vol)
            .map(|((z, &s), &v)| s * v * z.norm().powf(q))
            .sum()
    }

    pub fn energy(&self, u: &RadialField<T>) -> T {
        lit::<T>(0.5) * grad_norm_sq(u) - self.potential_energy(u) / (self.params.alpha + lit(2.0))
    }

    /// `|‖∇u‖² - ‖∇W‖²|`.
    pub fn distance(&self, u: &RadialField<T>) -> T {
        (grad_norm_sq(u) - self.grad_norm_sq).abs()
    }

    /// Ratio of the two sides of the sharp weighted Sobolev inequality; at most one.
    pub fn sharp_ratio(&self, f: &RadialField<T>) -> T {
        let h = (self.params.alpha + lit(2.0)) / lit(2.0);
        let num = self.potential_energy(f) * self.grad_norm_sq.powf(h);
        let den = self.potential_integral * grad_norm_sq(f).powf(h);
        num / den
    }

    /// Closed-form field built from a profile function evaluated at `mu r`,
    /// scaled by `e^{-i theta} mu^{(d-2)/2}`: the inverse critical rescaling.
    pub fn inverse_rescaled(&self, f: impl Fn(&Profile<T>, T) -> T, theta: T, mu: T) -> RadialField<T> {
        let amp = mu.powf(self.params.scaling_power());
        let ph = crate::scalar::C::new(theta.cos(), -theta.sin()) * amp;
        let prof = self.profile;
        RadialField::from_fn(&self.grid, |r| ph * f(&prof, mu * r))
    }
}
