//! Decreasing rearrangements, Lorentz quasi-norms and space-time norms.
//!
//! The rearrangement of a grid field is the exact step function obtained by
//! sorting cell values against their cell measures, so `L^{r,r}` norms agree
//! with the cell quadrature of `L^r`. For `ρ = ∞` the supremum of
//! `s^{1/r} f*(s)` is taken at the sample abscissae: the measure of the part
//! of the sorted cells lying inside each sample's own radius. For a radially
//! decreasing field that abscissa is `|B(r_j)|`, where `f*` equals `f(r_j)`.

use crate::error::{domain, Result};
use crate::field::{derivative_r, RadialField};
use crate::params::{ExponentSet, Params};
use crate::scalar::{lit, Real};

#[derive(Clone, Debug)]
pub struct Rearrangement<T> {
    /// Decreasing values.
    pub values: Vec<T>,
    /// Right end of each step.
    pub breaks: Vec<T>,
    /// Sample abscissa inside each step.
    pub samples: Vec<T>,
}

impl<T: Real> Rearrangement<T> {
    /// Value of `f*` at `s` (right-continuous).
    pub fn eval(&self, s: T) -> T {
        let k = self.breaks.partition_point(|&b| b <= s);
        if k < self.values.len() {
            self.values[k]
        } else {
            T::zero()
        }
    }
}

pub fn rearrangement<T: Real>(f: &RadialField<T>) -> Rearrangement<T> {
    rearrange_values(&f.grid, &f.abs())
}

pub(crate) fn rearrange_values<T: Real>(grid: &crate::grid::RadialGrid<T>, a: &[T]) -> Rearrangement<T> {
    let mut idx: Vec<usize> = (0..a.len()).collect();
    // ties broken by radius so the result is deterministic
    idx.sort_by(|&i, &j| a[j].partial_cmp(&a[i]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j)));
    let d = grid.d as i32;
    let mut acc = T::zero();
    let mut values = Vec::with_capacity(a.len());
    let mut breaks = Vec::with_capacity(a.len());
    let mut samples = Vec::with_capacity(a.len());
    for &j in &idx {
        let inner = (grid.r[j].powi(d) - grid.faces[j].powi(d)) / (grid.faces[j + 1].powi(d) - grid.faces[j].powi(d));
        samples.push(acc + inner * grid.vol[j]);
        acc = acc + grid.vol[j];
        breaks.push(acc);
        values.push(a[j]);
    }
    Rearrangement { values, breaks, samples }
}

/// `‖f‖_{L^{r,ρ}}`; pass `rho = +∞` for the weak space.
pub fn lorentz_norm<T: Real>(f: &RadialField<T>, r: T, rho: T) -> Result<T> {
    lorentz_of(&rearrangement(f), r, rho)
}

pub fn lorentz_of<T: Real>(fs: &Rearrangement<T>, r: T, rho: T) -> Result<T> {
    if !(r > T::zero() && r.is_finite()) {
        return domain(format!("Lorentz exponent r = {r} must be positive and finite"));
    }
    if !(rho > T::zero()) {
        return domain(format!("Lorentz exponent rho = {rho} must be positive"));
    }
    if rho.is_infinite() {
        let inv = T::one() / r;
        return Ok(fs.values.iter().zip(&fs.samples).fold(T::zero(), |m, (&v, &s)| m.max(s.powf(inv) * v)));
    }
    let e = rho / r;
    let mut prev = T::zero();
    let mut acc = T::zero();
    for (&v, &s) in fs.values.iter().zip(&fs.breaks) {
        let sp = s.powf(e);
        if v > T::zero() {
            acc = acc + v.powf(rho) * (sp - prev);
        }
        prev = sp;
    }
    Ok(acc.powf(T::one() / rho))
}

/// Lorentz norm of a function given through its rearrangement `f*`,
/// evaluated on `[s_lo, s_hi]` (Gauss-Legendre in `log s`; supremum on a fine log grid for `ρ = ∞`).
pub fn lorentz_norm_analytic<T: Real>(fstar: impl Fn(T) -> T, r: T, rho: T, s_lo: T, s_hi: T) -> Result<T> {
    if !(s_lo > T::zero() && s_hi > s_lo) {
        return domain("need 0 < s_lo < s_hi");
    }
    let (a, b) = (s_lo.ln(), s_hi.ln());
    if rho.is_infinite() {
        let m = 20000;
        let mut best = T::zero();
        for i in 0..=m {
            let t = a + (b - a) * T::of_usize(i) / T::of_usize(m);
            let s = t.exp();
            best = best.max(s.powf(T::one() / r) * fstar(s));
        }
        return Ok(best);
    }
    let (nodes, weights) = gauss_legendre::<T>(32);
    let panels = 64;
    let h = (b - a) / T::of_usize(panels);
    let mut acc = T::zero();
    for p in 0..panels {
        let c = a + h * (T::of_usize(p) + lit(0.5));
        for (x, w) in nodes.iter().zip(&weights) {
            let t = c + h * *x / lit(2.0);
            let s = t.exp();
            acc = acc + *w * h / lit(2.0) * (s.powf(T::one() / r) * fstar(s)).powf(rho);
        }
    }
    Ok((rho / r * acc).powf(T::one() / rho))
}

/// Nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = T::lit(z);
        w[i] = T::lit(2.0 / ((1.0 - z * z) * dp * dp));
    }
    (x, w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceTime {
    /// `L^γ_t L^{p,2}_x`
    S,
    /// `L^γ_t L^{ρ,2}_x` of the gradient
    Z,
    /// `L^2_t L^{2d/(d+2),2}_x`
    N,
}

/// Spatial part of a space-time norm at one time.
pub fn spatial_norm<T: Real>(kind: SpaceTime, u: &RadialField<T>, pr: &Params<T>) -> Result<T> {
    let ex = pr.exponents();
    let two = lit::<T>(2.0);
    match kind {
        SpaceTime::S => lorentz_norm(u, ex.p, two),
        SpaceTime::Z => lorentz_norm(&derivative_r(u), ex.rho, two),
        SpaceTime::N => lorentz_norm(u, ExponentSet::<T>::dual_space(pr.d), two),
    }
}

/// Space-time norm of a sampled trajectory (trapezoid rule in time).
pub fn spacetime_norm<T: Real>(kind: SpaceTime, snaps: &[(T, RadialField<T>)], pr: &Params<T>) -> Result<T> {
    if snaps.len() < 2 {
        return domain("need at least two time samples");
    }
    let q = match kind {
        SpaceTime::S | SpaceTime::Z => pr.exponents().gamma,
        SpaceTime::N => lit(2.0),
    };
    let vals = snaps.iter().map(|(_, u)| spatial_norm(kind, u, pr).map(|v| v.powf(q))).collect::<Result<Vec<T>>>()?;
    let mut acc = T::zero();
    for k in 1..snaps.len() {
        acc = acc + (snaps[k].0 - snaps[k - 1].0).abs() * (vals[k] + vals[k - 1]) / lit(2.0);
    }
    Ok(acc.powf(T::one() / q))
}
