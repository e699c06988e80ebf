//! Complex radial fields and the basic functionals on them.
//!
//! A pair field `(v1, v2)` is stored as the complex field `v1 + i v2`.

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::scalar::{lit, Real, C};
use num_traits::Zero;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct RadialField<T> {
    pub grid: Arc<RadialGrid<T>>,
    pub values: Vec<C<T>>,
}

impl<T: Real> RadialField<T> {
    pub fn zeros(grid: &Arc<RadialGrid<T>>) -> Self {
        RadialField { grid: grid.clone(), values: vec![C::zero(); grid.n] }
    }

    pub fn from_complex(grid: &Arc<RadialGrid<T>>, values: Vec<C<T>>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::GridMismatch);
        }
        Ok(RadialField { grid: grid.clone(), values })
    }

    pub fn from_real(grid: &Arc<RadialGrid<T>>, values: &[T]) -> Result<Self> {
        Self::from_complex(grid, values.iter().map(|&v| C::new(v, T::zero())).collect())
    }

    pub fn from_parts(grid: &Arc<RadialGrid<T>>, re: &[T], im: &[T]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::GridMismatch);
        }
        Self::from_complex(grid, re.iter().zip(im).map(|(&a, &b)| C::new(a, b)).collect())
    }

    pub fn from_fn(grid: &Arc<RadialGrid<T>>, f: impl Fn(T) -> C<T>) -> Self {
        RadialField { grid: grid.clone(), values: grid.r.iter().map(|&r| f(r)).collect() }
    }

    pub fn from_real_fn(grid: &Arc<RadialGrid<T>>, f: impl Fn(T) -> T) -> Self {
        Self::from_fn(grid, |r| C::new(f(r), T::zero()))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn re(&self) -> Vec<T> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn im(&self) -> Vec<T> {
        self.values.iter().map(|z| z.im).collect()
    }

    pub fn abs(&self) -> Vec<T> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn check_same(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_c(&self, s: C<T>) -> Self {
        self.map(|z| z * s)
    }

    /// Multiplication by `i`, i.e. `(v1, v2) -> (-v2, v1)`.
    pub fn times_i(&self) -> Self {
        self.map(|z| C::new(-z.im, z.re))
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        RadialField { grid: self.grid.clone(), values: self.values.iter().map(|&z| f(z)).collect() }
    }

    pub fn axpy(&self, a: T, x: &Self) -> Result<Self> {
        self.check_same(x)?;
        Ok(RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&x.values).map(|(&y, &xv)| y + xv * a).collect(),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Value at `r_max` of the exterior continuation.
    pub fn boundary_value(&self) -> C<T> {
        let (_, gam) = self.grid.exterior(0);
        self.values[self.grid.n - 1] * gam
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }
}

impl<'a, T: Real> Add for &'a RadialField<T> {
    type Output = RadialField<T>;
    fn add(self, o: Self) -> RadialField<T> {
        assert!(self.check_same(o).is_ok(), "grid mismatch");
        RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&o.values).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<'a, T: Real> Sub for &'a RadialField<T> {
    type Output = RadialField<T>;
    fn sub(self, o: Self) -> RadialField<T> {
        assert!(self.check_same(o).is_ok(), "grid mismatch");
        RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&o.values).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<'a, T: Real> Mul<T> for &'a RadialField<T> {
    type Output = RadialField<T>;
    fn mul(self, s: T) -> RadialField<T> {
        self.scale(s)
    }
}

/// `int f dx` over the computational ball.
pub fn integrate_radial<T: Real>(f: &RadialField<T>) -> C<T> {
    f.values.iter().zip(&f.grid.vol).fold(C::zero(), |acc, (&z, &w)| acc + z * w)
}

/// `(int r^e |f|^q dx)^{1/q}`.
///
/// The exterior continuation `f(r_max) (r_max/r)^{d-2}` is included when its
/// contribution is finite; otherwise the integral is over the computational ball.
pub fn norm_l2_weighted<T: Real>(f: &RadialField<T>, e: T, q: T) -> Result<T> {
    Ok(weighted_power_integral(f, e, q)?.powf(T::one() / q))
}

/// `int r^e |f|^q dx` with the same exterior convention as [`norm_l2_weighted`].
pub fn weighted_power_integral<T: Real>(f: &RadialField<T>, e: T, q: T) -> Result<T> {
    let g = &f.grid;
    let dt = T::of_usize(g.d);
    if !(e > T::one() - dt) {
        return crate::error::domain(format!("weight exponent {e} must exceed {}", T::one() - dt));
    }
    if !(q > T::zero()) {
        return crate::error::domain("power must be positive");
    }
    let m = g.moment(e)?;
    let mut s: T = f.values.iter().zip(&m).map(|(z, &w)| z.norm().powf(q) * w).sum();
    let decay = (dt - lit(2.0)) * q - e - dt;
    if decay > T::zero() {
        let ub = f.boundary_value().norm();
        if ub > T::zero() {
            s = s + g.omega * ub.powf(q) * g.r_max.powf(e + dt) / decay;
        }
    }
    Ok(s)
}

/// Real Hilbert product `Re int grad f . conj(grad g)`, including the exterior energy.
pub fn inner_h1<T: Real>(f: &RadialField<T>, g: &RadialField<T>) -> Result<T> {
    f.check_same(g)?;
    Ok(inner_h1_raw(&f.grid, &f.values, &g.values))
}

pub(crate) fn inner_h1_raw<T: Real>(grid: &RadialGrid<T>, f: &[C<T>], g: &[C<T>]) -> T {
    let n = grid.n;
    let mut s = T::zero();
    for k in 1..n {
        let df = f[k] - f[k - 1];
        let dg = g[k] - g[k - 1];
        s = s + grid.link[k - 1] * (df.re * dg.re + df.im * dg.im);
    }
    let (beta, _) = grid.exterior(0);
    s + beta * (f[n - 1].re * g[n - 1].re + f[n - 1].im * g[n - 1].im)
}

/// Real `L^2` product `Re int f conj(g)` over the computational ball.
pub fn inner_l2<T: Real>(f: &RadialField<T>, g: &RadialField<T>) -> Result<T> {
    f.check_same(g)?;
    Ok(f.values
        .iter()
        .zip(&g.values)
        .zip(&f.grid.vol)
        .map(|((a, b), &w)| (a.re * b.re + a.im * b.im) * w)
        .sum())
}

pub fn norm_l2<T: Real>(f: &RadialField<T>) -> T {
    f.values.iter().zip(&f.grid.vol).map(|(z, &w)| z.norm_sqr() * w).sum::<T>().sqrt()
}

pub fn grad_norm_sq<T: Real>(f: &RadialField<T>) -> T {
    inner_h1_raw(&f.grid, &f.values, &f.values)
}

/// Kinetic energy carried by each face, the last entry being the exterior part.
/// Entry `k < n-1` sits at radius `faces[k+1]`.
pub fn face_energies<T: Real>(f: &RadialField<T>) -> Vec<T> {
    let g = &f.grid;
    let mut out: Vec<T> = (1..g.n).map(|k| g.link[k - 1] * (f.values[k] - f.values[k - 1]).norm_sqr()).collect();
    let (beta, _) = g.exterior(0);
    out.push(beta * f.values[g.n - 1].norm_sqr());
    out
}

/// Centred radial derivative.
pub fn derivative_r<T: Real>(f: &RadialField<T>) -> RadialField<T> {
    let g = &f.grid;
    let st = g.derivative_stencils();
    let n = g.n;
    let v = &f.values;
    let values = (0..n)
        .map(|j| {
            let [a, b, c] = st[j];
            let left = if j > 0 { v[j - 1] * a } else { C::zero() };
            let right = if j + 1 < n { v[j + 1] * c } else { C::zero() };
            left + v[j] * b + right
        })
        .collect();
    RadialField { grid: g.clone(), values }
}

/// Critical rescaling `e^{i theta} mu^{-(d-2)/2} f(r/mu)` resampled on the same grid.
pub fn rescale<T: Real>(f: &RadialField<T>, theta: T, mu: T) -> Result<RadialField<T>> {
    if !(mu > T::zero()) || !mu.is_finite() {
        return crate::error::domain(format!("scale {mu} must be positive"));
    }
    let interp = Interpolant::new(f);
    let amp = mu.powf(-(T::of_usize(f.grid.d) - lit(2.0)) / lit(2.0));
    let ph = C::new(theta.cos(), theta.sin()) * amp;
    Ok(RadialField::from_fn(&f.grid, |r| interp.eval(r / mu) * ph))
}

/// Shape-preserving cubic interpolation in `log r`, even at the origin and
/// continued by the exterior profile past `r_max`.
pub struct Interpolant<T> {
    x: Vec<T>,
    re: Vec<T>,
    im: Vec<T>,
    sre: Vec<T>,
    sim: Vec<T>,
    r0: T,
    r1: T,
    rn: T,
    r_max: T,
    boundary: C<T>,
    decay: T,
    last: C<T>,
}

impl<T: Real> Interpolant<T> {
    pub fn new(f: &RadialField<T>) -> Self {
        let g = &f.grid;
        let x: Vec<T> = g.r.iter().map(|r| r.ln()).collect();
        let re = f.re();
        let im = f.im();
        let sre = pchip_slopes(&x, &re);
        let sim = pchip_slopes(&x, &im);
        Interpolant {
            r0: g.r[0],
            r1: g.r[1],
            rn: g.r[g.n - 1],
            r_max: g.r_max,
            boundary: f.boundary_value(),
            decay: T::of_usize(g.d) - lit(2.0),
            last: f.values[g.n - 1],
            x,
            re,
            im,
            sre,
            sim,
        }
    }

    pub fn eval(&self, r: T) -> C<T> {
        if r <= self.r0 {
            // even in r near the origin
            let t = (r * r - self.r0 * self.r0) / (self.r1 * self.r1 - self.r0 * self.r0);
            let a = C::new(self.re[0], self.im[0]);
            let b = C::new(self.re[1], self.im[1]);
            return a + (b - a) * t;
        }
        if r >= self.r_max {
            return self.boundary * (self.r_max / r).powf(self.decay);
        }
        if r >= self.rn {
            let t = (r - self.rn) / (self.r_max - self.rn);
            return self.last + (self.boundary - self.last) * t;
        }
        let lx = r.ln();
        let k = match self.x.binary_search_by(|v| v.partial_cmp(&lx).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(k) => k.min(self.x.len() - 2),
            Err(k) => (k - 1).min(self.x.len() - 2),
        };
        C::new(hermite(&self.x, &self.re, &self.sre, k, lx), hermite(&self.x, &self.im, &self.sim, k, lx))
    }
}

fn hermite<T: Real>(x: &[T], y: &[T], m: &[T], k: usize, t: T) -> T {
    let h = x[k + 1] - x[k];
    let s = (t - x[k]) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = three * s2 - two * s3;
    let h11 = s3 - s2;
    h00 * y[k] + h10 * h * m[k] + h01 * y[k + 1] + h11 * h * m[k + 1]
}

fn pchip_slopes<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    let n = x.len();
    let h: Vec<T> = (0..n - 1).map(|k| x[k + 1] - x[k]).collect();
    let del: Vec<T> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut m = vec![T::zero(); n];
    let two = lit::<T>(2.0);
    for k in 1..n - 1 {
        if del[k - 1] * del[k] > T::zero() {
            let w1 = two * h[k] + h[k - 1];
            let w2 = h[k] + two * h[k - 1];
            m[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
        }
    }
    let end = |h0: T, h1: T, d0: T, d1: T| -> T {
        let mut s = ((two * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= T::zero() {
            s = T::zero();
        } else if d0 * d1 <= T::zero() && s.abs() > (lit::<T>(3.0) * d0).abs() {
            s = lit::<T>(3.0) * d0;
        }
        s
    };
    m[0] = end(h[0], h[1], del[0], del[1]);
    m[n - 1] = end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    m
}
