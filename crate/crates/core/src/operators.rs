//! Linearized operators around the ground state.
//!
//! `L₊ = -Δ - (α+1)V`, `L₋ = -Δ - V` with `V = r^{-b}W^α`, per angular sector
//! `l` (adding `l(l+d-2)/r²`). They are stored as symmetric tridiagonal
//! matrices in the variable `w_j = sqrt(vol_j) u_j`, the discrete analogue of
//! `r^{(d-1)/2} u`.

use crate::error::Result;
use crate::field::{inner_h1, RadialField};
use crate::groundstate::GroundState;
use crate::params::ExponentSet;
use crate::scalar::{lit, Real, C};
use num_traits::Zero;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Plus,
    Minus,
}

#[derive(Clone, Debug)]
pub struct SectorOperator<T> {
    pub ell: usize,
    pub kind: Kind,
    pub diag: Vec<T>,
    pub off: Vec<T>,
    pub sqrt_vol: Vec<T>,
}

impl<T: Real> SectorOperator<T> {
    pub fn assemble(gs: &GroundState<T>, ell: usize, kind: Kind) -> Self {
        let g = &gs.grid;
        let (k_diag, k_off) = g.stiffness(ell);
        let c = match kind {
            Kind::Plus => gs.params.alpha + T::one(),
            Kind::Minus => T::one(),
        };
        let sqrt_vol: Vec<T> = g.vol.iter().map(|v| v.sqrt()).collect();
        let diag = (0..g.n).map(|j| k_diag[j] / g.vol[j] - c * gs.potential[j]).collect();
        let off = (0..g.n - 1).map(|j| k_off[j] / (sqrt_vol[j] * sqrt_vol[j + 1])).collect();
        SectorOperator { ell, kind, diag, off, sqrt_vol }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Product with the symmetric matrix.
    pub fn apply_sym(&self, w: &[T]) -> Vec<T> {
        let n = self.n();
        (0..n)
            .map(|j| {
                let mut s = self.diag[j] * w[j];
                if j > 0 {
                    s = s + self.off[j - 1] * w[j - 1];
                }
                if j + 1 < n {
                    s = s + self.off[j] * w[j + 1];
                }
                s
            })
            .collect()
    }

    /// The operator acting on cell values.
    pub fn apply(&self, u: &[T]) -> Vec<T> {
        let w: Vec<T> = u.iter().zip(&self.sqrt_vol).map(|(&a, &s)| a * s).collect();
        self.apply_sym(&w).iter().zip(&self.sqrt_vol).map(|(&a, &s)| a / s).collect()
    }

    pub fn to_sym(&self, u: &[T]) -> Vec<T> {
        u.iter().zip(&self.sqrt_vol).map(|(&a, &s)| a * s).collect()
    }

    pub fn from_sym(&self, w: &[T]) -> Vec<T> {
        w.iter().zip(&self.sqrt_vol).map(|(&a, &s)| a / s).collect()
    }
}

/// Both radial operators.
#[derive(Clone, Debug)]
pub struct Linearized<T> {
    pub plus: SectorOperator<T>,
    pub minus: SectorOperator<T>,
}

impl<T: Real> Linearized<T> {
    pub fn new(gs: &GroundState<T>) -> Self {
        Linearized { plus: SectorOperator::assemble(gs, 0, Kind::Plus), minus: SectorOperator::assemble(gs, 0, Kind::Minus) }
    }

    /// `𝓛(v₁, v₂) = ((Δ+V)v₂, -(Δ+(α+1)V)v₁) = (-L₋v₂, L₊v₁)`.
    pub fn apply(&self, v: &RadialField<T>) -> RadialField<T> {
        let a = self.minus.apply(&v.im());
        let b = self.plus.apply(&v.re());
        RadialField { grid: v.grid.clone(), values: a.iter().zip(&b).map(|(&x, &y)| C::new(-x, y)).collect() }
    }
}

/// `Q(g) = ½∫|∇g|² - ½∫V((α+1)g₁² + g₂²)`.
pub fn quadratic_q<T: Real>(gs: &GroundState<T>, g: &RadialField<T>) -> Result<T> {
    bilinear_b(gs, g, g)
}

/// Polarisation of `Q`.
pub fn bilinear_b<T: Real>(gs: &GroundState<T>, f: &RadialField<T>, g: &RadialField<T>) -> Result<T> {
    let kin = inner_h1(f, g)?;
    let a1 = gs.params.alpha + T::one();
    let pot: T = f
        .values
        .iter()
        .zip(&g.values)
        .zip(gs.potential.iter().zip(&gs.grid.vol))
        .map(|((x, y), (&v, &w))| v * w * (a1 * x.re * y.re + x.im * y.im))
        .sum();
    Ok(lit::<T>(0.5) * (kin - pot))
}

/// `J(z) = |1+z|^α(1+z) - 1 - (α+2)/2 z - α/2 z̄`.
pub fn j_function<T: Real>(alpha: T, z: C<T>) -> C<T> {
    let one = C::new(T::one(), T::zero());
    let w = one + z;
    w * w.norm().powf(alpha) - one - z * ((alpha + lit(2.0)) / lit(2.0)) - z.conj() * (alpha / lit(2.0))
}

/// Taylor coefficients `a_{j₁j₂}` of `J(z) = Σ a z^{j₁} z̄^{j₂}` with `2 ≤ j₁+j₂ ≤ deg`,
/// from `(1+z)^{1+α/2}(1+z̄)^{α/2}`.
pub fn j_coefficients<T: Real>(alpha: T, deg: usize) -> Vec<(usize, usize, T)> {
    let binom = |a: T, k: usize| -> T {
        let mut c = T::one();
        for i in 0..k {
            c = c * (a - T::of_usize(i)) / T::of_usize(i + 1);
        }
        c
    };
    let h = alpha / lit(2.0);
    let mut out = vec![];
    for tot in 2..=deg {
        for j1 in (0..=tot).rev() {
            let j2 = tot - j1;
            out.push((j1, j2, binom(h + T::one(), j1) * binom(h, j2)));
        }
    }
    out
}

pub fn j_series<T: Real>(coeffs: &[(usize, usize, T)], z: C<T>) -> C<T> {
    coeffs.iter().fold(C::zero(), |acc, &(j1, j2, a)| acc + z.powu(j1 as u32) * z.conj().powu(j2 as u32) * a)
}

/// `R(v) = -i r^{-b} W^{α+1} J(v/W)`, the nonlinear part of `∂ₜv + 𝓛v + R(v) = 0`.
pub fn remainder<T: Real>(gs: &GroundState<T>, v: &RadialField<T>) -> RadialField<T> {
    let a = gs.params.alpha;
    let w = &gs.w.values;
    let values = v
        .values
        .iter()
        .enumerate()
        .map(|(j, &vj)| {
            let wj = w[j].re;
            let j_val = j_function(a, vj / wj);
            let amp = gs.weight[j] * wj.powf(a + T::one());
            C::new(j_val.im * amp, -j_val.re * amp)
        })
        .collect();
    RadialField { grid: v.grid.clone(), values }
}

/// Same quantity written out term by term; used as a cross-check.
pub fn remainder_direct<T: Real>(gs: &GroundState<T>, v: &RadialField<T>) -> RadialField<T> {
    let a = gs.params.alpha;
    let i = C::new(T::zero(), T::one());
    let values = v
        .values
        .iter()
        .enumerate()
        .map(|(j, &vj)| {
            let s = gs.weight[j];
            let wj = gs.w.values[j].re;
            let u = C::new(wj, T::zero()) + vj;
            -i * u * (s * u.norm().powf(a)) + i * (s * wj.powf(a + T::one())) + i * ((a + T::one()) * s * wj.powf(a) * vj.re)
                - C::new(s * wj.powf(a) * vj.im, T::zero())
        })
        .collect();
    RadialField { grid: v.grid.clone(), values }
}

/// Residuals of `L₋W = 0` and `L₊W₁ = 0`.
#[derive(Clone, Copy, Debug)]
pub struct KernelCheck<T> {
    /// `‖L₋W‖/‖W‖` in `L²`.
    pub minus_l2: T,
    pub plus_l2: T,
    /// Interior residual relative to the potential term, in `L^{2d/(d+2)}`.
    pub minus_dual: T,
    pub plus_dual: T,
}

pub fn kernel_check<T: Real>(gs: &GroundState<T>) -> KernelCheck<T> {
    let op = Linearized::new(gs);
    let g = &gs.grid;
    let w = gs.w.re();
    let w1 = gs.w1.re();
    let lw = op.minus.apply(&w);
    let lw1 = op.plus.apply(&w1);
    let l2 = |x: &[T]| x.iter().zip(&g.vol).map(|(&a, &v)| a * a * v).sum::<T>().sqrt();
    let q = ExponentSet::<T>::dual_space(gs.params.d);
    let dual = |x: &[T]| {
        (0..g.n - 1).map(|j| g.vol[j] * x[j].abs().powf(q)).sum::<T>().powf(T::one() / q)
    };
    let a1 = gs.params.alpha + T::one();
    let vw: Vec<T> = w.iter().zip(&gs.potential).map(|(&a, &v)| a * v).collect();
    let vw1: Vec<T> = w1.iter().zip(&gs.potential).map(|(&a, &v)| a1 * a * v).collect();
    KernelCheck {
        minus_l2: l2(&lw) / l2(&w),
        plus_l2: l2(&lw1) / l2(&w1),
        minus_dual: dual(&lw) / dual(&vw),
        plus_dual: dual(&lw1) / dual(&vw1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{RadialGrid, Stretch};
    use crate::params::Params;
    use std::sync::Arc;

    fn gs(d: usize, b: f64, n: usize) -> GroundState<f64> {
        let pr = Params::new(d, b).unwrap();
        let g = Arc::new(RadialGrid::new(d, n, 100.0, Stretch::default()).unwrap());
        GroundState::new(&pr, &g).unwrap()
    }

    #[test]
    fn j_coefficients_for_cubic_power() {
        let c = j_coefficients(2.0f64, 3);
        let find = |a: usize, b: usize| c.iter().find(|t| t.0 == a && t.1 == b).unwrap().2;
        assert!((find(2, 0) - 1.0).abs() < 1e-15);
        assert!((find(1, 1) - 2.0).abs() < 1e-15);
        assert!((find(2, 1) - 1.0).abs() < 1e-15);
        assert!(find(0, 2).abs() < 1e-15 && find(3, 0).abs() < 1e-15);
    }

    #[test]
    fn j_series_truncation_order() {
        let a = 1.3f64;
        let z = C::new(0.1, 0.05);
        for deg in [2usize, 3, 4, 5] {
            let err = (j_series(&j_coefficients(a, deg), z) - j_function(a, z)).norm();
            assert!(err < 4.0 * z.norm().powi(deg as i32 + 1), "deg {deg}: {err}");
        }
        let e4 = (j_series(&j_coefficients(a, 4), z) - j_function(a, z)).norm();
        let e6 = (j_series(&j_coefficients(a, 6), z) - j_function(a, z)).norm();
        assert!(e6 < e4 * 0.05);
    }

    #[test]
    fn factored_and_direct_remainders_agree() {
        let s = gs(3, 0.3, 256);
        let v = RadialField::from_fn(&s.grid, |r| C::new(0.1 * (-r).exp(), -0.05 * (-r * r).exp()));
        let a = remainder(&s, &v);
        let b = remainder_direct(&s, &v);
        let scale = b.max_abs();
        assert!((&a - &b).max_abs() < 1e-12 * scale);
    }

    #[test]
    fn kernel_residuals_are_small_and_converge() {
        for d in 3..=5 {
            let mut prev: Option<KernelCheck<f64>> = None;
            for n in [512, 1024, 2048] {
                let k = kernel_check(&gs(d, 0.3, n));
                assert!(k.minus_l2 < 1e-3 && k.plus_l2 < 1e-3);
                if let Some(p) = prev {
                    assert!(p.minus_dual / k.minus_dual > 3.0, "d={d} n={n}");
                    assert!(p.plus_dual / k.plus_dual > 3.0, "d={d} n={n}");
                }
                prev = Some(k);
            }
        }
    }

    #[test]
    fn forms_at_the_ground_state() {
        let s = gs(4, 0.5, 1024);
        let a = s.params.alpha;
        // Q(W) = -(α/2) ∫ r^{-b} W^{α+2}
        let q = quadratic_q(&s, &s.w).unwrap();
        let exact = -0.5 * a * s.potential_integral;
        assert!((q - exact).abs() / exact.abs() < 1e-4);
    }

    #[test]
    fn kernel_directions_are_b_orthogonal_in_the_limit() {
        // B(iW, f) and B(W₁, f) vanish up to the discretisation error
        let mut prev: Option<(f64, f64)> = None;
        for n in [512, 1024, 2048] {
            let s = gs(4, 0.5, n);
            let f = RadialField::from_fn(&s.grid, |r: f64| C::new((-r).exp() * r, (-0.5 * r).exp()));
            let b1 = bilinear_b(&s, &s.w.times_i(), &f).unwrap().abs();
            let b2 = bilinear_b(&s, &s.w1, &f).unwrap().abs();
            if let Some((p1, p2)) = prev {
                assert!(p1 / b1 > 3.0 && p2 / b2 > 3.0, "n={n}: {b1} {b2}");
            }
            prev = Some((b1, b2));
        }
        let (b1, b2) = prev.unwrap();
        assert!(b1 < 2e-4 && b2 < 2e-4);
    }

    #[test]
    fn matrix_operator_structure() {
        let s = gs(3, 0.3, 128);
        let op = Linearized::new(&s);
        let v = RadialField::from_fn(&s.grid, |r| C::new((-r).exp(), 0.0));
        let lv = op.apply(&v);
        // real input maps to purely imaginary output
        assert!(lv.re().iter().all(|x| x.abs() < 1e-14));
        let pv = op.plus.apply(&v.re());
        for (a, b) in lv.im().iter().zip(&pv) {
            assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn higher_sector_is_positive() {
        let s = gs(3, 0.3, 256);
        let op = SectorOperator::assemble(&s, 1, Kind::Plus);
        let (ev, _) = crate::linalg::tridiag_eigh(&op.diag, &op.off).unwrap();
        assert!(ev[0] > -1e-6);
    }
}
