//! Approximate threshold solutions `W + Σ_{j≤k} e^{-je₀t} Φⱼ` built order by order.

use crate::error::{Error, Result};
use crate::field::{inner_h1, norm_l2, RadialField};
use crate::groundstate::GroundState;
use crate::linalg::least_squares;
use crate::lorentz::lorentz_norm;
use crate::operators::{remainder, Linearized};
use crate::params::ExponentSet;
use crate::scalar::C;
use crate::spectral::{shifted_band, EigenBundle};
use serde::Serialize;

/// Highest order supported; beyond it the monomials `qʲ` are too collinear to separate.
pub const K_MAX: usize = 6;

#[derive(Clone, Debug)]
pub struct ApproxFamily {
    pub a: f64,
    pub e0: f64,
    /// `Φ₁, ..., Φ_k`.
    pub phi: Vec<RadialField<f64>>,
    /// Validity radius in `q = e^{-e₀t}`.
    pub q_radius: f64,
    /// Relative least-squares residual of each coefficient extraction.
    pub fit_residuals: Vec<f64>,
}

impl ApproxFamily {
    pub fn order(&self) -> usize {
        self.phi.len()
    }

    /// `v_k(q) = Σ qʲ Φⱼ` using the first `k` terms.
    pub fn perturbation(&self, k: usize, q: f64) -> RadialField<f64> {
        let g = &self.phi[0].grid;
        let mut v = RadialField::zeros(g);
        for (j, p) in self.phi.iter().take(k).enumerate() {
            let c = q.powi(j as i32 + 1);
            for (x, y) in v.values.iter_mut().zip(&p.values) {
                *x += y * c;
            }
        }
        v
    }

    pub fn q_at(&self, t: f64) -> f64 {
        (-self.e0 * t).exp()
    }
}

/// Largest `max |v(x)|/W(x)` over the grid.
fn ratio_to_w(gs: &GroundState<f64>, v: &RadialField<f64>) -> f64 {
    v.values.iter().zip(&gs.w.values).map(|(a, w)| a.norm() / w.re).fold(0.0, f64::max)
}

/// Coefficient of `q^{k+1}` in `q ↦ R(v_k(q))`, with the relative fit residual.
fn extract_coefficient(gs: &GroundState<f64>, fam: &ApproxFamily, k: usize) -> Result<(RadialField<f64>, f64)> {
    let n = gs.grid.n;
    // window where J is resolved: truncation ~ζ³ against cancellation ~ε/ζ^{k+1}
    let zeta = f64::EPSILON.powf(1.0 / (k as f64 + 4.0));
    let lead = ratio_to_w(gs, &fam.phi[0]);
    let q_fit = (zeta / lead).min(fam.q_radius);
    let m = 2 * (k + 3);
    let nodes: Vec<f64> =
        (0..m).map(|i| 0.5 * (1.0 + (std::f64::consts::PI * (i as f64 + 0.5) / m as f64).cos())).collect();
    // basis s², ..., s^{k+3} in the scaled variable s = q/q_fit
    let powers: Vec<i32> = (2..=(k as i32 + 3)).collect();
    let a: Vec<Vec<f64>> = nodes.iter().map(|s| powers.iter().map(|&p| s.powi(p)).collect()).collect();
    // pseudo-inverse, one column per sample
    let mut pinv = vec![vec![0.0; m]; powers.len()];
    for i in 0..m {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        let (x, _) = least_squares(&a, &e)?;
        for (row, xi) in pinv.iter_mut().zip(x) {
            row[i] = xi;
        }
    }
    let samples: Vec<RadialField<f64>> = nodes.iter().map(|s| remainder(gs, &fam.perturbation(k, s * q_fit))).collect();
    let target = k - 1; // index of power k+1 in `powers`
    let scale = q_fit.powi(k as i32 + 1);
    let mut psi = vec![C::new(0.0, 0.0); n];
    let mut res_num = 0.0;
    let mut res_den = 0.0;
    for x in 0..n {
        let y: Vec<C<f64>> = samples.iter().map(|s| s.values[x]).collect();
        let coef: Vec<C<f64>> =
            pinv.iter().map(|row| row.iter().zip(&y).fold(C::new(0.0, 0.0), |acc, (w, v)| acc + v * *w)).collect();
        psi[x] = coef[target] / scale;
        for (i, yi) in y.iter().enumerate() {
            let fit = a[i].iter().zip(&coef).fold(C::new(0.0, 0.0), |acc, (p, c)| acc + c * *p);
            res_num += gs.grid.vol[x] * (yi - fit).norm_sqr();
            res_den += gs.grid.vol[x] * yi.norm_sqr();
        }
    }
    let rel = if res_den > 0.0 { (res_num / res_den).sqrt() } else { 0.0 };
    Ok((RadialField::from_complex(&gs.grid, psi)?, rel))
}

/// `(𝓛 - σ)x = y` on the full grid.
fn solve_shifted(gs: &GroundState<f64>, op: &Linearized<f64>, sigma: f64, y: &RadialField<f64>) -> Result<RadialField<f64>> {
    let n = gs.grid.n;
    let lu = shifted_band(op, sigma).lu()?;
    if lu.min_pivot < 1e-13 * sigma.abs().max(1.0) {
        return Err(Error::SpectralClash(sigma));
    }
    let re = op.plus.to_sym(&y.re());
    let im = op.plus.to_sym(&y.im());
    let mut b: Vec<f64> = (0..2 * n).map(|k| if k % 2 == 0 { re[k / 2] } else { im[k / 2] }).collect();
    lu.solve(&mut b);
    let x1: Vec<f64> = (0..n).map(|j| b[2 * j]).collect();
    let x2: Vec<f64> = (0..n).map(|j| b[2 * j + 1]).collect();
    RadialField::from_parts(&gs.grid, &op.plus.from_sym(&x1), &op.plus.from_sym(&x2))
}

/// Largest dyadic `q` with `max|v_k(q)| ≤ W/2`, halved once for margin.
fn validity_radius(gs: &GroundState<f64>, fam: &ApproxFamily) -> f64 {
    let k = fam.order();
    let mut q = 1.0;
    for _ in 0..60 {
        if ratio_to_w(gs, &fam.perturbation(k, q)) <= 0.5 {
            return 0.5 * q;
        }
        q *= 0.5;
    }
    0.0
}

/// Builds `Φ₁ = a𝒴₊` and `Φ_{k+1} = -(𝓛 - (k+1)e₀)^{-1}Ψ_k` up to order `k_max`.
pub fn build_family(gs: &GroundState<f64>, eig: &EigenBundle, a: f64, k_max: usize) -> Result<ApproxFamily> {
    if k_max == 0 || k_max > K_MAX {
        return Err(Error::Domain(format!("order {k_max} outside 1..={K_MAX}")));
    }
    let mut fam = ApproxFamily { a, e0: eig.e0, phi: vec![eig.y.scale(a)], q_radius: 1.0, fit_residuals: vec![] };
    if a == 0.0 {
        fam.phi = vec![RadialField::zeros(&gs.grid); k_max];
        return Ok(fam);
    }
    let op = Linearized::new(gs);
    fam.q_radius = validity_radius(gs, &fam);
    for k in 1..k_max {
        let (psi, rel) = extract_coefficient(gs, &fam, k)?;
        if !(rel < 1e-6) {
            return Err(Error::Numerical(format!("series extraction at order {k}: fit residual {rel:e}")));
        }
        fam.fit_residuals.push(rel);
        let next = solve_shifted(gs, &op, (k as f64 + 1.0) * eig.e0, &psi.scale(-1.0))?;
        fam.phi.push(next);
        fam.q_radius = validity_radius(gs, &fam);
    }
    Ok(fam)
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualNorms {
    pub t: f64,
    pub l2: f64,
    pub h1: f64,
    /// `L^{2d/(d+2),2}`.
    pub dual: f64,
}

impl ResidualNorms {
    /// `‖·‖_{Ḣ¹∩L²}` as the sum of both norms.
    pub fn h1_l2(&self) -> f64 {
        self.h1 + self.l2
    }
}

/// `ε_k(t) = Σ qʲ(-je₀Φⱼ + 𝓛Φⱼ) + R(v_k(q))` evaluated term by term.
pub fn residual(gs: &GroundState<f64>, fam: &ApproxFamily, k: usize, t: f64) -> Result<(RadialField<f64>, ResidualNorms)> {
    if k == 0 || k > fam.order() {
        return Err(Error::Domain(format!("order {k} not built (have {})", fam.order())));
    }
    let q = fam.q_at(t);
    if q > fam.q_radius {
        return Err(Error::Validity(format!("q = {q:e} exceeds the validity radius {:e}", fam.q_radius)));
    }
    let op = Linearized::new(gs);
    let mut eps = remainder(gs, &fam.perturbation(k, q));
    for (j, p) in fam.phi.iter().take(k).enumerate() {
        let jj = j as f64 + 1.0;
        let lp = op.apply(p);
        let c = q.powi(j as i32 + 1);
        for ((e, l), v) in eps.values.iter_mut().zip(&lp.values).zip(&p.values) {
            *e += (l - v * (jj * fam.e0)) * c;
        }
    }
    let dual_exp = ExponentSet::<f64>::dual_space(gs.params.d);
    let norms = ResidualNorms {
        t,
        l2: norm_l2(&eps),
        h1: inner_h1(&eps, &eps)?.sqrt(),
        dual: lorentz_norm(&eps, dual_exp, 2.0)?,
    };
    Ok((eps, norms))
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeFit {
    pub k: usize,
    pub slope: f64,
    pub expected: f64,
    pub relative_error: f64,
    pub samples: Vec<ResidualNorms>,
}

/// Fits `log‖ε_k(t)‖_{Ḣ¹∩L²}` against `t` over `[t₀, t₀ + span/e₀]`.
pub fn residual_slope(gs: &GroundState<f64>, fam: &ApproxFamily, k: usize, t0: f64, span: f64, points: usize) -> Result<SlopeFit> {
    let t1 = t0 + span / fam.e0;
    let ts: Vec<f64> = (0..points).map(|i| t0 + (t1 - t0) * i as f64 / (points - 1) as f64).collect();
    let mut samples = vec![];
    for &t in &ts {
        samples.push(residual(gs, fam, k, t)?.1);
    }
    let a: Vec<Vec<f64>> = ts.iter().map(|&t| vec![1.0, t]).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.h1_l2().ln()).collect();
    let slope = least_squares(&a, &y)?.0[1];
    let expected = -(k as f64 + 1.0) * fam.e0;
    Ok(SlopeFit { k, slope, expected, relative_error: ((slope - expected) / expected).abs(), samples })
}

/// Earliest time at which the family is valid, `e^{-e₀t} = q_radius`.
pub fn earliest_time(fam: &ApproxFamily) -> f64 {
    -fam.q_radius.ln() / fam.e0
}

/// `W + Σ e^{-je₀t₀}Φⱼ`, the datum approximating `W^±` at time `t₀`.
pub fn initial_data_wpm(gs: &GroundState<f64>, fam: &ApproxFamily, t0: f64) -> Result<RadialField<f64>> {
    let q = fam.q_at(t0);
    if q > fam.q_radius {
        return Err(Error::Validity(format!("q = {q:e} exceeds the validity radius {:e}", fam.q_radius)));
    }
    Ok(&gs.w + &fam.perturbation(fam.order(), q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::grad_norm_sq;
    use crate::grid::{RadialGrid, Stretch};
    use crate::params::Params;
    use crate::spectral::{compute_eigen, EigenOptions};
    use std::sync::Arc;

    fn setup(d: usize, n: usize) -> (GroundState<f64>, EigenBundle) {
        let pr = Params::new(d, 0.3).unwrap();
        let g = Arc::new(RadialGrid::new(d, n, 100.0, Stretch::default()).unwrap());
        let gs = GroundState::new(&pr, &g).unwrap();
        let e = compute_eigen(&gs, &EigenOptions::default()).unwrap();
        (gs, e)
    }

    #[test]
    fn zero_parameter_gives_zero_family() {
        let (gs, e) = setup(3, 256);
        let fam = build_family(&gs, &e, 0.0, 3).unwrap();
        assert!(fam.phi.iter().all(|p| p.max_abs() == 0.0));
        let (eps, _) = residual(&gs, &fam, 3, 5.0).unwrap();
        assert_eq!(eps.max_abs(), 0.0);
    }

    #[test]
    fn residual_slopes() {
        let (gs, e) = setup(3, 512);
        let fam = build_family(&gs, &e, 1.0, 4).unwrap();
        let t0 = earliest_time(&fam) + (4.0f64).ln() / fam.e0;
        for k in 1..=3 {
            let fit = residual_slope(&gs, &fam, k, t0, 3.0, 7).unwrap();
            println!("k={k} slope={} expected={} q0={}", fit.slope, fit.expected, fam.q_radius);
            assert!(fit.relative_error < 0.07, "{fit:?}");
        }
    }

    #[test]
    fn kinetic_sides() {
        let (gs, e) = setup(4, 512);
        for a in [1.0, -1.0] {
            let fam = build_family(&gs, &e, a, 3).unwrap();
            let t0 = earliest_time(&fam) + 1.0;
            let u = initial_data_wpm(&gs, &fam, t0).unwrap();
            let diff = grad_norm_sq(&u) - gs.grad_norm_sq;
            assert!(diff * a > 0.0, "a={a}: {diff}");
            assert!(initial_data_wpm(&gs, &fam, earliest_time(&fam) - 1.0).is_err());
        }
    }
}
