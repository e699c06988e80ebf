//! Modulation of near-ground-state fields: `u_{[θ,μ]} = (1+β)W + ũ` with `ũ ⊥ W, iW, W₁` in `Ḣ¹`,
//! where `f_{[θ,μ]}(x) = e^{iθ}μ^{-(d-2)/2}f(x/μ)`.
//!
//! The symmetry is moved onto the closed-form profiles, `(u_{[θ,μ]}, h)_{Ḣ¹} = (u, T⁻¹h)_{Ḣ¹}` with
//! `T⁻¹h = e^{-iθ}μ^{(d-2)/2}h(μ·)`, so the Newton iteration never interpolates `u`.

use crate::error::{Error, Result};
use crate::field::{face_energies, grad_norm_sq, inner_h1, rescale, RadialField};
use crate::groundstate::GroundState;
use crate::scalar::{lit, Real};
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct ModulationState<T> {
    pub theta: T,
    pub mu: T,
    pub beta: T,
    /// `ũ` in the modulated frame (resampled).
    pub u_tilde: RadialField<T>,
    pub u_tilde_norm: T,
    /// `‖v‖_{Ḣ¹}` with `v = u_{[θ,μ]} - W`.
    pub v_norm: T,
    pub d_u: T,
    pub valid: bool,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct ModulationOptions<T> {
    /// Validity threshold `δ₀` on `𝐝(u)`.
    pub delta0: T,
    pub max_iter: usize,
    pub tol: T,
}

impl<T: Real> ModulationOptions<T> {
    /// `δ₀ = 0.05‖∇W‖²`.
    pub fn for_ground_state(gs: &GroundState<T>) -> Self {
        ModulationOptions { delta0: lit::<T>(0.05) * gs.grad_norm_sq, max_iter: 50, tol: lit(1e-12) }
    }
}

fn solve2<T: Real>(j: [[T; 2]; 2], r: [T; 2]) -> Option<[T; 2]> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if det == T::zero() || !det.is_finite() {
        return None;
    }
    Some([(r[0] * j[1][1] - r[1] * j[0][1]) / det, (j[0][0] * r[1] - j[1][0] * r[0]) / det])
}

/// The profile fields `T⁻¹W, T⁻¹W₁, T⁻¹ΛW₁` at `(θ, μ)`.
struct Pulled<T> {
    w: RadialField<T>,
    w1: RadialField<T>,
    lw1: RadialField<T>,
}

fn pull<T: Real>(gs: &GroundState<T>, theta: T, mu: T) -> Pulled<T> {
    Pulled {
        w: gs.inverse_rescaled(|p, r| p.w(r), theta, mu),
        w1: gs.inverse_rescaled(|p, r| p.w1(r), theta, mu),
        lw1: gs.inverse_rescaled(|p, r| p.scaled_w1(r), theta, mu),
    }
}

/// Newton on `(θ, log μ)` for `(u_{[θ,μ]}, iW) = (u_{[θ,μ]}, W₁) = 0`, then `β` and `ũ` by projection.
pub fn decompose<T: Real>(
    gs: &GroundState<T>,
    u: &RadialField<T>,
    seed: (T, T),
    opts: &ModulationOptions<T>,
) -> Result<ModulationState<T>> {
    let (mut theta, mut s) = (seed.0, seed.1.ln());
    let scale = grad_norm_sq(u).sqrt() * gs.grad_norm_sq.sqrt();
    let mut it = 0;
    loop {
        let p = pull(gs, theta, s.exp());
        // residuals (u, T⁻¹(iW)) and (u, T⁻¹W₁); note T⁻¹(ih) = i T⁻¹h
        let iw = p.w.times_i();
        let f = [inner_h1(u, &iw)?, inner_h1(u, &p.w1)?];
        // ∂_θ T⁻¹h = -i T⁻¹h, ∂_{log μ} T⁻¹h = T⁻¹(Λh), ΛW = W₁
        let jac = [
            [inner_h1(u, &p.w)?, inner_h1(u, &p.w1.times_i())?],
            [inner_h1(u, &p.w1.times_i().scale(-T::one()))?, inner_h1(u, &p.lw1)?],
        ];
        let res = f[0].abs().max(f[1].abs());
        if res <= opts.tol * scale {
            break;
        }
        it += 1;
        if it > opts.max_iter {
            return Err(Error::NoConvergence(format!("modulation Newton: residual {res:e} after {} iterations", opts.max_iter)));
        }
        let step = solve2(jac, f).ok_or_else(|| Error::NoConvergence("modulation Newton: singular Jacobian".into()))?;
        // damp large steps in the scale
        let lim = lit::<T>(0.5);
        let damp = if step[1].abs() > lim { lim / step[1].abs() } else { T::one() };
        theta = theta - damp * step[0];
        s = s - damp * step[1];
        if !theta.is_finite() || !s.is_finite() {
            return Err(Error::NoConvergence("modulation Newton diverged".into()));
        }
    }
    let mu = s.exp();
    let p = pull(gs, theta, mu);
    let wn = inner_h1(&p.w, &p.w)?;
    let mut one_beta = inner_h1(u, &p.w)? / wn;
    if one_beta < T::zero() {
        // other branch of the phase
        theta = theta + T::PI();
        one_beta = -one_beta;
    }
    let p = pull(gs, theta, mu);
    let beta = one_beta - T::one();
    // ũ and v in the original frame, where the pull-back keeps all norms
    let ut_frame = u.axpy(-one_beta, &p.w)?;
    let v_frame = u - &p.w;
    let d_u = (grad_norm_sq(u) - gs.grad_norm_sq).abs();
    let theta = wrap_phase(theta);
    Ok(ModulationState {
        theta,
        mu,
        beta,
        u_tilde: rescale(&ut_frame, theta, mu)?,
        u_tilde_norm: inner_h1(&ut_frame, &ut_frame)?.max(T::zero()).sqrt(),
        v_norm: inner_h1(&v_frame, &v_frame)?.max(T::zero()).sqrt(),
        d_u,
        valid: d_u < opts.delta0,
        iterations: it,
    })
}

fn wrap_phase<T: Real>(t: T) -> T {
    let two_pi = lit::<T>(2.0) * T::PI();
    let mut x = t % two_pi;
    if x > T::PI() {
        x = x - two_pi;
    } else if x <= -T::PI() {
        x = x + two_pi;
    }
    x
}

/// Largest `λ` with `∫_{|x|≤1/λ} |∇u|² ≥ level`, by bisection on the cumulative face energies.
pub fn compactness_scale<T: Real>(u: &RadialField<T>, level: T) -> Result<T> {
    let g = &u.grid;
    let e = face_energies(u);
    let pos: Vec<T> = (1..g.n).map(|k| g.faces[k]).chain(std::iter::once(g.r_max)).collect();
    let total: T = e.iter().copied().sum();
    if !(total >= level) || !(level > T::zero()) {
        return Err(Error::Domain(format!("kinetic energy {total} never reaches the level {level}")));
    }
    // piecewise-linear cumulative through (0,0), (pos_k, Σ_{i≤k} e_i)
    let cum = |r: T| -> T {
        let mut acc = T::zero();
        let mut prev = T::zero();
        for (k, &p) in pos.iter().enumerate() {
            if r >= p {
                acc = acc + e[k];
                prev = p;
            } else {
                return acc + e[k] * (r - prev) / (p - prev);
            }
        }
        acc
    };
    let (mut lo, mut hi) = (T::zero(), g.r_max);
    for _ in 0..200 {
        let mid = lit::<T>(0.5) * (lo + hi);
        if cum(mid) >= level {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= T::epsilon() * hi {
            break;
        }
    }
    Ok(T::one() / hi)
}

#[derive(Clone, Debug, Serialize)]
pub struct TrackRow {
    pub t: f64,
    pub theta: f64,
    pub mu: f64,
    pub beta: f64,
    pub d_u: f64,
    pub u_tilde_norm: f64,
    pub v_norm: f64,
    /// `(|β'| + |θ'| + |μ'/μ|)/(μ²𝐝)`.
    pub rate_ratio: f64,
    pub valid: bool,
    pub dbeta: f64,
    pub dtheta: f64,
    pub dlogmu: f64,
}

#[derive(Clone, Debug)]
pub struct Track<T> {
    pub rows: Vec<TrackRow>,
    pub states: Vec<Option<ModulationState<T>>>,
    pub errors: Vec<(f64, String)>,
}

impl<T> Track<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,theta,mu,beta,d_u,rate_ratio,valid\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:.10e},{:.16e},{:.16e},{:.16e},{:.16e},{:.10e},{}\n",
                r.t, r.theta, r.mu, r.beta, r.d_u, r.rate_ratio, r.valid
            ));
        }
        out
    }

    /// Largest `rate_ratio` over valid rows.
    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().filter(|r| r.valid).map(|r| r.rate_ratio).fold(0.0, f64::max)
    }
}

/// Warm-started decomposition along a sequence of snapshots with finite-difference parameter rates.
pub fn track<T: Real>(gs: &GroundState<T>, snapshots: &[(f64, RadialField<T>)], opts: &ModulationOptions<T>) -> Track<T> {
    let mut states: Vec<Option<ModulationState<T>>> = vec![];
    let mut errors = vec![];
    let mut hist: Vec<(f64, T, T)> = vec![];
    for (t, u) in snapshots {
        // linear extrapolation of (θ, log μ) from the two previous states
        let seed = match hist.len() {
            0 => (T::zero(), T::one()),
            1 => (hist[0].1, hist[0].2),
            k => {
                let (t1, th1, m1) = hist[k - 2];
                let (t2, th2, m2) = hist[k - 1];
                let w = if t2 != t1 { T::lit((t - t2) / (t2 - t1)) } else { T::zero() };
                (th2 + (th2 - unwrap_near(th1, th2)) * w, (m2.ln() + (m2.ln() - m1.ln()) * w).exp())
            }
        };
        match decompose(gs, u, seed, opts) {
            Ok(s) => {
                let th = match hist.last() {
                    Some(&(_, prev, _)) => unwrap_near(s.theta, prev),
                    None => s.theta,
                };
                hist.push((*t, th, s.mu));
                states.push(Some(ModulationState { theta: th, ..s }));
            }
            Err(e) => {
                errors.push((*t, e.to_string()));
                states.push(None);
            }
        }
    }
    let ts: Vec<f64> = snapshots.iter().map(|s| s.0).collect();
    let mut rows = vec![];
    for i in 0..states.len() {
        let Some(s) = &states[i] else { continue };
        let nb = |k: usize| states.get(k).and_then(|x| x.as_ref()).map(|x| (ts[k], x));
        let (a, b) = match (i.checked_sub(1).and_then(&nb), nb(i + 1)) {
            (Some(p), Some(n)) => (p, n),
            (None, Some(n)) => ((ts[i], s), n),
            (Some(p), None) => (p, (ts[i], s)),
            (None, None) => ((ts[i], s), (ts[i], s)),
        };
        let dt = b.0 - a.0;
        let (db, dth, dlm) = if dt != 0.0 {
            (
                (b.1.beta - a.1.beta).f64() / dt,
                (b.1.theta - a.1.theta).f64() / dt,
                (b.1.mu.ln() - a.1.mu.ln()).f64() / dt,
            )
        } else {
            (0.0, 0.0, 0.0)
        };
        let den = s.mu.f64().powi(2) * s.d_u.f64();
        let num = db.abs() + dth.abs() + dlm.abs();
        let ratio = if den > 1e-300 { num / den } else { 0.0 };
        rows.push(TrackRow {
            t: ts[i],
            theta: s.theta.f64(),
            mu: s.mu.f64(),
            beta: s.beta.f64(),
            d_u: s.d_u.f64(),
            u_tilde_norm: s.u_tilde_norm.f64(),
            v_norm: s.v_norm.f64(),
            rate_ratio: ratio,
            valid: s.valid,
            dbeta: db,
            dtheta: dth,
            dlogmu: dlm,
        });
    }
    Track { rows, states, errors }
}

fn unwrap_near<T: Real>(x: T, reference: T) -> T {
    let two_pi = lit::<T>(2.0) * T::PI();
    x - ((x - reference) / two_pi).round() * two_pi
}

#[derive(Clone, Debug, Serialize)]
pub struct ParameterEquationResidual {
    pub t: f64,
    /// Closure error of the `β_s`, `θ_s` and `μ_s/μ` equations.
    pub beta_eq: f64,
    pub theta_eq: f64,
    pub mu_eq: f64,
    pub d_u: f64,
    /// `𝐝(𝐝 + |θ_s| + |μ_s/μ|)`.
    pub script_e: f64,
}

/// Closure errors of the three modulation equations obtained by pairing the `ũ` equation with
/// `W`, `iW` and `W₁` in `Ḣ¹`, in the self-similar time `ds = μ²dt`.
pub fn parameter_equation_residuals<T: Real>(gs: &GroundState<T>, track: &Track<T>) -> Result<Vec<ParameterEquationResidual>> {
    let g = &gs.grid;
    let a = gs.params.alpha;
    let kw = g.stiffness_apply(&gs.w.re());
    let kw1 = g.stiffness_apply(&gs.w1.re());
    let wn = gs.grad_norm_sq.f64();
    let w1n = grad_norm_sq(&gs.w1).f64();
    // (Δf, h)_{Ḣ¹} = -Σ (Kf)(Kh)/vol and (Vf, h)_{Ḣ¹} = Σ V f (Kh)
    let lap_pair = |f: &[T], kh: &[T]| -> f64 {
        let kf = g.stiffness_apply(f);
        -(0..g.n).map(|j| kf[j] * kh[j] / g.vol[j]).sum::<T>().f64()
    };
    let pot_pair = |f: &[T], c: T, kh: &[T]| -> f64 { (0..g.n).map(|j| c * gs.potential[j] * f[j] * kh[j]).sum::<T>().f64() };
    let sw: Vec<T> = (0..g.n).map(|j| gs.weight[j] * gs.w.values[j].re.powf(a + T::one())).collect();
    let sw_pair = (0..g.n).map(|j| sw[j] * kw[j]).sum::<T>().f64();
    let mut out = vec![];
    let mut k = 0;
    for s in track.states.iter().flatten() {
        let row = &track.rows[k];
        k += 1;
        let u1 = s.u_tilde.re();
        let u2 = s.u_tilde.im();
        let mu2 = row.mu * row.mu;
        let (bs, ths, ms) = (row.dbeta / mu2, row.dtheta / mu2, row.dlogmu / mu2);
        let beta_eq = bs * wn - (-lap_pair(&u2, &kw) - pot_pair(&u2, T::one(), &kw));
        let theta_eq = -ths * wn - (lap_pair(&u1, &kw) + pot_pair(&u1, a + T::one(), &kw) + a.f64() * row.beta * sw_pair);
        let mu_eq = ms * w1n - (-lap_pair(&u2, &kw1) - pot_pair(&u2, T::one(), &kw1));
        out.push(ParameterEquationResidual {
            t: row.t,
            beta_eq,
            theta_eq,
            mu_eq,
            d_u: row.d_u,
            script_e: row.d_u * (row.d_u + ths.abs() + ms.abs()),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{RadialGrid, Stretch};
    use crate::params::Params;
    use crate::scalar::C;
    use std::sync::Arc;

    fn gs(d: usize, n: usize) -> GroundState<f64> {
        let pr = Params::new(d, 0.3).unwrap();
        let g = Arc::new(RadialGrid::new(d, n, 100.0, Stretch::default()).unwrap());
        GroundState::new(&pr, &g).unwrap()
    }

    #[test]
    fn ground_state_is_fixed_point() {
        let s = gs(3, 1024);
        let o = ModulationOptions::for_ground_state(&s);
        let m = decompose(&s, &s.w, (0.0, 1.0), &o).unwrap();
        assert!(m.theta.abs() < 1e-10 && (m.mu - 1.0).abs() < 1e-5 && m.beta.abs() < 1e-8, "{} {} {}", m.theta, m.mu, m.beta);
        assert!(m.u_tilde_norm < 1e-4 && m.valid, "{}", m.u_tilde_norm);
    }

    #[test]
    fn recovers_symmetry_parameters() {
        let s = gs(4, 1024);
        let o = ModulationOptions::for_ground_state(&s);
        // W_{[0.3, 2]} = e^{0.3i} 2^{-(d-2)/2} W(r/2)
        let amp = 2f64.powf(-1.0);
        let u = RadialField::from_fn(&s.grid, |r| C::from_polar(amp * s.profile.w(r / 2.0), 0.3));
        let m = decompose(&s, &u, (0.0, 1.0), &o).unwrap();
        assert!((m.theta + 0.3).abs() < 1e-6 && (m.mu - 0.5).abs() < 1e-5, "{} {}", m.theta, m.mu);
        assert!(m.beta.abs() < 1e-5 && m.u_tilde_norm < 1e-3, "{} {}", m.beta, m.u_tilde_norm);
    }

    #[test]
    fn compactness_scale_covariance() {
        let s = gs(3, 2048);
        let lam = compactness_scale(&s.w, s.energy).unwrap();
        let amp = 2f64.powf(-0.5);
        let spread = RadialField::from_real_fn(&s.grid, |r| amp * s.profile.w(r / 2.0));
        let lam2 = compactness_scale(&spread, s.energy).unwrap();
        assert!((lam2 / lam - 0.5).abs() < 1e-3, "{lam} {lam2}");
        let big = s.w.scale(1.5);
        assert!(compactness_scale(&big, s.energy).unwrap() > lam);
        assert!(compactness_scale(&s.w.scale(0.1), s.energy).is_err());
    }

    #[test]
    fn phase_wrap() {
        assert!((wrap_phase(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((unwrap_near(-3.1, 3.1) - (2.0 * std::f64::consts::PI - 3.1)).abs() < 1e-12);
    }
}
