//! Truncated virial `V_R = ∫ φ_R |u|²` with `φ_R = R²φ(r/R)`, its time derivatives and the
//! remainder `A_R` of the second-derivative identity.
//!
//! `φ(r) = r²` on `[0,1]`, constant on `[2,∞)`, and on `[1,2]` (with `t = r-1`)
//! `φ'' = 2 - 2(10t³-15t⁴+6t⁵) - 420t³(1-t)³`, which keeps `φ'' ≤ 2`, makes `φ'(2) = 0`
//! and leaves `φ` four times continuously differentiable.

use crate::error::{Error, Result};
use crate::field::{face_energies, grad_norm_sq, RadialField};
use crate::groundstate::GroundState;
use crate::scalar::{lit, Real};
use serde::Serialize;

/// Coefficients of `φ(1+t)` in powers of `t` on the blend interval.
const BLEND: [f64; 9] = [1.0, 2.0, 1.0, 0.0, 0.0, -22.0, 43.0, -212.0 / 7.0, 7.5];

fn poly_derivative(c: &[f64], k: usize, t: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(k)
        .map(|(p, &a)| a * (0..k).map(|i| (p - i) as f64).product::<f64>() * t.powi((p - k) as i32))
        .sum()
}

/// `k`-th derivative (`k ≤ 4`) of the unit cutoff profile.
pub fn phi<T: Real>(r: T, k: usize) -> T {
    let r = r.f64();
    let v = if r <= 1.0 {
        match k {
            0 => r * r,
            1 => 2.0 * r,
            2 => 2.0,
            _ => 0.0,
        }
    } else if r < 2.0 {
        poly_derivative(&BLEND, k, r - 1.0)
    } else if k == 0 {
        poly_derivative(&BLEND, 0, 1.0)
    } else {
        0.0
    };
    T::lit(v)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VirialConfig {
    /// Cutoff radius `R`.
    pub radius: f64,
}

impl VirialConfig {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Config(format!("virial radius must be positive, got {radius}")));
        }
        Ok(VirialConfig { radius })
    }

    /// `k`-th radial derivative of `φ_R`.
    pub fn phi_r<T: Real>(&self, r: T, k: usize) -> T {
        let rr = T::lit(self.radius);
        rr.powi(2 - k as i32) * phi(r / rr, k)
    }

    /// `Δ²φ_R` for radial `φ_R` in dimension `d` (zero where `φ_R = r²`).
    pub fn bilaplacian<T: Real>(&self, d: usize, r: T) -> T {
        if r.f64() <= self.radius {
            return T::zero();
        }
        let m = T::lit(d as f64 - 1.0);
        let (p1, p2, p3, p4) = (self.phi_r(r, 1), self.phi_r(r, 2), self.phi_r(r, 3), self.phi_r(r, 4));
        let g1 = p3 + m * (p2 / r - p1 / (r * r));
        let g2 = p4 + m * (p3 / r - lit::<T>(2.0) * p2 / (r * r) + lit::<T>(2.0) * p1 / (r * r * r));
        g2 + m * g1 / r
    }

    fn check_grid<T: Real>(&self, u: &RadialField<T>) -> Result<()> {
        let g = &u.grid;
        if 2.0 * self.radius >= g.r[g.n - 1].f64() {
            return Err(Error::Domain(format!("cutoff support 2R = {} reaches the last cell", 2.0 * self.radius)));
        }
        Ok(())
    }
}

/// `V_R(u) = Σ vol φ_R |u|²`.
pub fn virial_v<T: Real>(u: &RadialField<T>, cfg: &VirialConfig) -> T {
    let g = &u.grid;
    (0..g.n).map(|j| g.vol[j] * cfg.phi_r(g.r[j], 0) * u.values[j].norm_sqr()).sum()
}

/// `2 Im ∫ ū ∂_r u ∂_rφ_R`, discretised so that it is the exact derivative of [`virial_v`]
/// along the semi-discrete flow.
pub fn virial_first_derivative<T: Real>(u: &RadialField<T>, cfg: &VirialConfig) -> T {
    let g = &u.grid;
    let mut acc = T::zero();
    for k in 1..g.n {
        let dphi = cfg.phi_r(g.r[k], 0) - cfg.phi_r(g.r[k - 1], 0);
        acc = acc + g.link[k - 1] * dphi * (u.values[k - 1].conj() * u.values[k]).im;
    }
    lit::<T>(2.0) * acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KineticSide {
    Below,
    Above,
    Boundary,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VirialIdentity {
    pub radius: f64,
    /// `±4α𝐝 + A_R` according to the kinetic side.
    pub lhs_proxy: f64,
    /// `8(‖∇u‖² - ∫r^{-b}|u|^{α+2}) + A_R`, valid off the energy surface too.
    pub direct: f64,
    pub a_r: f64,
    pub d_u: f64,
    pub side: KineticSide,
    /// `∫_{r≥R} (r^{-b}|u|^{α+2} + r^{-2}|u|²)`.
    pub tail: f64,
}

/// The four-term remainder `A_R`: in radial form
/// `4∫(φ_R''-2)|u_r|² - ∫Δ²φ_R|u|² - (2α/(α+2))∫[φ_R'' + (d-1+2b/α)φ_R'/r - 4(α+2)/α] r^{-b}|u|^{α+2}`.
pub fn a_r<T: Real>(gs: &GroundState<T>, u: &RadialField<T>, cfg: &VirialConfig) -> Result<T> {
    cfg.check_grid(u)?;
    let g = &u.grid;
    let a = gs.params.alpha;
    let two = lit::<T>(2.0);
    let e = face_energies(u);
    let mut kin = T::zero();
    for k in 0..g.n - 1 {
        kin = kin + (cfg.phi_r(g.faces[k + 1], 2) - two) * e[k];
    }
    // exterior part sits where φ_R is constant
    kin = kin - two * e[g.n - 1];
    let c = T::lit(g.d as f64 - 1.0) + two * gs.params.b / a;
    let konst = lit::<T>(4.0) * (a + two) / a;
    let mut mass = T::zero();
    let mut pot = T::zero();
    for j in 0..g.n {
        let r = g.r[j];
        let m = u.values[j].norm_sqr();
        mass = mass + g.vol[j] * cfg.bilaplacian(g.d, r) * m;
        if r.f64() > cfg.radius {
            let br = cfg.phi_r(r, 2) + c * cfg.phi_r(r, 1) / r - konst;
            pot = pot + g.vol[j] * gs.weight[j] * br * m.powf((a + two) / two);
        }
    }
    Ok(lit::<T>(4.0) * kin - mass - two * a / (a + two) * pot)
}

/// `A_R` together with the two forms of the second-derivative identity.
pub fn virial_second_identity<T: Real>(
    gs: &GroundState<T>,
    u: &RadialField<T>,
    cfg: &VirialConfig,
    side_tol: f64,
) -> Result<VirialIdentity> {
    let ar = a_r(gs, u, cfg)?.f64();
    let a = gs.params.alpha.f64();
    let kin = grad_norm_sq(u).f64();
    let kw = gs.grad_norm_sq.f64();
    let d_u = (kin - kw).abs();
    let side = if d_u <= side_tol {
        KineticSide::Boundary
    } else if kin < kw {
        KineticSide::Below
    } else {
        KineticSide::Above
    };
    let sign = if kin < kw { 1.0 } else { -1.0 };
    let pot = gs.potential_energy(u).f64();
    let g = &u.grid;
    let q = gs.params.alpha + lit(2.0);
    let mut tail = T::zero();
    for j in 0..g.n {
        if g.r[j].f64() >= cfg.radius {
            let m = u.values[j].norm();
            tail = tail + g.vol[j] * (gs.weight[j] * m.powf(q) + m * m / (g.r[j] * g.r[j]));
        }
    }
    Ok(VirialIdentity {
        radius: cfg.radius,
        lhs_proxy: sign * 4.0 * a * d_u + ar,
        direct: 8.0 * (kin - pot) + ar,
        a_r: ar,
        d_u,
        side,
        tail: tail.f64(),
    })
}

/// Right side of the near-orbit bound on `|A_R|`: `(μR)^{-(d-2)/2}𝐝 + 𝐝²`.
pub fn a_r_orbit_bound(d: usize, mu: f64, radius: f64, d_u: f64) -> f64 {
    (mu * radius).powf(-(d as f64 - 2.0) / 2.0) * d_u + d_u * d_u
}
