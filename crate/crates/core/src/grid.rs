//! Cell-centred radial grid with exact shell measures.
//!
//! Cells are `[f_j, f_{j+1}]` with centres `r_j`; the measure of a cell is
//! `omega_{d-1} (f_{j+1}^d - f_j^d)/d`. Fields are continued past `r_max` by the
//! decaying harmonic profile of their angular sector, which closes the
//! Laplacian with an exact exterior (Dirichlet-to-Neumann) condition.

use crate::error::{domain, Result};
use crate::scalar::{lit, sphere_area, Real};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stretch {
    Uniform,
    /// `r(x) = r_max sinh(kappa x)/sinh(kappa)`: linear near the origin, geometric further out.
    Sinh { kappa: f64 },
}

impl Stretch {
    pub fn descriptor(&self) -> String {
        match self {
            Stretch::Uniform => "uniform".into(),
            Stretch::Sinh { kappa } => format!("sinh:{kappa}"),
        }
    }

    pub fn parse(s: &str) -> Option<Stretch> {
        let s = s.trim();
        if s == "uniform" {
            return Some(Stretch::Uniform);
        }
        let k: f64 = s.strip_prefix("sinh:")?.parse().ok()?;
        (k > 0.0 && k.is_finite()).then_some(Stretch::Sinh { kappa: k })
    }
}

impl Default for Stretch {
    fn default() -> Self {
        Stretch::Sinh { kappa: 6.0 }
    }
}

/// Identifies a grid for caching and for container headers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridKey {
    pub d: usize,
    pub n_cells: usize,
    pub r_max: f64,
    pub stretch: Stretch,
}

impl GridKey {
    pub fn tag(&self) -> String {
        format!("d{}_n{}_r{}_{}", self.d, self.n_cells, self.r_max, self.stretch.descriptor())
    }
}

#[derive(Clone, Debug)]
pub struct RadialGrid<T> {
    pub d: usize,
    pub n: usize,
    pub r_max: T,
    pub stretch: Stretch,
    pub omega: T,
    pub faces: Vec<T>,
    pub r: Vec<T>,
    /// Cell measures including the sphere area.
    pub vol: Vec<T>,
    /// `omega f_k^{d-1}/(r_k - r_{k-1})` for interior faces `k = 1..n`.
    pub link: Vec<T>,
    /// Same coefficient for the half cell between `r_{n-1}` and `r_max`.
    pub edge_link: T,
}

impl<T: Real> RadialGrid<T> {
    pub fn new(d: usize, n: usize, r_max: T, stretch: Stretch) -> Result<Self> {
        if n < 4 {
            return domain(format!("need at least 4 cells, got {n}"));
        }
        if !(r_max > T::zero()) || !r_max.is_finite() {
            return domain(format!("r_max = {r_max} must be positive"));
        }
        if d < 1 {
            return domain("dimension must be positive");
        }
        let map = |x: T| -> T {
            match stretch {
                Stretch::Uniform => r_max * x,
                Stretch::Sinh { kappa } => {
                    let k = T::lit(kappa);
                    r_max * (k * x).sinh() / k.sinh()
                }
            }
        };
        let nn = T::of_usize(n);
        let mut faces: Vec<T> = (0..=n).map(|k| map(T::of_usize(k) / nn)).collect();
        faces[0] = T::zero();
        faces[n] = r_max;
        let r: Vec<T> = (0..n).map(|j| map((T::of_usize(j) + lit(0.5)) / nn)).collect();
        let omega = sphere_area::<T>(d);
        let dt = T::of_usize(d);
        let vol = (0..n)
            .map(|j| omega * (faces[j + 1].powi(d as i32) - faces[j].powi(d as i32)) / dt)
            .collect();
        let link = (1..n)
            .map(|k| omega * faces[k].powi(d as i32 - 1) / (r[k] - r[k - 1]))
            .collect();
        let edge_link = omega * r_max.powi(d as i32 - 1) / (r_max - r[n - 1]);
        Ok(RadialGrid { d, n, r_max, stretch, omega, faces, r, vol, link, edge_link })
    }

    pub fn uniform(d: usize, n: usize, r_max: T) -> Result<Self> {
        Self::new(d, n, r_max, Stretch::Uniform)
    }

    pub fn key(&self) -> GridKey {
        GridKey { d: self.d, n_cells: self.n, r_max: self.r_max.f64(), stretch: self.stretch }
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n && self.r_max == other.r_max && self.stretch == other.stretch
    }

    pub fn width(&self, j: usize) -> T {
        self.faces[j + 1] - self.faces[j]
    }

    /// Per-cell `omega * int_cell r^e r^{d-1} dr`; needs `d + e > 0`.
    pub fn moment(&self, e: T) -> Result<Vec<T>> {
        let s = T::of_usize(self.d) + e;
        if !(s > T::zero()) {
            return domain(format!("r^{e} is not integrable at the origin in dimension {}", self.d));
        }
        Ok((0..self.n)
            .map(|j| self.omega * (self.faces[j + 1].powf(s) - self.faces[j].powf(s)) / s)
            .collect())
    }

    /// Midpoint rule on the exact cell measures.
    pub fn integrate(&self, values: &[T]) -> T {
        values.iter().zip(&self.vol).map(|(&v, &w)| v * w).sum()
    }

    /// Decaying exterior profile `r^{-(l+d-2)}` of angular sector `l`:
    /// returns the boundary stiffness seen by the last cell and the ratio
    /// `u(r_max)/u_{n-1}` of the eliminated boundary value.
    pub fn exterior(&self, ell: usize) -> (T, T) {
        let kap = self.omega * T::of_usize(ell + self.d - 2) * self.r_max.powi(self.d as i32 - 2);
        let c = self.edge_link;
        (c * kap / (c + kap), c / (c + kap))
    }

    /// Three-point weights of the centred first derivative at each cell,
    /// using the even mirror at the origin and the exterior boundary value.
    pub fn derivative_stencils(&self) -> Vec<[T; 3]> {
        let n = self.n;
        let (_, gam) = self.exterior(0);
        (0..n)
            .map(|j| {
                let xm = if j == 0 { -self.r[0] } else { self.r[j - 1] };
                let xp = if j + 1 == n { self.r_max } else { self.r[j + 1] };
                let hm = self.r[j] - xm;
                let hp = xp - self.r[j];
                let mut wm = -hp / (hm * (hm + hp));
                let mut w0 = (hp - hm) / (hm * hp);
                let mut wp = hm / (hp * (hm + hp));
                if j == 0 {
                    // mirror ghost equals u_0
                    w0 = w0 + wm;
                    wm = T::zero();
                }
                if j + 1 == n {
                    w0 = w0 + wp * gam;
                    wp = T::zero();
                }
                [wm, w0, wp]
            })
            .collect()
    }

    /// Symmetric tridiagonal stiffness of `-Δ + l(l+d-2)/r^2` (weak form,
    /// exterior closure included): diagonal and super-diagonal.
    pub fn stiffness(&self, ell: usize) -> (Vec<T>, Vec<T>) {
        let n = self.n;
        let mut diag = vec![T::zero(); n];
        for k in 1..n {
            diag[k - 1] = diag[k - 1] + self.link[k - 1];
            diag[k] = diag[k] + self.link[k - 1];
        }
        let (beta, _) = self.exterior(ell);
        diag[n - 1] = diag[n - 1] + beta;
        if ell > 0 {
            let mu = T::of_usize(ell * (ell + self.d - 2));
            let m2 = self.moment(-T::lit(2.0)).expect("d >= 3");
            for j in 0..n {
                diag[j] = diag[j] + mu * m2[j];
            }
        }
        let off = self.link.iter().map(|&c| -c).collect();
        (diag, off)
    }

    /// `K u` for the sector-0 stiffness.
    pub fn stiffness_apply<S>(&self, u: &[S]) -> Vec<S>
    where
        S: Copy + std::ops::Add<Output = S> + std::ops::Sub<Output = S> + std::ops::Mul<T, Output = S>,
    {
        let n = self.n;
        let (beta, _) = self.exterior(0);
        let mut out: Vec<S> = u.iter().map(|&v| v * T::zero()).collect();
        for k in 1..n {
            let flux = (u[k] - u[k - 1]) * self.link[k - 1];
            out[k - 1] = out[k - 1] - flux;
            out[k] = out[k] + flux;
        }
        out[n - 1] = out[n - 1] + u[n - 1] * beta;
        out
    }

    /// Index of the cell containing radius `x` (clamped).
    pub fn locate(&self, x: T) -> usize {
        match self.faces.binary_search_by(|f| f.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(k) => k.min(self.n - 1),
            Err(k) => k.saturating_sub(1).min(self.n - 1),
        }
    }
}
