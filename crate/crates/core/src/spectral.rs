//! The real eigenpair `𝓛𝒴₊ = e₀𝒴₊` of the linearized operator and related spectral checks.

use crate::error::{Error, Result};
use crate::field::{inner_h1, norm_l2, RadialField};
use crate::groundstate::{GroundState, Profile};
use crate::linalg::{eigh, eigvals, least_squares, tridiag_eigh, Band, Dense};
use crate::ode::{integrate, integrate_through, Tolerance};
use crate::operators::{bilinear_b, quadratic_q, Linearized, SectorOperator};
use crate::params::Params;
use crate::scalar::C;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Negative eigenvalues of `L₋` above `-clamp` are set to zero before the square root.
    pub clamp: f64,
    /// Target relative residual of the refinement.
    pub tol: f64,
    pub max_refine: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { clamp: 1e-4, tol: 1e-12, max_refine: 8 }
    }
}

#[derive(Clone, Debug)]
pub struct EigenBundle {
    pub e0: f64,
    /// `𝒴₊ = 𝒴₁ + i𝒴₂`, normalised in `L²`.
    pub y: RadialField<f64>,
    pub residual_plus: f64,
    /// `‖L₋𝒴₂ + e₀𝒴₁‖/‖𝒴₂‖`.
    pub residual_cross: f64,
    pub sign_convention_ok: bool,
    /// Value straight from the square-root construction, before refinement.
    pub e0_unrefined: f64,
    pub residual_unrefined: f64,
    pub negative_count: usize,
    pub clamped: usize,
}

impl EigenBundle {
    pub fn y_minus(&self) -> RadialField<f64> {
        self.y.conj()
    }
}

/// Square root of `L₋` in the symmetric variable; returns it with the number of clamped modes.
fn sqrt_minus(minus: &SectorOperator<f64>, clamp: f64) -> Result<(Dense, usize)> {
    let n = minus.n();
    let (lam, q) = tridiag_eigh(&minus.diag, &minus.off)?;
    let mut clamped = 0;
    let mut qs = Dense::zeros(n);
    let mut qt = Dense::zeros(n);
    for k in 0..n {
        let l = if lam[k] < 0.0 {
            if lam[k] < -clamp {
                return Err(Error::Numerical(format!("L₋ has a negative eigenvalue {:e}", lam[k])));
            }
            clamped += 1;
            0.0
        } else {
            lam[k]
        };
        let s = l.sqrt();
        for i in 0..n {
            qs.set(i, k, q.get(i, k) * s);
            qt.set(k, i, q.get(i, k));
        }
    }
    Ok((qs.matmul(&qt), clamped))
}

fn tridiag_times(op: &SectorOperator<f64>, m: &Dense) -> Dense {
    let n = m.n;
    let mut out = Dense::zeros(n);
    for j in 0..n {
        let c = op.apply_sym(m.col(j));
        out.a[j * n..(j + 1) * n].copy_from_slice(&c);
    }
    out
}

/// `(𝓛 - σ)` on interleaved symmetric variables `(w₁₀, w₂₀, w₁₁, w₂₁, ...)`.
pub(crate) fn shifted_band(op: &Linearized<f64>, sigma: f64) -> Band<f64> {
    let n = op.plus.n();
    let mut b = Band::zeros(2 * n, 3, 3);
    for j in 0..n {
        let (r1, r2) = (2 * j, 2 * j + 1);
        b.add(r1, r1, -sigma);
        b.add(r2, r2, -sigma);
        b.add(r1, 2 * j + 1, -op.minus.diag[j]);
        b.add(r2, 2 * j, op.plus.diag[j]);
        if j > 0 {
            b.add(r1, 2 * j - 1, -op.minus.off[j - 1]);
            b.add(r2, 2 * j - 2, op.plus.off[j - 1]);
        }
        if j + 1 < n {
            b.add(r1, 2 * j + 3, -op.minus.off[j]);
            b.add(r2, 2 * j + 2, op.plus.off[j]);
        }
    }
    b
}

fn pair_residual(op: &Linearized<f64>, w1: &[f64], w2: &[f64], e: f64) -> f64 {
    let a = op.minus.apply_sym(w2);
    let b = op.plus.apply_sym(w1);
    let num: f64 = (0..w1.len()).map(|j| (-a[j] - e * w1[j]).powi(2) + (b[j] - e * w2[j]).powi(2)).sum();
    let den: f64 = w1.iter().chain(w2).map(|x| x * x).sum();
    (num / den).sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Builds `P = √L₋ L₊ √L₋`, takes its most negative eigenvalue `-e₀²`, maps the eigenvector back
/// through `𝒴₁ = √L₋ f`, `𝒴₂ = L₊𝒴₁/e₀`, then refines by shifted inverse iteration on the banded
/// matrix operator.
pub fn compute_eigen(gs: &GroundState<f64>, opts: &EigenOptions) -> Result<EigenBundle> {
    let op = Linearized::new(gs);
    let n = op.plus.n();
    let (s, clamped) = sqrt_minus(&op.minus, opts.clamp)?;
    let t = tridiag_times(&op.plus, &s);
    let mut p = s.matmul(&t);
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (p.get(i, j) + p.get(j, i));
            p.set(i, j, v);
            p.set(j, i, v);
        }
    }
    let (mu, f) = eigh(p)?;
    let scale = mu.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    // roundoff in P is of order ε‖P‖
    let negative_count = mu.iter().filter(|&&m| m < -10.0 * f64::EPSILON * scale.max(1.0)).count();
    if mu[0] >= 0.0 {
        return Err(Error::Numerical("no negative eigenvalue; grid too coarse or domain too small".into()));
    }
    let mut e = (-mu[0]).sqrt();
    let e0_unrefined = e;
    let mut w1 = s.matvec(f.col(0));
    let mut w2: Vec<f64> = op.plus.apply_sym(&w1).iter().map(|x| x / e).collect();
    let residual_unrefined = pair_residual(&op, &w1, &w2, e);

    let mut res = residual_unrefined;
    for _ in 0..opts.max_refine {
        if res < opts.tol {
            break;
        }
        let lu = shifted_band(&op, e).lu()?;
        let mut x: Vec<f64> = (0..2 * n).map(|k| if k % 2 == 0 { w1[k / 2] } else { w2[k / 2] }).collect();
        let nx = dot(&x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        let mut y = x.clone();
        lu.solve(&mut y);
        let yy = dot(&y, &y);
        if !yy.is_finite() || yy == 0.0 {
            return Err(Error::SpectralClash(e));
        }
        e += dot(&x, &y) / yy;
        let ny = yy.sqrt();
        w1 = (0..n).map(|j| y[2 * j] / ny).collect();
        w2 = (0..n).map(|j| y[2 * j + 1] / ny).collect();
        res = pair_residual(&op, &w1, &w2, e);
    }

    let g = &gs.grid;
    let y1 = op.plus.from_sym(&w1);
    let y2 = op.plus.from_sym(&w2);
    let mut y = RadialField::from_parts(g, &y1, &y2)?;
    let nrm = norm_l2(&y);
    y = y.scale(1.0 / nrm);
    let re = RadialField::from_real(g, &y.re())?;
    let mut sign = inner_h1(&gs.w, &re)?;
    if sign < 0.0 {
        y = y.scale(-1.0);
        sign = -sign;
    }
    let lw2 = op.minus.apply(&y.im());
    let y1 = y.re();
    let cross_num: f64 = (0..n).map(|j| g.vol[j] * (lw2[j] + e * y1[j]).powi(2)).sum::<f64>().sqrt();
    let cross_den: f64 = (0..n).map(|j| g.vol[j] * y.values[j].im.powi(2)).sum::<f64>().sqrt();
    Ok(EigenBundle {
        e0: e,
        y,
        residual_plus: res,
        residual_cross: cross_num / cross_den,
        sign_convention_ok: sign > 0.0,
        e0_unrefined,
        residual_unrefined,
        negative_count,
        clamped,
    })
}

/// `‖𝓛𝒴₊ - e₀𝒴₊‖/‖𝒴₊‖` for any candidate pair.
pub fn eigen_residual(gs: &GroundState<f64>, e0: f64, y: &RadialField<f64>) -> f64 {
    let op = Linearized::new(gs);
    pair_residual(&op, &op.plus.to_sym(&y.re()), &op.plus.to_sym(&y.im()), e0)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub e0: f64,
    /// Real eigenvalues of `𝓛` inside `[-2e₀, 2e₀]` outside the zero cluster, sorted.
    pub real_eigenvalues: Vec<f64>,
    pub zero_count: usize,
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
    /// Largest `|λ|` in the zero cluster.
    pub zero_scatter: f64,
    pub zero_tol: f64,
}

/// Eigenvalues of `𝓛` from `𝓛² = diag(-L₋L₊, -L₊L₋)`: every eigenvalue `μ` of the
/// non-symmetric product `L₋L₊` gives the pair `±√(-μ)`.
pub fn spectrum_scan(gs: &GroundState<f64>, zero_tol: f64) -> Result<SpectrumReport> {
    let op = Linearized::new(gs);
    let n = op.plus.n();
    let mut plus = Dense::zeros(n);
    for j in 0..n {
        plus.set(j, j, op.plus.diag[j]);
        if j + 1 < n {
            plus.set(j, j + 1, op.plus.off[j]);
            plus.set(j + 1, j, op.plus.off[j]);
        }
    }
    let prod = tridiag_times(&op.minus, &plus);
    let mu = eigvals(prod)?;
    // the zero eigenvalue splits into tiny real or imaginary pairs on the grid
    let mut zero = vec![];
    let mut lambdas = vec![];
    for m in mu {
        let l = (-m).sqrt();
        if l.norm() <= zero_tol {
            zero.push(l.norm());
            zero.push(l.norm());
        } else if l.im.abs() <= 1e-6 * (1.0 + l.re.abs()) {
            lambdas.push(l.re.abs());
        }
    }
    lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let e0 = *lambdas.last().ok_or_else(|| Error::Numerical("no real eigenvalue away from zero".into()))?;
    let mut real = vec![];
    for &l in &lambdas {
        if l <= 2.0 * e0 {
            real.push(-l);
            real.push(l);
        }
    }
    real.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(SpectrumReport {
        e0,
        zero_count: zero.len(),
        zero_scatter: zero.iter().fold(0.0, |m: f64, x| m.max(*x)),
        positive: real.iter().copied().filter(|&l| l > 0.0).collect(),
        negative: real.iter().copied().filter(|&l| l < 0.0).collect(),
        real_eigenvalues: real,
        zero_tol,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub radii: Vec<f64>,
    pub annulus_norms: Vec<f64>,
    /// Least-squares slope of `log‖f 1_{[R,2R]}‖` against `log R`; `-∞` when the tail vanishes.
    pub slope: f64,
}

/// `L²` norms of `f` on the annuli `[R, 2R]` and their log-log slope.
pub fn decay_check(f: &RadialField<f64>, radii: &[f64]) -> Result<DecayReport> {
    let g = &f.grid;
    let mut norms = vec![];
    for &r in radii {
        let cells: Vec<usize> = (0..g.n).filter(|&j| g.r[j] >= r && g.r[j] < 2.0 * r).collect();
        if cells.is_empty() {
            return Err(Error::Domain(format!("annulus [{r}, {}] contains no cells", 2.0 * r)));
        }
        norms.push(cells.iter().map(|&j| g.vol[j] * f.values[j].norm_sqr()).sum::<f64>().sqrt());
    }
    let slope = if norms.iter().any(|&x| x == 0.0) {
        f64::NEG_INFINITY
    } else {
        let a: Vec<Vec<f64>> = radii.iter().map(|r| vec![1.0, r.ln()]).collect();
        let y: Vec<f64> = norms.iter().map(|x| x.ln()).collect();
        least_squares(&a, &y)?.0[1]
    };
    Ok(DecayReport { radii: radii.to_vec(), annulus_norms: norms, slope })
}

pub fn eigen_decay_check(eig: &EigenBundle, radii: &[f64]) -> Result<DecayReport> {
    decay_check(&eig.y, radii)
}

#[derive(Clone, Debug, Serialize)]
pub struct ShootingReport {
    pub e0: f64,
    pub roots_found: usize,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct ShootingOptions {
    pub r_inner: f64,
    pub r_match: f64,
    pub e_lo: f64,
    pub e_hi: f64,
    pub scan_points: usize,
    pub tol: Tolerance,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            r_inner: 1e-6,
            r_match: 1.0,
            e_lo: 0.01,
            e_hi: 4.0,
            scan_points: 48,
            tol: Tolerance { rtol: 1e-11, atol: 1e-30, max_steps: 2_000_000 },
        }
    }
}

/// The coupled eigen system on the continuum in `t = ln r`, state `(Y₁, rY₁', Y₂, rY₂')`.
fn eigen_rhs<'a>(pr: &'a Params<f64>, prof: &'a Profile<f64>, e: f64) -> impl Fn(f64, &[f64], &mut [f64]) + 'a {
    let d = pr.d as f64;
    let a1 = pr.alpha + 1.0;
    move |t, y, dy| {
        let r = t.exp();
        let v = r.powf(2.0 - pr.b) * prof.w(r).powf(pr.alpha);
        let r2 = r * r;
        dy[0] = y[1];
        dy[1] = -(d - 2.0) * y[1] - a1 * v * y[0] - e * r2 * y[2];
        dy[2] = y[3];
        dy[3] = -(d - 2.0) * y[3] - v * y[2] + e * r2 * y[0];
    }
}

/// Decaying free solution `r^{1-d/2} K_{d/2-1}(kr)` with `k² = ie₀`, as `(Z, rZ')`.
fn decaying_seed(d: usize, e: f64, r: f64) -> (C<f64>, C<f64>) {
    let k = (C::new(0.0, e)).sqrt();
    let nu = d as f64 / 2.0 - 1.0;
    let z = k * r;
    // asymptotic series of K_ν; terminates for half-integer ν
    let mut s = C::new(1.0, 0.0);
    let mut ds = C::new(0.0, 0.0);
    let mut a = 1.0;
    for m in 1..8 {
        a *= (4.0 * nu * nu - ((2 * m - 1) as f64).powi(2)) / (m as f64 * 8.0);
        s += z.powi(-(m as i32)) * a;
        ds += z.powi(-(m as i32) - 1) * (-(m as f64) * a);
    }
    let zval = s * (-z).exp() * r.powf(1.0 - d as f64 / 2.0) * z.powf(-0.5);
    let dlog = C::new((1.0 - d as f64 / 2.0 - 0.5) / r, 0.0) - k + ds * k / s;
    (zval, zval * dlog * r)
}

fn matching_det(pr: &Params<f64>, prof: &Profile<f64>, e: f64, o: &ShootingOptions) -> Result<f64> {
    let d = pr.d as f64;
    let f = eigen_rhs(pr, prof, e);
    let r0 = o.r_inner;
    let tm = o.r_match.ln();
    // regular seeds with their leading corrections
    let c = (2.0 - pr.b) * (d - pr.b);
    let s = r0.powf(2.0 - pr.b) / c;
    let q = r0 * r0 / (2.0 * d);
    let a1 = pr.alpha + 1.0;
    let seed1 = [1.0 - a1 * s, -a1 * s * (2.0 - pr.b), e * q, 2.0 * e * q];
    let seed2 = [-e * q, -2.0 * e * q, 1.0 - s, -s * (2.0 - pr.b)];
    let mut cols = vec![];
    for seed in [seed1, seed2] {
        cols.push(integrate(&f, r0.ln(), &seed, tm, o.tol)?);
    }
    let r_inf = (25.0f64).max(30.0 / e.sqrt());
    let (z, p) = decaying_seed(pr.d, e, r_inf);
    let nz = z.norm();
    let (z, p) = (z / nz, p / nz);
    for seed in [[z.re, p.re, z.im, p.im], [-z.im, -p.im, z.re, p.re]] {
        cols.push(integrate(&f, r_inf.ln(), &seed, tm, o.tol)?);
    }
    for c in cols.iter_mut() {
        let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        c.iter_mut().for_each(|x| *x /= n);
    }
    let m: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| cols[j][i]).collect()).collect();
    Ok(det4(&m))
}

fn det4(m: &[Vec<f64>]) -> f64 {
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut det = 1.0;
    for k in 0..4 {
        let p = (k..4).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap()).unwrap();
        if a[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..4 {
            let f = a[i][k] / a[k][k];
            for j in k..4 {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

/// Independent value of `e₀` from the continuum ODE system: regular solutions from the origin and
/// decaying ones from far out are matched at `r_match`; the Wronskian-type determinant vanishes at `e₀`.
pub fn shooting_e0(pr: &Params<f64>, o: &ShootingOptions) -> Result<ShootingReport> {
    let prof = Profile::new(pr);
    let mut evals = 0;
    let mut det = |e: f64| -> Result<f64> {
        evals += 1;
        matching_det(pr, &prof, e, o)
    };
    let ratio = (o.e_hi / o.e_lo).powf(1.0 / (o.scan_points - 1) as f64);
    let es: Vec<f64> = (0..o.scan_points).map(|i| o.e_lo * ratio.powi(i as i32)).collect();
    let mut ds = vec![];
    for &e in &es {
        ds.push(det(e)?);
    }
    let mut brackets = vec![];
    for i in 0..es.len() - 1 {
        if ds[i] == 0.0 || ds[i].signum() != ds[i + 1].signum() {
            brackets.push(i);
        }
    }
    let Some(&i) = brackets.first() else {
        return Err(Error::NoConvergence("shooting: no sign change of the matching determinant".into()));
    };
    let (mut a, mut b, mut fa, mut fb) = (es[i], es[i + 1], ds[i], ds[i + 1]);
    // Illinois regula falsi
    let mut side = 0;
    for _ in 0..200 {
        if (b - a).abs() < 1e-12 * b {
            break;
        }
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = det(c)?;
        if fc == 0.0 {
            a = c;
            b = c;
            break;
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    drop(det);
    Ok(ShootingReport { e0: 0.5 * (a + b), roots_found: brackets.len(), evaluations: evals })
}

#[derive(Clone, Debug, Serialize)]
pub struct FrobeniusReport {
    pub origin_admissible: f64,
    pub origin_inadmissible: f64,
    pub infinity_admissible: f64,
    pub infinity_inadmissible: f64,
}

/// Local power-law exponents of the solutions of the first-sector kernel equation
/// `G'' + (d-1)/r G' - (d-1)/r² G + (α+1) r^{-b} W^α G = 0`, fitted from integrated solutions.
pub fn kernel_ode_asymptotics(pr: &Params<f64>) -> Result<FrobeniusReport> {
    let prof = Profile::new(pr);
    let d = pr.d as f64;
    let a1 = pr.alpha + 1.0;
    // t = ln r, state (G, rG')
    let f = |t: f64, y: &[f64], dy: &mut [f64]| {
        let r = t.exp();
        let v = r.powf(2.0 - pr.b) * prof.w(r).powf(pr.alpha);
        dy[0] = y[1];
        dy[1] = -(d - 2.0) * y[1] + (d - 1.0) * y[0] - a1 * v * y[0];
    };
    let tol = Tolerance { rtol: 1e-12, atol: 1e-300, max_steps: 1_000_000 };
    let fit = |r_start: f64, seed_exp: f64, lo: f64, hi: f64| -> Result<f64> {
        let seed = [r_start.powf(seed_exp), seed_exp * r_start.powf(seed_exp)];
        let pts: Vec<f64> = (0..9).map(|i| lo.ln() + (hi.ln() - lo.ln()) * i as f64 / 8.0).collect();
        let pts: Vec<f64> = if r_start > hi { pts.into_iter().rev().collect() } else { pts };
        let ys = integrate_through(f, r_start.ln(), &seed, &pts, tol)?;
        let a: Vec<Vec<f64>> = pts.iter().map(|&t| vec![1.0, t]).collect();
        let y: Vec<f64> = ys.iter().map(|s| s[0].abs().ln()).collect();
        Ok(least_squares(&a, &y)?.0[1])
    };
    Ok(FrobeniusReport {
        origin_admissible: fit(1e-8, 1.0, 1e-4, 1e-2)?,
        origin_inadmissible: fit(1e-2, 1.0 - d, 1e-6, 1e-4)?,
        infinity_admissible: fit(1e8, 1.0 - d, 1e3, 1e5)?,
        infinity_inadmissible: fit(10.0, 1.0, 1e4, 1e6)?,
    })
}

/// Removes from `f` the components along `directions` so that every functional in `constraints`
/// vanishes, by solving the Gram system `ℓᵢ(f - Σ cⱼ hⱼ) = 0`.
pub fn project_constraints(
    f: &RadialField<f64>,
    constraints: &[&dyn Fn(&RadialField<f64>) -> Result<f64>],
    directions: &[RadialField<f64>],
) -> Result<RadialField<f64>> {
    let m = constraints.len();
    let gram: Vec<Vec<f64>> = (0..m).map(|i| directions.iter().map(|h| constraints[i](h)).collect()).collect::<Result<_>>()?;
    let rhs: Vec<f64> = constraints.iter().map(|l| l(f)).collect::<Result<_>>()?;
    let c = crate::linalg::solve_dense(gram, rhs)?;
    let mut out = f.clone();
    for (cj, h) in c.iter().zip(directions) {
        out = out.axpy(-cj, h)?;
    }
    Ok(out)
}

/// Projection onto the `Ḣ¹`-orthogonal complement of `{W, iW, W₁}`.
pub fn project_h_perp(gs: &GroundState<f64>, f: &RadialField<f64>) -> Result<RadialField<f64>> {
    let dirs = [gs.w.clone(), gs.w.times_i(), gs.w1.clone()];
    let l0 = |g: &RadialField<f64>| inner_h1(&dirs[0], g);
    let l1 = |g: &RadialField<f64>| inner_h1(&dirs[1], g);
    let l2 = |g: &RadialField<f64>| inner_h1(&dirs[2], g);
    project_constraints(f, &[&l0, &l1, &l2], &dirs)
}

/// Projection onto `{f : (iW,f)_{Ḣ¹} = (W₁,f)_{Ḣ¹} = B(𝒴₊,f) = B(𝒴₋,f) = 0}`.
pub fn project_g_perp(gs: &GroundState<f64>, eig: &EigenBundle, f: &RadialField<f64>) -> Result<RadialField<f64>> {
    let yp = eig.y.clone();
    let ym = eig.y_minus();
    let g = &gs.grid;
    let iw = gs.w.times_i();
    let dirs = [
        iw.clone(),
        gs.w1.clone(),
        RadialField::from_real(g, &yp.re())?,
        RadialField::from_parts(g, &vec![0.0; g.n], &yp.im())?,
    ];
    let l0 = |h: &RadialField<f64>| inner_h1(&iw, h);
    let l1 = |h: &RadialField<f64>| inner_h1(&gs.w1, h);
    let l2 = |h: &RadialField<f64>| bilinear_b(gs, &yp, h);
    let l3 = |h: &RadialField<f64>| bilinear_b(gs, &ym, h);
    project_constraints(f, &[&l0, &l1, &l2, &l3], &dirs)
}

/// `Q(f)/‖f‖²_{Ḣ¹}`.
pub fn coercivity_ratio(gs: &GroundState<f64>, f: &RadialField<f64>) -> Result<f64> {
    Ok(quadratic_q(gs, f)? / inner_h1(f, f)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{RadialGrid, Stretch};
    use std::sync::Arc;

    fn gs(d: usize, n: usize) -> GroundState<f64> {
        let pr = Params::new(d, 0.3).unwrap();
        let g = Arc::new(RadialGrid::new(d, n, 100.0, Stretch::default()).unwrap());
        GroundState::new(&pr, &g).unwrap()
    }

    #[test]
    fn eigenpair_small_grid() {
        let s = gs(3, 512);
        let e = compute_eigen(&s, &EigenOptions::default()).unwrap();
        assert!(e.residual_plus < 1e-10, "{}", e.residual_plus);
        assert!(e.sign_convention_ok);
        assert_eq!(e.negative_count, 1);
        assert!((e.e0 - 0.6359).abs() < 0.01, "{}", e.e0);
        let q = quadratic_q(&s, &e.y).unwrap();
        assert!(q.abs() < 1e-6 * inner_h1(&e.y, &e.y).unwrap());
        assert!(bilinear_b(&s, &e.y, &e.y_minus()).unwrap().abs() > 1e-3);
    }

    #[test]
    fn shooting_value_d3() {
        let pr = Params::new(3, 0.3).unwrap();
        let r = shooting_e0(&pr, &ShootingOptions::default()).unwrap();
        assert_eq!(r.roots_found, 1);
        assert!((r.e0 - 0.6359045).abs() < 1e-5, "{}", r.e0);
    }

    #[test]
    fn frobenius_exponents() {
        for d in 3..=5 {
            let pr = Params::new(d, 0.3).unwrap();
            let f = kernel_ode_asymptotics(&pr).unwrap();
            let dd = d as f64;
            assert!((f.origin_admissible - 1.0).abs() < 0.02, "{f:?}");
            assert!((f.origin_inadmissible + dd - 1.0).abs() < 0.02, "{f:?}");
            assert!((f.infinity_admissible + dd - 1.0).abs() < 0.05, "{f:?}");
            assert!((f.infinity_inadmissible - 1.0).abs() < 0.05, "{f:?}");
        }
    }

    #[test]
    fn scan_matches_eigensolver() {
        let s = gs(4, 256);
        let e = compute_eigen(&s, &EigenOptions::default()).unwrap();
        let rep = spectrum_scan(&s, 0.05 * e.e0).unwrap();
        assert!((rep.e0 - e.e0).abs() < 1e-6 * e.e0, "{} {}", rep.e0, e.e0);
        assert!(rep.zero_count >= 2);
        assert_eq!(rep.positive.len(), 1);
    }

    #[test]
    fn decay_of_bump_and_eigenfunction() {
        let s = gs(3, 512);
        let bump = RadialField::from_real_fn(&s.grid, |r| if r < 1.0 { 1.0 - r } else { 0.0 });
        assert_eq!(decay_check(&bump, &[2.0, 4.0]).unwrap().slope, f64::NEG_INFINITY);
        let e = compute_eigen(&s, &EigenOptions::default()).unwrap();
        let rep = eigen_decay_check(&e, &[4.0, 8.0, 16.0, 32.0]).unwrap();
        assert!(rep.slope < -4.0, "{rep:?}");
        assert!(decay_check(&bump, &[1000.0]).is_err());
    }
}
