//! Adaptive Dormand–Prince 5(4) integrator for small real systems.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: 1e-10, atol: 1e-14, max_steps: 1_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction) and returns `y(t1)`.
pub fn integrate<F>(mut f: F, t0: f64, y0: &[f64], t1: f64, tol: Tolerance) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    if t1 == t0 {
        return Ok(y);
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut h = span * 1e-3;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    f(t, &y, &mut k[0]);
    let mut steps = 0;
    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > tol.max_steps {
            return Err(Error::NoConvergence(format!("ode: step limit at t = {t}")));
        }
        if h < span * 1e-15 {
            return Err(Error::NoConvergence(format!("ode: step size underflow at t = {t}")));
        }
        let last = h >= (t1 - t).abs();
        let hs = if last { (t1 - t).abs() } else { h } * dir;
        let stage = |tmp: &mut Vec<f64>, k: &Vec<Vec<f64>>, w: &[(usize, f64)]| {
            for i in 0..n {
                tmp[i] = y[i] + hs * w.iter().map(|&(s, c)| c * k[s][i]).sum::<f64>();
            }
        };
        stage(&mut tmp, &k, &[(0, A21)]);
        f(t + C2 * hs, &tmp, &mut k[1]);
        stage(&mut tmp, &k, &[(0, A31), (1, A32)]);
        f(t + C3 * hs, &tmp, &mut k[2]);
        stage(&mut tmp, &k, &[(0, A41), (1, A42), (2, A43)]);
        f(t + C4 * hs, &tmp, &mut k[3]);
        stage(&mut tmp, &k, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
        f(t + C5 * hs, &tmp, &mut k[4]);
        stage(&mut tmp, &k, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        f(t + hs, &tmp, &mut k[5]);
        let ynew: Vec<f64> =
            (0..n).map(|i| y[i] + hs * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i])).collect();
        f(t + hs, &ynew, &mut k[6]);
        let mut err = 0.0f64;
        for i in 0..n {
            let e = hs * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(ynew[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + hs };
            y = ynew;
            k.swap(0, 6);
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = hs.abs() * fac;
    }
    Ok(y)
}

/// Integrates through a sequence of increasing or decreasing checkpoints, returning the state at each.
pub fn integrate_through<F>(mut f: F, t0: f64, y0: &[f64], points: &[f64], tol: Tolerance) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut out = Vec::with_capacity(points.len());
    let mut t = t0;
    let mut y = y0.to_vec();
    for &p in points {
        y = integrate(&mut f, t, &y, p, tol)?;
        t = p;
        out.push(y.clone());
    }
    Ok(out)
}
