//! Dense and banded linear algebra.
//!
//! Small and banded solvers are generic; the large dense eigenproblems run in
//! double precision through `faer`, pinned to sequential execution so results
//! are bitwise reproducible.

use crate::error::{Error, Result};
use crate::scalar::{Real, C};
use faer::{Mat, Par, Side};
use num_traits::Zero;
use std::sync::Once;

static SEQ: Once = Once::new();

fn init() {
    SEQ.call_once(|| faer::set_global_parallelism(Par::Seq));
}

/// Column-major dense matrix.
#[derive(Clone, Debug)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense { n, a: vec![0.0; n * n] }
    }
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[j * self.n + i]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[j * self.n + i] = v;
    }
    pub fn col(&self, j: usize) -> &[f64] {
        &self.a[j * self.n..(j + 1) * self.n]
    }
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let xj = x[j];
            if xj != 0.0 {
                for (yi, aij) in y.iter_mut().zip(self.col(j)) {
                    *yi += aij * xj;
                }
            }
        }
        y
    }
    pub fn matmul(&self, b: &Dense) -> Dense {
        init();
        Dense::from_mat(&(self.to_mat() * b.to_mat()))
    }
    fn to_mat(&self) -> Mat<f64> {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
    fn from_mat(m: &Mat<f64>) -> Dense {
        let n = m.nrows();
        let mut d = Dense::zeros(n);
        for j in 0..n {
            for i in 0..n {
                d.set(i, j, m[(i, j)]);
            }
        }
        d
    }
}

/// Eigen-decomposition of a symmetric tridiagonal matrix; eigenvalues ascending.
pub fn tridiag_eigh(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Dense)> {
    let n = diag.len();
    let mut m = Dense::zeros(n);
    for i in 0..n {
        m.set(i, i, diag[i]);
        if i + 1 < n {
            m.set(i + 1, i, off[i]);
            m.set(i, i + 1, off[i]);
        }
    }
    eigh(m)
}

/// Eigen-decomposition of a dense symmetric matrix (lower triangle used); eigenvalues ascending.
pub fn eigh(m: Dense) -> Result<(Vec<f64>, Dense)> {
    init();
    let e = m
        .to_mat()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigensolver: {e:?}")))?;
    let w = e.S().column_vector().iter().copied().collect();
    let u = e.U();
    let n = m.n;
    let mut v = Dense::zeros(n);
    for j in 0..n {
        for i in 0..n {
            v.set(i, j, u[(i, j)]);
        }
    }
    Ok((w, v))
}

/// Eigenvalues of a dense general matrix.
pub fn eigvals(m: Dense) -> Result<Vec<C<f64>>> {
    init();
    m.to_mat().eigenvalues().map_err(|e| Error::Numerical(format!("general eigensolver: {e:?}")))
}

/// Solves the complex tridiagonal system with sub-, main and super-diagonal
/// (no pivoting; intended for matrices with positive definite Hermitian part).
pub fn solve_tridiag<T: Real>(lower: &[C<T>], diag: &[C<T>], upper: &[C<T>], rhs: &mut [C<T>]) -> Result<()> {
    let n = diag.len();
    let mut c = vec![C::<T>::zero(); n];
    let mut beta = diag[0];
    if beta.norm() == T::zero() {
        return Err(Error::Numerical("zero pivot in tridiagonal solve".into()));
    }
    rhs[0] = rhs[0] / beta;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / beta;
        beta = diag[i] - lower[i - 1] * c[i - 1];
        if beta.norm() == T::zero() {
            return Err(Error::Numerical("zero pivot in tridiagonal solve".into()));
        }
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] = rhs[i] - c[i] * rhs[i + 1];
    }
    Ok(())
}

/// Band matrix with `kl` sub- and `ku` super-diagonals, LU-factorised with partial pivoting.
#[derive(Clone, Debug)]
pub struct BandLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    /// row-major band storage with `2 kl + ku + 1` columns; entry (i, j) at `i*w + (j + kl + kl - i)`
    ab: Vec<T>,
    piv: Vec<usize>,
    pub min_pivot: T,
}

pub struct Band<T> {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    ab: Vec<T>,
}

impl<T: Real> Band<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let w = 2 * kl + ku + 1;
        Band { n, kl, ku, ab: vec![T::zero(); n * w] }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        let w = 2 * self.kl + self.ku + 1;
        i * w + (j + 2 * self.kl - i)
    }

    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i},{j}) outside band");
        let k = self.idx(i, j);
        self.ab[k] = self.ab[k] + v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return T::zero();
        }
        self.ab[self.idx(i, j)]
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    pub fn lu(self) -> Result<BandLu<T>> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut m = self;
        let mut piv = vec![0; n];
        let mut min_pivot = T::infinity();
        let mut scale = T::zero();
        for v in &m.ab {
            scale = scale.max(v.abs());
        }
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = m.get(k, k).abs();
            for i in k + 1..=last {
                let v = m.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            min_pivot = min_pivot.min(best);
            if best == T::zero() || best < T::epsilon() * scale {
                return Err(Error::Numerical(format!("singular band matrix at column {k}")));
            }
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = m.idx(k, j);
                    let b = m.idx(p, j);
                    m.ab.swap(a, b);
                }
            }
            let pivot = m.get(k, k);
            for i in k + 1..=last {
                let li = m.get(i, k) / pivot;
                let ik = m.idx(i, k);
                m.ab[ik] = li;
                if li != T::zero() {
                    for j in k + 1..=jmax {
                        let kj = m.get(k, j);
                        let ij = m.idx(i, j);
                        m.ab[ij] = m.ab[ij] - li * kj;
                    }
                }
            }
        }
        Ok(BandLu { n, kl, ku, ab: m.ab, piv, min_pivot })
    }
}

impl<T: Real> BandLu<T> {
    fn at(&self, i: usize, j: usize) -> T {
        let w = 2 * self.kl + self.ku + 1;
        self.ab[i * w + (j + 2 * self.kl - i)]
    }

    pub fn solve(&self, b: &mut [T]) {
        let n = self.n;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let last = (k + self.kl).min(n - 1);
            let bk = b[k];
            for i in k + 1..=last {
                b[i] = b[i] - self.at(i, k) * bk;
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + self.kl + self.ku).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=jmax {
                s = s - self.at(k, j) * b[j];
            }
            b[k] = s / self.at(k, k);
        }
    }
}

/// Dense square solve with partial pivoting (small systems, row-major input).
pub fn solve_dense<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap()).unwrap();
        if a[p][k] == T::zero() {
            return Err(Error::Numerical("singular Gram matrix".into()));
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                let v = a[k][j];
                a[i][j] = a[i][j] - f * v;
            }
            let bk = b[k];
            b[i] = b[i] - f * bk;
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s = s - a[k][j] * b[j];
        }
        b[k] = s / a[k][k];
    }
    Ok(b)
}

/// Least squares `min ‖A x - y‖` by Householder QR; `a` is row-major `m x n`, `m >= n`.
/// Returns the solution and the residual norm.
pub fn least_squares<T: Real>(a: &[Vec<T>], y: &[T]) -> Result<(Vec<T>, T)> {
    let m = a.len();
    let n = a[0].len();
    if m < n {
        return Err(Error::Numerical("underdetermined least squares".into()));
    }
    let mut r: Vec<Vec<T>> = a.to_vec();
    let mut b = y.to_vec();
    for k in 0..n {
        let norm = (k..m).map(|i| r[i][k] * r[i][k]).sum::<T>().sqrt();
        if norm == T::zero() {
            return Err(Error::Numerical("rank-deficient least squares".into()));
        }
        let alpha = if r[k][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..m).map(|i| r[i][k]).collect();
        v[0] = v[0] - alpha;
        let vn = v.iter().map(|x| *x * *x).sum::<T>();
        if vn == T::zero() {
            continue;
        }
        for j in k..n {
            let s = (k..m).map(|i| v[i - k] * r[i][j]).sum::<T>() * T::lit(2.0) / vn;
            for i in k..m {
                r[i][j] = r[i][j] - s * v[i - k];
            }
        }
        let s = (k..m).map(|i| v[i - k] * b[i]).sum::<T>() * T::lit(2.0) / vn;
        for i in k..m {
            b[i] = b[i] - s * v[i - k];
        }
    }
    let mut x = vec![T::zero(); n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s = s - r[k][j] * x[j];
        }
        x[k] = s / r[k][k];
    }
    let res = (n..m).map(|i| b[i] * b[i]).sum::<T>().sqrt();
    Ok((x, res))
}
