//! Dense eigenvalue solvers.
//!
//! Hermitian matrices (real symmetric or complex) are reduced to a real
//! symmetric tridiagonal matrix by Householder reflections and then
//! diagonalized by the implicit QL algorithm. General complex matrices go
//! through a Householder Hessenberg reduction followed by single-shift complex
//! QR sweeps with Wilkinson shifts. Only eigenvalues are computed.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

pub use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Field elements the solvers work over: `f64` and `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    const ZERO: Self;
    const ONE: Self;
    fn from_real(x: f64) -> Self;
    fn re(self) -> f64;
    fn conj(self) -> Self;
    fn norm_sqr(self) -> f64;
    fn scale(self, s: f64) -> Self;

    fn modulus(self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    fn from_real(x: f64) -> Self {
        x
    }
    fn re(self) -> f64 {
        self
    }
    fn conj(self) -> Self {
        self
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    const ONE: Self = Complex64::new(1.0, 0.0);
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn modulus(self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::config(format!(
                "{} entries do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.modulus()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> T {
        let mut t = T::ZERO;
        for i in 0..self.rows.min(self.cols) {
            t += self[(i, i)];
        }
        t
    }

    pub fn scale(&mut self, s: f64) {
        for x in &mut self.data {
            *x = x.scale(s);
        }
    }

    /// `self + s·other`, entrywise.
    pub fn add_scaled(&mut self, other: &Matrix<T>, s: f64) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::config("matrix shapes differ"));
        }
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += y.scale(s);
        }
        Ok(())
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::config("inner matrix dimensions differ"));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `A A†`, exactly Hermitian by construction.
    pub fn gram(&self) -> Self {
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            let ri = self.row(i);
            for j in 0..=i {
                let rj = self.row(j);
                let mut s = T::ZERO;
                for (&a, &b) in ri.iter().zip(rj) {
                    s += a * b.conj();
                }
                out[(i, j)] = s;
                out[(j, i)] = s.conj();
            }
        }
        for i in 0..n {
            out[(i, i)] = T::from_real(out[(i, i)].re());
        }
        out
    }

    /// `max |a_ij − conj(a_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut d: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..=i {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).modulus());
            }
        }
        d
    }

    /// `‖A†A − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut d: f64 = 0.0;
        // (A†A)_ij = Σ_k conj(a_ki) a_kj, accumulated row by row of A.
        let mut acc = vec![T::ZERO; n * n];
        for k in 0..n {
            let r = self.row(k);
            for i in 0..n {
                let ci = r[i].conj();
                let dst = &mut acc[i * n..(i + 1) * n];
                for (a, &b) in dst.iter_mut().zip(r) {
                    *a += ci * b;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { T::ONE } else { T::ZERO };
                d = d.max((acc[i * n + j] - target).modulus());
            }
        }
        d
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Relative Hermiticity tolerance accepted by [`hermitian_eigenvalues`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// The input is checked to be Hermitian within `HERMITIAN_TOL·max(1, max|a_ij|)`.
pub fn hermitian_eigenvalues<T: Scalar>(a: &Matrix<T>) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::Matrix(format!(
            "{}x{} matrix is not square",
            a.rows, a.cols
        )));
    }
    let defect = a.hermiticity_defect();
    if !(defect <= HERMITIAN_TOL * a.max_abs().max(1.0)) {
        return Err(Error::Matrix(format!("hermiticity defect {defect:e}")));
    }
    let (d, e) = tridiagonalize(a.clone());
    tridiagonal_eigenvalues(d, e)
}

/// Householder reduction of a Hermitian matrix to real tridiagonal form.
///
/// Returns the diagonal and the moduli of the off-diagonal. A complex
/// Hermitian tridiagonal matrix is unitarily similar to the real one with
/// off-diagonal `|e_k|`, so the phases are dropped.
fn tridiagonalize<T: Scalar>(mut a: Matrix<T>) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![T::ZERO; n];
    let mut w = vec![T::ZERO; n];
    for k in 0..n.saturating_sub(2) {
        // x = column k below the diagonal, read off row k.
        let m = k + 1;
        let mut tail_sq = 0.0;
        for i in m..n {
            v[i] = a[(k, i)].conj();
            if i > m {
                tail_sq += v[i].norm_sqr();
            }
        }
        let xnorm_sq = tail_sq + v[m].norm_sqr();
        let xnorm = xnorm_sq.sqrt();
        d[k] = a[(k, k)].re();
        if tail_sq == 0.0 {
            e[k] = xnorm;
            continue;
        }
        // v = x − βe₁ with β = −phase(x₀)·‖x‖, so that Hx = βe₁.
        let x0 = v[m];
        let x0abs = x0.modulus();
        let phase = if x0abs == 0.0 {
            T::ONE
        } else {
            x0.scale(1.0 / x0abs)
        };
        let beta = -phase.scale(xnorm);
        v[m] = x0 - beta;
        e[k] = xnorm;
        let vnorm_sq = v[m].norm_sqr() + tail_sq;
        let tau = 2.0 / vnorm_sq;
        // p = τ A v on the trailing block, then w = p − (τ/2)(v†p) v.
        let mut vp = T::ZERO;
        for i in m..n {
            let row = &a.data[i * n + m..(i + 1) * n];
            let mut s = T::ZERO;
            for (&aij, &vj) in row.iter().zip(&v[m..n]) {
                s += aij * vj;
            }
            w[i] = s.scale(tau);
            vp += v[i].conj() * w[i];
        }
        let kk = 0.5 * tau * vp.re();
        for i in m..n {
            w[i] -= v[i].scale(kk);
        }
        // A ← A − v w† − w v†
        for i in m..n {
            let vi = v[i];
            let wi = w[i];
            let row = &mut a.data[i * n + m..(i + 1) * n];
            for ((aij, &vj), &wj) in row.iter_mut().zip(&v[m..n]).zip(&w[m..n]) {
                *aij -= vi * wj.conj() + wi * vj.conj();
            }
        }
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2, n - 2)].re();
        e[n - 2] = a[(n - 1, n - 2)].modulus();
    }
    if n >= 1 {
        d[n - 1] = a[(n - 1, n - 1)].re();
    }
    (d, e)
}

const QL_MAX_ITER: usize = 60;

/// Eigenvalues of the real symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e[i]` couples `i` and `i+1`), ascending.
pub fn tridiagonal_eigenvalues(mut d: Vec<f64>, e: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 0 {
        return Ok(d);
    }
    if e.len() + 1 != n {
        return Err(Error::config("off-diagonal must have n-1 entries"));
    }
    let mut e = e;
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                return Err(Error::Convergence(format!(
                    "tridiagonal QL did not converge for eigenvalue {l}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(d)
}

/// Eigenvalues of a general complex square matrix, in no particular order.
pub fn complex_eigenvalues(a: &Matrix<Complex64>) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::Matrix(format!(
            "{}x{} matrix is not square",
            a.rows, a.cols
        )));
    }
    if a.data
        .iter()
        .any(|x| !x.re.is_finite() || !x.im.is_finite())
    {
        return Err(Error::Matrix("matrix has non-finite entries".into()));
    }
    let mut h = a.clone();
    hessenberg(&mut h);
    hessenberg_qr(h)
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut Matrix<Complex64>) {
    let n = a.rows;
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n.saturating_sub(2) {
        let m = k + 1;
        let mut tail_sq = 0.0;
        for i in m..n {
            v[i] = a[(i, k)];
            if i > m {
                tail_sq += v[i].norm_sqr();
            }
        }
        if tail_sq == 0.0 {
            continue;
        }
        let xnorm_sq = tail_sq + v[m].norm_sqr();
        let xnorm = xnorm_sq.sqrt();
        let x0 = v[m];
        let x0abs = x0.norm();
        let phase = if x0abs == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0abs
        };
        let beta = -phase * xnorm;
        v[m] = x0 - beta;
        let tau = 2.0 / (v[m].norm_sqr() + tail_sq);
        // Left: rows m..n, columns k..n.
        for j in k..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in m..n {
                s += v[i].conj() * a[(i, j)];
            }
            s *= tau;
            for i in m..n {
                let vi = v[i];
                a[(i, j)] -= vi * s;
            }
        }
        // Right: all rows, columns m..n.
        for i in 0..n {
            let row = &mut a.data[i * n + m..(i + 1) * n];
            let mut s = Complex64::new(0.0, 0.0);
            for (x, vj) in row.iter().zip(&v[m..n]) {
                s += *x * vj;
            }
            s *= tau;
            for (x, vj) in row.iter_mut().zip(&v[m..n]) {
                *x -= s * vj.conj();
            }
        }
        a[(m, k)] = beta;
        for i in m + 1..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

const QR_MAX_ITER_PER_EIG: usize = 60;

fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Shifted QR on an upper Hessenberg matrix; transformations are restricted
/// to the active window since only eigenvalues are wanted.
fn hessenberg_qr(mut h: Matrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = h.rows;
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(eig);
    }
    let norm = h.max_abs();
    let small = f64::MIN_POSITIVE * (n as f64) / f64::EPSILON;
    let mut rot: Vec<(f64, Complex64)> = vec![(0.0, Complex64::new(0.0, 0.0)); n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // Deflation search.
        let mut lo = hi;
        while lo > 0 {
            let sub = cabs1(h[(lo, lo - 1)]);
            let mut diag = cabs1(h[(lo - 1, lo - 1)]) + cabs1(h[(lo, lo)]);
            if diag == 0.0 {
                diag = norm;
            }
            if sub <= f64::EPSILON * diag || sub <= small {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > QR_MAX_ITER_PER_EIG {
            return Err(Error::Convergence(format!(
                "complex QR did not converge at row {hi}"
            )));
        }
        let mu = if iter % 10 == 0 {
            // exceptional shift
            h[(hi, hi)] + 0.75 * cabs1(h[(hi, hi - 1)])
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rot[k] = (c, s);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = Complex64::new(0.0, 0.0);
        }
        for k in lo..hi {
            let (c, s) = rot[k];
            let sc = s.conj();
            for i in lo..=(k + 1).min(hi) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * sc;
                h[(i, k + 1)] = y * c - x * s;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(eig)
}

/// Rotation `[[c, s], [−s̄, c]]` with real `c` mapping `(a, b)` to `(ρ, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let babs = b.norm();
    if babs == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let aabs = a.norm();
    if aabs == 0.0 {
        return (0.0, b.conj() / babs);
    }
    let r = aabs.hypot(babs);
    (aabs / r, (a / aabs) * b.conj() / r)
}

/// Eigenvalue of `[[a, b], [c, d]]` closer to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let l1 = d + half + disc;
    let l2 = d + half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}
