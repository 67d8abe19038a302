//! Small dense complex helpers shared by the generator and evolution code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest entrywise modulus of `A − A†`.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * c(0.5)
}

/// Ascending eigenvalues of the Hermitian part of `a`.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(a).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

pub fn min_eigenvalue(a: &CMat) -> f64 {
    hermitian_eigenvalues(a).first().copied().unwrap_or(0.0)
}

pub fn trace(a: &CMat) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Row-major vectorization: `(i, j) ↦ i·N + j`.
pub fn vectorize(a: &CMat) -> CVec {
    let n = a.nrows();
    CVec::from_fn(n * n, |k, _| a[(k / n, k % n)])
}

pub fn unvectorize(v: &CVec, n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| v[i * n + j])
}

pub fn is_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Builds an `n×n` complex matrix from separate row-major real and imaginary parts.
pub fn from_parts(n: usize, re: &[f64], im: &[f64]) -> Option<CMat> {
    if re.len() != n * n || im.len() != n * n {
        return None;
    }
    Some(CMat::from_fn(n, n, |i, j| Complex64::new(re[i * n + j], im[i * n + j])))
}

/// Row-major real and imaginary parts of `a`.
pub fn to_parts(a: &CMat) -> (Vec<f64>, Vec<f64>) {
    let n = a.nrows();
    let mut re = Vec::with_capacity(n * n);
    let mut im = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..a.ncols() {
            re.push(a[(i, j)].re);
            im.push(a[(i, j)].im);
        }
    }
    (re, im)
}
