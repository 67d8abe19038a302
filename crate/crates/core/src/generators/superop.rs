use std::ops::Add;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Linear map on `N×N` matrices stored as an `N²×N²` matrix acting on
/// row-major vectorized operands.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMat,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: CMat) -> Result<Self> {
        let d2 = dim * dim;
        if matrix.nrows() != d2 || matrix.ncols() != d2 {
            return Err(Error::Dimension(format!(
                "superoperator for N = {dim} must be {d2}x{d2}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMat::zeros(dim * dim, dim * dim),
        }
    }

    pub(crate) fn from_fn(dim: usize, f: impl Fn(usize, usize, usize, usize) -> Complex64) -> Self {
        let d2 = dim * dim;
        let matrix = CMat::from_fn(d2, d2, |r, col| f(r / dim, r % dim, col / dim, col % dim));
        Self { dim, matrix }
    }

    /// Left multiplication `ρ ↦ Aρ`.
    pub fn left(a: &CMat) -> Self {
        Self::from_fn(
            a.nrows(),
            |i, j, k, l| if j == l { a[(i, k)] } else { Complex64::default() },
        )
    }

    /// Right multiplication `ρ ↦ ρB`.
    pub fn right(b: &CMat) -> Self {
        Self::from_fn(
            b.nrows(),
            |i, j, k, l| if i == k { b[(l, j)] } else { Complex64::default() },
        )
    }

    /// Sandwich `ρ ↦ AρB`.
    pub fn sandwich(a: &CMat, b: &CMat) -> Self {
        Self::from_fn(a.nrows(), |i, j, k, l| a[(i, k)] * b[(l, j)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Entry `S[(a b), (c d)]`.
    pub fn entry(&self, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
        self.matrix[(a * self.dim + b, c * self.dim + d)]
    }

    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::Dimension(format!(
                "operand is {}x{}, generator acts on N = {}",
                rho.nrows(),
                rho.ncols(),
                self.dim
            )));
        }
        Ok(linalg::unvectorize(&(&self.matrix * linalg::vectorize(rho)), self.dim))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix * linalg::c(factor),
        }
    }

    /// Largest `|Σ_λ S[(λλ),(μν)]|` over input index pairs.
    pub fn trace_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for col in 0..n * n {
            let s: Complex64 = (0..n).map(|l| self.matrix[(l * n + l, col)]).sum();
            worst = worst.max(s.norm());
        }
        worst
    }

    /// Largest `|S[(ab),(cd)] − S*[(ba),(dc)]|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let x = self.entry(a, b, c, d) - self.entry(b, a, d, c).conj();
                        worst = worst.max(x.norm());
                    }
                }
            }
        }
        worst
    }

    /// Frobenius norm of the matrix.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Induced ∞-norm (largest absolute row sum); bounds every eigenvalue modulus.
    pub fn rate_bound(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

impl Add for Superoperator {
    type Output = Superoperator;

    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "adding superoperators of different dimension");
        Self {
            dim: self.dim,
            matrix: self.matrix + rhs.matrix,
        }
    }
}

impl<'a> Add<&'a Superoperator> for &'a Superoperator {
    type Output = Superoperator;

    fn add(self, rhs: &Superoperator) -> Superoperator {
        self.clone() + rhs.clone()
    }
}
