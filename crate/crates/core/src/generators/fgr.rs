use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::system::{Distribution, SystemSpec};

/// Semiclassical transition rates `P[λ, λ′]` (units 1/time).
#[derive(Debug, Clone, PartialEq)]
pub struct FgrMatrix(DMatrix<f64>);

impl FgrMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "rate matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Parameter("rates must be finite and nonnegative".into()));
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, l: usize, lp: usize) -> f64 {
        self.0[(l, lp)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Fermi's golden rule, `P[λ, λ′] = (2π/ħ)|H′[λ λ′]|² δ(ε_λ − ε_λ′)`.
///
/// Uses the same product order as the rate tensors so the diagonal slices
/// agree bit for bit.
pub fn fgr_rates(spec: &SystemSpec) -> FgrMatrix {
    let n = spec.dim();
    let e = spec.energies();
    let h = spec.interaction();
    let prefactor = 2.0 * PI / spec.hbar();
    let m = DMatrix::from_fn(n, n, |l, lp| {
        let amplitude = h[(l, lp)] * h[(l, lp)].conj();
        (amplitude * (prefactor * spec.kernel().weight(e[l] - e[lp]))).re
    });
    FgrMatrix(m)
}

/// `df_λ/dt = Σ_λ′ (P[λ λ′] f_λ′ − P[λ′ λ] f_λ)`.
pub fn boltzmann_rhs(p: &FgrMatrix, f: &Distribution) -> Result<Vec<f64>> {
    boltzmann_rhs_raw(p, f.values())
}

pub(crate) fn boltzmann_rhs_raw(p: &FgrMatrix, f: &[f64]) -> Result<Vec<f64>> {
    let n = p.dim();
    if f.len() != n {
        return Err(Error::Dimension(format!(
            "distribution has {} entries, rates are {n}x{n}",
            f.len()
        )));
    }
    Ok((0..n)
        .map(|l| (0..n).map(|lp| p.get(l, lp) * f[lp] - p.get(lp, l) * f[l]).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{random_system, DeltaKernel};

    #[test]
    fn rates_are_symmetric_and_vanish_without_coupling() {
        let s = random_system(4, 5, 1.0, 0.3, DeltaKernel::gaussian(0.4).unwrap()).unwrap();
        let p = fgr_rates(&s);
        for l in 0..5 {
            for lp in 0..5 {
                assert!((p.get(l, lp) - p.get(lp, l)).abs() <= 1e-15 * p.get(l, lp).max(1.0));
            }
        }
        let z = random_system(4, 5, 1.0, 0.0, DeltaKernel::gaussian(0.4).unwrap()).unwrap();
        assert!(fgr_rates(&z).matrix().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn uniform_occupation_is_stationary_for_symmetric_rates() {
        let s = random_system(8, 4, 1.0, 0.3, DeltaKernel::gaussian(0.5).unwrap()).unwrap();
        let rhs = boltzmann_rhs(&fgr_rates(&s), &Distribution::new(vec![0.25; 4]).unwrap()).unwrap();
        assert!(rhs.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn single_source_flow() {
        let p = FgrMatrix::new(DMatrix::from_row_slice(2, 2, &[0.0, 0.7, 0.7, 0.0])).unwrap();
        let rhs = boltzmann_rhs(&p, &Distribution::new(vec![1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(rhs, vec![-0.7, 0.7]);
    }

    #[test]
    fn rhs_sums_to_zero_and_checks_dimension() {
        let s = random_system(21, 6, 1.0, 0.3, DeltaKernel::gaussian(0.2).unwrap()).unwrap();
        let p = fgr_rates(&s);
        let f = Distribution::new(vec![0.1, 0.3, 0.05, 0.2, 0.15, 0.2]).unwrap();
        let rhs = boltzmann_rhs(&p, &f).unwrap();
        assert!(rhs.iter().sum::<f64>().abs() < 1e-13);
        assert!(boltzmann_rhs(&p, &Distribution::new(vec![0.5, 0.5]).unwrap()).is_err());
    }
}
