use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::superop::Superoperator;
use crate::error::{Error, Result};
use crate::system::SystemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateFlavor {
    /// Delta on the second index pair only, `δ(ε_λ2 − ε_λ′2)`.
    Conventional,
    /// Delta on the average energies of both pairs.
    Symmetrized,
}

/// Generalized scattering rates `P[λ1 λ2, λ′1 λ′2]` (units 1/time).
#[derive(Debug, Clone, PartialEq)]
pub struct RateTensor {
    dim: usize,
    flavor: RateFlavor,
    data: Vec<Complex64>,
}

impl RateTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flavor(&self) -> RateFlavor {
        self.flavor
    }

    #[inline]
    pub fn get(&self, l1: usize, l2: usize, lp1: usize, lp2: usize) -> Complex64 {
        let n = self.dim;
        self.data[((l1 * n + l2) * n + lp1) * n + lp2]
    }

    /// All entries in index order, `(λ1, λ2, λ′1, λ′2, value)`.
    pub fn entries(&self) -> impl Iterator<Item = ([usize; 4], Complex64)> + '_ {
        let n = self.dim;
        self.data
            .iter()
            .enumerate()
            .map(move |(k, &v)| ([k / (n * n * n), (k / (n * n)) % n, (k / n) % n, k % n], v))
    }

    /// Largest `|P[λ1 λ2, λ′1 λ′2] − P*[λ2 λ1, λ′2 λ′1]|`.
    pub fn conjugation_defect(&self) -> f64 {
        self.entries()
            .map(|([a, b, c, d], v)| (v - self.get(b, a, d, c).conj()).norm())
            .fold(0.0, f64::max)
    }
}

fn build(spec: &SystemSpec, flavor: RateFlavor) -> RateTensor {
    let n = spec.dim();
    let e = spec.energies();
    let h = spec.interaction();
    let kernel = spec.kernel();
    let prefactor = 2.0 * PI / spec.hbar();
    let mut data = Vec::with_capacity(n * n * n * n);
    for l1 in 0..n {
        for l2 in 0..n {
            for lp1 in 0..n {
                for lp2 in 0..n {
                    let mismatch = match flavor {
                        RateFlavor::Conventional => e[l2] - e[lp2],
                        RateFlavor::Symmetrized => (e[l1] + e[l2]) / 2.0 - (e[lp1] + e[lp2]) / 2.0,
                    };
                    let amplitude = h[(l1, lp1)] * h[(l2, lp2)].conj();
                    data.push(amplitude * (prefactor * kernel.weight(mismatch)));
                }
            }
        }
    }
    RateTensor { dim: n, flavor, data }
}

/// `P = (2π/ħ)·H′[λ1 λ′1]·H′*[λ2 λ′2]·δ(ε_λ2 − ε_λ′2)`.
pub fn conventional_rates(spec: &SystemSpec) -> RateTensor {
    build(spec, RateFlavor::Conventional)
}

/// `P̃ = (2π/ħ)·H′[λ1 λ′1]·H′*[λ2 λ′2]·δ((ε_λ1 + ε_λ2)/2 − (ε_λ′1 + ε_λ′2)/2)`.
pub fn symmetrized_rates(spec: &SystemSpec) -> RateTensor {
    build(spec, RateFlavor::Symmetrized)
}

/// Assembles the in/out-scattering generator
///
/// ```text
/// dρ[λ1 λ2]/dt = ½ Σ ( P[λ1 λ2, λ′1 λ′2] ρ[λ′1 λ′2] − P[λ1 λ′2, λ′1 λ′1] ρ[λ′2 λ2] ) + H.c.
/// ```
///
/// The Hermitian-conjugate half is taken as `X(ρ†)†`, which keeps the map
/// linear and coincides with the usual reading on Hermitian `ρ`.
pub fn rates_to_superoperator(rates: &RateTensor) -> Result<Superoperator> {
    let n = rates.dim();
    if n == 0 {
        return Err(Error::Dimension("empty rate tensor".into()));
    }
    // out-scattering sums Σ_k P[a c, k k]
    let mut out = vec![Complex64::default(); n * n];
    for a in 0..n {
        for c in 0..n {
            out[a * n + c] = (0..n).map(|k| rates.get(a, c, k, k)).sum();
        }
    }
    let half_term = |a: usize, b: usize, c: usize, d: usize| {
        let mut m = rates.get(a, b, c, d);
        if b == d {
            m -= out[a * n + c];
        }
        m
    };
    Ok(Superoperator::from_fn(n, |a, b, c, d| {
        (half_term(a, b, c, d) + half_term(b, a, d, c).conj()) * 0.5
    }))
}
