//! Rate tensors and superoperators for the coherent, conventional Markov,
//! symmetrized and semiclassical generators.

mod coherent;
mod fgr;
mod lindblad;
mod rates;
mod superop;

pub use coherent::coherent_liouvillian;
pub(crate) use fgr::boltzmann_rhs_raw;
pub use fgr::{boltzmann_rhs, fgr_rates, FgrMatrix};
pub use lindblad::{lindblad_family, lindblad_superoperator, LindbladFamily, LindbladTerm};
pub use rates::{conventional_rates, rates_to_superoperator, symmetrized_rates, RateFlavor, RateTensor};
pub use superop::Superoperator;

use crate::system::{DeltaKernel, KernelMode};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Regularized `δ(x)`: a normalized Gaussian of width `η`, or a box of
/// half-width `η` whose height matches the Gaussian peak.
pub fn delta_kernel(x: f64, kernel: &DeltaKernel) -> f64 {
    let eta = kernel.eta;
    match kernel.mode {
        KernelMode::Gaussian => (-x * x / (2.0 * eta * eta)).exp() * INV_SQRT_2PI / eta,
        KernelMode::Sharp => {
            if x.abs() <= eta {
                INV_SQRT_2PI / eta
            } else {
                0.0
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_closed_forms() {
        let g = DeltaKernel::gaussian(0.05).unwrap();
        let peak = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * 0.05);
        assert!((delta_kernel(0.0, &g) - peak).abs() < 1e-13);
        assert!((delta_kernel(0.0, &g) - 7.978_845_608_028_654).abs() < 1e-12);
        assert!((delta_kernel(0.05, &g) - (-0.5f64).exp() * peak).abs() < 1e-13);
        let s = DeltaKernel::sharp(0.05).unwrap();
        assert_eq!(delta_kernel(0.1, &s), 0.0);
        assert_eq!(delta_kernel(0.05, &s), delta_kernel(0.0, &s));
        assert!((delta_kernel(-0.01, &s) - peak).abs() < 1e-13);
    }

    #[test]
    fn gaussian_kernel_integrates_to_one() {
        let g = DeltaKernel::gaussian(0.3).unwrap();
        let h = 1e-3;
        let total: f64 = (-5000..=5000).map(|k| delta_kernel(k as f64 * h, &g) * h).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }
}
