use super::superop::Superoperator;
use crate::linalg::{self, CMat};
use crate::system::SystemSpec;

/// `ρ ↦ −(i/ħ)[H, ρ]` with `H = H₀`, or `H₀ + H′` when `include_interaction`.
pub fn coherent_liouvillian(spec: &SystemSpec, include_interaction: bool) -> Superoperator {
    let mut h: CMat = spec.h0();
    if include_interaction {
        h += spec.interaction();
    }
    let n = spec.dim();
    let factor = -linalg::I / spec.hbar();
    let m = (Superoperator::left(&h).matrix() - Superoperator::right(&h).matrix()) * factor;
    Superoperator::new(n, m).expect("square by construction")
}
