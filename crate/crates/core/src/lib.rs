//! Numerical laboratory for weak-coupling master equations.
//!
//! The crate builds two second-order generators for a system whose
//! noninteracting eigenbasis `{|λ⟩}` and interaction `H′` are given
//! explicitly:
//!
//! * the conventional Markov superoperator `−½[𝓗, [𝓚, ρ]]`, with the
//!   energy-conserving delta on the second index pair only, and
//! * the time-symmetrized ("quantum Fermi's golden rule") generator, whose
//!   delta acts on the *average* energy of each index pair.
//!
//! Both are assembled as dense `N²×N²` superoperators (row-major
//! vectorization, `(λ1, λ2) ↦ λ1·N + λ2`), propagated in time, and probed
//! for trace preservation, positivity, complete positivity and
//! population/coherence (T3) coupling.

pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod generators;
pub mod linalg;
pub mod system;

pub use error::{Error, Result};
pub use linalg::CMat;
pub use system::{
    random_density, random_system, validate_density, DeltaKernel, DensityMatrix, Distribution, KernelMode, SystemSpec,
    ValidationReport,
};
