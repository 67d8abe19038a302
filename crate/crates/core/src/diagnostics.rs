//! Positivity, complete-positivity and population/coherence coupling checks.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{default_steps, propagate, Method, TimeGrid, Trajectory};
use crate::generators::{coherent_liouvillian, conventional_rates, rates_to_superoperator, Superoperator};
use crate::linalg::{self, CMat};
use crate::system::{random_density, random_system, DeltaKernel, DensityMatrix, SystemSpec};

/// A snapshot counts as a positivity violation below this eigenvalue.
pub const VIOLATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityScan {
    pub min_eigenvalue: f64,
    pub index: usize,
    pub time: f64,
}

/// Smallest snapshot eigenvalue along a trajectory and where it occurs.
pub fn positivity_scan(traj: &Trajectory) -> PositivityScan {
    let (index, min_eigenvalue) =
        traj.diagnostics
            .iter()
            .map(|d| d.min_eigenvalue)
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (k, v)| if v < best.1 { (k, v) } else { best },
            );
    PositivityScan {
        min_eigenvalue,
        index,
        time: traj.grid.time(index),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub master_seed: u64,
    pub budget: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub level_spacing: f64,
    pub coupling_scale: f64,
    pub kernel: DeltaKernel,
    /// Trajectory length in units of the dissipator's fastest time scale.
    #[serde(default = "default_relaxation_times")]
    pub relaxation_times: f64,
    /// Upper bound on the step count per trajectory.
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_relaxation_times() -> f64 {
    10.0
}

fn default_max_steps() -> usize {
    2000
}

impl SearchParams {
    /// N between 3 and 6, coupling 0.3, Gaussian width 0.05, unit spacing.
    pub fn defaults(master_seed: u64, budget: usize) -> Self {
        Self {
            master_seed,
            budget,
            n_min: 3,
            n_max: 6,
            level_spacing: 1.0,
            coupling_scale: 0.3,
            kernel: DeltaKernel {
                mode: crate::KernelMode::Gaussian,
                eta: 0.05,
            },
            relaxation_times: default_relaxation_times(),
            max_steps: default_max_steps(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::Parameter("search budget must be at least 1".into()));
        }
        if self.n_min < 2 || self.n_max < self.n_min {
            return Err(Error::Parameter(format!(
                "invalid dimension range {}..={}",
                self.n_min, self.n_max
            )));
        }
        if !(self.relaxation_times > 0.0 && self.relaxation_times.is_finite()) || self.max_steps == 0 {
            return Err(Error::Parameter(
                "trajectory length and step cap must be positive".into(),
            ));
        }
        DeltaKernel::new(self.kernel.mode, self.kernel.eta)?;
        // scale checks are shared with the instance generator
        random_system(0, self.n_min, self.level_spacing, self.coupling_scale, self.kernel)?;
        Ok(())
    }

    /// Seeds and dimension of instance `index`, drawn from its own stream so
    /// that instances do not depend on evaluation order.
    pub fn instance_seeds(&self, index: usize) -> (u64, u64, usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(index as u64);
        let spec_seed = rng.next_u64();
        let rho_seed = rng.next_u64();
        let n = rng.random_range(self.n_min..=self.n_max);
        (spec_seed, rho_seed, n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub master_seed: u64,
    pub instance_index: usize,
    pub spec_seed: u64,
    pub n: usize,
    pub rho_seed: u64,
    pub level_spacing: f64,
    pub coupling_scale: f64,
    pub kernel: DeltaKernel,
    pub grid: TimeGrid,
    pub worst_time: f64,
    /// Smallest snapshot eigenvalue; negative when positivity was lost.
    pub worst_min_eigenvalue: f64,
    pub violated: bool,
    pub instances_evaluated: usize,
}

impl ViolationReport {
    pub fn instance(&self) -> Result<(SystemSpec, DensityMatrix)> {
        Ok((
            random_system(
                self.spec_seed,
                self.n,
                self.level_spacing,
                self.coupling_scale,
                self.kernel,
            )?,
            random_density(self.rho_seed, self.n)?,
        ))
    }
}

/// Conventional Markov dissipator plus the free evolution under `H₀`.
pub fn conventional_with_coherent(spec: &SystemSpec) -> Superoperator {
    rates_to_superoperator(&conventional_rates(spec)).expect("valid spec") + coherent_liouvillian(spec, false)
}

/// Grid covering `relaxation_times` of the dissipator's fastest rate.
pub fn relaxation_grid(
    dissipator: &Superoperator,
    full: &Superoperator,
    relaxation_times: f64,
    max_steps: usize,
) -> TimeGrid {
    let rate = dissipator.rate_bound();
    let t1 = if rate > 0.0 {
        relaxation_times / rate
    } else {
        relaxation_times
    };
    let steps = default_steps(full, t1).min(max_steps);
    TimeGrid { t0: 0.0, t1, steps }
}

fn evaluate(params: &SearchParams, index: usize) -> Option<(f64, ViolationReport)> {
    let (spec_seed, rho_seed, n) = params.instance_seeds(index);
    let spec = random_system(spec_seed, n, params.level_spacing, params.coupling_scale, params.kernel).ok()?;
    let rho0 = random_density(rho_seed, n).ok()?;
    let dissipator = rates_to_superoperator(&conventional_rates(&spec)).ok()?;
    let gen = &dissipator + &coherent_liouvillian(&spec, false);
    let grid = relaxation_grid(&dissipator, &gen, params.relaxation_times, params.max_steps);
    let traj = propagate(&gen, &rho0, grid, Method::Expm).ok()?;
    let scan = positivity_scan(&traj);
    Some((
        scan.min_eigenvalue,
        ViolationReport {
            master_seed: params.master_seed,
            instance_index: index,
            spec_seed,
            n,
            rho_seed,
            level_spacing: params.level_spacing,
            coupling_scale: params.coupling_scale,
            kernel: params.kernel,
            grid,
            worst_time: scan.time,
            worst_min_eigenvalue: scan.min_eigenvalue,
            violated: scan.min_eigenvalue < -VIOLATION_TOL,
            instances_evaluated: params.budget,
        },
    ))
}

/// Random search for a state whose conventional Markov evolution leaves the
/// positive cone. Runs on the ambient rayon pool; the result does not depend
/// on the number of threads.
pub fn search_positivity_violation(params: &SearchParams) -> Result<ViolationReport> {
    params.validate()?;
    let outcomes: Vec<Option<(f64, ViolationReport)>> = (0..params.budget)
        .into_par_iter()
        .map(|i| evaluate(params, i))
        .collect();
    outcomes
        .into_iter()
        .flatten()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.instance_index.cmp(&b.1.instance_index)))
        .map(|(_, report)| report)
        .ok_or_else(|| Error::Precondition("no search instance could be evaluated".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CpVerdict {
    Cp,
    NotCp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpReport {
    /// Smallest eigenvalue of the Choi matrix compressed to the orthogonal
    /// complement of the maximally entangled vector (1/time).
    pub min_eigenvalue: f64,
    pub tolerance: f64,
    pub verdict: CpVerdict,
}

/// Choi matrix `C[(a c), (b d)] = S[(a b), (c d)]`.
pub fn choi_matrix(gen: &Superoperator) -> CMat {
    let n = gen.dim();
    CMat::from_fn(n * n, n * n, |r, col| gen.entry(r / n, col / n, r % n, col % n))
}

/// Conditional complete positivity of a generator: its Choi matrix must be
/// positive semidefinite on the complement of `Σ_a |a a⟩`.
pub fn conditional_cp_check(gen: &Superoperator) -> Result<CpReport> {
    let n = gen.dim();
    let norm = gen.norm();
    let structural_tol = 1e-12 * norm.max(1.0);
    if gen.trace_defect() > structural_tol {
        return Err(Error::Precondition(format!(
            "generator is not trace preserving (defect {:e})",
            gen.trace_defect()
        )));
    }
    if gen.hermiticity_defect() > structural_tol {
        return Err(Error::Precondition(format!(
            "generator is not Hermiticity preserving (defect {:e})",
            gen.hermiticity_defect()
        )));
    }
    let d2 = n * n;
    let choi = choi_matrix(gen);

    // orthonormal basis of the complement: QR of [Ω, e_1, …, e_{d²−1}]
    let omega_weight = linalg::c(1.0 / (n as f64).sqrt());
    let seed = CMat::from_fn(d2, d2, |r, col| {
        if col == 0 {
            if r % (n + 1) == 0 {
                omega_weight
            } else {
                linalg::c(0.0)
            }
        } else if r == col {
            linalg::c(1.0)
        } else {
            linalg::c(0.0)
        }
    });
    let q = seed.qr().q();
    let basis = q.columns(1, d2 - 1).into_owned();
    let compressed = linalg::hermitian_part(&(basis.adjoint() * choi * &basis));
    let min_eigenvalue = compressed
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let min_eigenvalue = if min_eigenvalue.is_finite() {
        min_eigenvalue
    } else {
        0.0
    };
    let tolerance = 1e-10 * norm;
    let verdict = if min_eigenvalue >= -tolerance {
        CpVerdict::Cp
    } else {
        CpVerdict::NotCp
    };
    Ok(CpReport {
        min_eigenvalue,
        tolerance,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct T3Norms {
    /// ‖block mapping populations into coherences‖_F
    pub pop_to_coh: f64,
    /// ‖block mapping coherences into populations‖_F
    pub coh_to_pop: f64,
}

/// Frobenius norms of the population↔coherence blocks of a generator in the
/// eigenbasis of `H₀`.
pub fn t3_block_norm(gen: &Superoperator) -> T3Norms {
    let n = gen.dim();
    let m = gen.matrix();
    let is_pop = |k: usize| k / n == k % n;
    let (mut p2c, mut c2p) = (0.0, 0.0);
    for r in 0..n * n {
        for col in 0..n * n {
            let w = m[(r, col)].norm_sqr();
            match (is_pop(r), is_pop(col)) {
                (false, true) => p2c += w,
                (true, false) => c2p += w,
                _ => {}
            }
        }
    }
    T3Norms {
        pop_to_coh: f64::sqrt(p2c),
        coh_to_pop: f64::sqrt(c2p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurityEntropy {
    pub purity: f64,
    pub entropy: f64,
}

/// `tr ρ²` and `−tr ρ ln ρ`, from the eigenvalues (clipped at zero for the log).
pub fn purity_entropy(rho: &DensityMatrix) -> PurityEntropy {
    let ev = linalg::hermitian_eigenvalues(rho.matrix());
    let purity = ev.iter().map(|p| p * p).sum();
    let entropy = ev
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        .max(0.0);
    PurityEntropy { purity, entropy }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{lindblad_family, lindblad_superoperator, symmetrized_rates, LindbladFamily};
    use crate::system::KernelMode;
    use num_complex::Complex64;

    fn two_level(kernel: DeltaKernel) -> SystemSpec {
        let mut h = CMat::zeros(2, 2);
        h[(0, 0)] = linalg::c(0.25);
        h[(1, 1)] = linalg::c(-0.15);
        h[(0, 1)] = Complex64::new(0.1, 0.2);
        h[(1, 0)] = Complex64::new(0.1, -0.2);
        SystemSpec::new(vec![0.0, 1.0], h, kernel, 1.0).unwrap()
    }

    #[test]
    fn scan_finds_constructed_negative_snapshot() {
        let good = DensityMatrix::maximally_mixed(2).unwrap().into_matrix();
        let bad = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![linalg::c(1.1), linalg::c(-0.1)]));
        let traj = Trajectory::from_states(TimeGrid::new(0.0, 2.0, 2).unwrap(), vec![good.clone(), bad, good]).unwrap();
        let scan = positivity_scan(&traj);
        assert!((scan.min_eigenvalue + 0.1).abs() < 1e-14);
        assert_eq!(scan.index, 1);
        assert_eq!(scan.time, 1.0);
    }

    #[test]
    fn zero_generator_scan_stays_nonnegative() {
        let rho = random_density(3, 3).unwrap();
        let traj = propagate(
            &Superoperator::zeros(3),
            &rho,
            TimeGrid::new(0.0, 1.0, 4).unwrap(),
            Method::Expm,
        )
        .unwrap();
        assert!(positivity_scan(&traj).min_eigenvalue >= -1e-12);
    }

    #[test]
    fn zero_generator_is_cp_with_zero_margin() {
        let r = conditional_cp_check(&Superoperator::zeros(3)).unwrap();
        assert_eq!(r.verdict, CpVerdict::Cp);
        assert_eq!(r.min_eigenvalue, 0.0);
    }

    #[test]
    fn hermitian_jump_operators_are_cp() {
        let s = random_system(5, 4, 1.0, 0.3, DeltaKernel::sharp(0.01).unwrap()).unwrap();
        let fam = LindbladFamily::from_operators(4, vec![(0.0, s.interaction().clone()), (1.0, s.h0())]).unwrap();
        let r = conditional_cp_check(&lindblad_superoperator(&fam)).unwrap();
        assert_eq!(r.verdict, CpVerdict::Cp, "{r:?}");
    }

    #[test]
    fn non_trace_preserving_input_is_rejected() {
        let gen = Superoperator::new(2, CMat::identity(4, 4)).unwrap();
        assert!(matches!(conditional_cp_check(&gen), Err(Error::Precondition(_))));
    }

    #[test]
    fn coherent_part_does_not_change_cp_margin() {
        let s = two_level(DeltaKernel::sharp(0.01).unwrap());
        let d = rates_to_superoperator(&conventional_rates(&s)).unwrap();
        let a = conditional_cp_check(&d).unwrap();
        let b = conditional_cp_check(&(&d + &coherent_liouvillian(&s, false))).unwrap();
        assert!((a.min_eigenvalue - b.min_eigenvalue).abs() < 1e-12);
    }

    #[test]
    fn t3_blocks_vanish_for_symmetrized_two_level_generator() {
        let s = two_level(DeltaKernel::sharp(0.01).unwrap());
        let t3 = t3_block_norm(&rates_to_superoperator(&symmetrized_rates(&s)).unwrap());
        assert!(t3.pop_to_coh < 1e-12 && t3.coh_to_pop < 1e-12, "{t3:?}");
        let t3_op = t3_block_norm(&lindblad_superoperator(&lindblad_family(&s)));
        assert!(t3_op.pop_to_coh < 1e-12 && t3_op.coh_to_pop < 1e-12);
    }

    #[test]
    fn t3_blocks_present_for_conventional_two_level_generator() {
        let s = two_level(DeltaKernel::sharp(0.01).unwrap());
        let gen = rates_to_superoperator(&conventional_rates(&s)).unwrap();
        let t3 = t3_block_norm(&gen);
        assert!(t3.pop_to_coh.max(t3.coh_to_pop) > 1e-6 * gen.norm(), "{t3:?}");
        let zero = random_system(1, 2, 1.0, 0.0, DeltaKernel::sharp(0.01).unwrap()).unwrap();
        let t0 = t3_block_norm(&rates_to_superoperator(&conventional_rates(&zero)).unwrap());
        assert_eq!((t0.pop_to_coh, t0.coh_to_pop), (0.0, 0.0));
    }

    #[test]
    fn purity_and_entropy_reference_values() {
        let pure = purity_entropy(&DensityMatrix::pure_level(3, 2).unwrap());
        assert!((pure.purity - 1.0).abs() < 1e-15 && pure.entropy.abs() < 1e-15);
        let mixed = purity_entropy(&DensityMatrix::maximally_mixed(4).unwrap());
        assert!((mixed.purity - 0.25).abs() < 1e-15);
        assert!((mixed.entropy - 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn purity_entropy_matches_eigenvalue_sums() {
        let rho = random_density(7, 3).unwrap();
        let pe = purity_entropy(&rho);
        let direct_purity = linalg::trace(&(rho.matrix() * rho.matrix())).re;
        assert!((pe.purity - direct_purity).abs() < 1e-12);
        let ev = linalg::hermitian_eigenvalues(rho.matrix());
        let entropy: f64 = ev.iter().map(|p| -p * p.ln()).sum();
        assert!((pe.entropy - entropy).abs() < 1e-12);
    }

    #[test]
    fn search_with_zero_coupling_finds_nothing() {
        let mut params = SearchParams::defaults(1, 1);
        params.coupling_scale = 0.0;
        let r = search_positivity_violation(&params).unwrap();
        assert!(!r.violated);
        assert!(r.worst_min_eigenvalue >= -1e-12);
    }

    #[test]
    fn search_is_deterministic_and_validates() {
        let params = SearchParams::defaults(17, 6);
        assert_eq!(
            search_positivity_violation(&params).unwrap(),
            search_positivity_violation(&params).unwrap()
        );
        assert!(search_positivity_violation(&SearchParams::defaults(1, 0)).is_err());
        let mut bad = SearchParams::defaults(1, 2);
        bad.n_max = 1;
        assert!(bad.validate().is_err());
        assert_eq!(params.kernel.mode, KernelMode::Gaussian);
    }
}
