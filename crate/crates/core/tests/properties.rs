use num_complex::Complex64;
use proptest::prelude::*;
use qfgr_core::diagnostics::{conditional_cp_check, purity_entropy, t3_block_norm, CpVerdict};
use qfgr_core::evolution::{propagate, Method, TimeGrid};
use qfgr_core::generators::{
    coherent_liouvillian, conventional_rates, fgr_rates, lindblad_family, lindblad_superoperator,
    rates_to_superoperator, symmetrized_rates, LindbladFamily,
};
use qfgr_core::linalg::{self, CMat};
use qfgr_core::{random_density, random_system, validate_density, DeltaKernel, DensityMatrix, SystemSpec};

fn kernel_strategy() -> impl Strategy<Value = DeltaKernel> {
    prop_oneof![
        (0.01f64..0.5).prop_map(|eta| DeltaKernel::gaussian(eta).unwrap()),
        (0.01f64..0.5).prop_map(|eta| DeltaKernel::sharp(eta).unwrap()),
    ]
}

fn spec_strategy() -> impl Strategy<Value = SystemSpec> {
    (any::<u64>(), 2usize..=5, 0.1f64..2.0, 0.0f64..0.5, kernel_strategy())
        .prop_map(|(seed, n, spacing, coupling, kernel)| random_system(seed, n, spacing, coupling, kernel).unwrap())
}

fn hermitian(n: usize, seed: u64) -> CMat {
    let a = random_density(seed, n).unwrap().into_matrix();
    let b = random_density(seed ^ 0x9e37_79b9, n).unwrap().into_matrix();
    // shifted difference of two states: Hermitian and indefinite
    (a - b) * Complex64::new(3.0, 0.0) + CMat::identity(n, n) * Complex64::new(0.1, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn random_density_is_a_state(seed in any::<u64>(), n in 1usize..=6) {
        let rho = random_density(seed, n).unwrap();
        let r = validate_density(rho.matrix()).unwrap();
        prop_assert!(r.trace_defect < 1e-14);
        prop_assert!(r.min_eigenvalue >= -1e-14);
        prop_assert_eq!(r.hermiticity_defect, 0.0);
    }

    #[test]
    fn generators_preserve_trace_and_hermiticity(spec in spec_strategy()) {
        let gens = [
            rates_to_superoperator(&conventional_rates(&spec)).unwrap(),
            rates_to_superoperator(&symmetrized_rates(&spec)).unwrap(),
            lindblad_superoperator(&lindblad_family(&spec)),
            coherent_liouvillian(&spec, true),
        ];
        for g in &gens {
            let scale = g.norm().max(1.0);
            prop_assert!(g.trace_defect() < 1e-12 * scale);
            prop_assert!(g.hermiticity_defect() < 1e-12 * scale);
        }
    }

    #[test]
    fn rate_diagonal_slices_equal_golden_rule(spec in spec_strategy()) {
        let p = fgr_rates(&spec);
        for t in [conventional_rates(&spec), symmetrized_rates(&spec)] {
            for l in 0..spec.dim() {
                for lp in 0..spec.dim() {
                    let v = t.get(l, l, lp, lp);
                    prop_assert!((v - Complex64::new(p.get(l, lp), 0.0)).norm() <= 1e-14 * p.get(l, lp).max(1.0));
                }
            }
        }
    }

    #[test]
    fn degenerate_spectrum_makes_flavors_coincide(spec in spec_strategy(), level in -1.0f64..1.0) {
        let flat = SystemSpec::new(vec![level; spec.dim()], spec.interaction().clone(), spec.kernel(), 1.0).unwrap();
        let conv = rates_to_superoperator(&conventional_rates(&flat)).unwrap();
        let sym = rates_to_superoperator(&symmetrized_rates(&flat)).unwrap();
        prop_assert_eq!(conv, sym);
    }

    #[test]
    fn hermitian_families_are_conditionally_cp(seed in any::<u64>(), n in 2usize..=4, count in 1usize..=3) {
        let ops = (0..count).map(|k| (k as f64, hermitian(n, seed.wrapping_add(k as u64)))).collect();
        let fam = LindbladFamily::from_operators(n, ops).unwrap();
        let report = conditional_cp_check(&lindblad_superoperator(&fam)).unwrap();
        prop_assert_eq!(report.verdict, CpVerdict::Cp);
    }

    #[test]
    fn sharp_rate_and_operator_forms_agree(seed in any::<u64>(), n in 2usize..=5, eta in 0.001f64..0.02) {
        let spec = random_system(seed, n, 1.0, 0.2, DeltaKernel::sharp(eta).unwrap()).unwrap();
        let fam = lindblad_family(&spec);
        prop_assume!(fam.is_exact());
        let rate_form = rates_to_superoperator(&symmetrized_rates(&spec)).unwrap();
        prop_assert!(lindblad_superoperator(&fam).max_abs_diff(&rate_form) < 1e-12);
    }

    #[test]
    fn two_level_symmetrized_generator_has_no_t3_blocks(seed in any::<u64>(), eta in 0.001f64..0.1) {
        let spec = random_system(seed, 2, 1.0, 0.2, DeltaKernel::sharp(eta).unwrap()).unwrap();
        let e = spec.energies();
        prop_assume!((e[1] - e[0]).abs() > 2.0 * eta);
        let t3 = t3_block_norm(&rates_to_superoperator(&symmetrized_rates(&spec)).unwrap());
        prop_assert!(t3.pop_to_coh < 1e-12 && t3.coh_to_pop < 1e-12);
    }

    #[test]
    fn coherent_evolution_is_isentropic(spec in spec_strategy(), rho_seed in any::<u64>()) {
        let rho0 = random_density(rho_seed, spec.dim()).unwrap();
        let s0 = purity_entropy(&rho0).entropy;
        let traj = propagate(&coherent_liouvillian(&spec, true), &rho0, TimeGrid::new(0.0, 3.0, 30).unwrap(), Method::Expm).unwrap();
        for rho in &traj.states {
            let s = purity_entropy(&DensityMatrix::with_tolerance(linalg::hermitian_part(rho), 1e-10).unwrap()).entropy;
            prop_assert!((s - s0).abs() < 1e-9);
        }
    }
}
