//! Independent operator-form evaluations of the two assembled generators.

use std::f64::consts::PI;

use num_complex::Complex64;
use qfgr_core::generators::{conventional_rates, rates_to_superoperator, symmetrized_rates};
use qfgr_core::linalg::CMat;
use qfgr_core::{random_density, random_system, DeltaKernel, SystemSpec};

fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `−(1/2ħ)[H′, [K, ρ]]` with `K = 2π·H′∘δ(ε_a − ε_b)`.
fn conventional_oracle(spec: &SystemSpec, rho: &CMat) -> CMat {
    let n = spec.dim();
    let e = spec.energies();
    let h = spec.interaction();
    let k = CMat::from_fn(n, n, |a, b| h[(a, b)] * (2.0 * PI * spec.kernel().weight(e[a] - e[b])));
    let inner = &k * rho - rho * &k;
    (h * &inner - &inner * h) * Complex64::new(-0.5 / spec.hbar(), 0.0)
}

/// Double commutator written out element by element, each product carrying
/// the kernel of its average-energy mismatch.
fn symmetrized_oracle(spec: &SystemSpec, rho: &CMat) -> CMat {
    let n = spec.dim();
    let e = spec.energies();
    let h = spec.interaction();
    let key = |x: usize, y: usize| (e[x] - e[y]) / 2.0;
    let w = |x: f64| 2.0 * PI / spec.hbar() * spec.kernel().weight(x);
    CMat::from_fn(n, n, |a, b| {
        let mut acc = Complex64::default();
        for c in 0..n {
            for k in 0..n {
                acc += h[(a, k)] * h[(k, c)] * rho[(c, b)] * w(key(a, k) - key(k, c));
                acc += rho[(a, c)] * h[(c, k)] * h[(k, b)] * w(key(k, b) - key(c, k));
                acc -= h[(a, c)] * rho[(c, k)] * h[(k, b)] * (2.0 * w(key(a, c) - key(k, b)));
            }
        }
        acc * -0.5
    })
}

fn kernels() -> [DeltaKernel; 3] {
    [
        DeltaKernel::gaussian(0.05).unwrap(),
        DeltaKernel::gaussian(0.4).unwrap(),
        DeltaKernel::sharp(0.3).unwrap(),
    ]
}

#[test]
fn conventional_generator_matches_commutator_form() {
    for n in 2..=4 {
        for seed in 0..8u64 {
            for kernel in kernels() {
                let s = random_system(seed, n, 0.5, 0.3, kernel).unwrap();
                let rho = random_density(seed + 1000, n).unwrap();
                let got = rates_to_superoperator(&conventional_rates(&s))
                    .unwrap()
                    .apply(rho.matrix())
                    .unwrap();
                let want = conventional_oracle(&s, rho.matrix());
                assert!(max_abs(&(got - want)) < 1e-13, "n {n} seed {seed}");
            }
        }
    }
}

#[test]
fn symmetrized_generator_matches_double_commutator_sum() {
    for n in 2..=4 {
        for seed in 0..8u64 {
            for kernel in kernels() {
                let s = random_system(seed, n, 0.5, 0.3, kernel).unwrap();
                let rho = random_density(seed + 2000, n).unwrap();
                let got = rates_to_superoperator(&symmetrized_rates(&s))
                    .unwrap()
                    .apply(rho.matrix())
                    .unwrap();
                let want = symmetrized_oracle(&s, rho.matrix());
                assert!(max_abs(&(got - want)) < 1e-13, "n {n} seed {seed}");
            }
        }
    }
}

#[test]
fn non_unit_hbar_scales_rates_inversely() {
    let base = random_system(4, 3, 1.0, 0.2, DeltaKernel::gaussian(0.3).unwrap()).unwrap();
    let s = SystemSpec::new(base.energies().to_vec(), base.interaction().clone(), base.kernel(), 2.0).unwrap();
    let rho = random_density(5, 3).unwrap();
    let got = rates_to_superoperator(&symmetrized_rates(&s))
        .unwrap()
        .apply(rho.matrix())
        .unwrap();
    assert!(max_abs(&(got - symmetrized_oracle(&s, rho.matrix()))) < 1e-13);
    let unit = rates_to_superoperator(&symmetrized_rates(&base))
        .unwrap()
        .apply(rho.matrix())
        .unwrap();
    assert!(max_abs(&(unit * Complex64::new(0.5, 0.0) - symmetrized_oracle(&s, rho.matrix()))) < 1e-13);
}
