use std::f64::consts::PI;

use num_complex::Complex64;

use super::superop::Superoperator;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::system::{KernelMode, SystemSpec};

/// Relative safety margin when deciding that frequency classes are disjoint.
const CLASS_MARGIN: f64 = 1e-9;

/// One frequency component `L(ω)` of the interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladTerm {
    /// Angular frequency (1/time).
    pub omega: f64,
    /// Operator in units of 1/√time.
    pub op: CMat,
    /// Index pairs `(λ1, λ2)` carried by this component.
    pub members: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladFamily {
    dim: usize,
    terms: Vec<LindbladTerm>,
    exact: bool,
}

impl LindbladFamily {
    /// Family from explicitly given operators. Member lists are taken from
    /// the nonzero pattern of each operator.
    pub fn from_operators(dim: usize, ops: Vec<(f64, CMat)>) -> Result<Self> {
        let mut terms = Vec::with_capacity(ops.len());
        for (omega, op) in ops {
            if op.nrows() != dim || op.ncols() != dim {
                return Err(Error::Dimension(format!(
                    "operator is {}x{}, family has N = {dim}",
                    op.nrows(),
                    op.ncols()
                )));
            }
            let members = (0..dim)
                .flat_map(|a| (0..dim).map(move |b| (a, b)))
                .filter(|&(a, b)| op[(a, b)] != Complex64::default())
                .collect();
            terms.push(LindbladTerm { omega, op, members });
        }
        Ok(Self {
            dim,
            terms,
            exact: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[LindbladTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// False when the kernel is Gaussian or the sharp classes overlap; the
    /// assembled generator then only approximates the rate form.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Largest `‖L(−ω) − L(ω)†‖` over terms; zero when the family is closed
    /// under the adjoint, as the Fourier components of a Hermitian `H′` are.
    pub fn adjoint_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for t in &self.terms {
            let partner = self
                .terms
                .iter()
                .min_by(|x, y| (x.omega + t.omega).abs().total_cmp(&(y.omega + t.omega).abs()))
                .expect("nonempty");
            worst = worst.max((&partner.op - t.op.adjoint()).norm());
        }
        worst
    }
}

/// Splits `H′` into frequency components.
///
/// In the eigenbasis of `H₀` the component of `U₀(−τ/2) H′ U₀†(−τ/2)`
/// oscillating at `e^{−iωτ}` lives on the pairs with
/// `ħω = −(ε_λ1 − ε_λ2)/2`. Pairs are binned by that key (single linkage
/// at width `η`) and every class gets the common weight
/// `(2π/ħ)·δ_η(0)`, which makes `−½Σ_ω [L(ω), [L(ω), ρ]]` coincide with the
/// symmetrized rate form whenever the kernel is sharp and the classes are
/// separated by more than `η`.
pub fn lindblad_family(spec: &SystemSpec) -> LindbladFamily {
    let n = spec.dim();
    let e = spec.energies();
    let kernel = spec.kernel();
    let eta = kernel.eta;

    let mut keyed: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| ((e[a] - e[b]) / 2.0, a, b)))
        .collect();
    keyed.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut classes: Vec<Vec<(f64, usize, usize)>> = Vec::new();
    for item in keyed {
        match classes.last_mut() {
            Some(class) if item.0 - class.last().expect("nonempty").0 <= eta => class.push(item),
            _ => classes.push(vec![item]),
        }
    }

    let mut exact = kernel.mode == KernelMode::Sharp;
    for (i, class) in classes.iter().enumerate() {
        let lo = class.first().expect("nonempty").0;
        let hi = class.last().expect("nonempty").0;
        if hi - lo > eta * (1.0 - CLASS_MARGIN) {
            exact = false;
        }
        if let Some(next) = classes.get(i + 1) {
            if next[0].0 - hi <= eta * (1.0 + CLASS_MARGIN) {
                exact = false;
            }
        }
    }

    let amplitude = (2.0 * PI / spec.hbar() * kernel.weight(0.0)).sqrt();
    let h = spec.interaction();
    let terms = classes
        .into_iter()
        .map(|class| {
            let mean_key = class.iter().map(|x| x.0).sum::<f64>() / class.len() as f64;
            let mut op = CMat::zeros(n, n);
            for &(_, a, b) in &class {
                op[(a, b)] = h[(a, b)] * amplitude;
            }
            LindbladTerm {
                omega: -mean_key / spec.hbar(),
                op,
                members: class.iter().map(|&(_, a, b)| (a, b)).collect(),
            }
        })
        .collect();
    LindbladFamily { dim: n, terms, exact }
}

/// `ρ ↦ −½ Σ_ω [L(ω), [L(ω), ρ]]`.
pub fn lindblad_superoperator(family: &LindbladFamily) -> Superoperator {
    let n = family.dim();
    let mut total = Superoperator::zeros(n);
    for term in family.terms() {
        let l = &term.op;
        let l2 = l * l;
        let left = Superoperator::left(&l2);
        let right = Superoperator::right(&l2);
        let sandwich = Superoperator::sandwich(l, l);
        let m = (left.matrix() + right.matrix() - sandwich.matrix() * linalg::c(2.0)) * linalg::c(-0.5);
        total = total + Superoperator::new(n, m).expect("dimension checked");
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{rates_to_superoperator, symmetrized_rates};
    use crate::system::{random_density, random_system, DeltaKernel};

    fn two_level(e1: f64, kernel: DeltaKernel) -> SystemSpec {
        let mut h = CMat::zeros(2, 2);
        h[(0, 0)] = linalg::c(0.3);
        h[(1, 1)] = linalg::c(-0.1);
        h[(0, 1)] = Complex64::new(0.2, 0.15);
        h[(1, 0)] = Complex64::new(0.2, -0.15);
        SystemSpec::new(vec![0.0, e1], h, kernel, 1.0).unwrap()
    }

    #[test]
    fn two_level_nondegenerate_has_three_classes() {
        let fam = lindblad_family(&two_level(1.0, DeltaKernel::sharp(0.01).unwrap()));
        let mut members: Vec<_> = fam.terms().iter().map(|t| t.members.clone()).collect();
        members.sort();
        assert_eq!(members, vec![vec![(0, 0), (1, 1)], vec![(0, 1)], vec![(1, 0)]]);
        assert!(fam.is_exact());
        assert!(fam.adjoint_defect() < 1e-15);
        let omegas: Vec<f64> = fam.terms().iter().map(|t| t.omega).collect();
        assert_eq!(omegas, vec![0.5, 0.0, -0.5]);
    }

    #[test]
    fn degenerate_spectrum_gives_single_class_proportional_to_interaction() {
        let s = two_level(0.0, DeltaKernel::sharp(0.01).unwrap());
        let fam = lindblad_family(&s);
        assert_eq!(fam.len(), 1);
        let ratio = fam.terms()[0].op[(0, 0)] / s.interaction()[(0, 0)];
        assert!((&fam.terms()[0].op - s.interaction() * ratio).norm() < 1e-14);
    }

    #[test]
    fn empty_family_is_zero_generator() {
        let fam = LindbladFamily::from_operators(3, vec![]).unwrap();
        assert_eq!(lindblad_superoperator(&fam), Superoperator::zeros(3));
    }

    #[test]
    fn single_operator_matches_double_commutator() {
        let mut l = CMat::zeros(2, 2);
        l[(0, 0)] = linalg::c(0.4);
        l[(0, 1)] = Complex64::new(0.1, -0.3);
        l[(1, 0)] = Complex64::new(0.1, 0.3);
        l[(1, 1)] = linalg::c(-0.7);
        let fam = LindbladFamily::from_operators(2, vec![(0.0, l.clone())]).unwrap();
        let rho = random_density(7, 2).unwrap();
        let r = rho.matrix();
        let inner = &l * r - r * &l;
        let want = (&l * &inner - &inner * &l) * linalg::c(-0.5);
        let got = lindblad_superoperator(&fam).apply(r).unwrap();
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn two_level_sharp_matches_rate_form() {
        let s = two_level(1.0, DeltaKernel::sharp(0.01).unwrap());
        let op_form = lindblad_superoperator(&lindblad_family(&s));
        let rate_form = rates_to_superoperator(&symmetrized_rates(&s)).unwrap();
        assert!(op_form.max_abs_diff(&rate_form) < 1e-12);
    }

    #[test]
    fn gaussian_family_is_flagged_approximate() {
        let s = random_system(3, 4, 1.0, 0.1, DeltaKernel::gaussian(0.05).unwrap()).unwrap();
        assert!(!lindblad_family(&s).is_exact());
    }

    #[test]
    fn overlapping_sharp_classes_are_flagged() {
        let s = SystemSpec::new(
            vec![0.0, 0.01, 0.02],
            CMat::identity(3, 3),
            DeltaKernel::sharp(0.006).unwrap(),
            1.0,
        )
        .unwrap();
        let fam = lindblad_family(&s);
        assert!(!fam.is_exact());
    }
}
