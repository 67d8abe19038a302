//! Domain types, validation, and seeded random instances.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Absolute tolerance used when validating density matrices at construction.
pub const DENSITY_TOL: f64 = 1e-12;

/// Relative tolerance for the Hermiticity of the interaction.
pub const HERMITIAN_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelMode {
    Gaussian,
    Sharp,
}

/// Finite-width stand-in for the energy-conserving delta distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaKernel {
    pub mode: KernelMode,
    pub eta: f64,
}

impl DeltaKernel {
    pub fn new(mode: KernelMode, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Parameter(format!("kernel width must be positive, got {eta}")));
        }
        Ok(Self { mode, eta })
    }

    pub fn gaussian(eta: f64) -> Result<Self> {
        Self::new(KernelMode::Gaussian, eta)
    }

    pub fn sharp(eta: f64) -> Result<Self> {
        Self::new(KernelMode::Sharp, eta)
    }

    /// Kernel value at energy mismatch `x` (units 1/energy).
    pub fn weight(&self, x: f64) -> f64 {
        crate::generators::delta_kernel(x, self)
    }
}

/// Noninteracting spectrum, interaction matrix and units of one system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    hbar: f64,
    energies: Vec<f64>,
    interaction: CMat,
    kernel: DeltaKernel,
}

impl SystemSpec {
    pub fn new(energies: Vec<f64>, interaction: CMat, kernel: DeltaKernel, hbar: f64) -> Result<Self> {
        let n = energies.len();
        if n < 2 {
            return Err(Error::Dimension(format!("need at least two levels, got {n}")));
        }
        if interaction.nrows() != n || interaction.ncols() != n {
            return Err(Error::Dimension(format!(
                "interaction is {}x{}, spectrum has {n} levels",
                interaction.nrows(),
                interaction.ncols()
            )));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Parameter(format!("hbar must be positive, got {hbar}")));
        }
        if energies.iter().any(|e| !e.is_finite()) || !linalg::is_finite(&interaction) {
            return Err(Error::Parameter("non-finite energy or interaction entry".into()));
        }
        // re-validate in case the kernel was built by hand
        let kernel = DeltaKernel::new(kernel.mode, kernel.eta)?;
        let scale = interaction.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        let defect = linalg::hermiticity_defect(&interaction) / scale;
        if defect > HERMITIAN_RTOL {
            return Err(Error::NonHermitian(defect));
        }
        Ok(Self {
            hbar,
            energies,
            interaction,
            kernel,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn interaction(&self) -> &CMat {
        &self.interaction
    }

    pub fn kernel(&self) -> DeltaKernel {
        self.kernel
    }

    pub fn with_kernel(&self, kernel: DeltaKernel) -> Self {
        Self { kernel, ..self.clone() }
    }

    /// Noninteracting Hamiltonian `diag(ε_λ)`.
    pub fn h0(&self) -> CMat {
        CMat::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                linalg::c(self.energies[i])
            } else {
                Complex64::default()
            }
        })
    }
}

/// Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMat);

impl DensityMatrix {
    pub fn new(data: CMat) -> Result<Self> {
        Self::with_tolerance(data, DENSITY_TOL)
    }

    pub fn with_tolerance(data: CMat, tol: f64) -> Result<Self> {
        let report = validate_density(&data)?;
        if !report.passes(tol) {
            return Err(Error::InvalidDensity(format!(
                "hermiticity defect {:e}, trace defect {:e}, min eigenvalue {:e}",
                report.hermiticity_defect, report.trace_defect, report.min_eigenvalue
            )));
        }
        Ok(Self(data))
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("empty density matrix".into()));
        }
        Ok(Self(CMat::identity(n, n) * linalg::c(1.0 / n as f64)))
    }

    /// Projector onto basis state `level`.
    pub fn pure_level(n: usize, level: usize) -> Result<Self> {
        if level >= n {
            return Err(Error::Dimension(format!("level {level} out of range for N = {n}")));
        }
        let mut m = CMat::zeros(n, n);
        m[(level, level)] = linalg::c(1.0);
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.0[(i, j)] == Complex64::default()))
    }

    /// Diagonal occupations, for handing a diagonal state to the rate equation.
    pub fn populations(&self) -> Vec<f64> {
        self.0.diagonal().iter().map(|z| z.re).collect()
    }
}

/// Nonnegative occupation vector `f_λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    /// Entries may undershoot zero by at most `DENSITY_TOL` (round-off).
    pub fn new(f: Vec<f64>) -> Result<Self> {
        if let Some(bad) = f.iter().find(|x| !x.is_finite() || **x < -DENSITY_TOL) {
            return Err(Error::Parameter(format!("occupation {bad} is negative or non-finite")));
        }
        Ok(Self(f))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
}

impl ValidationReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.hermiticity_defect <= tol && self.trace_defect <= tol && self.min_eigenvalue >= -tol
    }
}

/// Measures how far a candidate is from being a density matrix; pass/fail
/// is left to [`ValidationReport::passes`]. The minimum eigenvalue is taken
/// from the Hermitian part.
pub fn validate_density(rho: &CMat) -> Result<ValidationReport> {
    if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "density matrix must be square and nonempty, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    Ok(ValidationReport {
        hermiticity_defect: linalg::hermiticity_defect(rho),
        trace_defect: (linalg::trace(rho) - linalg::c(1.0)).norm(),
        min_eigenvalue: linalg::min_eigenvalue(rho),
    })
}

fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn ginibre(rng: &mut impl Rng, n: usize) -> CMat {
    let mut entries = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        entries.push(complex_normal(rng));
    }
    DMatrix::from_row_slice(n, n, &entries)
}

/// `A·A†/tr(A·A†)` with `A` from a seeded complex Ginibre ensemble.
pub fn random_density(seed: u64, n: usize) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::Dimension("N must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = ginibre(&mut rng, n);
    let m = linalg::hermitian_part(&(&a * a.adjoint()));
    let tr = linalg::trace(&m).re;
    Ok(DensityMatrix(m / linalg::c(tr)))
}

/// Seeded random system: sorted uniform energies on `[0, (N−1)·level_spacing]`
/// and `H′ = coupling_scale·(B + B†)/2` with `B` complex Gaussian.
pub fn random_system(
    seed: u64,
    n: usize,
    level_spacing: f64,
    coupling_scale: f64,
    kernel: DeltaKernel,
) -> Result<SystemSpec> {
    if n < 2 {
        return Err(Error::Dimension(format!("need at least two levels, got {n}")));
    }
    if !(level_spacing > 0.0 && level_spacing.is_finite()) {
        return Err(Error::Parameter(format!(
            "level spacing must be positive, got {level_spacing}"
        )));
    }
    if !(coupling_scale >= 0.0 && coupling_scale.is_finite()) {
        return Err(Error::Parameter(format!(
            "coupling scale must be nonnegative, got {coupling_scale}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = (n - 1) as f64 * level_spacing;
    let mut energies: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * width).collect();
    energies.sort_by(|a, b| a.total_cmp(b));
    let b = ginibre(&mut rng, n);
    let interaction = CMat::from_fn(n, n, |i, j| (b[(i, j)] + b[(j, i)].conj()) * 0.5 * coupling_scale);
    SystemSpec::new(energies, interaction, kernel, 1.0)
}
