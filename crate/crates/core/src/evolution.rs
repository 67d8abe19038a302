//! Time propagation of density matrices and semiclassical occupations.

use nalgebra::SVD;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{FgrMatrix, Superoperator};
use crate::linalg::{self, CMat, CVec};
use crate::system::{DensityMatrix, Distribution};

/// Steps per unit of `1/‖gen‖` used by [`default_steps`].
pub const STEPS_PER_UNIT: f64 = 200.0;

/// Singular values below this (relative to the largest, floored at 1)
/// count as null directions.
pub const NULL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(Error::Parameter(format!("time grid needs t1 > t0, got [{t0}, {t1}]")));
        }
        if steps == 0 {
            return Err(Error::Parameter("time grid needs at least one step".into()));
        }
        Ok(Self { t0, t1, steps })
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t1
        } else {
            self.t0 + k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }
}

/// Step count giving `STEPS_PER_UNIT` steps per `1/‖gen‖`, where the norm is
/// the induced ∞-norm (an upper bound on the fastest rate).
pub fn default_steps(gen: &Superoperator, span: f64) -> usize {
    ((STEPS_PER_UNIT * span * gen.rate_bound()).ceil() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Expm,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDiagnostics {
    pub trace_re: f64,
    pub trace_im: f64,
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub purity: f64,
}

impl SnapshotDiagnostics {
    pub fn of(rho: &CMat) -> Self {
        let tr = linalg::trace(rho);
        Self {
            trace_re: tr.re,
            trace_im: tr.im,
            hermiticity_defect: linalg::hermiticity_defect(rho),
            min_eigenvalue: linalg::min_eigenvalue(rho),
            purity: linalg::trace(&(rho * rho)).re,
        }
    }
}

/// Snapshots are stored unvalidated: they may leave the set of density
/// matrices, which is what the diagnostics look for.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<CMat>,
    pub diagnostics: Vec<SnapshotDiagnostics>,
}

impl Trajectory {
    pub fn from_states(grid: TimeGrid, states: Vec<CMat>) -> Result<Self> {
        if states.len() != grid.steps + 1 {
            return Err(Error::Dimension(format!(
                "{} snapshots for a grid of {} steps",
                states.len(),
                grid.steps
            )));
        }
        let diagnostics = states.iter().map(SnapshotDiagnostics::of).collect();
        Ok(Self {
            grid,
            states,
            diagnostics,
        })
    }

    pub fn final_state(&self) -> &CMat {
        self.states.last().expect("trajectory has at least one snapshot")
    }
}

pub fn propagate(gen: &Superoperator, rho0: &DensityMatrix, grid: TimeGrid, method: Method) -> Result<Trajectory> {
    let n = gen.dim();
    if rho0.dim() != n {
        return Err(Error::Dimension(format!(
            "initial state is {0}x{0}, generator acts on N = {n}",
            rho0.dim()
        )));
    }
    let dt = grid.dt();
    let g = gen.matrix();
    let step: Box<dyn Fn(&CVec) -> CVec> = match method {
        Method::Expm => {
            let u = (g * linalg::c(dt)).exp();
            Box::new(move |v| &u * v)
        }
        Method::Rk4 => Box::new(move |v| {
            let h = linalg::c(dt);
            let k1 = g * v;
            let k2 = g * (v + &k1 * (h * 0.5));
            let k3 = g * (v + &k2 * (h * 0.5));
            let k4 = g * (v + &k3 * h);
            v + (k1 + k2 * linalg::c(2.0) + k3 * linalg::c(2.0) + k4) * (h / 6.0)
        }),
    };

    let mut v = linalg::vectorize(rho0.matrix());
    let mut states = Vec::with_capacity(grid.steps + 1);
    states.push(rho0.matrix().clone());
    for k in 1..=grid.steps {
        v = step(&v);
        if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Propagation {
                step: k,
                last_valid: k - 1,
            });
        }
        states.push(linalg::unvectorize(&v, n));
    }
    Trajectory::from_states(grid, states)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    /// Hermitized, unit-trace null-space element.
    pub rho: CMat,
    /// `‖gen·vec(ρ)‖₂`.
    pub residual: f64,
    /// Dimension of the numerical null space.
    pub null_dim: usize,
    pub degenerate: bool,
}

impl SteadyState {
    pub fn density(&self, tol: f64) -> Result<DensityMatrix> {
        DensityMatrix::with_tolerance(self.rho.clone(), tol)
    }
}

/// Null-space element of the generator with the largest trace component.
///
/// With an orthonormal null basis `{v_k}` this is `Σ_k v_k ⟨v_k, vec(1)⟩`,
/// the projection of the identity onto the null space, which does not
/// depend on the basis chosen when the null space is degenerate.
pub fn steady_state(gen: &Superoperator) -> Result<SteadyState> {
    let n = gen.dim();
    let d2 = n * n;
    let svd = SVD::new(gen.matrix().clone(), false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let largest = sigma.iter().copied().fold(0.0_f64, f64::max).max(1.0);
    let null: Vec<usize> = (0..sigma.len()).filter(|&k| sigma[k] <= NULL_TOL * largest).collect();
    if null.is_empty() {
        let smallest = sigma.iter().copied().fold(f64::INFINITY, f64::min);
        return Err(Error::NoSteadyState(smallest));
    }
    let identity = linalg::vectorize(&CMat::identity(n, n));
    let mut v = CVec::zeros(d2);
    for &k in &null {
        let basis: CVec = v_t.row(k).adjoint();
        let overlap = basis.dotc(&identity);
        v += basis * overlap;
    }
    let rho = linalg::hermitian_part(&linalg::unvectorize(&v, n));
    let tr = linalg::trace(&rho).re;
    if tr.abs() < 1e-12 {
        return Err(Error::Precondition("null space carries no trace".into()));
    }
    let rho = rho / linalg::c(tr);
    let residual = (gen.matrix() * linalg::vectorize(&rho)).norm();
    Ok(SteadyState {
        rho,
        residual,
        null_dim: null.len(),
        degenerate: null.len() > 1,
    })
}

/// Classical fourth-order Runge-Kutta integration of the rate equation.
pub fn propagate_boltzmann(p: &FgrMatrix, f0: &Distribution, grid: TimeGrid) -> Result<Vec<Distribution>> {
    let n = p.dim();
    if f0.len() != n {
        return Err(Error::Dimension(format!(
            "distribution has {} entries, rates are {n}x{n}",
            f0.len()
        )));
    }
    let dt = grid.dt();
    let axpy = |f: &[f64], k: &[f64], h: f64| -> Vec<f64> { f.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    let rhs = |f: &[f64]| crate::generators::boltzmann_rhs_raw(p, f);

    let mut out = Vec::with_capacity(grid.steps + 1);
    out.push(f0.clone());
    let mut f = f0.values().to_vec();
    for step in 1..=grid.steps {
        let k1 = rhs(&f)?;
        let k2 = rhs(&axpy(&f, &k1, dt / 2.0))?;
        let k3 = rhs(&axpy(&f, &k2, dt / 2.0))?;
        let k4 = rhs(&axpy(&f, &k3, dt))?;
        for i in 0..n {
            f[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let worst = f.iter().copied().fold(f64::INFINITY, f64::min);
        if !worst.is_finite() || worst < -crate::system::DENSITY_TOL {
            return Err(Error::StepSize { step, value: worst });
        }
        out.push(Distribution::new(f.clone())?);
    }
    Ok(out)
}
