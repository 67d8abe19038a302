//! Scenario and search-config documents.
//!
//! Complex matrices are stored as flat row-major `re` / `im` arrays.

use std::path::Path;

use qfgr_core::diagnostics::SearchParams;
use qfgr_core::evolution::{Method, TimeGrid, STEPS_PER_UNIT};
use qfgr_core::linalg::{self, CMat};
use qfgr_core::{random_density, random_system, DeltaKernel, DensityMatrix, SystemSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexMatrix {
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

impl ComplexMatrix {
    pub fn from_matrix(a: &CMat) -> Self {
        let (re, im) = linalg::to_parts(a);
        Self { re, im: Some(im) }
    }

    pub fn to_matrix(&self, n: usize, field: &str) -> Result<CMat, CliError> {
        let zeros = vec![0.0; self.re.len()];
        let im = self.im.as_deref().unwrap_or(&zeros);
        linalg::from_parts(n, &self.re, im).ok_or_else(|| {
            CliError::Config(format!(
                "{field}: expected {} real and imaginary entries for N = {n}, got {} and {}",
                n * n,
                self.re.len(),
                im.len()
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSystem {
    pub seed: u64,
    pub n: usize,
    pub level_spacing: f64,
    pub coupling_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default = "one")]
    pub hbar: f64,
    pub kernel: DeltaKernel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energies: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction: Option<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomSystem>,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    Exact,
    Conventional,
    QfgrRates,
    QfgrLindblad,
    Boltzmann,
}

impl GeneratorKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Conventional => "conventional",
            Self::QfgrRates => "qfgr-rates",
            Self::QfgrLindblad => "qfgr-lindblad",
            Self::Boltzmann => "boltzmann",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Rho0Config {
    MaximallyMixed,
    Pure { level: usize },
    Random { seed: u64 },
    Explicit { re: Vec<f64>, im: Option<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    /// Matrix elements to export; all `N²` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    pub system: SystemConfig,
    pub generator: GeneratorKind,
    #[serde(default = "yes")]
    pub include_coherent: bool,
    pub rho0: Rho0Config,
    pub grid: GridConfig,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

fn default_name() -> String {
    "scenario".into()
}

impl Scenario {
    pub fn apply_seed(&mut self, seed: u64) {
        if let Some(r) = self.system.random.as_mut() {
            r.seed = seed;
        }
        if let Rho0Config::Random { seed: s } = &mut self.rho0 {
            *s = seed;
        }
    }

    pub fn build_spec(&self) -> Result<SystemSpec, CliError> {
        let sys = &self.system;
        DeltaKernel::new(sys.kernel.mode, sys.kernel.eta)
            .map_err(|e| CliError::Config(format!("system.kernel: {e}")))?;
        let spec = match (&sys.energies, &sys.interaction, &sys.random) {
            (Some(e), Some(h), None) => {
                let h = h.to_matrix(e.len(), "system.interaction")?;
                SystemSpec::new(e.clone(), h, sys.kernel, sys.hbar)
            }
            (None, None, Some(r)) => random_system(r.seed, r.n, r.level_spacing, r.coupling_scale, sys.kernel)
                .and_then(|s| SystemSpec::new(s.energies().to_vec(), s.interaction().clone(), s.kernel(), sys.hbar)),
            _ => {
                return Err(CliError::Config(
                    "system: give either `energies` + `interaction` or `random`, not both".into(),
                ))
            }
        };
        spec.map_err(|e| CliError::Config(format!("system: {e}")))
    }

    pub fn build_rho0(&self, n: usize) -> Result<DensityMatrix, CliError> {
        let rho = match &self.rho0 {
            Rho0Config::MaximallyMixed => DensityMatrix::maximally_mixed(n),
            Rho0Config::Pure { level } => DensityMatrix::pure_level(n, *level),
            Rho0Config::Random { seed } => random_density(*seed, n),
            Rho0Config::Explicit { re, im } => {
                let m = ComplexMatrix {
                    re: re.clone(),
                    im: im.clone(),
                }
                .to_matrix(n, "rho0")?;
                DensityMatrix::new(m)
            }
        };
        rho.map_err(|e| CliError::Config(format!("rho0: {e}")))
    }

    /// Grid with the step count filled in from `rate_bound` when absent.
    pub fn build_grid(&self, rate_bound: f64) -> Result<TimeGrid, CliError> {
        let g = &self.grid;
        let steps = match g.steps {
            Some(s) => s,
            None => default_steps_for(rate_bound, g.t1 - g.t0),
        };
        TimeGrid::new(g.t0, g.t1, steps).map_err(|e| CliError::Config(format!("grid: {e}")))
    }

    pub fn elements(&self, n: usize) -> Result<Vec<(usize, usize)>, CliError> {
        match &self.outputs.elements {
            None => Ok((0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect()),
            Some(list) => list
                .iter()
                .map(|&[a, b]| {
                    if a < n && b < n {
                        Ok((a, b))
                    } else {
                        Err(CliError::Config(format!(
                            "outputs.elements: ({a}, {b}) out of range for N = {n}"
                        )))
                    }
                })
                .collect(),
        }
    }
}

fn default_steps_for(rate_bound: f64, span: f64) -> usize {
    ((STEPS_PER_UNIT * span.abs() * rate_bound).ceil() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub master_seed: u64,
    pub budget: usize,
    pub n_min: usize,
    pub n_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<DeltaKernel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relaxation_times: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

impl SearchConfig {
    pub fn params(&self) -> Result<SearchParams, CliError> {
        let d = SearchParams::defaults(self.master_seed, self.budget);
        let p = SearchParams {
            n_min: self.n_min,
            n_max: self.n_max,
            level_spacing: self.level_spacing.unwrap_or(d.level_spacing),
            coupling_scale: self.coupling_scale.unwrap_or(d.coupling_scale),
            kernel: self.kernel.unwrap_or(d.kernel),
            relaxation_times: self.relaxation_times.unwrap_or(d.relaxation_times),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
            ..d
        };
        p.validate()
            .map_err(|e| CliError::Config(format!("search config: {e}")))?;
        Ok(p)
    }

    /// Same document with every default spelled out.
    pub fn effective(&self) -> Result<Self, CliError> {
        let p = self.params()?;
        Ok(Self {
            master_seed: p.master_seed,
            budget: p.budget,
            n_min: p.n_min,
            n_max: p.n_max,
            level_spacing: Some(p.level_spacing),
            coupling_scale: Some(p.coupling_scale),
            kernel: Some(p.kernel),
            relaxation_times: Some(p.relaxation_times),
            max_steps: Some(p.max_steps),
        })
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text)
        .map_err(|e| CliError::Config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
}

/// Reads a scenario, or the scenario embedded in a run manifest.
pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = read(path)?;
    let value: serde_json::Value = parse(path, &text)?;
    if let Some(inner) = value.get("manifest_format").and(value.get("scenario")) {
        return serde_json::from_value(inner.clone())
            .map_err(|e| CliError::Config(format!("{}: scenario in manifest: {e}", path.display())));
    }
    parse(path, &text)
}

/// Reads a search config, or the one embedded in a search manifest.
pub fn load_search(path: &Path) -> Result<SearchConfig, CliError> {
    let text = read(path)?;
    let value: serde_json::Value = parse(path, &text)?;
    if let Some(inner) = value.get("manifest_format").and(value.get("search")) {
        return serde_json::from_value(inner.clone())
            .map_err(|e| CliError::Config(format!("{}: search config in manifest: {e}", path.display())));
    }
    parse(path, &text)
}
