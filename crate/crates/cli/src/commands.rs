//! Subcommand implementations. Every command computes all of its outputs
//! before touching the file system.

use std::path::{Path, PathBuf};

use qfgr_core::diagnostics::{search_positivity_violation, SearchParams, ViolationReport, VIOLATION_TOL};
use qfgr_core::evolution::{propagate, propagate_boltzmann, TimeGrid, Trajectory};
use qfgr_core::generators::{
    coherent_liouvillian, conventional_rates, fgr_rates, lindblad_family, lindblad_superoperator,
    rates_to_superoperator, symmetrized_rates, RateFlavor, RateTensor, Superoperator,
};
use qfgr_core::linalg::{self, CMat};
use qfgr_core::{Distribution, SystemSpec};
use serde::{Deserialize, Serialize};

use crate::config::{
    ComplexMatrix, GeneratorKind, GridConfig, OutputsConfig, Rho0Config, Scenario, SearchConfig, SystemConfig,
};
use crate::error::CliError;
use crate::output::{num, snapshot_columns, snapshot_values, write_atomic, Artifact, Csv, Manifest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub generator: GeneratorKind,
    pub n: usize,
    pub steps: usize,
    pub final_trace_defect: f64,
    pub min_eigenvalue: f64,
    pub min_eigenvalue_time: f64,
    pub purity_min: f64,
    pub purity_max: f64,
    /// Whether the operator-form generator is exactly the rate form; only
    /// reported for `qfgr-lindblad`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lindblad_exact: Option<bool>,
}

impl RunSummary {
    fn of(generator: GeneratorKind, n: usize, traj: &Trajectory) -> Self {
        let d = &traj.diagnostics;
        let last = d.last().expect("nonempty trajectory");
        let (k, worst) = d.iter().enumerate().fold((0, f64::INFINITY), |acc, (k, s)| {
            if s.min_eigenvalue < acc.1 {
                (k, s.min_eigenvalue)
            } else {
                acc
            }
        });
        Self {
            generator,
            n,
            steps: traj.grid.steps,
            final_trace_defect: ((last.trace_re - 1.0).powi(2) + last.trace_im.powi(2)).sqrt(),
            min_eigenvalue: worst,
            min_eigenvalue_time: traj.grid.time(k),
            purity_min: d.iter().map(|s| s.purity).fold(f64::INFINITY, f64::min),
            purity_max: d.iter().map(|s| s.purity).fold(f64::NEG_INFINITY, f64::max),
            lindblad_exact: None,
        }
    }

    pub fn describe(&self) -> String {
        let mut s = format!(
            "{} (N = {}, {} steps): final trace defect {:.3e}, min eigenvalue {:.6e} at t = {:.6}, purity in [{:.6}, {:.6}]",
            self.generator.label(),
            self.n,
            self.steps,
            self.final_trace_defect,
            self.min_eigenvalue,
            self.min_eigenvalue_time,
            self.purity_min,
            self.purity_max
        );
        if self.lindblad_exact == Some(false) {
            s.push_str("; note: frequency classes overlap or kernel is gaussian, operator form is approximate");
        }
        s
    }
}

/// Generator for `kind` (not `boltzmann`) plus the exactness flag of the
/// operator form when relevant.
pub fn build_generator(
    kind: GeneratorKind,
    spec: &SystemSpec,
    include_coherent: bool,
) -> Result<(Superoperator, Option<bool>), CliError> {
    let mut exact = None;
    let dissipator = match kind {
        GeneratorKind::Exact => return Ok((coherent_liouvillian(spec, true), None)),
        GeneratorKind::Conventional => rates_to_superoperator(&conventional_rates(spec))?,
        GeneratorKind::QfgrRates => rates_to_superoperator(&symmetrized_rates(spec))?,
        GeneratorKind::QfgrLindblad => {
            let family = lindblad_family(spec);
            exact = Some(family.is_exact());
            lindblad_superoperator(&family)
        }
        GeneratorKind::Boltzmann => {
            return Err(CliError::Config(
                "the boltzmann generator has no superoperator form".into(),
            ))
        }
    };
    let gen = if include_coherent {
        dissipator + coherent_liouvillian(spec, false)
    } else {
        dissipator
    };
    Ok((gen, exact))
}

fn boltzmann_trajectory(scenario: &Scenario, spec: &SystemSpec) -> Result<Trajectory, CliError> {
    let rho0 = scenario.build_rho0(spec.dim())?;
    if !rho0.is_diagonal() {
        return Err(CliError::Config(
            "rho0: the boltzmann generator needs a diagonal initial state".into(),
        ));
    }
    let p = fgr_rates(spec);
    let f0 = Distribution::new(rho0.populations()).map_err(|e| CliError::Config(format!("rho0: {e}")))?;
    let bound = (0..spec.dim())
        .map(|l| 2.0 * (0..spec.dim()).map(|m| p.get(l, m)).sum::<f64>())
        .fold(0.0, f64::max);
    let grid = scenario.build_grid(bound)?;
    let states = propagate_boltzmann(&p, &f0, grid)?
        .iter()
        .map(|f| CMat::from_diagonal(&f.values().iter().map(|&x| linalg::c(x)).collect::<Vec<_>>().into()))
        .collect();
    Ok(Trajectory::from_states(grid, states)?)
}

/// Propagates a scenario and returns its trajectory and summary.
pub fn simulate(scenario: &Scenario) -> Result<(Trajectory, RunSummary), CliError> {
    let spec = scenario.build_spec()?;
    let n = spec.dim();
    if scenario.generator == GeneratorKind::Boltzmann {
        let traj = boltzmann_trajectory(scenario, &spec)?;
        let summary = RunSummary::of(scenario.generator, n, &traj);
        return Ok((traj, summary));
    }
    let rho0 = scenario.build_rho0(n)?;
    let (gen, exact) = build_generator(scenario.generator, &spec, scenario.include_coherent)?;
    let grid = scenario.build_grid(gen.rate_bound())?;
    let traj = propagate(&gen, &rho0, grid, scenario.method)?;
    let mut summary = RunSummary::of(scenario.generator, n, &traj);
    summary.lindblad_exact = exact;
    Ok((traj, summary))
}

fn trajectory_csv(traj: &Trajectory, elements: &[(usize, usize)]) -> Vec<u8> {
    let mut header = vec!["t".to_string()];
    header.extend(snapshot_columns(elements, ""));
    let mut csv = Csv::new(&header);
    for (k, (rho, d)) in traj.states.iter().zip(&traj.diagnostics).enumerate() {
        let mut row = vec![num(traj.grid.time(k))];
        row.extend(snapshot_values(rho, d, elements));
        csv.row(&row);
    }
    csv.into_bytes()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
}

#[derive(Debug, Clone)]
pub struct Outcome<S> {
    pub summary: S,
    pub artifacts: Vec<Artifact>,
}

impl<S> Outcome<S> {
    pub fn write(&self, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        write_atomic(out_dir, &self.artifacts)
    }
}

pub fn run(scenario: &Scenario) -> Result<Outcome<RunSummary>, CliError> {
    let (traj, summary) = simulate(scenario)?;
    let elements = scenario.elements(traj.states[0].nrows())?;
    let csv = Artifact::new(format!("{}.csv", scenario.name), trajectory_csv(&traj, &elements));
    let manifest = Manifest::new(
        "run",
        ScenarioConfig {
            scenario: scenario.clone(),
        },
        summary.clone(),
        std::slice::from_ref(&csv),
    );
    let manifest = Artifact::json(format!("{}.manifest.json", scenario.name), &manifest);
    Ok(Outcome {
        summary,
        artifacts: vec![csv, manifest],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub runs: Vec<RunSummary>,
    /// Largest Frobenius distance over the grid, per pair of generators.
    pub max_differences: Vec<(String, f64)>,
}

pub const COMPARED: [(GeneratorKind, &str); 3] = [
    (GeneratorKind::Conventional, "conventional"),
    (GeneratorKind::QfgrRates, "qfgr"),
    (GeneratorKind::Exact, "exact"),
];

pub fn compare(scenario: &Scenario) -> Result<Outcome<CompareSummary>, CliError> {
    let spec = scenario.build_spec()?;
    let n = spec.dim();
    let rho0 = scenario.build_rho0(n)?;
    let gens = COMPARED
        .iter()
        .map(|&(kind, _)| build_generator(kind, &spec, scenario.include_coherent).map(|g| g.0))
        .collect::<Result<Vec<_>, _>>()?;
    let bound = gens.iter().map(Superoperator::rate_bound).fold(0.0, f64::max);
    let grid = scenario.build_grid(bound)?;
    let trajs = gens
        .iter()
        .map(|g| propagate(g, &rho0, grid, scenario.method))
        .collect::<Result<Vec<_>, _>>()?;
    let elements = scenario.elements(n)?;

    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let mut header = vec!["t".to_string()];
    for (_, suffix) in COMPARED {
        header.extend(snapshot_columns(&elements, &format!("_{suffix}")));
    }
    for &(i, j) in &pairs {
        header.push(format!("diff_{}_{}", COMPARED[i].1, COMPARED[j].1));
    }
    let mut csv = Csv::new(&header);
    let mut max_diff = [0.0_f64; 3];
    for k in 0..=grid.steps {
        let mut row = vec![num(grid.time(k))];
        for t in &trajs {
            row.extend(snapshot_values(&t.states[k], &t.diagnostics[k], &elements));
        }
        for (p, &(i, j)) in pairs.iter().enumerate() {
            let d = (&trajs[i].states[k] - &trajs[j].states[k]).norm();
            max_diff[p] = max_diff[p].max(d);
            row.push(num(d));
        }
        csv.row(&row);
    }

    let summary = CompareSummary {
        runs: COMPARED
            .iter()
            .zip(&trajs)
            .map(|(&(kind, _), t)| RunSummary::of(kind, n, t))
            .collect(),
        max_differences: pairs
            .iter()
            .zip(max_diff)
            .map(|(&(i, j), d)| (format!("{}-{}", COMPARED[i].1, COMPARED[j].1), d))
            .collect(),
    };
    let csv = Artifact::new(format!("{}.compare.csv", scenario.name), csv.into_bytes());
    let manifest = Manifest::new(
        "compare",
        ScenarioConfig {
            scenario: scenario.clone(),
        },
        summary.clone(),
        std::slice::from_ref(&csv),
    );
    let manifest = Artifact::json(format!("{}.compare.manifest.json", scenario.name), &manifest);
    Ok(Outcome {
        summary,
        artifacts: vec![csv, manifest],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatesSummary {
    pub n: usize,
    pub conventional_nonzero: usize,
    pub symmetrized_nonzero: usize,
}

fn flavor_label(f: RateFlavor) -> &'static str {
    match f {
        RateFlavor::Conventional => "conventional",
        RateFlavor::Symmetrized => "symmetrized",
    }
}

pub fn rates(scenario: &Scenario) -> Result<Outcome<RatesSummary>, CliError> {
    let spec = scenario.build_spec()?;
    let n = spec.dim();
    let tensors: [RateTensor; 2] = [conventional_rates(&spec), symmetrized_rates(&spec)];
    let header: Vec<String> = ["tensor", "l1", "l2", "lp1", "lp2", "re", "im"]
        .map(String::from)
        .to_vec();
    let mut csv = Csv::new(&header);
    let mut counts = [0usize; 2];
    for (t, count) in tensors.iter().zip(counts.iter_mut()) {
        for ([a, b, c, d], v) in t.entries() {
            if v.re != 0.0 || v.im != 0.0 {
                *count += 1;
                let mut row = vec![flavor_label(t.flavor()).to_string()];
                row.extend([a, b, c, d].map(|i| i.to_string()));
                row.extend([num(v.re), num(v.im)]);
                csv.row(&row);
            }
        }
    }
    let p = fgr_rates(&spec);
    let mut fgr = Csv::new(&["l", "lp", "rate"].map(String::from));
    for l in 0..n {
        for lp in 0..n {
            fgr.row(&[l.to_string(), lp.to_string(), num(p.get(l, lp))]);
        }
    }
    let summary = RatesSummary {
        n,
        conventional_nonzero: counts[0],
        symmetrized_nonzero: counts[1],
    };
    let artifacts = vec![
        Artifact::new(format!("{}.rates.csv", scenario.name), csv.into_bytes()),
        Artifact::new(format!("{}.fgr.csv", scenario.name), fgr.into_bytes()),
    ];
    let manifest = Manifest::new(
        "rates",
        ScenarioConfig {
            scenario: scenario.clone(),
        },
        summary.clone(),
        &artifacts,
    );
    let mut artifacts = artifacts;
    artifacts.push(Artifact::json(
        format!("{}.rates.manifest.json", scenario.name),
        &manifest,
    ));
    Ok(Outcome { summary, artifacts })
}

pub const SEARCH_REPORT: &str = "search-report.json";
pub const WITNESS: &str = "witness.json";
pub const SEARCH_MANIFEST: &str = "search.manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    ViolationFound,
    NoneFound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub status: SearchStatus,
    pub threshold: f64,
    pub report: ViolationReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchManifestConfig {
    pub search: SearchConfig,
}

/// Scenario replaying the reported instance under the conventional
/// generator, with the system and initial state spelled out explicitly.
pub fn witness_scenario(report: &ViolationReport) -> Result<Scenario, CliError> {
    let (spec, rho0) = report.instance()?;
    let (re, im) = linalg::to_parts(rho0.matrix());
    Ok(Scenario {
        name: "markov-violation".into(),
        system: SystemConfig {
            hbar: spec.hbar(),
            kernel: spec.kernel(),
            energies: Some(spec.energies().to_vec()),
            interaction: Some(ComplexMatrix::from_matrix(spec.interaction())),
            random: None,
        },
        generator: GeneratorKind::Conventional,
        include_coherent: true,
        rho0: Rho0Config::Explicit { re, im: Some(im) },
        grid: grid_config(&report.grid),
        method: Default::default(),
        outputs: OutputsConfig::default(),
    })
}

fn grid_config(g: &TimeGrid) -> GridConfig {
    GridConfig {
        t0: g.t0,
        t1: g.t1,
        steps: Some(g.steps),
    }
}

/// Runs the search on a pool of `threads` workers (the global pool when
/// `None`).
pub fn search(config: &SearchConfig, threads: Option<usize>) -> Result<Outcome<SearchSummary>, CliError> {
    let params: SearchParams = config.params()?;
    let report = match threads {
        None => search_positivity_violation(&params)?,
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?
            .install(|| search_positivity_violation(&params))?,
    };
    let violated = report.worst_min_eigenvalue < -VIOLATION_TOL;
    let mut artifacts = Vec::new();
    if violated {
        artifacts.push(Artifact::json(WITNESS, &witness_scenario(&report)?));
    }
    let summary = SearchSummary {
        status: if violated {
            SearchStatus::ViolationFound
        } else {
            SearchStatus::NoneFound
        },
        threshold: VIOLATION_TOL,
        report,
        witness: violated.then(|| WITNESS.to_string()),
    };
    artifacts.insert(0, Artifact::json(SEARCH_REPORT, &summary));
    let manifest = Manifest::new(
        "search",
        SearchManifestConfig {
            search: config.effective()?,
        },
        summary.clone(),
        &artifacts,
    );
    artifacts.push(Artifact::json(SEARCH_MANIFEST, &manifest));
    Ok(Outcome { summary, artifacts })
}
