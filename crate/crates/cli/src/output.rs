//! CSV rendering, manifests and atomic file output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use qfgr_core::evolution::SnapshotDiagnostics;
use qfgr_core::linalg::CMat;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FORMAT: &str = "qfgr-manifest/1";

/// Fixed 17-significant-digit rendering.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn snapshot_columns(elements: &[(usize, usize)], suffix: &str) -> Vec<String> {
    let mut cols: Vec<String> = ["trace_re", "herm_defect", "min_eig", "purity"]
        .iter()
        .map(|c| format!("{c}{suffix}"))
        .collect();
    for &(a, b) in elements {
        cols.push(format!("rho_{a}_{b}_re{suffix}"));
        cols.push(format!("rho_{a}_{b}_im{suffix}"));
    }
    cols
}

pub fn snapshot_values(rho: &CMat, d: &SnapshotDiagnostics, elements: &[(usize, usize)]) -> Vec<String> {
    let mut v = vec![
        num(d.trace_re),
        num(d.hermiticity_defect),
        num(d.min_eigenvalue),
        num(d.purity),
    ];
    for &(a, b) in elements {
        v.push(num(rho[(a, b)].re));
        v.push(num(rho[(a, b)].im));
    }
    v
}

#[derive(Debug, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[String]) -> Self {
        let mut csv = Self::default();
        csv.row(header);
        csv
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

/// A named file whose full content is known before anything is written.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub content: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, content: Vec<u8>) -> Self {
        Self {
            name: name.into(),
            content,
        }
    }

    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        Self::new(name, text.into_bytes())
    }

    pub fn record(&self) -> OutputRecord {
        OutputRecord {
            file: self.name.clone(),
            bytes: self.content.len(),
            sha256: sha256_hex(&self.content),
        }
    }
}

/// Writes each artifact to a temporary file in `dir` and renames it into
/// place, so a file is either complete or absent.
pub fn write_atomic(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let target = dir.join(&a.name);
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(&a.content)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&target).map_err(|e| CliError::Io(e.error))?;
        written.push(target);
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest<C, S> {
    pub manifest_format: String,
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(flatten)]
    pub config: C,
    pub summary: S,
    pub outputs: Vec<OutputRecord>,
}

impl<C, S> Manifest<C, S> {
    pub fn new(command: &str, config: C, summary: S, outputs: &[Artifact]) -> Self {
        Self {
            manifest_format: MANIFEST_FORMAT.into(),
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            summary,
            outputs: outputs.iter().map(Artifact::record).collect(),
        }
    }
}
