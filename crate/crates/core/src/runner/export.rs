//! Output files. Every CSV starts with `# key: value` metadata lines; the
//! JSON summary carries the same metadata under `metadata`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::experiment::{ErasureOutcome, SuccessOutcome};
use crate::cost::CostReport;
use crate::error::Result;
use crate::metrics::write_success_csv;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Metadata {
    pub artifact_version: String,
    pub command: String,
    pub scenario: Option<String>,
    pub master_seed: u64,
    pub config_hash: String,
}

impl Metadata {
    pub fn new(command: &str, scenario: Option<String>, master_seed: u64, config_hash: String) -> Self {
        Self {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            scenario,
            master_seed,
            config_hash,
        }
    }

    pub fn write_header<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "# artifact_version: {}", self.artifact_version)?;
        writeln!(out, "# command: {}", self.command)?;
        if let Some(s) = &self.scenario {
            writeln!(out, "# scenario: {s}")?;
        }
        writeln!(out, "# master_seed: {}", self.master_seed)?;
        writeln!(out, "# config_hash: {}", self.config_hash)
    }
}

/// Writes `dir/name` as the metadata header followed by `body`.
pub fn write_csv_file<F>(dir: &Path, name: &str, meta: &Metadata, body: F) -> Result<PathBuf>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    fs::create_dir_all(dir)?;
    let mut buf = Vec::new();
    meta.write_header(&mut buf)?;
    body(&mut buf)?;
    let path = dir.join(name);
    fs::write(&path, buf)?;
    Ok(path)
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    metadata: &'a Metadata,
    results: T,
}

pub fn write_summary<T: Serialize>(dir: &Path, meta: &Metadata, results: T) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&Summary { metadata: meta, results })?;
    fs::write(&path, text + "\n")?;
    Ok(path)
}

/// File-name fragment for a scenario, e.g. `leo_haps_tn20`.
pub fn scenario_slug(s: &str) -> String {
    s.to_ascii_lowercase()
        .replace('+', "_")
        .chars()
        .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
        .collect()
}

/// Heatmap, radial profile and violin summary of one erasure experiment.
pub fn export_erasure(dir: &Path, meta: &Metadata, out: &ErasureOutcome) -> Result<Vec<PathBuf>> {
    let slug = scenario_slug(&out.scenario.to_string());
    Ok(vec![
        write_csv_file(dir, &format!("heatmap_{slug}.csv"), meta, |w| out.heatmap.write_csv(w))?,
        write_csv_file(dir, &format!("radial_{slug}.csv"), meta, |w| out.profile.write_csv(w))?,
        write_csv_file(dir, &format!("violin_{slug}.csv"), meta, |w| out.summary.write_csv(w))?,
    ])
}

pub fn export_success(dir: &Path, meta: &Metadata, out: &SuccessOutcome) -> Result<PathBuf> {
    let slug = scenario_slug(&out.scenario.to_string());
    write_csv_file(dir, &format!("success_{slug}.csv"), meta, |w| write_success_csv(&out.points, w))
}

pub fn export_cost(dir: &Path, meta: &Metadata, report: &CostReport) -> Result<PathBuf> {
    write_csv_file(dir, "cost.csv", meta, |w| report.write_csv(w))
}
