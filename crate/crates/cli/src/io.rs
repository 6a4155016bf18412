//! Scenario, solution, and matrix file formats.
//!
//! Scenarios and solutions are JSON; floats are written shortest-round-trip
//! so save/load is bit-exact. The matrix file is a small CSV-style layout: a
//! `sites` header row, then a `distances_km` block and a `durations_s`
//! block, each one row per site in header order.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use lad_core::geo::{MatrixTravel, Travel};
use lad_core::model::{validate_scenario, Point, Scenario, Solution};

use crate::ValidationError;

/// Loads and fully validates a scenario document. Parse errors carry the
/// line/column from the JSON reader; validation reports every violation.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let scenario: Scenario = serde_json::from_str(&text)
        .map_err(|e| ValidationError(format!("{}: {e}", path.display())))?;
    let violations = validate_scenario(&scenario);
    if !violations.is_empty() {
        bail!(ValidationError(format!(
            "{}: invalid scenario:\n  - {}",
            path.display(),
            violations.join("\n  - ")
        )));
    }
    Ok(scenario)
}

pub fn save_scenario(path: &Path, scenario: &Scenario) -> Result<()> {
    let mut text = serde_json::to_string_pretty(scenario)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Where a solution came from: enough to reproduce the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub algorithm: String,
    #[serde(default)]
    pub seed: Option<u64>,
    /// SHA-256 over the scenario document and solve configuration.
    pub config_hash: String,
    pub travel: String,
    #[serde(default)]
    pub runtime_s: Option<f64>,
    #[serde(default)]
    pub time_limit_s: Option<f64>,
    #[serde(default)]
    pub proven_optimal: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDocument {
    pub solution: Solution,
    pub provenance: Provenance,
}

pub fn save_solution(path: &Path, doc: &SolutionDocument) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn load_solution(path: &Path) -> Result<SolutionDocument> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: SolutionDocument = serde_json::from_str(&text)
        .map_err(|e| ValidationError(format!("{}: {e}", path.display())))?;
    Ok(doc)
}

/// SHA-256 hex over the given parts, used as the provenance config hash.
pub fn config_hash(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p.as_bytes());
        hasher.update([0u8]);
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(digest.len() * 2);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Site keys used in matrix files: the depot, each group's waiting
/// location, and each vehicle's home.
pub fn site_key_depot() -> String {
    "f".to_string()
}

pub fn site_key_group(id: &str) -> String {
    format!("g:{id}")
}

pub fn site_key_vehicle(id: &str) -> String {
    format!("v:{id}")
}

/// Every site a scenario's segment cache will query, keyed for matrix files.
pub fn scenario_sites(s: &Scenario) -> Vec<(String, Point)> {
    let mut sites = vec![(site_key_depot(), s.depot)];
    for g in &s.groups {
        sites.push((site_key_group(&g.id), g.waiting_location));
    }
    for v in &s.vehicles {
        sites.push((site_key_vehicle(&v.id), v.home));
    }
    sites
}

/// A parsed matrix file: ids plus row-major distance and duration tables.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteMatrix {
    pub ids: Vec<String>,
    pub dist: Vec<f64>,
    pub dur: Vec<f64>,
}

/// Writes the full site-by-site matrix by querying the provider for every
/// ordered pair. With the HTTP provider this snapshots the fetched table for
/// offline reruns.
pub fn write_matrix_csv(path: &Path, sites: &[(String, Point)], travel: &dyn Travel) -> Result<()> {
    for (key, _) in sites {
        if key.contains(',') || key.contains('\n') {
            bail!(ValidationError(format!("site key '{key}' cannot contain commas or newlines")));
        }
    }
    let mut out = String::new();
    out.push_str("sites");
    for (key, _) in sites {
        out.push(',');
        out.push_str(key);
    }
    out.push('\n');
    let mut dist_block = String::from("distances_km\n");
    let mut dur_block = String::from("durations_s\n");
    for (key_a, a) in sites {
        dist_block.push_str(key_a);
        dur_block.push_str(key_a);
        for (_, b) in sites {
            let leg = travel
                .leg(*a, *b)
                .map_err(|e| crate::ProviderFailure(format!("matrix dump: {e}")))?;
            dist_block.push_str(&format!(",{}", leg.distance_km));
            dur_block.push_str(&format!(",{}", leg.duration_s));
        }
        dist_block.push('\n');
        dur_block.push('\n');
    }
    out.push_str(&dist_block);
    out.push_str(&dur_block);
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<SiteMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| ValidationError(format!("{}: empty matrix file", path.display())))?;
    let mut fields = header.split(',');
    if fields.next() != Some("sites") {
        bail!(ValidationError(format!("{}: first row must start with 'sites'", path.display())));
    }
    let ids: Vec<String> = fields.map(str::to_string).collect();
    let n = ids.len();
    if n == 0 {
        bail!(ValidationError(format!("{}: no sites declared", path.display())));
    }

    let mut read_block = |name: &str| -> Result<Vec<f64>> {
        let (lineno, marker) = lines
            .next()
            .ok_or_else(|| ValidationError(format!("{}: missing '{name}' block", path.display())))?;
        if marker.trim() != name {
            bail!(ValidationError(format!(
                "{}:{}: expected block marker '{name}', found '{marker}'",
                path.display(),
                lineno + 1
            )));
        }
        let mut table = Vec::with_capacity(n * n);
        for (row, expected_id) in ids.iter().enumerate() {
            let (lineno, line) = lines.next().ok_or_else(|| {
                ValidationError(format!("{}: '{name}' block ends after {row} rows", path.display()))
            })?;
            let mut fields = line.split(',');
            let row_id = fields.next().unwrap_or("");
            if row_id != expected_id {
                bail!(ValidationError(format!(
                    "{}:{}: row label '{row_id}' does not match site '{expected_id}'",
                    path.display(),
                    lineno + 1,
                )));
            }
            for col in 0..n {
                let field = fields.next().ok_or_else(|| {
                    ValidationError(format!(
                        "{}:{}: row '{row_id}' has fewer than {n} values",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                let value: f64 = field.trim().parse().map_err(|_| {
                    ValidationError(format!(
                        "{}:{}: bad number '{field}' at column {col}",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                table.push(value);
            }
            if fields.next().is_some() {
                bail!(ValidationError(format!(
                    "{}:{}: row '{row_id}' has more than {n} values",
                    path.display(),
                    lineno + 1
                )));
            }
        }
        Ok(table)
    };

    let dist = read_block("distances_km")?;
    let dur = read_block("durations_s")?;
    Ok(SiteMatrix { ids, dist, dur })
}

/// Builds a point-keyed provider for this scenario out of a matrix file.
/// Extra sites in the file are ignored; missing ones are an error.
pub fn matrix_travel_for_scenario(scenario: &Scenario, matrix: &SiteMatrix) -> Result<MatrixTravel> {
    let sites = scenario_sites(scenario);
    let index: BTreeMap<&str, usize> =
        matrix.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let n_file = matrix.ids.len();
    let mut rows = Vec::with_capacity(sites.len());
    let mut points = Vec::with_capacity(sites.len());
    for (key, point) in &sites {
        let &i = index
            .get(key.as_str())
            .ok_or_else(|| ValidationError(format!("matrix file is missing site '{key}'")))?;
        rows.push(i);
        points.push(*point);
    }
    let n = sites.len();
    let mut dist = Vec::with_capacity(n * n);
    let mut dur = Vec::with_capacity(n * n);
    for &i in &rows {
        for &j in &rows {
            dist.push(matrix.dist[i * n_file + j]);
            dur.push(matrix.dur[i * n_file + j]);
        }
    }
    MatrixTravel::new(points, dist, dur).map_err(|e| ValidationError(e).into())
}
