//! Travel provider configuration and construction, including the HTTP
//! routing-table client.
//!
//! The HTTP provider posts the scenario's sites once and receives full
//! distance/duration matrices back, then answers every lookup from that
//! table. The request is retried at most twice before failing hard; results
//! are never silently substituted.

use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use lad_core::geo::{EuclideanTravel, MatrixTravel, Travel};
use lad_core::model::{Point, Scenario};

use crate::io::{matrix_travel_for_scenario, read_matrix_csv, scenario_sites};
use crate::{ProviderFailure, ValidationError};

pub const DEFAULT_CIRCUITY: f64 = 1.3;
pub const DEFAULT_SPEED_KMH: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Euclidean,
    Matrix,
    #[value(name = "http")]
    #[serde(rename = "http_table")]
    HttpTable,
}

/// Declarative provider selection, as carried in config files and flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TravelConfig {
    pub provider: ProviderKind,
    /// Road detour factor over straight-line distance (euclidean only).
    #[serde(default = "default_circuity")]
    pub circuity: f64,
    #[serde(default = "default_speed")]
    pub vehicle_speed_kmh: f64,
    #[serde(default)]
    pub matrix_source: Option<PathBuf>,
    #[serde(default)]
    pub endpoint: Option<String>,
}

fn default_circuity() -> f64 {
    DEFAULT_CIRCUITY
}

fn default_speed() -> f64 {
    DEFAULT_SPEED_KMH
}

impl Default for TravelConfig {
    fn default() -> Self {
        TravelConfig {
            provider: ProviderKind::Euclidean,
            circuity: DEFAULT_CIRCUITY,
            vehicle_speed_kmh: DEFAULT_SPEED_KMH,
            matrix_source: None,
            endpoint: None,
        }
    }
}

impl TravelConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.circuity.is_finite() || self.circuity < 1.0 {
            bail!(ValidationError(format!("circuity must be >= 1, got {}", self.circuity)));
        }
        if !self.vehicle_speed_kmh.is_finite() || self.vehicle_speed_kmh <= 0.0 {
            bail!(ValidationError(format!(
                "vehicle speed must be > 0 km/h, got {}",
                self.vehicle_speed_kmh
            )));
        }
        if self.provider == ProviderKind::Matrix && self.matrix_source.is_none() {
            bail!(ValidationError("matrix provider needs --matrix-file".into()));
        }
        if self.provider == ProviderKind::HttpTable && self.endpoint.is_none() {
            bail!(ValidationError("http provider needs --endpoint".into()));
        }
        Ok(())
    }

    /// Builds the provider for one scenario. Matrix and HTTP providers are
    /// bound to the scenario's sites.
    pub fn build(&self, scenario: &Scenario) -> Result<Arc<dyn Travel>> {
        self.validate()?;
        match self.provider {
            ProviderKind::Euclidean => {
                let t = EuclideanTravel::new(self.circuity, self.vehicle_speed_kmh)
                    .map_err(ValidationError)?;
                Ok(Arc::new(t))
            }
            ProviderKind::Matrix => {
                let path = self.matrix_source.as_ref().unwrap();
                let matrix = read_matrix_csv(path)?;
                Ok(Arc::new(matrix_travel_for_scenario(scenario, &matrix)?))
            }
            ProviderKind::HttpTable => {
                let endpoint = self.endpoint.as_ref().unwrap();
                Ok(Arc::new(fetch_http_table(endpoint, scenario)?))
            }
        }
    }

    /// Short provenance string.
    pub fn summary(&self) -> String {
        match self.provider {
            ProviderKind::Euclidean => format!(
                "euclidean(circuity={}, speed_kmh={})",
                self.circuity, self.vehicle_speed_kmh
            ),
            ProviderKind::Matrix => format!(
                "matrix({})",
                self.matrix_source.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
            ),
            ProviderKind::HttpTable => {
                format!("http_table({})", self.endpoint.clone().unwrap_or_default())
            }
        }
    }
}

#[derive(Serialize)]
struct TableRequest {
    sites: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
struct TableResponse {
    distances_km: Vec<Vec<f64>>,
    durations_s: Vec<Vec<f64>>,
}

/// POSTs the scenario's sites to a routing-table endpoint and wraps the
/// returned matrices as a point-keyed provider.
pub fn fetch_http_table(endpoint: &str, scenario: &Scenario) -> Result<MatrixTravel> {
    let sites = scenario_sites(scenario);
    let points: Vec<Point> = sites.iter().map(|&(_, p)| p).collect();
    let request = TableRequest { sites: points.iter().map(|p| [p.x, p.y]).collect() };

    let mut last_error = String::new();
    for _attempt in 0..3 {
        match post_table(endpoint, &request) {
            Ok(response) => return table_to_travel(points, response),
            Err(e) => last_error = e,
        }
    }
    bail!(ProviderFailure(format!(
        "routing table request to {endpoint} failed after 3 attempts: {last_error}"
    )))
}

fn post_table(endpoint: &str, request: &TableRequest) -> std::result::Result<TableResponse, String> {
    let mut response = ureq::post(endpoint)
        .send_json(request)
        .map_err(|e| format!("{e}"))?;
    response.body_mut().read_json::<TableResponse>().map_err(|e| format!("bad response body: {e}"))
}

fn table_to_travel(points: Vec<Point>, response: TableResponse) -> Result<MatrixTravel> {
    let n = points.len();
    let flatten = |name: &str, rows: Vec<Vec<f64>>| -> Result<Vec<f64>> {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            bail!(ProviderFailure(format!(
                "routing table returned a malformed {name} matrix (want {n}x{n})"
            )));
        }
        Ok(rows.into_iter().flatten().collect())
    };
    let dist = flatten("distances_km", response.distances_km)?;
    let dur = flatten("durations_s", response.durations_s)?;
    MatrixTravel::new(points, dist, dur)
        .map_err(|e| ProviderFailure(format!("routing table rejected: {e}")).into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_invariants() {
        let mut cfg = TravelConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.circuity = 0.9;
        assert!(cfg.validate().is_err());
        cfg.circuity = 1.3;
        cfg.vehicle_speed_kmh = 0.0;
        assert!(cfg.validate().is_err());
        cfg.vehicle_speed_kmh = 40.0;
        cfg.provider = ProviderKind::Matrix;
        assert!(cfg.validate().is_err(), "matrix needs a source file");
        cfg.matrix_source = Some("m.csv".into());
        assert!(cfg.validate().is_ok());
        cfg.provider = ProviderKind::HttpTable;
        assert!(cfg.validate().is_err(), "http needs an endpoint");
        cfg.endpoint = Some("http://localhost:1/table".into());
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn summaries_name_the_provider() {
        let cfg = TravelConfig::default();
        assert!(cfg.summary().starts_with("euclidean("));
        let cfg = TravelConfig {
            provider: ProviderKind::HttpTable,
            endpoint: Some("http://router/table".into()),
            ..Default::default()
        };
        assert_eq!(cfg.summary(), "http_table(http://router/table)");
    }
}
