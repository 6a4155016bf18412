//! The experiment harness: fleet-size sweeps over scenarios, metric rows,
//! and CSV emission.
//!
//! Rows run in a rayon worker pool; CSV order always matches input order.
//! Greedy rows are fully determined by the scenario and configuration, so a
//! bench rerun with `include_runtime` off is byte-identical.

use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use rayon::prelude::*;

use lad_core::audit::audit_solution;
use lad_core::exact::{solve_exact, ExactConfig, ExactError};
use lad_core::geo::Travel;
use lad_core::greedy::{solve_greedy, GreedyConfig};
use lad_core::metrics::{company_savings, completion_time, per_vehicle_profit, round_to_cents};
use lad_core::model::{Algorithm, Scenario, Solution};
use lad_core::segments::precompute_segments;

use crate::travel::TravelConfig;

pub const DEFAULT_EXACT_TIME_LIMIT_S: f64 = 300.0;
pub const DEFAULT_PROFIT_SHARE: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub fleet_sizes: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub exact_time_limit_s: f64,
    pub branch_limit: Option<usize>,
    /// Write wall-clock runtimes. Off, the CSV is byte-reproducible.
    pub include_runtime: bool,
    /// Re-check every solution with the independent auditor.
    pub audit: bool,
    pub share: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            fleet_sizes: Vec::new(),
            algorithms: vec![Algorithm::Greedy],
            exact_time_limit_s: DEFAULT_EXACT_TIME_LIMIT_S,
            branch_limit: Some(4),
            include_runtime: true,
            audit: false,
            share: DEFAULT_PROFIT_SHARE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub scenario: String,
    pub algorithm: String,
    pub fleet_size: usize,
    pub status: String,
    pub total_cost_cents: Option<i64>,
    pub savings_cents: Option<i64>,
    pub n_participating: Option<usize>,
    pub per_vehicle_profit_cents: Option<i64>,
    pub completion_time_s: Option<f64>,
    pub runtime_s: Option<f64>,
    pub uncovered_count: Option<usize>,
}

#[derive(Debug)]
pub struct BenchOutcome {
    pub rows: Vec<BenchRow>,
    /// Solutions per row index, for auditing and trend checks.
    pub solutions: Vec<(usize, Solution)>,
}

/// Turns a solved instance into a metrics row. Savings are derived in whole
/// cents from the budget so `savings + total_cost = budget` holds exactly in
/// the report.
pub fn metrics_row(
    scenario_name: &str,
    scenario: &Scenario,
    fleet_size: usize,
    solution: &Solution,
    runtime_s: Option<f64>,
    share: f64,
) -> BenchRow {
    let algorithm = algo_name(solution.algorithm).to_string();
    let cost_cents = round_to_cents(solution.total_cost_usd);
    let n = solution.n_participating();
    let mut row = BenchRow {
        scenario: scenario_name.to_string(),
        algorithm,
        fleet_size,
        status: if !solution.is_fully_covered() {
            "partial".to_string()
        } else if solution.time_limit_reached {
            "time_limit".to_string()
        } else {
            "ok".to_string()
        },
        total_cost_cents: Some(cost_cents),
        savings_cents: None,
        n_participating: Some(n),
        per_vehicle_profit_cents: None,
        completion_time_s: None,
        runtime_s,
        uncovered_count: Some(solution.uncovered.len()),
    };
    if let Ok(savings) = company_savings(solution, scenario.budget) {
        row.savings_cents = Some(round_to_cents(scenario.budget) - cost_cents);
        if let Ok(profit) = per_vehicle_profit(savings, n, share) {
            row.per_vehicle_profit_cents = Some(round_to_cents(profit));
        }
    }
    if let Ok(t) = completion_time(solution) {
        row.completion_time_s = Some(t);
    }
    row
}

pub fn algo_name(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Exact => "exact",
        Algorithm::Greedy => "greedy",
    }
}

struct Task {
    row_index: usize,
    scenario_index: usize,
    fleet_size: usize,
    algorithm: Algorithm,
}

/// Runs every (scenario, fleet size, algorithm) combination. Per-row
/// failures become `status` entries and the run continues.
pub fn run_bench(
    scenarios: &[(String, Scenario)],
    travel_cfg: &TravelConfig,
    cfg: &BenchConfig,
) -> Result<BenchOutcome> {
    // One provider per scenario; matrix/http providers are site-bound.
    let mut providers: Vec<std::result::Result<Arc<dyn Travel>, String>> = Vec::new();
    for (_, scenario) in scenarios {
        providers.push(travel_cfg.build(scenario).map_err(|e| format!("{e:#}")));
    }

    let mut tasks = Vec::new();
    for (scenario_index, (_, scenario)) in scenarios.iter().enumerate() {
        let sizes = if cfg.fleet_sizes.is_empty() {
            vec![scenario.vehicles.len()]
        } else {
            cfg.fleet_sizes.clone()
        };
        for fleet_size in sizes {
            for &algorithm in &cfg.algorithms {
                tasks.push(Task {
                    row_index: tasks.len(),
                    scenario_index,
                    fleet_size,
                    algorithm,
                });
            }
        }
    }

    let mut results: Vec<(usize, BenchRow, Option<Solution>)> = tasks
        .par_iter()
        .map(|task| {
            let (name, scenario) = &scenarios[task.scenario_index];
            let row = match &providers[task.scenario_index] {
                Ok(provider) => run_row(name, scenario, provider.as_ref(), task, cfg),
                Err(e) => {
                    eprintln!("bench: provider for '{name}' failed: {e}");
                    Err(Box::new(error_row(name, task)))
                }
            };
            match row {
                Ok((row, solution)) => (task.row_index, row, Some(solution)),
                Err(row) => (task.row_index, *row, None),
            }
        })
        .collect();
    results.sort_by_key(|(i, _, _)| *i);

    let mut rows = Vec::with_capacity(results.len());
    let mut solutions = Vec::new();
    for (i, row, solution) in results {
        if let Some(sol) = solution {
            solutions.push((i, sol));
        }
        rows.push(row);
    }
    Ok(BenchOutcome { rows, solutions })
}

fn error_row(name: &str, task: &Task) -> BenchRow {
    BenchRow {
        scenario: name.to_string(),
        algorithm: algo_name(task.algorithm).to_string(),
        fleet_size: task.fleet_size,
        status: "error".to_string(),
        total_cost_cents: None,
        savings_cents: None,
        n_participating: None,
        per_vehicle_profit_cents: None,
        completion_time_s: None,
        runtime_s: None,
        uncovered_count: None,
    }
}

fn status_row(name: &str, task: &Task, status: &str) -> BenchRow {
    let mut row = error_row(name, task);
    row.status = status.to_string();
    row
}

fn run_row(
    name: &str,
    scenario: &Scenario,
    provider: &dyn Travel,
    task: &Task,
    cfg: &BenchConfig,
) -> std::result::Result<(BenchRow, Solution), Box<BenchRow>> {
    let fleet = task.fleet_size.min(scenario.vehicles.len());
    let mut sub = scenario.clone();
    sub.vehicles.truncate(fleet);

    let cache = match precompute_segments(&sub, provider) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("bench: segments for '{name}' fleet {fleet}: {e}");
            return Err(Box::new(error_row(name, task)));
        }
    };

    let started = Instant::now();
    let solution = match task.algorithm {
        Algorithm::Greedy => solve_greedy(&sub, &cache, &GreedyConfig { branch_limit: cfg.branch_limit }),
        Algorithm::Exact => {
            // Reloads are only modeled when the fleet cannot carry every
            // parcel at once.
            let fleet_capacity: usize = sub.vehicles.iter().map(|v| v.cap as usize).sum();
            let allow_reload = fleet_capacity < sub.customers.len();
            let deadline = started + Duration::from_secs_f64(cfg.exact_time_limit_s);
            let stop = move || Instant::now() >= deadline;
            match solve_exact(
                &sub,
                &cache,
                &ExactConfig { allow_reload, pruning: true },
                Some(&stop),
            ) {
                Ok(out) => out.solution,
                Err(ExactError::TimeLimit) => {
                    return Err(Box::new(status_row(name, task, "time_limit")));
                }
                Err(e @ (ExactError::BudgetInfeasible { .. } | ExactError::ResourceInfeasible)) => {
                    eprintln!("bench: exact on '{name}' fleet {fleet}: {e}");
                    return Err(Box::new(status_row(name, task, "infeasible")));
                }
                Err(e) => {
                    eprintln!("bench: exact on '{name}' fleet {fleet}: {e}");
                    return Err(Box::new(error_row(name, task)));
                }
            }
        }
    };
    let runtime = started.elapsed().as_secs_f64();

    if cfg.audit {
        let violations = audit_solution(&sub, &cache, &solution);
        if !violations.is_empty() {
            eprintln!("bench: audit failed on '{name}' fleet {fleet}: {violations:?}");
            return Err(Box::new(error_row(name, task)));
        }
    }

    let runtime = cfg.include_runtime.then_some(runtime);
    let row = metrics_row(name, &sub, task.fleet_size, &solution, runtime, cfg.share);
    Ok((row, solution))
}

pub const CSV_HEADER: [&str; 11] = [
    "scenario",
    "algorithm",
    "fleet_size",
    "status",
    "total_cost",
    "savings",
    "n_participating",
    "per_vehicle_profit",
    "completion_time_s",
    "runtime_s",
    "uncovered_count",
];

/// Writes rows in the documented column order. Money is in dollars with two
/// decimals; unavailable cells are left empty.
pub fn write_csv(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let money = |c: Option<i64>| c.map(lad_core::metrics::format_cents).unwrap_or_default();
        w.write_record([
            r.scenario.clone(),
            r.algorithm.clone(),
            r.fleet_size.to_string(),
            r.status.clone(),
            money(r.total_cost_cents),
            money(r.savings_cents),
            r.n_participating.map(|n| n.to_string()).unwrap_or_default(),
            money(r.per_vehicle_profit_cents),
            r.completion_time_s.map(|t| format!("{t}")).unwrap_or_default(),
            r.runtime_s.map(|t| format!("{t:.3}")).unwrap_or_default(),
            r.uncovered_count.map(|n| n.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use lad_core::testkit;

    fn named(seed: u64) -> (String, Scenario) {
        (format!("s{seed}"), testkit::rand_instance(seed, &Default::default()))
    }

    #[test]
    fn sweep_produces_a_row_per_combination() {
        let scenarios = vec![named(1), named(2)];
        let cfg = BenchConfig {
            fleet_sizes: vec![1, 2, 3],
            algorithms: vec![Algorithm::Greedy, Algorithm::Exact],
            audit: true,
            ..Default::default()
        };
        let out = run_bench(&scenarios, &TravelConfig::default(), &cfg).unwrap();
        assert_eq!(out.rows.len(), 2 * 3 * 2);
        // Input ordering: scenario-major, then fleet size, then algorithm.
        assert_eq!(out.rows[0].scenario, "s1");
        assert_eq!(out.rows[0].fleet_size, 1);
        assert_eq!(out.rows[0].algorithm, "greedy");
        assert_eq!(out.rows[1].algorithm, "exact");
        assert_eq!(out.rows[11].scenario, "s2");
        for row in &out.rows {
            assert!(row.status == "ok" || row.status == "partial", "{row:?}");
        }
    }

    #[test]
    fn savings_plus_cost_equals_budget_in_cents() {
        let scenarios = vec![named(5)];
        let cfg = BenchConfig { audit: true, ..Default::default() };
        let out = run_bench(&scenarios, &TravelConfig::default(), &cfg).unwrap();
        for row in &out.rows {
            if let (Some(cost), Some(savings)) = (row.total_cost_cents, row.savings_cents) {
                assert_eq!(cost + savings, round_to_cents(scenarios[0].1.budget));
            }
        }
    }

    #[test]
    fn greedy_rows_are_deterministic_without_runtime() {
        let scenarios = vec![named(9)];
        let cfg = BenchConfig {
            fleet_sizes: vec![2, 3],
            include_runtime: false,
            ..Default::default()
        };
        let a = run_bench(&scenarios, &TravelConfig::default(), &cfg).unwrap();
        let b = run_bench(&scenarios, &TravelConfig::default(), &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let pa = dir.path().join("a.csv");
        let pb = dir.path().join("b.csv");
        write_csv(&pa, &a.rows).unwrap();
        write_csv(&pb, &b.rows).unwrap();
        assert_eq!(std::fs::read(&pa).unwrap(), std::fs::read(&pb).unwrap());
    }
}
