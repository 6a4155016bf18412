//! `lad`: scenario generation, grouping, solving, LP export, and the bench
//! harness.
//!
//! Exit codes: 0 success, 1 argument or validation problems, 2 solver
//! infeasibility, 3 IO or provider failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use lad_cli::bench::{self, BenchConfig};
use lad_cli::generator::{self, GenConfig};
use lad_cli::io;
use lad_cli::lp;
use lad_cli::travel::{ProviderKind, TravelConfig};
use lad_cli::{exit_code_for, SolverFailure, ValidationError};

use lad_core::exact::{solve_exact, ExactConfig, ExactError};
use lad_core::greedy::{solve_greedy_with, CostTree, GreedyConfig};
use lad_core::grouping::{build_groups, GroupingConfig};
use lad_core::model::{Algorithm, DroneParams, Scenario};
use lad_core::segments::precompute_segments;

#[derive(Parser)]
#[command(
    name = "lad",
    version,
    about = "Fleet selection and scheduling for drone-assisted last-mile delivery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args)]
struct GlobalArgs {
    /// RNG seed for generation and grouping.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Travel provider for distances and times.
    #[arg(long, global = true, value_enum)]
    travel: Option<ProviderKind>,
    /// Road detour factor for the euclidean provider.
    #[arg(long, global = true)]
    circuity: Option<f64>,
    /// Vehicle speed for the euclidean provider, km/h.
    #[arg(long, global = true)]
    speed_kmh: Option<f64>,
    /// Matrix CSV for the matrix provider.
    #[arg(long, global = true)]
    matrix_file: Option<PathBuf>,
    /// Routing-table endpoint for the http provider.
    #[arg(long, global = true)]
    endpoint: Option<String>,
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Exact,
    Greedy,
}

impl std::fmt::Display for AlgoArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlgoArg::Exact => write!(f, "exact"),
            AlgoArg::Greedy => write!(f, "greedy"),
        }
    }
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Algorithm {
        match a {
            AlgoArg::Exact => Algorithm::Exact,
            AlgoArg::Greedy => Algorithm::Greedy,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random scenario (customers and vehicle pool; no groups).
    Gen {
        #[arg(long, default_value_t = 500)]
        customers: usize,
        #[arg(long, default_value_t = 50)]
        vehicles: usize,
        /// Side of the square service area, km.
        #[arg(long, default_value_t = 10.0)]
        box_km: f64,
        /// Relative weights for type1,type2,type3 vehicles.
        #[arg(long, default_value = "1,1,1")]
        type_mix: String,
        /// Budget in USD; defaults to $5.99 per customer.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long, default_value_t = 30.0)]
        drone_speed_kmh: f64,
        #[arg(long, default_value_t = 3.0)]
        drone_range_km: f64,
        #[arg(long, default_value_t = 180.0)]
        drone_service_s: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Partition a scenario's customers into drone-served groups.
    Group {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Largest member count per group.
        #[arg(long, default_value_t = 7)]
        max_size: usize,
        /// Group count; defaults to the minimum that fits.
        #[arg(long)]
        target: Option<usize>,
        /// Drones flying one group's sorties, for the makespan figure.
        #[arg(long, default_value_t = 3)]
        drones: u32,
        /// Overrides the scenario's drone range, km.
        #[arg(long)]
        range_km: Option<f64>,
    },
    /// Solve a scenario and write the solution document.
    Solve {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        algo: AlgoArg,
        #[arg(short, long)]
        output: PathBuf,
        /// Let the exact solver model reload trips.
        #[arg(long)]
        allow_reload: bool,
        /// Exact-solver time limit, seconds.
        #[arg(long, default_value_t = bench::DEFAULT_EXACT_TIME_LIMIT_S)]
        time_limit: f64,
        /// Greedy children kept per tree node; 'unlimited' for the full tree.
        #[arg(long, default_value = "4")]
        branch_limit: String,
        /// Write greedy tree edge lists (JSON lines) for debugging.
        #[arg(long)]
        dump_trees: Option<PathBuf>,
        /// Snapshot the provider's site matrix (lets matrix runs reproduce
        /// http runs offline).
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
    },
    /// Export the assignment model in CPLEX-LP format, or check an external
    /// solver's solution against it.
    ExportLp {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// `variable value` listing produced by an external solver.
        #[arg(long)]
        check_solution: Option<PathBuf>,
    },
    /// Fleet-size sweeps over scenarios into a CSV report.
    Bench {
        #[arg(long, required = true, num_args = 1..)]
        scenarios: Vec<PathBuf>,
        /// Comma-separated fleet sizes; empty means the full pool.
        #[arg(long, value_delimiter = ',')]
        fleet_sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [AlgoArg::Greedy])]
        algorithms: Vec<AlgoArg>,
        #[arg(short, long)]
        output: PathBuf,
        /// Leave the runtime column empty for byte-reproducible output.
        #[arg(long)]
        no_runtime: bool,
        /// Re-check every solution with the independent auditor.
        #[arg(long)]
        audit: bool,
        /// Exact-solver time limit per instance, seconds.
        #[arg(long, default_value_t = bench::DEFAULT_EXACT_TIME_LIMIT_S)]
        time_limit: f64,
        #[arg(long, default_value = "4")]
        branch_limit: String,
        /// Vehicle share of the savings.
        #[arg(long, default_value_t = bench::DEFAULT_PROFIT_SHARE)]
        share: f64,
    },
    /// Metric rows for previously solved solution documents.
    Report {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, required = true, num_args = 1..)]
        solutions: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Optional config file: a `travel` section in the scenario document style.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    travel: Option<TravelConfig>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(exit_code_for(&e));
    }
}

fn resolve_travel(global: &GlobalArgs) -> Result<TravelConfig> {
    let mut cfg = match &global.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let file: ConfigFile = serde_json::from_str(&text)
                .map_err(|e| ValidationError(format!("{}: {e}", path.display())))?;
            file.travel.unwrap_or_default()
        }
        None => TravelConfig::default(),
    };
    if let Some(p) = global.travel {
        cfg.provider = p;
    }
    if let Some(c) = global.circuity {
        cfg.circuity = c;
    }
    if let Some(s) = global.speed_kmh {
        cfg.vehicle_speed_kmh = s;
    }
    if let Some(m) = &global.matrix_file {
        cfg.matrix_source = Some(m.clone());
    }
    if let Some(e) = &global.endpoint {
        cfg.endpoint = Some(e.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_branch_limit(s: &str) -> Result<Option<usize>> {
    if s.eq_ignore_ascii_case("unlimited") || s.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    let n: usize = s
        .parse()
        .map_err(|_| ValidationError(format!("branch limit must be a number or 'unlimited', got '{s}'")))?;
    if n == 0 {
        bail!(ValidationError("branch limit of 0 would drop every child; use 'unlimited'".into()));
    }
    Ok(Some(n))
}

fn parse_type_mix(s: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        bail!(ValidationError(format!("type mix needs three comma-separated weights, got '{s}'")));
    }
    let mut mix = [0.0; 3];
    for (i, p) in parts.iter().enumerate() {
        mix[i] = p
            .trim()
            .parse()
            .map_err(|_| ValidationError(format!("bad type mix weight '{p}'")))?;
    }
    Ok(mix)
}

fn scenario_with_groups(path: &Path) -> Result<Scenario> {
    let scenario = io::load_scenario(path)?;
    if scenario.groups.is_empty() {
        bail!(ValidationError(format!(
            "{}: scenario has no groups; run `lad group` first",
            path.display()
        )));
    }
    Ok(scenario)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            customers,
            vehicles,
            box_km,
            type_mix,
            budget,
            drone_speed_kmh,
            drone_range_km,
            drone_service_s,
            output,
        } => {
            let cfg = GenConfig {
                n_customers: customers,
                n_vehicles: vehicles,
                box_km,
                type_mix: parse_type_mix(&type_mix)?,
                seed: cli.global.seed,
                budget,
                drone: DroneParams {
                    speed_kmh: drone_speed_kmh,
                    range_km: drone_range_km,
                    service_time_s: drone_service_s,
                },
            };
            let scenario = generator::generate_scenario(&cfg)?;
            io::save_scenario(&output, &scenario)?;
            println!(
                "wrote {} ({} customers, {} vehicles, budget {})",
                output.display(),
                scenario.customers.len(),
                scenario.vehicles.len(),
                scenario.budget
            );
            Ok(())
        }

        Command::Group { input, output, max_size, target, drones, range_km } => {
            let mut scenario = io::load_scenario(&input)?;
            let cfg = GroupingConfig {
                drone_range_km: range_km.unwrap_or(scenario.drone.range_km),
                max_group_size: max_size,
                target_groups: target,
                seed: cli.global.seed,
                n_drones: drones,
                drone_speed_kmh: scenario.drone.speed_kmh,
                service_time_s: scenario.drone.service_time_s,
            };
            let groups = build_groups(&scenario.customers, &cfg)
                .map_err(|e| ValidationError(format!("grouping failed: {e}")))?;
            let n = groups.len();
            scenario.groups = groups;
            io::save_scenario(&output, &scenario)?;
            println!("wrote {} ({} groups)", output.display(), n);
            Ok(())
        }

        Command::Solve {
            input,
            algo,
            output,
            allow_reload,
            time_limit,
            branch_limit,
            dump_trees,
            dump_matrix,
        } => {
            let scenario = scenario_with_groups(&input)?;
            let travel_cfg = resolve_travel(&cli.global)?;
            let provider = travel_cfg.build(&scenario)?;
            if let Some(path) = &dump_matrix {
                io::write_matrix_csv(path, &io::scenario_sites(&scenario), provider.as_ref())?;
            }
            let cache = precompute_segments(&scenario, provider.as_ref())
                .map_err(|e| lad_cli::ProviderFailure(format!("{e}")))?;
            let branch = parse_branch_limit(&branch_limit)?;

            let started = Instant::now();
            let (solution, proven_optimal) = match algo {
                AlgoArg::Greedy => {
                    let mut dump = dump_trees.as_ref().map(|_| Vec::new());
                    let sol = solve_greedy_with(
                        &scenario,
                        &cache,
                        &GreedyConfig { branch_limit: branch },
                        |round, v, tree| {
                            if let Some(records) = dump.as_mut() {
                                records.push(tree_dump_record(&scenario, round, v, tree));
                            }
                        },
                    );
                    if let (Some(path), Some(records)) = (&dump_trees, dump) {
                        let mut text = String::new();
                        for r in records {
                            text.push_str(&serde_json::to_string(&r)?);
                            text.push('\n');
                        }
                        fs::write(path, text)
                            .with_context(|| format!("writing {}", path.display()))?;
                    }
                    (sol, None)
                }
                AlgoArg::Exact => {
                    let deadline = started + Duration::from_secs_f64(time_limit);
                    let stop = move || Instant::now() >= deadline;
                    let out = solve_exact(
                        &scenario,
                        &cache,
                        &ExactConfig { allow_reload, pruning: true },
                        Some(&stop),
                    )
                    .map_err(|e| match e {
                        ExactError::TooManyGroups { .. } => {
                            anyhow::Error::from(ValidationError(format!("{e}")))
                        }
                        other => anyhow::Error::from(SolverFailure(format!("{other}"))),
                    })?;
                    (out.solution, Some(out.proven_optimal))
                }
            };
            let runtime = started.elapsed().as_secs_f64();

            let scenario_text = fs::read_to_string(&input)?;
            let doc = io::SolutionDocument {
                provenance: io::Provenance {
                    algorithm: bench::algo_name(solution.algorithm).to_string(),
                    seed: Some(cli.global.seed),
                    config_hash: io::config_hash(&[
                        &scenario_text,
                        &travel_cfg.summary(),
                        bench::algo_name(solution.algorithm),
                        &format!("allow_reload={allow_reload} branch_limit={branch_limit}"),
                    ]),
                    travel: travel_cfg.summary(),
                    runtime_s: Some(runtime),
                    time_limit_s: matches!(algo, AlgoArg::Exact).then_some(time_limit),
                    proven_optimal,
                },
                solution,
            };
            io::save_solution(&output, &doc)?;
            println!(
                "wrote {} (cost {}, {} uncovered)",
                output.display(),
                doc.solution.total_cost_usd,
                doc.solution.uncovered.len()
            );
            Ok(())
        }

        Command::ExportLp { input, output, check_solution } => {
            let scenario = scenario_with_groups(&input)?;
            let travel_cfg = resolve_travel(&cli.global)?;
            let provider = travel_cfg.build(&scenario)?;
            let cache = precompute_segments(&scenario, provider.as_ref())
                .map_err(|e| lad_cli::ProviderFailure(format!("{e}")))?;
            if let Some(path) = &output {
                lp::export_lp(&scenario, &cache, path)?;
                println!("wrote {}", path.display());
            }
            if let Some(path) = &check_solution {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let vars = lp::parse_lp_solution(&text)?;
                let report = lp::check_lp_solution(&scenario, &cache, &vars);
                if report.feasible() {
                    println!("solution is feasible; assignment cost {}", report.total_cost);
                    if let Some(obj) = report.stated_objective {
                        println!("stated objective {obj}");
                    }
                } else {
                    for v in &report.violations {
                        eprintln!("violation: {v}");
                    }
                    bail!(SolverFailure(format!(
                        "external solution violates {} constraint(s)",
                        report.violations.len()
                    )));
                }
            }
            if output.is_none() && check_solution.is_none() {
                bail!(ValidationError("export-lp needs --output and/or --check-solution".into()));
            }
            Ok(())
        }

        Command::Bench {
            scenarios,
            fleet_sizes,
            algorithms,
            output,
            no_runtime,
            audit,
            time_limit,
            branch_limit,
            share,
        } => {
            let mut named = Vec::new();
            for path in &scenarios {
                let scenario = scenario_with_groups(path)?;
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                named.push((name, scenario));
            }
            let travel_cfg = resolve_travel(&cli.global)?;
            let cfg = BenchConfig {
                fleet_sizes,
                algorithms: algorithms.into_iter().map(Algorithm::from).collect(),
                exact_time_limit_s: time_limit,
                branch_limit: parse_branch_limit(&branch_limit)?,
                include_runtime: !no_runtime,
                audit,
                share,
            };
            let outcome = bench::run_bench(&named, &travel_cfg, &cfg)?;
            bench::write_csv(&output, &outcome.rows)?;
            println!("wrote {} ({} rows)", output.display(), outcome.rows.len());
            Ok(())
        }

        Command::Report { scenario, solutions, output } => {
            let scenario_name = scenario
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| scenario.display().to_string());
            let s = scenario_with_groups(&scenario)?;
            let mut rows = Vec::new();
            for path in &solutions {
                let doc = io::load_solution(path)?;
                rows.push(bench::metrics_row(
                    &scenario_name,
                    &s,
                    s.vehicles.len(),
                    &doc.solution,
                    doc.provenance.runtime_s,
                    bench::DEFAULT_PROFIT_SHARE,
                ));
            }
            bench::write_csv(&output, &rows)?;
            println!("wrote {} ({} rows)", output.display(), rows.len());
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct TreeDumpEdge {
    parent: Option<String>,
    child: String,
    weight: f64,
    path_score: f64,
    remaining_parcels: u32,
}

#[derive(Serialize)]
struct TreeDumpRecord {
    round: usize,
    vehicle: String,
    edges: Vec<TreeDumpEdge>,
}

fn tree_dump_record(scenario: &Scenario, round: usize, v: usize, tree: &CostTree) -> TreeDumpRecord {
    let mut edges = Vec::new();
    for node in &tree.nodes {
        if let Some(g) = node.group {
            let parent = node
                .parent
                .and_then(|p| tree.nodes[p].group)
                .map(|pg| scenario.groups[pg].id.clone());
            edges.push(TreeDumpEdge {
                parent,
                child: scenario.groups[g].id.clone(),
                weight: node.edge_weight,
                path_score: node.path_score,
                remaining_parcels: node.remaining_parcels,
            });
        }
    }
    TreeDumpRecord { round, vehicle: scenario.vehicles[v].id.clone(), edges }
}
