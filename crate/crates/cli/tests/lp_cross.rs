//! Cross-solver agreement: the exported LP solved by an independent MILP
//! solver (HiGHS, via scipy) reaches the same optimum as our search.

use std::fs;
use std::process::Command;

use lad_cli::lp::{check_lp_solution, export_lp, parse_lp_solution};
use lad_core::exact::{solve_exact, ExactConfig};
use lad_core::geo::EuclideanTravel;
use lad_core::segments::precompute_segments;
use lad_core::testkit::{self, InstanceParams};

#[test]
fn external_milp_solver_agrees_with_solve_exact() {
    let script = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/support/solve_lp.py");
    let dir = tempfile::tempdir().unwrap();

    for seed in [3u64, 17, 28] {
        let scenario = testkit::rand_instance(
            seed,
            &InstanceParams {
                n_vehicles: 2,
                n_groups: 3,
                max_group_size: 2,
                box_km: 8.0,
                generous: true,
                tight_caps: false,
            },
        );
        let travel = EuclideanTravel::new(1.0, 40.0).unwrap();
        let cache = precompute_segments(&scenario, &travel).unwrap();

        let model = dir.path().join(format!("model_{seed}.lp"));
        export_lp(&scenario, &cache, &model).unwrap();
        let vars_path = dir.path().join(format!("vars_{seed}.txt"));
        let output = Command::new("python3")
            .arg(script)
            .arg(&model)
            .arg(&vars_path)
            .output()
            .expect("running python3");
        assert!(
            output.status.success(),
            "seed {seed}: {}",
            String::from_utf8_lossy(&output.stderr)
        );

        let vars = parse_lp_solution(&fs::read_to_string(&vars_path).unwrap()).unwrap();
        let report = check_lp_solution(&scenario, &cache, &vars);
        assert!(report.feasible(), "seed {seed}: {:?}", report.violations);

        let ours = solve_exact(&scenario, &cache, &ExactConfig::default(), None).unwrap();
        let want = ours.solution.total_cost_usd;
        let stated = report.stated_objective.expect("objective line");
        assert!(
            (stated - want).abs() <= 1e-6 * want.max(1.0),
            "seed {seed}: external {stated} vs exact {want}"
        );
        assert!(
            (report.total_cost - want).abs() <= 1e-6 * want.max(1.0),
            "seed {seed}: re-evaluated {} vs exact {want}",
            report.total_cost
        );
    }
}
