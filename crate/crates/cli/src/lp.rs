//! CPLEX-LP export of the single-trip assignment model, and a checker for
//! externally produced solutions.
//!
//! Binary assignment variables `x_v_g` carry the model; each vehicle gets a
//! two-index flow linearization (arc variables over the depot and the
//! waiting locations, with MTZ order variables for subtour elimination) so
//! route distance is linear. Constraint rows are tagged with the source
//! numbering, paper-(1) through paper-(6), in comments.
//!
//! The checker reads a `variable value` listing, reconstructs the
//! assignment from the `x` variables, and re-evaluates it with the same
//! feasibility predicate the exact solver uses (distance-minimal
//! sequencing). With a euclidean provider, tour time is proportional to
//! tour distance, so the two models agree on feasibility and optima.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use lad_core::exact::vehicle_route_cost;
use lad_core::model::Scenario;
use lad_core::segments::SegmentCache;

use crate::ValidationError;

const LINE_WRAP: usize = 200;

/// One linear expression being assembled: `coef var` terms.
struct Expr {
    terms: Vec<(f64, String)>,
}

impl Expr {
    fn new() -> Self {
        Expr { terms: Vec::new() }
    }

    fn add(&mut self, coef: f64, var: impl Into<String>) -> &mut Self {
        if coef != 0.0 {
            self.terms.push((coef, var.into()));
        }
        self
    }

    fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0 zero_pad".to_string();
        }
        let mut out = String::new();
        let mut line_len = 0usize;
        for (i, (coef, var)) in self.terms.iter().enumerate() {
            let piece = if i == 0 {
                if *coef < 0.0 {
                    format!("- {} {var}", fmt_num(-coef))
                } else {
                    format!("{} {var}", fmt_num(*coef))
                }
            } else if *coef < 0.0 {
                format!(" - {} {var}", fmt_num(-coef))
            } else {
                format!(" + {} {var}", fmt_num(*coef))
            };
            if line_len + piece.len() > LINE_WRAP {
                out.push_str("\n   ");
                line_len = 3;
            }
            line_len += piece.len();
            out.push_str(&piece);
        }
        out
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn x_var(v: usize, g: usize) -> String {
    format!("x_v{v}_g{g}")
}

fn y_var(v: usize) -> String {
    format!("y_v{v}")
}

fn e_var(v: usize, i: usize, j: usize) -> String {
    format!("e_v{v}_{i}_{j}")
}

fn u_var(v: usize, g: usize) -> String {
    format!("u_v{v}_{g}")
}

/// Renders the full model. Node 0 is the depot; group `g` (1-based in
/// variable names) is the scenario's group index `g - 1`.
pub fn render_lp(scenario: &Scenario, cache: &SegmentCache) -> String {
    let n_v = scenario.vehicles.len();
    let n_g = scenario.groups.len();
    // Arc metrics: node 0 = depot, node k = group k-1.
    let arc_d = |i: usize, j: usize| -> f64 {
        if i == 0 {
            cache.d_fw(j - 1)
        } else if j == 0 {
            cache.d_fw(i - 1)
        } else {
            cache.d_ww(i - 1, j - 1)
        }
    };
    let arc_t = |i: usize, j: usize| -> f64 {
        if i == 0 {
            cache.t_fw(j - 1)
        } else if j == 0 {
            cache.t_fw(i - 1)
        } else {
            cache.t_ww(i - 1, j - 1)
        }
    };

    let mut out = String::new();
    out.push_str("\\ Vehicle-to-group assignment model with per-vehicle routing\n");
    for (v, vehicle) in scenario.vehicles.iter().enumerate() {
        let _ = writeln!(out, "\\ v{v} = '{}'", vehicle.id);
    }
    for (g, group) in scenario.groups.iter().enumerate() {
        let _ = writeln!(out, "\\ g{} = '{}' ({} members)", g + 1, group.id, group.size());
    }

    out.push_str("Minimize\n obj: ");
    let mut obj = Expr::new();
    for (v, vehicle) in scenario.vehicles.iter().enumerate() {
        obj.add(vehicle.c_mob, format!("dt_v{v}"));
        obj.add(vehicle.c_stop, format!("tw_v{v}"));
    }
    out.push_str(&obj.render());
    out.push_str("\nSubject To\n");

    // paper-(1): every group covered by exactly one vehicle.
    for g in 1..=n_g {
        let mut expr = Expr::new();
        for v in 0..n_v {
            expr.add(1.0, x_var(v, g));
        }
        let _ = writeln!(out, " \\ paper-(1) group g{g} covered exactly once");
        let _ = writeln!(out, " cover_g{g}: {} = 1", expr.render());
    }

    // paper-(2): total cost within budget.
    let mut budget = Expr::new();
    for (v, vehicle) in scenario.vehicles.iter().enumerate() {
        budget.add(vehicle.c_mob, format!("dt_v{v}"));
        budget.add(vehicle.c_stop, format!("tw_v{v}"));
    }
    let _ = writeln!(out, " \\ paper-(2) budget");
    let _ = writeln!(out, " budget: {} <= {}", budget.render(), fmt_num(scenario.budget));

    for (v, vehicle) in scenario.vehicles.iter().enumerate() {
        // paper-(3): parcels within capacity.
        let mut cap = Expr::new();
        for g in 1..=n_g {
            cap.add(scenario.group_size(g - 1) as f64, x_var(v, g));
        }
        let _ = writeln!(out, " \\ paper-(3) capacity of v{v}");
        let _ = writeln!(out, " cap_v{v}: {} <= {}", cap.render(), vehicle.cap);

        // paper-(4): fuel stock.
        let mut fuel = Expr::new();
        fuel.add(vehicle.f_mob, format!("dt_v{v}"));
        fuel.add(vehicle.f_stop, format!("tw_v{v}"));
        let _ = writeln!(out, " \\ paper-(4) fuel stock of v{v}");
        let _ = writeln!(out, " fuel_v{v}: {} <= {}", fuel.render(), fmt_num(vehicle.f_avail));

        // paper-(5): total route time within availability.
        let mut time = Expr::new();
        for i in 0..=n_g {
            for j in 0..=n_g {
                if i != j {
                    time.add(arc_t(i, j), e_var(v, i, j));
                }
            }
        }
        time.add(cache.t_vf(v) + cache.t_vf(v) + vehicle.t_load, y_var(v));
        time.add(1.0, format!("tw_v{v}"));
        let _ = writeln!(out, " \\ paper-(5) availability of v{v}");
        let _ = writeln!(out, " time_v{v}: {} <= {}", time.render(), fmt_num(vehicle.t_avail));

        // paper-(6): waiting time definition.
        let mut wait = Expr::new();
        wait.add(1.0, format!("tw_v{v}"));
        for g in 1..=n_g {
            wait.add(-scenario.groups[g - 1].t_delivery, x_var(v, g));
        }
        let _ = writeln!(out, " \\ paper-(6) waiting time of v{v}");
        let _ = writeln!(out, " wait_v{v}: {} = 0", wait.render());

        // Route distance definition over the chosen arcs plus home legs.
        let mut dist = Expr::new();
        dist.add(1.0, format!("dt_v{v}"));
        for i in 0..=n_g {
            for j in 0..=n_g {
                if i != j {
                    dist.add(-arc_d(i, j), e_var(v, i, j));
                }
            }
        }
        dist.add(-(cache.d_vf(v) + cache.d_vf(v)), y_var(v));
        let _ = writeln!(out, " dist_v{v}: {} = 0", dist.render());

        // Flow degrees tie arcs to assignments.
        for g in 1..=n_g {
            let mut degin = Expr::new();
            for i in 0..=n_g {
                if i != g {
                    degin.add(1.0, e_var(v, i, g));
                }
            }
            degin.add(-1.0, x_var(v, g));
            let _ = writeln!(out, " degin_v{v}_g{g}: {} = 0", degin.render());

            let mut degout = Expr::new();
            for j in 0..=n_g {
                if j != g {
                    degout.add(1.0, e_var(v, g, j));
                }
            }
            degout.add(-1.0, x_var(v, g));
            let _ = writeln!(out, " degout_v{v}_g{g}: {} = 0", degout.render());
        }
        let mut depout = Expr::new();
        for g in 1..=n_g {
            depout.add(1.0, e_var(v, 0, g));
        }
        depout.add(-1.0, y_var(v));
        let _ = writeln!(out, " depout_v{v}: {} = 0", depout.render());
        let mut depin = Expr::new();
        for g in 1..=n_g {
            depin.add(1.0, e_var(v, g, 0));
        }
        depin.add(-1.0, y_var(v));
        let _ = writeln!(out, " depin_v{v}: {} = 0", depin.render());

        // A vehicle is used iff it has at least one group.
        for g in 1..=n_g {
            let _ = writeln!(out, " use_v{v}_g{g}: 1 {} - 1 {} >= 0", y_var(v), x_var(v, g));
        }
        let mut used = Expr::new();
        used.add(1.0, y_var(v));
        for g in 1..=n_g {
            used.add(-1.0, x_var(v, g));
        }
        let _ = writeln!(out, " used_v{v}: {} <= 0", used.render());

        // MTZ subtour elimination among the group nodes.
        for i in 1..=n_g {
            for j in 1..=n_g {
                if i != j {
                    let _ = writeln!(
                        out,
                        " mtz_v{v}_{i}_{j}: 1 {} - 1 {} + {} {} <= {}",
                        u_var(v, i),
                        u_var(v, j),
                        n_g,
                        e_var(v, i, j),
                        n_g - 1
                    );
                }
            }
        }
    }

    out.push_str("Bounds\n");
    for v in 0..n_v {
        for g in 1..=n_g {
            let _ = writeln!(out, " 1 <= {} <= {}", u_var(v, g), n_g);
        }
    }
    out.push_str("Binary\n");
    for v in 0..n_v {
        for g in 1..=n_g {
            let _ = writeln!(out, " {}", x_var(v, g));
        }
        let _ = writeln!(out, " {}", y_var(v));
        for i in 0..=n_g {
            for j in 0..=n_g {
                if i != j {
                    let _ = writeln!(out, " {}", e_var(v, i, j));
                }
            }
        }
    }
    out.push_str("End\n");
    out
}

/// Writes the model to `path`.
pub fn export_lp(scenario: &Scenario, cache: &SegmentCache, path: &Path) -> Result<()> {
    let text = render_lp(scenario, cache);
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Parses an external solver's variable listing: one `name value` pair per
/// line, `#` comments allowed. An optional `objective <value>` line carries
/// the solver's reported optimum.
pub fn parse_lp_solution(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut vars = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let name = parts.next().unwrap().trim_end_matches('=');
        let value = parts
            .find(|p| *p != "=")
            .ok_or_else(|| ValidationError(format!("solution line {}: missing value", lineno + 1)))?;
        let value: f64 = value
            .parse()
            .map_err(|_| ValidationError(format!("solution line {}: bad value '{value}'", lineno + 1)))?;
        vars.insert(name.to_string(), value);
    }
    Ok(vars)
}

#[derive(Debug)]
pub struct CheckReport {
    pub violations: Vec<String>,
    /// Cost of the assignment under our feasibility predicate (distance
    /// minimal sequencing per vehicle).
    pub total_cost: f64,
    /// Objective value the external solver reported, when present.
    pub stated_objective: Option<f64>,
}

impl CheckReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Validates an external solution's assignment against the same constraints
/// the exact solver enforces.
pub fn check_lp_solution(
    scenario: &Scenario,
    cache: &SegmentCache,
    vars: &BTreeMap<String, f64>,
) -> CheckReport {
    let n_v = scenario.vehicles.len();
    let n_g = scenario.groups.len();
    let mut violations = Vec::new();

    let mut assignment: Vec<Vec<usize>> = vec![Vec::new(); n_v];
    for g in 1..=n_g {
        let mut owners = Vec::new();
        for (v, slot) in assignment.iter_mut().enumerate() {
            let val = vars.get(&x_var(v, g)).copied().unwrap_or(0.0);
            if val > 0.5 {
                owners.push(v);
                slot.push(g - 1);
            }
        }
        match owners.len() {
            1 => {}
            0 => violations.push(format!(
                "group '{}' is not covered by any vehicle (paper-(1))",
                scenario.groups[g - 1].id
            )),
            k => violations.push(format!(
                "group '{}' is covered by {k} vehicles (paper-(1))",
                scenario.groups[g - 1].id
            )),
        }
    }

    let mut total_cost = 0.0;
    for (v, groups) in assignment.iter().enumerate() {
        if groups.is_empty() {
            continue;
        }
        match vehicle_route_cost(scenario, cache, v, groups) {
            Ok(eval) => total_cost += eval.cost,
            Err(kind) => violations.push(format!(
                "vehicle '{}' cannot serve its groups: {kind} constraint",
                scenario.vehicles[v].id
            )),
        }
    }
    if total_cost > scenario.budget + 1e-9 {
        violations.push(format!(
            "assignment costs {total_cost}, over the {} budget (paper-(2))",
            scenario.budget
        ));
    }

    let stated_objective = vars.get("objective").copied();
    CheckReport { violations, total_cost, stated_objective }
}
