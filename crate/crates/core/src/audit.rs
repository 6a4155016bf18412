//! Independent solution validator.
//!
//! Re-derives every constraint from the scenario, cache, and solution alone
//! -- coverage, per-trip capacity, fuel, time, the recorded totals, and the
//! budget -- without calling into any solver or the `seqsolve` evaluators.
//! Both solvers' outputs are required to pass this check with zero
//! violations; tests and the bench harness run it on everything they
//! produce.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{Scenario, Solution};
use crate::segments::SegmentCache;

/// Slack for comparing recomputed floating-point totals.
const EPS: f64 = 1e-9;

/// Returns one description per violated constraint; an empty list means the
/// solution checks out.
pub fn audit_solution(scenario: &Scenario, cache: &SegmentCache, sol: &Solution) -> Vec<String> {
    let mut out = Vec::new();

    // Group coverage: every group in exactly one trip slot or uncovered.
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for trips in sol.routes.values() {
        for trip in trips {
            for gid in trip {
                *seen.entry(gid.as_str()).or_insert(0) += 1;
            }
        }
    }
    for g in &scenario.groups {
        let visits = seen.get(g.id.as_str()).copied().unwrap_or(0);
        let uncovered = sol.uncovered.contains(&g.id);
        match (visits, uncovered) {
            (0, true) | (1, false) => {}
            (0, false) => out.push(format!("group '{}' neither visited nor reported uncovered", g.id)),
            (n, true) => out.push(format!("group '{}' visited {n} times yet reported uncovered", g.id)),
            (n, false) => out.push(format!("group '{}' visited {n} times; constraint (1) wants exactly one", g.id)),
        }
    }
    for gid in seen.keys() {
        if scenario.group_index(gid).is_none() {
            out.push(format!("route visits unknown group '{gid}'"));
        }
    }
    let known: BTreeSet<&str> = scenario.groups.iter().map(|g| g.id.as_str()).collect();
    for gid in &sol.uncovered {
        if !known.contains(gid.as_str()) {
            out.push(format!("uncovered set names unknown group '{gid}'"));
        }
    }

    if sol.routes.keys().collect::<Vec<_>>() != sol.per_vehicle.keys().collect::<Vec<_>>() {
        out.push("routes and per_vehicle entries disagree on participating vehicles".into());
    }

    let mut recomputed_total = 0.0;
    for (vid, trips) in &sol.routes {
        let Some(v) = scenario.vehicle_index(vid) else {
            out.push(format!("route names unknown vehicle '{vid}'"));
            continue;
        };
        let vehicle = &scenario.vehicles[v];
        if trips.is_empty() {
            out.push(format!("vehicle '{vid}' listed with no trips"));
            continue;
        }

        let mut group_trips: Vec<Vec<usize>> = Vec::new();
        let mut bad_ids = false;
        for trip in trips {
            if trip.is_empty() {
                out.push(format!("vehicle '{vid}' has an empty trip"));
                bad_ids = true;
                continue;
            }
            let mut idxs = Vec::with_capacity(trip.len());
            for gid in trip {
                match scenario.group_index(gid) {
                    Some(g) => idxs.push(g),
                    None => bad_ids = true,
                }
            }
            group_trips.push(idxs);
        }
        if bad_ids {
            continue;
        }

        // Constraint (3): parcels per trip within capacity.
        for (k, trip) in group_trips.iter().enumerate() {
            let parcels: usize = trip.iter().map(|&g| scenario.group_size(g)).sum();
            if parcels > vehicle.cap as usize {
                out.push(format!(
                    "vehicle '{vid}' trip {k} carries {parcels} parcels over capacity {}",
                    vehicle.cap
                ));
            }
        }

        // Recompute the route figures leg by leg.
        let mut d_tot = cache.d_vf(v);
        let mut t_travel = cache.t_vf(v);
        for trip in &group_trips {
            let mut trip_d = cache.d_fw(trip[0]);
            let mut trip_t = cache.t_fw(trip[0]);
            for pair in trip.windows(2) {
                trip_d += cache.d_ww(pair[0], pair[1]);
                trip_t += cache.t_ww(pair[0], pair[1]);
            }
            trip_d += cache.d_fw(trip[trip.len() - 1]);
            trip_t += cache.t_fw(trip[trip.len() - 1]);
            d_tot += trip_d;
            t_travel += vehicle.t_load + trip_t;
        }
        d_tot += cache.d_vf(v);
        t_travel += cache.t_vf(v);

        let mut t_wait = 0.0;
        let mut visited: BTreeSet<usize> = BTreeSet::new();
        for trip in &group_trips {
            visited.extend(trip.iter().copied());
        }
        for &g in &visited {
            t_wait += scenario.groups[g].t_delivery;
        }
        let t_tot = t_travel + t_wait;
        let fuel = vehicle.f_mob * d_tot + vehicle.f_stop * t_wait;
        let cost = vehicle.c_mob * d_tot + vehicle.c_stop * t_wait;

        // Constraint (4): fuel stock.
        if fuel > vehicle.f_avail + EPS {
            out.push(format!(
                "vehicle '{vid}' burns {fuel} gal over its {} gal stock",
                vehicle.f_avail
            ));
        }
        // Constraint (5): available time.
        if t_tot > vehicle.t_avail + EPS {
            out.push(format!(
                "vehicle '{vid}' runs {t_tot} s over its {} s availability",
                vehicle.t_avail
            ));
        }

        if let Some(rec) = sol.per_vehicle.get(vid) {
            for (name, got, want) in [
                ("d_tot_km", rec.d_tot_km, d_tot),
                ("t_wait_s", rec.t_wait_s, t_wait),
                ("t_tot_s", rec.t_tot_s, t_tot),
                ("fuel_gal", rec.fuel_gal, fuel),
                ("cost_usd", rec.cost_usd, cost),
            ] {
                if (got - want).abs() > EPS {
                    out.push(format!(
                        "vehicle '{vid}' records {name} = {got}, recomputation gives {want}"
                    ));
                }
            }
        }
        recomputed_total += cost;
    }

    if (sol.total_cost_usd - recomputed_total).abs() > EPS {
        out.push(format!(
            "total_cost_usd = {} but per-vehicle recomputation sums to {}",
            sol.total_cost_usd, recomputed_total
        ));
    }

    // Constraint (2): the budget binds whenever coverage is complete.
    if sol.uncovered.is_empty() && recomputed_total > scenario.budget + EPS {
        out.push(format!(
            "total cost {} exceeds the {} budget",
            recomputed_total, scenario.budget
        ));
    }

    out
}
