//! Brute-force reference implementations and instance generators for the
//! test and acceptance suites.
//!
//! Everything here is deliberately independent of the solver code paths: the
//! TSP oracle enumerates permutations, the assignment oracle enumerates all
//! vehicle assignments, and the makespan oracle enumerates all drone
//! assignments. They share only the scenario data and the segment cache with
//! the code they check, and they accumulate leg sums in the same visit-order
//! convention, so equivalence tests can assert exact float equality.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Customer, DroneParams, Group, Point, Scenario, Vehicle, VehicleType};
use crate::segments::SegmentCache;

/// Exhaustive depot-anchored TSP: minimum tour length over all permutations,
/// ties keeping the first in lexicographic index order. Returns the length
/// and the tour's duration along the same visit order.
pub fn brute_force_tsp(cache: &SegmentCache, groups: &[usize]) -> (f64, f64, Vec<usize>) {
    assert!(!groups.is_empty());
    let mut sorted = groups.to_vec();
    sorted.sort_unstable();
    let mut best_len = f64::INFINITY;
    let mut best_order: Vec<usize> = Vec::new();
    permute(&mut sorted, 0, &mut |perm| {
        let mut len = cache.d_fw(perm[0]);
        for w in perm.windows(2) {
            len += cache.d_ww(w[0], w[1]);
        }
        len += cache.d_fw(perm[perm.len() - 1]);
        if len < best_len {
            best_len = len;
            best_order = perm.to_vec();
        }
    });
    let mut dur = cache.t_fw(best_order[0]);
    for w in best_order.windows(2) {
        dur += cache.t_ww(w[0], w[1]);
    }
    dur += cache.t_fw(best_order[best_order.len() - 1]);
    (best_len, dur, best_order)
}

fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    // Lexicographic enumeration: rotate each candidate into position k.
    for i in k..items.len() {
        items[k..=i].rotate_right(1);
        permute(items, k + 1, visit);
        items[k..=i].rotate_left(1);
    }
}

/// Exhaustive minimum makespan: every assignment of jobs to machines, with
/// machine loads accumulated in ascending job order.
pub fn brute_force_makespan(durations: &[f64], machines: usize) -> f64 {
    assert!(machines >= 1);
    if durations.is_empty() {
        return 0.0;
    }
    let n = durations.len();
    let m = machines.min(n);
    let total = (m as u64).pow(n as u32);
    let mut best = f64::INFINITY;
    for code in 0..total {
        let mut loads = vec![0.0f64; m];
        let mut c = code;
        for (j, &d) in durations.iter().enumerate() {
            loads[(c % m as u64) as usize] += d;
            c /= m as u64;
            let _ = j;
        }
        let span = loads.iter().cloned().fold(0.0, f64::max);
        if span < best {
            best = span;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub enum BruteForceOutcome {
    Feasible {
        total_cost: f64,
        /// group index -> vehicle index
        assignment: Vec<usize>,
    },
    /// Some assignment satisfies coverage/capacity/fuel/time, but the
    /// cheapest one still exceeds the budget.
    BudgetInfeasible { min_cost: f64 },
    ResourceInfeasible,
}

/// Exhaustive single-trip solver: enumerates every assignment of groups to
/// vehicles, sequences each vehicle's set by permutation enumeration, checks
/// capacity, fuel, and time, and reports the cheapest assignment.
pub fn brute_force_solve(scenario: &Scenario, cache: &SegmentCache) -> BruteForceOutcome {
    let n_g = scenario.groups.len();
    let n_v = scenario.vehicles.len();
    assert!(n_g <= 12, "exhaustive assignment oracle is for small instances");
    if n_g == 0 {
        return BruteForceOutcome::Feasible { total_cost: 0.0, assignment: Vec::new() };
    }
    if n_v == 0 {
        return BruteForceOutcome::ResourceInfeasible;
    }

    // Tour length/duration per group set, from permutation enumeration.
    let mut tours: BTreeMap<u32, (f64, f64)> = BTreeMap::new();

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut assignment = vec![0usize; n_g];
    loop {
        if let Some(cost) = evaluate_assignment(scenario, cache, &assignment, &mut tours) {
            let better = match &best {
                Some((b, _)) => cost < *b,
                None => true,
            };
            if better {
                best = Some((cost, assignment.clone()));
            }
        }
        // Mixed-radix increment over n_v choices per group.
        let mut pos = 0;
        loop {
            if pos == n_g {
                match best {
                    Some((min_cost, assignment)) => {
                        return if min_cost <= scenario.budget {
                            BruteForceOutcome::Feasible { total_cost: min_cost, assignment }
                        } else {
                            BruteForceOutcome::BudgetInfeasible { min_cost }
                        };
                    }
                    None => return BruteForceOutcome::ResourceInfeasible,
                }
            }
            assignment[pos] += 1;
            if assignment[pos] < n_v {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

fn evaluate_assignment(
    scenario: &Scenario,
    cache: &SegmentCache,
    assignment: &[usize],
    tours: &mut BTreeMap<u32, (f64, f64)>,
) -> Option<f64> {
    let n_v = scenario.vehicles.len();
    let mut total = 0.0;
    for v in 0..n_v {
        let groups: Vec<usize> =
            (0..assignment.len()).filter(|&g| assignment[g] == v).collect();
        if groups.is_empty() {
            continue;
        }
        let vehicle = &scenario.vehicles[v];
        let parcels: usize = groups.iter().map(|&g| scenario.group_size(g)).sum();
        if parcels > vehicle.cap as usize {
            return None;
        }
        let mask = groups.iter().fold(0u32, |m, &g| m | (1 << g));
        let (len, dur) = *tours
            .entry(mask)
            .or_insert_with(|| {
                let (len, dur, _) = brute_force_tsp(cache, &groups);
                (len, dur)
            });

        let mut d_tot = cache.d_vf(v);
        d_tot += len;
        d_tot += cache.d_vf(v);

        let mut t_wait = 0.0;
        for &g in &groups {
            t_wait += scenario.groups[g].t_delivery;
        }

        let mut t_tot = cache.t_vf(v);
        t_tot += vehicle.t_load;
        t_tot += dur;
        t_tot += cache.t_vf(v);
        t_tot += t_wait;

        let fuel = vehicle.f_mob * d_tot + vehicle.f_stop * t_wait;
        if fuel > vehicle.f_avail || t_tot > vehicle.t_avail {
            return None;
        }
        total += vehicle.c_mob * d_tot + vehicle.c_stop * t_wait;
    }
    Some(total)
}

/// Table-II style vehicle templates: (c_mob, c_stop, f_avail, cap).
const VEHICLE_TEMPLATES: [(f64, f64, f64, u32, VehicleType); 3] = [
    (0.10, 0.00013, 13.0, 7, VehicleType::Type1),
    (0.12, 0.00033, 15.0, 9, VehicleType::Type2),
    (0.15, 0.00071, 23.0, 14, VehicleType::Type3),
];

/// A small three-vehicle, three-group fixture with the published per-type
/// cost parameters. Handy for smoke tests.
pub fn demo_scenario() -> Scenario {
    let group_specs: [(&str, &[(f64, f64)]); 3] = [
        ("g1", &[(2.0, 1.0), (2.2, 1.0)]),
        ("g2", &[(4.0, 4.0), (4.2, 4.0), (4.1, 4.2)]),
        ("g3", &[(1.0, 5.0), (1.2, 5.2)]),
    ];
    let mut customers = Vec::new();
    let mut groups = Vec::new();
    let mut cid = 0;
    for (gid, members) in group_specs {
        let mut ids = Vec::new();
        let mut sx = 0.0;
        let mut sy = 0.0;
        for &(x, y) in members {
            cid += 1;
            let id = format!("c{cid}");
            customers.push(Customer { id: id.clone(), position: Point::new(x, y) });
            ids.push(id);
            sx += x;
            sy += y;
        }
        let m = members.len() as f64;
        groups.push(Group {
            id: gid.to_string(),
            members: ids,
            waiting_location: Point::new(sx / m, sy / m),
            t_delivery: 300.0 + 100.0 * groups.len() as f64,
        });
    }
    let vehicles = VEHICLE_TEMPLATES
        .iter()
        .enumerate()
        .map(|(i, &(c_mob, c_stop, f_avail, cap, type_tag))| Vehicle {
            id: format!("v{}", i + 1),
            home: Point::new(0.5 * (i as f64 + 1.0), 0.3),
            type_tag,
            c_mob,
            c_stop,
            cap,
            t_avail: 43200.0,
            f_avail,
            f_mob: 0.021 + 0.007 * i as f64,
            f_stop: 0.00008 + 0.00003 * i as f64,
            t_load: 600.0,
            n_drones: 3,
        })
        .collect();
    Scenario {
        depot: Point::new(0.0, 0.0),
        budget: 2995.0,
        drone: DroneParams { speed_kmh: 40.0, range_km: 3.0, service_time_s: 60.0 },
        vehicles,
        customers,
        groups,
    }
}

/// One vehicle with capacity `cap` and one group per entry of `sizes`, laid
/// out along a line. Exercises tree construction against known shapes.
pub fn sized_groups_scenario(sizes: &[usize], cap: u32) -> Scenario {
    let mut customers = Vec::new();
    let mut groups = Vec::new();
    let mut cid = 0;
    for (gi, &size) in sizes.iter().enumerate() {
        let cx = 2.0 + 2.0 * gi as f64;
        let mut ids = Vec::new();
        for k in 0..size {
            cid += 1;
            let id = format!("c{cid}");
            customers.push(Customer {
                id: id.clone(),
                position: Point::new(cx, 0.1 * k as f64),
            });
            ids.push(id);
        }
        groups.push(Group {
            id: format!("g{}", gi + 1),
            members: ids,
            waiting_location: Point::new(cx, 0.0),
            t_delivery: 300.0 + 60.0 * gi as f64,
        });
    }
    Scenario {
        depot: Point::new(0.0, 0.0),
        budget: 1e9,
        drone: DroneParams { speed_kmh: 40.0, range_km: 3.0, service_time_s: 60.0 },
        vehicles: vec![Vehicle {
            id: "v1".to_string(),
            home: Point::new(0.0, 0.0),
            type_tag: VehicleType::Type1,
            c_mob: 0.1,
            c_stop: 0.00013,
            cap,
            t_avail: 1e9,
            f_avail: 1e9,
            f_mob: 0.021,
            f_stop: 0.00008,
            t_load: 600.0,
            n_drones: 3,
        }],
        customers,
        groups,
    }
}

#[derive(Debug, Clone)]
pub struct InstanceParams {
    pub n_vehicles: usize,
    pub n_groups: usize,
    pub max_group_size: usize,
    pub box_km: f64,
    /// Roomy stocks and budget, so nearly every instance admits a full
    /// assignment.
    pub generous: bool,
    /// Capacities barely above the largest group, so trips stay short and
    /// assignments spread across the pool.
    pub tight_caps: bool,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            n_vehicles: 3,
            n_groups: 4,
            max_group_size: 3,
            box_km: 10.0,
            generous: true,
            tight_caps: false,
        }
    }
}

/// Seeded random instance: clustered customers with per-group makespans and
/// a type-mixed vehicle pool. Capacities always admit the largest group so
/// single-trip assignments exist unless stocks are tightened.
pub fn rand_instance(seed: u64, p: &InstanceParams) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut customers = Vec::new();
    let mut groups = Vec::new();
    let mut cid = 0;
    let mut max_size = 1;
    for gi in 0..p.n_groups {
        let cx = rng.random_range(0.0..p.box_km);
        let cy = rng.random_range(0.0..p.box_km);
        let size = rng.random_range(1..=p.max_group_size);
        max_size = max_size.max(size);
        let mut ids = Vec::new();
        let mut sx = 0.0;
        let mut sy = 0.0;
        for _ in 0..size {
            cid += 1;
            let id = format!("c{cid}");
            let x = cx + rng.random_range(-0.3..0.3);
            let y = cy + rng.random_range(-0.3..0.3);
            customers.push(Customer { id: id.clone(), position: Point::new(x, y) });
            ids.push(id);
            sx += x;
            sy += y;
        }
        let m = size as f64;
        groups.push(Group {
            id: format!("g{:02}", gi + 1),
            members: ids,
            waiting_location: Point::new(sx / m, sy / m),
            t_delivery: rng.random_range(120.0..900.0),
        });
    }
    let mut vehicles = Vec::new();
    for vi in 0..p.n_vehicles {
        let (c_mob, c_stop, f_avail, cap, type_tag) = VEHICLE_TEMPLATES[vi % 3];
        let slack = rng.random_range(0..=2);
        let cap = if p.tight_caps {
            max_size as u32 + slack
        } else {
            cap.max(max_size as u32 + slack)
        };
        vehicles.push(Vehicle {
            id: format!("v{:02}", vi + 1),
            home: Point::new(rng.random_range(0.0..p.box_km), rng.random_range(0.0..p.box_km)),
            type_tag,
            c_mob,
            c_stop,
            cap,
            t_avail: if p.generous { 1e9 } else { rng.random_range(3600.0..10800.0) },
            f_avail: if p.generous { 1e9 } else { f_avail / 4.0 },
            f_mob: 0.021 + 0.004 * (vi % 3) as f64,
            f_stop: 0.00008 + 0.00002 * (vi % 3) as f64,
            t_load: 600.0,
            n_drones: 3,
        });
    }
    Scenario {
        depot: Point::new(p.box_km / 2.0, p.box_km / 2.0),
        budget: if p.generous { 1e9 } else { 10.0 },
        drone: DroneParams { speed_kmh: 40.0, range_km: 3.0, service_time_s: 60.0 },
        vehicles,
        customers,
        groups,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_makespan_small_cases() {
        assert_eq!(brute_force_makespan(&[3.0, 3.0, 3.0], 3), 3.0);
        assert_eq!(brute_force_makespan(&[180.0, 180.0, 180.0, 60.0], 2), 360.0);
        assert_eq!(brute_force_makespan(&[5.0], 4), 5.0);
    }

    #[test]
    fn rand_instances_are_valid() {
        for seed in 0..20 {
            let s = rand_instance(seed, &InstanceParams::default());
            assert!(crate::model::validate_scenario(&s).is_empty(), "seed {seed}");
        }
    }
}
