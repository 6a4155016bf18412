//! Exact solver: branch-and-bound over group-to-vehicle assignments with
//! TSP-evaluated route costs.
//!
//! Groups are branched in decreasing member count; children (vehicle and
//! trip slot choices) are ordered by their incremental-cost lower bound. A
//! node's bound is its exact partial cost plus, for every unassigned group,
//! the cheapest marginal detour any vehicle could pay to serve it: the
//! minimum insertion gain `d(a,g) + d(g,b) - d(a,b)` over all site pairs
//! (the depot out-and-back being one such pair), priced at the cheapest
//! vehicle rates. Under a metric provider this never overestimates, so
//! pruning preserves optimality; a small slack absorbs float rounding.
//!
//! With `allow_reload` a vehicle may run several depot-anchored trips that
//! share its fuel and time stocks. Trips are opened on demand during
//! branching (at most one fresh slot per vehicle per node), which reaches
//! every trip partition without symmetric duplicates.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use core::fmt;

use crate::model::{Algorithm, Scenario, Solution, VehicleTotals};
use crate::segments::SegmentCache;
use crate::seqsolve::{best_sequence, SequencedTour};

/// Absorbs accumulated float rounding in bounds so pruned-vs-unpruned
/// searches return identical costs.
const PRUNE_SLACK: f64 = 1e-9;

/// Stop-condition poll interval, in expanded nodes.
const STOP_CHECK_MASK: u64 = 1023;

#[derive(Debug, Clone)]
pub struct ExactConfig {
    /// Let one vehicle run several trips (reloading at the depot between
    /// them). Off by default: the single-trip model is the written one.
    pub allow_reload: bool,
    /// Bound-based pruning. Disabling it is a diagnostic mode; results must
    /// not change.
    pub pruning: bool,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig { allow_reload: false, pruning: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExactError {
    /// No assignment satisfies coverage, capacity, fuel, and time.
    ResourceInfeasible,
    /// A cost-minimal assignment exists but still exceeds the budget.
    BudgetInfeasible { min_cost: f64 },
    /// The stop condition fired before any budget-feasible assignment was
    /// found.
    TimeLimit,
    /// Masks are u128; larger instances are out of reach for this solver
    /// anyway.
    TooManyGroups { n: usize },
}

impl fmt::Display for ExactError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactError::ResourceInfeasible => {
                write!(f, "no assignment satisfies capacity, fuel, and time constraints")
            }
            ExactError::BudgetInfeasible { min_cost } => {
                write!(f, "cheapest feasible assignment costs {min_cost} USD, over budget")
            }
            ExactError::TimeLimit => {
                write!(f, "time limit reached before any feasible assignment was found")
            }
            ExactError::TooManyGroups { n } => {
                write!(f, "exact solver handles at most 128 groups, got {n}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExactOutcome {
    pub solution: Solution,
    /// False when the search was stopped early; the solution is the best
    /// incumbent.
    pub proven_optimal: bool,
    pub nodes_expanded: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteInfeasibility {
    Capacity,
    Fuel,
    Time,
}

impl fmt::Display for RouteInfeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RouteInfeasibility::Capacity => write!(f, "capacity"),
            RouteInfeasibility::Fuel => write!(f, "fuel"),
            RouteInfeasibility::Time => write!(f, "time"),
        }
    }
}

/// Cost and feasibility of one vehicle serving `groups` as a single trip.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteEval {
    pub d_tot: f64,
    pub t_wait: f64,
    pub t_tot: f64,
    pub fuel: f64,
    pub cost: f64,
    /// Visit order chosen by the sequencer.
    pub order: Vec<usize>,
}

/// Evaluates vehicle `v` serving `groups` (scenario indices) as one trip:
/// the sequence comes from [`best_sequence`], the cost is
/// `c_mob * d_tot + c_stop * t_wait`, and capacity, fuel, and time limits
/// are enforced.
pub fn vehicle_route_cost(
    scenario: &Scenario,
    cache: &SegmentCache,
    v: usize,
    groups: &[usize],
) -> Result<RouteEval, RouteInfeasibility> {
    let vehicle = &scenario.vehicles[v];
    if groups.is_empty() {
        return Ok(RouteEval { d_tot: 0.0, t_wait: 0.0, t_tot: 0.0, fuel: 0.0, cost: 0.0, order: Vec::new() });
    }
    let parcels: usize = groups.iter().map(|&g| scenario.group_size(g)).sum();
    if parcels > vehicle.cap as usize {
        return Err(RouteInfeasibility::Capacity);
    }
    let tour = best_sequence(cache, groups);

    let mut d_tot = cache.d_vf(v);
    d_tot += tour.length_km;
    d_tot += cache.d_vf(v);

    let t_wait = wait_sum_indexed(scenario, groups);

    let mut t_tot = cache.t_vf(v);
    t_tot += vehicle.t_load;
    t_tot += tour.duration_s;
    t_tot += cache.t_vf(v);
    t_tot += t_wait;

    let fuel = vehicle.f_mob * d_tot + vehicle.f_stop * t_wait;
    if fuel > vehicle.f_avail {
        return Err(RouteInfeasibility::Fuel);
    }
    if t_tot > vehicle.t_avail {
        return Err(RouteInfeasibility::Time);
    }
    let cost = vehicle.c_mob * d_tot + vehicle.c_stop * t_wait;
    Ok(RouteEval { d_tot, t_wait, t_tot, fuel, cost, order: tour.order })
}

/// Sum of delivery makespans in ascending group-index order, the canonical
/// accumulation shared with `seqsolve::wait_time`.
fn wait_sum_indexed(scenario: &Scenario, groups: &[usize]) -> f64 {
    let mut sorted = groups.to_vec();
    sorted.sort_unstable();
    let mut t = 0.0;
    for &g in &sorted {
        t += scenario.groups[g].t_delivery;
    }
    t
}

/// Exact minimum-cost assignment of every group to a vehicle.
///
/// `stop` is polled during the search; when it fires the best incumbent is
/// returned with `time_limit_reached` set (or [`ExactError::TimeLimit`] if
/// there is none yet). The search itself is sequential and deterministic
/// for a fixed configuration.
pub fn solve_exact(
    scenario: &Scenario,
    cache: &SegmentCache,
    cfg: &ExactConfig,
    stop: Option<&dyn Fn() -> bool>,
) -> Result<ExactOutcome, ExactError> {
    let n_g = scenario.groups.len();
    if n_g > 128 {
        return Err(ExactError::TooManyGroups { n: n_g });
    }
    if n_g == 0 {
        return Ok(ExactOutcome {
            solution: empty_solution(),
            proven_optimal: true,
            nodes_expanded: 0,
        });
    }

    // Branch on groups in decreasing member count, ids breaking ties.
    let mut order: Vec<usize> = (0..n_g).collect();
    order.sort_by(|&a, &b| {
        scenario
            .group_size(b)
            .cmp(&scenario.group_size(a))
            .then_with(|| scenario.groups[a].id.cmp(&scenario.groups[b].id))
    });

    let margins = insertion_margins(scenario, cache);
    let mut suffix_margin = vec![0.0; n_g + 1];
    for k in (0..n_g).rev() {
        suffix_margin[k] = suffix_margin[k + 1] + margins[order[k]];
    }

    let mut search = Search {
        scenario,
        cache,
        cfg,
        stop,
        order,
        suffix_margin,
        tours: BTreeMap::new(),
        vehicles: vec![VehState::default(); scenario.vehicles.len()],
        incumbent: None,
        nodes: 0,
        stopped: false,
    };
    search.dfs(0);

    let stopped = search.stopped;
    let nodes_expanded = search.nodes;
    match search.take_incumbent() {
        Some((cost, trips)) => {
            if cost <= scenario.budget {
                let solution = search.build_solution(&trips, stopped);
                Ok(ExactOutcome { solution, proven_optimal: !stopped, nodes_expanded })
            } else if stopped {
                Err(ExactError::TimeLimit)
            } else {
                Err(ExactError::BudgetInfeasible { min_cost: cost })
            }
        }
        None => {
            if stopped {
                Err(ExactError::TimeLimit)
            } else {
                Err(ExactError::ResourceInfeasible)
            }
        }
    }
}

fn empty_solution() -> Solution {
    Solution {
        algorithm: Algorithm::Exact,
        routes: BTreeMap::new(),
        per_vehicle: BTreeMap::new(),
        total_cost_usd: 0.0,
        uncovered: alloc::collections::BTreeSet::new(),
        time_limit_reached: false,
    }
}

/// Cheapest marginal cost any vehicle could pay to serve each group: the
/// minimum tour insertion gain for its waiting location priced with the
/// cheapest mobility rate, plus the cheapest waiting rate on its makespan.
fn insertion_margins(scenario: &Scenario, cache: &SegmentCache) -> Vec<f64> {
    let n_g = scenario.groups.len();
    // Site-to-site distance with the depot as index n_g.
    let dist = |a: usize, b: usize| -> f64 {
        if a == b {
            return 0.0;
        }
        if a == n_g {
            cache.d_fw(b)
        } else if b == n_g {
            cache.d_fw(a)
        } else {
            cache.d_ww(a, b)
        }
    };
    let mut margins = Vec::with_capacity(n_g);
    for g in 0..n_g {
        let mut gain = f64::INFINITY;
        for a in 0..=n_g {
            if a == g {
                continue;
            }
            for b in 0..=n_g {
                if b == g {
                    continue;
                }
                let cand = dist(a, g) + dist(g, b) - dist(a, b);
                if cand < gain {
                    gain = cand;
                }
            }
        }
        let gain = gain.max(0.0);
        let t_delivery = scenario.groups[g].t_delivery;
        let mut margin = f64::INFINITY;
        for v in &scenario.vehicles {
            let cand = v.c_mob * gain + v.c_stop * t_delivery;
            if cand < margin {
                margin = cand;
            }
        }
        margins.push(if margin.is_finite() { margin } else { 0.0 });
    }
    margins
}

#[derive(Debug, Clone, Copy, Default)]
struct VehEval {
    cost: f64,
}

/// Trip masks with their parcel loads, in creation order.
type Trips = Vec<(u128, u32)>;

#[derive(Debug, Clone, Default)]
struct VehState {
    trips: Trips,
    eval: VehEval,
}

struct Child {
    v: usize,
    slot: usize,
    eval: VehEval,
    /// Canonical full partial cost with this child applied.
    total: f64,
}

struct Search<'a> {
    scenario: &'a Scenario,
    cache: &'a SegmentCache,
    cfg: &'a ExactConfig,
    stop: Option<&'a dyn Fn() -> bool>,
    order: Vec<usize>,
    suffix_margin: Vec<f64>,
    tours: BTreeMap<u128, SequencedTour>,
    vehicles: Vec<VehState>,
    incumbent: Option<(f64, Vec<Trips>)>,
    nodes: u64,
    stopped: bool,
}

impl<'a> Search<'a> {
    fn tour(&mut self, mask: u128) -> &SequencedTour {
        if !self.tours.contains_key(&mask) {
            let groups: Vec<usize> = (0..self.scenario.groups.len())
                .filter(|g| mask & (1u128 << g) != 0)
                .collect();
            let tour = best_sequence(self.cache, &groups);
            self.tours.insert(mask, tour);
        }
        &self.tours[&mask]
    }

    /// Canonical totals for vehicle `v` running `trips`; `None` when fuel or
    /// time is exceeded. Matches `seqsolve::route_distance`/`route_time`
    /// fold order exactly.
    fn eval_vehicle(&mut self, v: usize, trips: &[(u128, u32)]) -> Option<VehEval> {
        if trips.is_empty() {
            return Some(VehEval::default());
        }
        let vehicle = &self.scenario.vehicles[v];
        let (t_avail, f_avail) = (vehicle.t_avail, vehicle.f_avail);
        let (c_mob, c_stop) = (vehicle.c_mob, vehicle.c_stop);
        let (f_mob, f_stop) = (vehicle.f_mob, vehicle.f_stop);
        let t_load = vehicle.t_load;

        let mut union: u128 = 0;
        let mut d_tot = self.cache.d_vf(v);
        let mut t_tot = self.cache.t_vf(v);
        for &(mask, _) in trips {
            union |= mask;
            let tour = self.tour(mask);
            let (len, dur) = (tour.length_km, tour.duration_s);
            d_tot += len;
            // route_time fold order: load first, then the tour legs.
            t_tot += t_load;
            t_tot += dur;
        }
        d_tot += self.cache.d_vf(v);
        t_tot += self.cache.t_vf(v);

        let mut t_wait = 0.0;
        let mut rest = union;
        while rest != 0 {
            let g = rest.trailing_zeros() as usize;
            t_wait += self.scenario.groups[g].t_delivery;
            rest &= rest - 1;
        }
        t_tot += t_wait;

        let fuel = f_mob * d_tot + f_stop * t_wait;
        if fuel > f_avail || t_tot > t_avail {
            return None;
        }
        let cost = c_mob * d_tot + c_stop * t_wait;
        Some(VehEval { cost })
    }

    /// Canonical partial cost: per-vehicle costs folded in index order.
    fn total_with(&self, replace: Option<(usize, f64)>) -> f64 {
        let mut total = 0.0;
        for (v, state) in self.vehicles.iter().enumerate() {
            let cost = match replace {
                Some((rv, c)) if rv == v => c,
                _ => {
                    if state.trips.is_empty() {
                        continue;
                    }
                    state.eval.cost
                }
            };
            total += cost;
        }
        total
    }

    fn dfs(&mut self, depth: usize) {
        if self.stopped {
            return;
        }
        if self.nodes & STOP_CHECK_MASK == 0 {
            if let Some(stop) = self.stop {
                if stop() {
                    self.stopped = true;
                    return;
                }
            }
        }
        self.nodes += 1;
        if depth == self.order.len() {
            let total = self.total_with(None);
            let better = match &self.incumbent {
                Some((best, _)) => total < *best,
                None => true,
            };
            if better {
                let trips = self.vehicles.iter().map(|s| s.trips.clone()).collect();
                self.incumbent = Some((total, trips));
            }
            return;
        }

        let g = self.order[depth];
        let g_size = self.scenario.group_size(g) as u32;
        let g_bit = 1u128 << g;

        let mut children: Vec<Child> = Vec::new();
        for v in 0..self.vehicles.len() {
            let cap = self.scenario.vehicles[v].cap;
            let n_slots = self.vehicles[v].trips.len();
            let slot_candidates: core::ops::RangeInclusive<usize> = if self.cfg.allow_reload {
                0..=n_slots // existing slots plus one fresh trip
            } else if n_slots == 0 {
                0..=0
            } else {
                0..=(n_slots - 1)
            };
            for slot in slot_candidates {
                let load = if slot < n_slots { self.vehicles[v].trips[slot].1 } else { 0 };
                if load + g_size > cap {
                    continue;
                }
                let mut trips = self.vehicles[v].trips.clone();
                if slot < n_slots {
                    trips[slot].0 |= g_bit;
                    trips[slot].1 += g_size;
                } else {
                    trips.push((g_bit, g_size));
                }
                if let Some(eval) = self.eval_vehicle(v, &trips) {
                    let total = self.total_with(Some((v, eval.cost)));
                    children.push(Child { v, slot, eval, total });
                }
            }
        }
        children.sort_by(|a, b| {
            a.total.total_cmp(&b.total).then(a.v.cmp(&b.v)).then(a.slot.cmp(&b.slot))
        });

        for child in children {
            if self.stopped {
                return;
            }
            if self.cfg.pruning {
                if let Some((best, _)) = &self.incumbent {
                    let lower_bound = child.total + self.suffix_margin[depth + 1];
                    if lower_bound >= best + PRUNE_SLACK {
                        continue;
                    }
                }
            }
            let state = &mut self.vehicles[child.v];
            let n_slots = state.trips.len();
            let prev_eval = state.eval;
            if child.slot < n_slots {
                state.trips[child.slot].0 |= g_bit;
                state.trips[child.slot].1 += g_size;
            } else {
                state.trips.push((g_bit, g_size));
            }
            state.eval = child.eval;

            self.dfs(depth + 1);

            let state = &mut self.vehicles[child.v];
            if child.slot < n_slots {
                state.trips[child.slot].0 &= !g_bit;
                state.trips[child.slot].1 -= g_size;
            } else {
                state.trips.pop();
            }
            state.eval = prev_eval;
        }
    }

    fn take_incumbent(&mut self) -> Option<(f64, Vec<Trips>)> {
        self.incumbent.take()
    }

    fn build_solution(&mut self, trips: &[Trips], stopped: bool) -> Solution {
        let mut routes = BTreeMap::new();
        let mut per_vehicle = BTreeMap::new();
        let mut total = 0.0;
        for (v, vehicle_trips) in trips.iter().enumerate() {
            if vehicle_trips.is_empty() {
                continue;
            }
            let orders: Vec<Vec<usize>> =
                vehicle_trips.iter().map(|&(mask, _)| self.tour(mask).order.clone()).collect();
            let vehicle = &self.scenario.vehicles[v];
            let d_tot = crate::seqsolve::route_distance(v, &orders, self.cache);
            let rt = crate::seqsolve::route_time(vehicle, v, &orders, self.cache, self.scenario);
            let fuel = vehicle.f_mob * d_tot + vehicle.f_stop * rt.t_wait;
            let cost = vehicle.c_mob * d_tot + vehicle.c_stop * rt.t_wait;
            total += cost;
            let id = vehicle.id.clone();
            routes.insert(
                id.clone(),
                orders
                    .iter()
                    .map(|trip| {
                        trip.iter().map(|&g| self.scenario.groups[g].id.clone()).collect::<Vec<String>>()
                    })
                    .collect::<Vec<Vec<String>>>(),
            );
            per_vehicle.insert(
                id,
                VehicleTotals { d_tot_km: d_tot, t_wait_s: rt.t_wait, t_tot_s: rt.t_tot, fuel_gal: fuel, cost_usd: cost },
            );
        }
        Solution {
            algorithm: Algorithm::Exact,
            routes,
            per_vehicle,
            total_cost_usd: total,
            uncovered: alloc::collections::BTreeSet::new(),
            time_limit_reached: stopped,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::EuclideanTravel;
    use crate::segments::precompute_segments;
    use crate::testkit;

    fn table2_like() -> Scenario {
        testkit::demo_scenario()
    }

    #[test]
    fn route_cost_hand_example() {
        // c_mob 0.1, c_stop 0.00013, d_tot 20 km, t_wait 1500 s -> 2.195.
        let cost: f64 = 0.1 * 20.0 + 0.00013 * 1500.0;
        assert!((cost - 2.195).abs() < 1e-12);
    }

    #[test]
    fn capacity_violation_is_infeasible() {
        let mut s = table2_like();
        s.vehicles[0].cap = 6; // groups carry 7 parcels in total
        let travel = EuclideanTravel::new(1.0, 40.0).unwrap();
        let cache = precompute_segments(&s, &travel).unwrap();
        let all: Vec<usize> = (0..s.groups.len()).collect();
        assert_eq!(
            vehicle_route_cost(&s, &cache, 0, &all).unwrap_err(),
            RouteInfeasibility::Capacity
        );
    }

    #[test]
    fn zero_fuel_is_infeasible() {
        let mut s = table2_like();
        s.vehicles[0].f_avail = 0.0;
        let travel = EuclideanTravel::new(1.0, 40.0).unwrap();
        let cache = precompute_segments(&s, &travel).unwrap();
        assert_eq!(
            vehicle_route_cost(&s, &cache, 0, &[0]).unwrap_err(),
            RouteInfeasibility::Fuel
        );
    }

    #[test]
    fn single_vehicle_takes_both_groups() {
        let mut s = table2_like();
        s.vehicles.truncate(1);
        s.vehicles[0].cap = 100;
        let travel = EuclideanTravel::new(1.0, 40.0).unwrap();
        let cache = precompute_segments(&s, &travel).unwrap();
        let out = solve_exact(&s, &cache, &ExactConfig::default(), None).unwrap();
        assert!(out.proven_optimal);
        let all: Vec<usize> = (0..s.groups.len()).collect();
        let eval = vehicle_route_cost(&s, &cache, 0, &all).unwrap();
        assert_eq!(out.solution.total_cost_usd, eval.cost);
        assert_eq!(out.solution.routes.len(), 1);
    }

    #[test]
    fn zero_budget_is_budget_infeasible() {
        let mut s = table2_like();
        s.budget = 0.0;
        let travel = EuclideanTravel::new(1.0, 40.0).unwrap();
        let cache = precompute_segments(&s, &travel).unwrap();
        match solve_exact(&s, &cache, &ExactConfig::default(), None) {
            Err(ExactError::BudgetInfeasible { min_cost }) => assert!(min_cost > 0.0),
            other => panic!("expected budget infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn impossible_groups_are_resource_infeasible() {
        let mut s = table2_like();
        for v in &mut s.vehicles {
            v.cap = 1; // every group has >= 2 members
        }
        let travel = EuclideanTravel::new(1.0, 40.0).unwrap();
        let cache = precompute_segments(&s, &travel).unwrap();
        assert_eq!(
            solve_exact(&s, &cache, &ExactConfig::default(), None).unwrap_err(),
            ExactError::ResourceInfeasible
        );
    }

    #[test]
    fn stop_condition_yields_time_limit_or_incumbent() {
        let s = table2_like();
        let travel = EuclideanTravel::new(1.0, 40.0).unwrap();
        let cache = precompute_segments(&s, &travel).unwrap();
        let stop = || true;
        match solve_exact(&s, &cache, &ExactConfig::default(), Some(&stop)) {
            Err(ExactError::TimeLimit) => {}
            Ok(out) => assert!(out.solution.time_limit_reached && !out.proven_optimal),
            other => panic!("unexpected {other:?}"),
        }
    }
}
