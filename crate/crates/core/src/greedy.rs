//! Tree-based greedy heuristic.
//!
//! Each round builds, per vehicle, a tree of feasible group sequences: the
//! root is the depot, children are groups that fit the remaining parcels,
//! and an edge to group `b` is scored
//! `(distance * c_mob + t_delivery(b) * c_stop) / |b|` -- travel plus
//! waiting cost per customer served, which biases selection toward larger
//! groups. The cheapest root-to-terminal path across all vehicles is
//! committed as one trip, its groups leave the pool, and the loop repeats
//! until everything is covered or the next commitment would blow the
//! budget.
//!
//! Selection uses the per-customer path score; money uses the full route
//! (including the return legs the score leaves out). A vehicle picked again
//! reloads: its new tree starts from the depot with a fresh parcel load,
//! while its earlier trips' fuel and time stay deducted.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{Algorithm, Scenario, Solution, VehicleTotals};
use crate::segments::SegmentCache;
use crate::seqsolve::{route_distance, route_time};

#[derive(Debug, Clone)]
pub struct GreedyConfig {
    /// Children kept per tree node, cheapest edges first. `None` expands
    /// every feasible child (exponential on loose capacities; meant for
    /// small fidelity runs).
    pub branch_limit: Option<usize>,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        GreedyConfig { branch_limit: Some(4) }
    }
}

/// What a vehicle has already spent in committed trips.
#[derive(Debug, Clone, Copy, Default)]
pub struct VehicleCommit {
    pub fuel_used: f64,
    pub time_used: f64,
    /// A dispatched vehicle already paid its home<->depot legs and starts
    /// reload trees at the depot.
    pub dispatched: bool,
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    /// `None` for the root (the depot).
    pub group: Option<usize>,
    /// Parcels left after serving the path up to and including this node.
    pub remaining_parcels: u32,
    pub depth: u32,
    /// Per-customer score of the edge from the parent.
    pub edge_weight: f64,
    /// Sum of edge weights from the root.
    pub path_score: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Outbound tour legs depot -> ... -> this group, km / s.
    out_dist: f64,
    out_time: f64,
    /// Accumulated delivery makespans along the path, s.
    wait_sum: f64,
}

/// The per-vehicle cost tree of one greedy round.
#[derive(Debug, Clone)]
pub struct CostTree {
    pub nodes: Vec<TreeNode>,
}

impl CostTree {
    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1
    }

    /// Group indices from the root to `node` (exclusive of the root).
    pub fn path_of(&self, node: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = Some(node);
        while let Some(i) = cur {
            if let Some(g) = self.nodes[i].group {
                path.push(g);
            }
            cur = self.nodes[i].parent;
        }
        path.reverse();
        path
    }

    pub fn terminals(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.group.is_some() && n.children.is_empty())
            .map(|(i, _)| i)
    }
}

/// Expands the feasible-sequence tree for vehicle `v` over the `remaining`
/// groups. Nodes that would blow the vehicle's fuel or time stocks -- even
/// after the mandatory return legs -- are pruned during expansion.
pub fn build_tree(
    scenario: &Scenario,
    cache: &SegmentCache,
    v: usize,
    remaining: &BTreeSet<usize>,
    commit: &VehicleCommit,
    config: &GreedyConfig,
) -> CostTree {
    let vehicle = &scenario.vehicles[v];
    let lead_dist = if commit.dispatched { 0.0 } else { cache.d_vf(v) + cache.d_vf(v) };
    let lead_time = if commit.dispatched { 0.0 } else { cache.t_vf(v) + cache.t_vf(v) };

    let mut tree = CostTree {
        nodes: vec![TreeNode {
            group: None,
            remaining_parcels: vehicle.cap,
            depth: 0,
            edge_weight: 0.0,
            path_score: 0.0,
            parent: None,
            children: Vec::new(),
            out_dist: 0.0,
            out_time: 0.0,
            wait_sum: 0.0,
        }],
    };

    let mut queue = vec![0usize];
    while let Some(node_idx) = queue.pop() {
        let (parent_group, parcels_left, depth, path_score, out_dist, out_time, wait_sum) = {
            let n = &tree.nodes[node_idx];
            (n.group, n.remaining_parcels, n.depth, n.path_score, n.out_dist, n.out_time, n.wait_sum)
        };

        let mut candidates: Vec<(f64, usize)> = Vec::new();
        for &g in remaining {
            if on_path(&tree, node_idx, g) {
                continue;
            }
            let size = scenario.group_size(g) as u32;
            if size > parcels_left {
                continue;
            }
            // The root edge's distance term is d_vf + d_fw for every trip:
            // the score treats each trip as a fresh dispatch even though a
            // reload physically starts at the depot (the accounting charges
            // home legs once).
            let hop_dist = match parent_group {
                None => cache.d_vf(v) + cache.d_fw(g),
                Some(p) => cache.d_ww(p, g),
            };
            let hop_time = match parent_group {
                None => cache.t_fw(g),
                Some(p) => cache.t_ww(p, g),
            };
            let new_out_dist = out_dist + hop_without_lead(parent_group, cache, g);
            let new_out_time = out_time + hop_time;
            let new_wait = wait_sum + scenario.groups[g].t_delivery;

            // Trip feasibility with the return legs included: a terminal on
            // this path must still make it back.
            let fuel_needed =
                vehicle.f_mob * (lead_dist + new_out_dist + cache.d_fw(g)) + vehicle.f_stop * new_wait;
            if commit.fuel_used + fuel_needed > vehicle.f_avail {
                continue;
            }
            let time_needed =
                lead_time + vehicle.t_load + new_out_time + cache.t_fw(g) + new_wait;
            if commit.time_used + time_needed > vehicle.t_avail {
                continue;
            }

            let weight = (hop_dist * vehicle.c_mob
                + scenario.groups[g].t_delivery * vehicle.c_stop)
                / scenario.group_size(g) as f64;
            candidates.push((weight, g));
        }

        candidates.sort_by(|a, b| {
            a.0.total_cmp(&b.0).then_with(|| scenario.groups[a.1].id.cmp(&scenario.groups[b.1].id))
        });
        if let Some(limit) = config.branch_limit {
            candidates.truncate(limit);
        }

        for (weight, g) in candidates {
            let child_idx = tree.nodes.len();
            let hop_time = match parent_group {
                None => cache.t_fw(g),
                Some(p) => cache.t_ww(p, g),
            };
            tree.nodes.push(TreeNode {
                group: Some(g),
                remaining_parcels: parcels_left - scenario.group_size(g) as u32,
                depth: depth + 1,
                edge_weight: weight,
                path_score: path_score + weight,
                parent: Some(node_idx),
                children: Vec::new(),
                out_dist: out_dist + hop_without_lead(parent_group, cache, g),
                out_time: out_time + hop_time,
                wait_sum: wait_sum + scenario.groups[g].t_delivery,
            });
            tree.nodes[node_idx].children.push(child_idx);
            queue.push(child_idx);
        }
    }
    tree
}

/// Tour leg into `g`, excluding the home lead that only enters the score.
fn hop_without_lead(parent_group: Option<usize>, cache: &SegmentCache, g: usize) -> f64 {
    match parent_group {
        None => cache.d_fw(g),
        Some(p) => cache.d_ww(p, g),
    }
}

fn on_path(tree: &CostTree, node: usize, g: usize) -> bool {
    let mut cur = Some(node);
    while let Some(i) = cur {
        if tree.nodes[i].group == Some(g) {
            return true;
        }
        cur = tree.nodes[i].parent;
    }
    false
}

/// Cheapest root-to-terminal path: the vehicle's score for this round and
/// the visit sequence it would commit. Ties prefer shorter paths, then the
/// lexicographically smaller id sequence. `None` for an empty tree.
pub fn tree_min_cost(tree: &CostTree, scenario: &Scenario) -> Option<(f64, Vec<usize>)> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for t in tree.terminals() {
        let score = tree.nodes[t].path_score;
        let path = tree.path_of(t);
        let better = match &best {
            None => true,
            Some((bs, bp)) => {
                score < *bs
                    || (score == *bs
                        && (path.len() < bp.len()
                            || (path.len() == bp.len() && ids_lex_less(scenario, &path, bp))))
            }
        };
        if better {
            best = Some((score, path));
        }
    }
    best
}

fn ids_lex_less(scenario: &Scenario, a: &[usize], b: &[usize]) -> bool {
    let ids = |p: &[usize]| p.iter().map(|&g| scenario.groups[g].id.clone()).collect::<Vec<String>>();
    ids(a) < ids(b)
}

/// Runs the greedy loop to completion. Partial coverage is a valid outcome:
/// groups left when the budget guard halts the loop are reported in
/// `Solution::uncovered`.
pub fn solve_greedy(scenario: &Scenario, cache: &SegmentCache, config: &GreedyConfig) -> Solution {
    solve_greedy_with(scenario, cache, config, |_, _, _| {})
}

/// [`solve_greedy`] with an observer that sees every tree built: the round
/// number, the vehicle index, and the tree. Feeds the debug tree dump.
pub fn solve_greedy_with(
    scenario: &Scenario,
    cache: &SegmentCache,
    config: &GreedyConfig,
    mut observe: impl FnMut(usize, usize, &CostTree),
) -> Solution {
    let n_g = scenario.groups.len();
    let mut remaining: BTreeSet<usize> = (0..n_g).collect();
    let mut commits: Vec<VehicleCommit> = vec![VehicleCommit::default(); scenario.vehicles.len()];
    let mut trips: Vec<Vec<Vec<usize>>> = vec![Vec::new(); scenario.vehicles.len()];
    let mut accounted_total = 0.0;

    let mut round = 0;
    while !remaining.is_empty() {
        round += 1;
        let mut best: Option<(f64, Vec<usize>, usize)> = None;
        for (v, commit) in commits.iter().enumerate() {
            if commit.fuel_used >= scenario.vehicles[v].f_avail {
                continue;
            }
            let tree = build_tree(scenario, cache, v, &remaining, commit, config);
            observe(round, v, &tree);
            if let Some((score, path)) = tree_min_cost(&tree, scenario) {
                let better = match &best {
                    None => true,
                    Some((bs, _, _)) => score < *bs,
                };
                if better {
                    best = Some((score, path, v));
                }
            }
        }

        let Some((_, path, v)) = best else {
            break; // nothing fits any vehicle anymore
        };

        let vehicle = &scenario.vehicles[v];
        let commit = &commits[v];
        let lead_dist = if commit.dispatched { 0.0 } else { cache.d_vf(v) + cache.d_vf(v) };
        let lead_time = if commit.dispatched { 0.0 } else { cache.t_vf(v) + cache.t_vf(v) };
        let (out_dist, out_time, wait_sum) = path_totals(scenario, cache, &path);
        let ret_dist = cache.d_fw(path[path.len() - 1]);
        let ret_time = cache.t_fw(path[path.len() - 1]);

        let dist_m = lead_dist + out_dist + ret_dist;
        let cost_m = vehicle.c_mob * dist_m + vehicle.c_stop * wait_sum;
        if accounted_total + cost_m > scenario.budget {
            break; // the next commitment would exceed the budget
        }

        accounted_total += cost_m;
        commits[v].fuel_used += vehicle.f_mob * dist_m + vehicle.f_stop * wait_sum;
        commits[v].time_used += lead_time + vehicle.t_load + out_time + ret_time + wait_sum;
        commits[v].dispatched = true;
        for &g in &path {
            remaining.remove(&g);
        }
        trips[v].push(path);
    }

    build_solution(scenario, cache, &trips, &remaining)
}

fn path_totals(scenario: &Scenario, cache: &SegmentCache, path: &[usize]) -> (f64, f64, f64) {
    let mut d = cache.d_fw(path[0]);
    let mut t = cache.t_fw(path[0]);
    let mut w = scenario.groups[path[0]].t_delivery;
    for pair in path.windows(2) {
        d += cache.d_ww(pair[0], pair[1]);
        t += cache.t_ww(pair[0], pair[1]);
        w += scenario.groups[pair[1]].t_delivery;
    }
    (d, t, w)
}

fn build_solution(
    scenario: &Scenario,
    cache: &SegmentCache,
    trips: &[Vec<Vec<usize>>],
    remaining: &BTreeSet<usize>,
) -> Solution {
    let mut routes = BTreeMap::new();
    let mut per_vehicle = BTreeMap::new();
    let mut total = 0.0;
    for (v, vehicle_trips) in trips.iter().enumerate() {
        if vehicle_trips.is_empty() {
            continue;
        }
        let vehicle = &scenario.vehicles[v];
        let d_tot = route_distance(v, vehicle_trips, cache);
        let rt = route_time(vehicle, v, vehicle_trips, cache, scenario);
        let fuel = vehicle.f_mob * d_tot + vehicle.f_stop * rt.t_wait;
        let cost = vehicle.c_mob * d_tot + vehicle.c_stop * rt.t_wait;
        total += cost;
        routes.insert(
            vehicle.id.clone(),
            vehicle_trips
                .iter()
                .map(|trip| trip.iter().map(|&g| scenario.groups[g].id.clone()).collect())
                .collect::<Vec<Vec<String>>>(),
        );
        per_vehicle.insert(
            vehicle.id.clone(),
            VehicleTotals {
                d_tot_km: d_tot,
                t_wait_s: rt.t_wait,
                t_tot_s: rt.t_tot,
                fuel_gal: fuel,
                cost_usd: cost,
            },
        );
    }
    Solution {
        algorithm: Algorithm::Greedy,
        routes,
        per_vehicle,
        total_cost_usd: total,
        uncovered: remaining.iter().map(|&g| scenario.groups[g].id.clone()).collect(),
        time_limit_reached: false,
    }
}
