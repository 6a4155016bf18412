//! Group visit sequencing (the embedded TSP) and route total evaluation.
//!
//! Tours are depot-anchored: a trip departs the distribution center, visits
//! its groups' waiting locations, and returns. Up to [`HELD_KARP_MAX`]
//! groups the sequence is exact Held-Karp dynamic programming; beyond that a
//! nearest-neighbor tour polished by 2-opt is used and the result is flagged
//! non-exact.
//!
//! Leg sums are accumulated strictly in visit order. Brute-force oracles
//! that accumulate the same way reproduce tour lengths bit for bit, which is
//! what lets the equivalence suites assert exact float equality.

use alloc::vec;
use alloc::vec::Vec;

use core::fmt;

use crate::model::{Scenario, Vehicle};
use crate::segments::SegmentCache;

/// Largest group count sequenced exactly: 2^12 * 12^2 DP states stay well
/// under a second.
pub const HELD_KARP_MAX: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum SeqError {
    EmptyGroupSet,
    UnknownGroup(alloc::string::String),
}

impl fmt::Display for SeqError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqError::EmptyGroupSet => write!(f, "cannot sequence an empty group set"),
            SeqError::UnknownGroup(id) => write!(f, "unknown group id '{id}'"),
        }
    }
}

/// A sequenced depot-anchored tour over a set of groups.
#[derive(Debug, Clone, PartialEq)]
pub struct SequencedTour {
    /// Group indices in visit order.
    pub order: Vec<usize>,
    /// depot -> w_1 -> ... -> w_n -> depot, km.
    pub length_km: f64,
    /// The same tour in time segments, seconds.
    pub duration_s: f64,
    /// False when the heuristic path was taken (more than HELD_KARP_MAX
    /// groups).
    pub exact: bool,
}

/// Minimum-length visit order for `groups` (scenario indices). Exact up to
/// [`HELD_KARP_MAX`] groups, nearest-neighbor + 2-opt beyond. Ties prefer
/// lexicographically smaller group ids, so the result is deterministic.
pub fn best_sequence(cache: &SegmentCache, groups: &[usize]) -> SequencedTour {
    assert!(!groups.is_empty(), "best_sequence needs at least one group");
    // Iterate candidates in id order so strict-improvement updates break
    // ties toward lexicographically smaller ids.
    let mut by_id = groups.to_vec();
    by_id.sort_by(|&a, &b| cache.group_id(a).cmp(cache.group_id(b)));

    if by_id.len() == 1 {
        let g = by_id[0];
        return SequencedTour {
            order: by_id,
            length_km: cache.d_fw(g) + cache.d_fw(g),
            duration_s: cache.t_fw(g) + cache.t_fw(g),
            exact: true,
        };
    }
    if by_id.len() <= HELD_KARP_MAX {
        held_karp(cache, &by_id)
    } else {
        nearest_neighbor_two_opt(cache, &by_id)
    }
}

/// Id-based wrapper for [`best_sequence`].
pub fn best_sequence_by_id(cache: &SegmentCache, ids: &[&str]) -> Result<SequencedTour, SeqError> {
    if ids.is_empty() {
        return Err(SeqError::EmptyGroupSet);
    }
    let mut groups = Vec::with_capacity(ids.len());
    for id in ids {
        groups.push(
            cache.group_index(id).ok_or_else(|| SeqError::UnknownGroup((*id).into()))?,
        );
    }
    Ok(best_sequence(cache, &groups))
}

/// Tour length and duration of a fixed visit order, accumulated in visit
/// order.
pub fn tour_totals(cache: &SegmentCache, order: &[usize]) -> (f64, f64) {
    let mut d = cache.d_fw(order[0]);
    let mut t = cache.t_fw(order[0]);
    for w in order.windows(2) {
        d += cache.d_ww(w[0], w[1]);
        t += cache.t_ww(w[0], w[1]);
    }
    d += cache.d_fw(order[order.len() - 1]);
    t += cache.t_fw(order[order.len() - 1]);
    (d, t)
}

fn held_karp(cache: &SegmentCache, groups: &[usize]) -> SequencedTour {
    let n = groups.len();
    let full: usize = (1 << n) - 1;
    const UNSET: f64 = f64::INFINITY;

    // dp[mask][j]: shortest depot-started path visiting `mask`, ending at
    // local index j. Costs accumulate left to right along the path.
    let mut dp = vec![UNSET; (full + 1) * n];
    let mut parent = vec![usize::MAX; (full + 1) * n];
    for j in 0..n {
        dp[(1 << j) * n + j] = cache.d_fw(groups[j]);
    }
    for mask in 1..=full {
        for j in 0..n {
            let cur = dp[mask * n + j];
            if cur == UNSET {
                continue;
            }
            for next in 0..n {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let cand = cur + cache.d_ww(groups[j], groups[next]);
                let slot = (mask | (1 << next)) * n + next;
                if cand < dp[slot] {
                    dp[slot] = cand;
                    parent[slot] = j;
                }
            }
        }
    }

    let mut best_end = 0;
    let mut best_len = dp[full * n] + cache.d_fw(groups[0]);
    for j in 1..n {
        let cand = dp[full * n + j] + cache.d_fw(groups[j]);
        if cand < best_len {
            best_len = cand;
            best_end = j;
        }
    }

    let mut order_local = Vec::with_capacity(n);
    let mut mask = full;
    let mut j = best_end;
    loop {
        order_local.push(j);
        let p = parent[mask * n + j];
        mask ^= 1 << j;
        if mask == 0 {
            break;
        }
        j = p;
    }
    order_local.reverse();
    let order: Vec<usize> = order_local.into_iter().map(|j| groups[j]).collect();
    let (length_km, duration_s) = tour_totals(cache, &order);
    debug_assert_eq!(length_km, best_len);
    SequencedTour { order, length_km, duration_s, exact: true }
}

fn nearest_neighbor_two_opt(cache: &SegmentCache, groups: &[usize]) -> SequencedTour {
    let mut order = nearest_neighbor_order(cache, groups);
    two_opt(cache, &mut order);
    let (length_km, duration_s) = tour_totals(cache, &order);
    SequencedTour { order, length_km, duration_s, exact: false }
}

/// Nearest-neighbor seed from the depot; ties go to the earlier entry of
/// the input.
fn nearest_neighbor_order(cache: &SegmentCache, groups: &[usize]) -> Vec<usize> {
    let mut remaining: Vec<usize> = groups.to_vec();
    let mut order = Vec::with_capacity(remaining.len());
    let mut pick = 0;
    for i in 1..remaining.len() {
        if cache.d_fw(remaining[i]) < cache.d_fw(remaining[pick]) {
            pick = i;
        }
    }
    let mut cur = remaining.remove(pick);
    order.push(cur);
    while !remaining.is_empty() {
        let mut pick = 0;
        for i in 1..remaining.len() {
            if cache.d_ww(cur, remaining[i]) < cache.d_ww(cur, remaining[pick]) {
                pick = i;
            }
        }
        cur = remaining.remove(pick);
        order.push(cur);
    }
    order
}

/// 2-opt polish: reverse segments while that shortens the tour. Deltas use
/// the symmetric reading of the cache (the same d_fw/d_ww the totals use).
fn two_opt(cache: &SegmentCache, order: &mut [usize]) {
    let n = order.len();
    let mut improved = true;
    let mut passes = 0;
    while improved && passes < 200 {
        improved = false;
        passes += 1;
        for i in 0..n - 1 {
            for k in i + 1..n {
                let removed = if i == 0 { cache.d_fw(order[i]) } else { cache.d_ww(order[i - 1], order[i]) }
                    + if k == n - 1 { cache.d_fw(order[k]) } else { cache.d_ww(order[k], order[k + 1]) };
                let added = if i == 0 { cache.d_fw(order[k]) } else { cache.d_ww(order[i - 1], order[k]) }
                    + if k == n - 1 { cache.d_fw(order[i]) } else { cache.d_ww(order[i], order[k + 1]) };
                if added + 1e-12 < removed {
                    order[i..=k].reverse();
                    improved = true;
                }
            }
        }
    }
}

/// Total driven distance for a vehicle running `trips` (each an ordered
/// group sequence): home -> depot, every trip's depot-anchored tour, and
/// depot -> home. An empty trip list means the vehicle never dispatches.
///
/// Totals fold per-trip subtotals in trip order; every evaluator in the
/// crate follows the same fold so figures agree bit for bit.
pub fn route_distance(v: usize, trips: &[Vec<usize>], cache: &SegmentCache) -> f64 {
    if trips.is_empty() {
        return 0.0;
    }
    let mut d = cache.d_vf(v);
    for trip in trips {
        assert!(!trip.is_empty(), "trips must be non-empty group sequences");
        d += tour_totals(cache, trip).0;
    }
    d + cache.d_vf(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteTime {
    pub t_tot: f64,
    pub t_wait: f64,
}

/// Total route time and accumulated drone-wait time for a vehicle running
/// `trips`. Loading is charged once per trip (a reload re-loads); waits sum
/// over all visited groups in scenario order.
pub fn route_time(
    vehicle: &Vehicle,
    v: usize,
    trips: &[Vec<usize>],
    cache: &SegmentCache,
    scenario: &Scenario,
) -> RouteTime {
    if trips.is_empty() {
        return RouteTime { t_tot: 0.0, t_wait: 0.0 };
    }
    let t_wait = wait_time(trips, scenario);
    let mut t = cache.t_vf(v);
    for trip in trips {
        assert!(!trip.is_empty(), "trips must be non-empty group sequences");
        t += vehicle.t_load;
        t += tour_totals(cache, trip).1;
    }
    t += cache.t_vf(v);
    RouteTime { t_tot: t + t_wait, t_wait }
}

/// Sum of group delivery makespans over all visited groups, accumulated in
/// scenario index order so the figure is independent of visit order.
pub fn wait_time(trips: &[Vec<usize>], scenario: &Scenario) -> f64 {
    let mut visited = vec![false; scenario.groups.len()];
    for trip in trips {
        for &g in trip {
            visited[g] = true;
        }
    }
    let mut t = 0.0;
    for (g, flag) in visited.iter().enumerate() {
        if *flag {
            t += scenario.groups[g].t_delivery;
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::EuclideanTravel;
    use crate::model::{Customer, DroneParams, Group, Point, VehicleType};
    use crate::segments::precompute_segments;
    use alloc::format;
    use alloc::string::ToString;

    /// Scenario with groups at given waiting locations and one vehicle homed
    /// at the depot.
    fn scenario_at(waits: &[(f64, f64)], t_deliveries: &[f64]) -> Scenario {
        let customers: Vec<Customer> = waits
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Customer { id: format!("c{}", i + 1), position: Point::new(x, y) })
            .collect();
        let groups: Vec<Group> = waits
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Group {
                id: format!("g{}", i + 1),
                members: vec![format!("c{}", i + 1)],
                waiting_location: Point::new(x, y),
                t_delivery: t_deliveries[i],
            })
            .collect();
        Scenario {
            depot: Point::new(0.0, 0.0),
            budget: 1e9,
            drone: DroneParams { speed_kmh: 40.0, range_km: 5.0, service_time_s: 60.0 },
            vehicles: vec![Vehicle {
                id: "v1".to_string(),
                home: Point::new(0.0, 0.0),
                type_tag: VehicleType::Type1,
                c_mob: 0.1,
                c_stop: 0.00013,
                cap: 100,
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

    #[test]
    fn single_group_tour() {
        let s = scenario_at(&[(3.0, 4.0)], &[120.0]);
        let cache = precompute_segments(&s, &EuclideanTravel::new(1.0, 40.0).unwrap()).unwrap();
        let tour = best_sequence(&cache, &[0]);
        assert_eq!(tour.order, vec![0]);
        assert_eq!(tour.length_km, 10.0);
        assert!(tour.exact);
    }

    #[test]
    fn unit_square_tour_is_four() {
        let s = scenario_at(&[(1.0, 0.0), (1.0, 1.0), (0.0, 1.0)], &[0.0, 0.0, 0.0]);
        let cache = precompute_segments(&s, &EuclideanTravel::new(1.0, 40.0).unwrap()).unwrap();
        let tour = best_sequence(&cache, &[0, 1, 2]);
        assert_eq!(tour.length_km, 4.0);
        // Optimal tour walks the square one way or the other.
        assert!(tour.order == vec![0, 1, 2] || tour.order == vec![2, 1, 0], "{:?}", tour.order);
    }

    #[test]
    fn route_distance_example() {
        // d_fw1 = 5, d_w1w2 = 5, d_fw2 = 10, home at depot.
        let s = scenario_at(&[(3.0, 4.0), (6.0, 8.0)], &[600.0, 900.0]);
        let cache = precompute_segments(&s, &EuclideanTravel::new(1.0, 40.0).unwrap()).unwrap();
        assert_eq!(route_distance(0, &[vec![0, 1]], &cache), 20.0);
    }

    #[test]
    fn no_trips_means_no_distance() {
        let s = scenario_at(&[(3.0, 4.0)], &[0.0]);
        let cache = precompute_segments(&s, &EuclideanTravel::new(1.0, 40.0).unwrap()).unwrap();
        assert_eq!(route_distance(0, &[], &cache), 0.0);
        let rt = route_time(&s.vehicles[0], 0, &[], &cache, &s);
        assert_eq!(rt.t_tot, 0.0);
        assert_eq!(rt.t_wait, 0.0);
    }

    #[test]
    fn reload_doubles_the_out_and_back() {
        let s = scenario_at(&[(3.0, 4.0)], &[600.0]);
        let cache = precompute_segments(&s, &EuclideanTravel::new(1.0, 40.0).unwrap()).unwrap();
        // Two single-group trips to the same group: d_vf + 10 + 10 + d_fv.
        assert_eq!(route_distance(0, &[vec![0], vec![0]], &cache), 20.0);
    }

    #[test]
    fn route_time_example() {
        // Segments chosen so t_fw1 = 300, t_w1w2 = 300, t_fw2 = 600 at 60 km/h.
        let s = scenario_at(&[(5.0, 0.0), (10.0, 0.0)], &[600.0, 900.0]);
        let cache = precompute_segments(&s, &EuclideanTravel::new(1.0, 60.0).unwrap()).unwrap();
        let rt = route_time(&s.vehicles[0], 0, &[vec![0, 1]], &cache, &s);
        assert_eq!(rt.t_wait, 1500.0);
        // 0 + (600 load + 300 + 300 + 600) + 0 + 1500
        assert_eq!(rt.t_tot, 3300.0);
    }

    #[test]
    fn t_load_charged_once_per_trip() {
        let s = scenario_at(&[(5.0, 0.0), (10.0, 0.0)], &[0.0, 0.0]);
        let cache = precompute_segments(&s, &EuclideanTravel::new(1.0, 60.0).unwrap()).unwrap();
        let one = route_time(&s.vehicles[0], 0, &[vec![0], vec![1]], &cache, &s);
        let merged = route_time(&s.vehicles[0], 0, &[vec![0, 1]], &cache, &s);
        // Split trips pay loading twice and the extra legs.
        assert_eq!(one.t_tot - merged.t_tot, 600.0 + 300.0 + 600.0 - 300.0);
    }

    #[test]
    fn unknown_id_is_reported() {
        let s = scenario_at(&[(1.0, 0.0)], &[0.0]);
        let cache = precompute_segments(&s, &EuclideanTravel::new(1.0, 40.0).unwrap()).unwrap();
        assert!(matches!(
            best_sequence_by_id(&cache, &["nope"]),
            Err(SeqError::UnknownGroup(_))
        ));
        assert_eq!(best_sequence_by_id(&cache, &["g1"]).unwrap().order, vec![0]);
    }

    #[test]
    fn two_opt_never_worse_than_its_seed() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let n = rng.random_range(13..=16);
            let waits: Vec<(f64, f64)> =
                (0..n).map(|_| (rng.random_range(0.0..15.0), rng.random_range(0.0..15.0))).collect();
            let t_del = vec![0.0; n];
            let s = scenario_at(&waits, &t_del);
            let cache =
                precompute_segments(&s, &EuclideanTravel::new(1.0, 40.0).unwrap()).unwrap();
            let groups: Vec<usize> = (0..n).collect();
            let seed_order = nearest_neighbor_order(&cache, &groups);
            let seed_len = tour_totals(&cache, &seed_order).0;
            let tour = best_sequence(&cache, &groups);
            assert!(!tour.exact);
            assert!(tour.length_km <= seed_len, "{} > {}", tour.length_km, seed_len);
        }
    }

    #[test]
    fn exactness_flag_tracks_the_held_karp_threshold() {
        let waits: Vec<(f64, f64)> = (0..13).map(|i| (i as f64, (i * i % 7) as f64)).collect();
        let t_del = vec![0.0; 13];
        let s = scenario_at(&waits, &t_del);
        let cache = precompute_segments(&s, &EuclideanTravel::new(1.0, 40.0).unwrap()).unwrap();
        assert!(best_sequence(&cache, &(0..12).collect::<Vec<_>>()).exact);
        assert!(!best_sequence(&cache, &(0..13).collect::<Vec<_>>()).exact);
    }
}
