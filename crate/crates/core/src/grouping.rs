//! Customer grouping: partition customers into drone-coverable clusters,
//! place a waiting location at each cluster centroid, and precompute the
//! drone-delivery makespan per group.
//!
//! The clustering is a seeded, capacity-constrained k-means variant:
//! centroids start by farthest-point sampling, customers are assigned
//! nearest-first under a per-group size cap, centroids are recomputed to the
//! member mean, and the loop runs to a fixed point (at most 50 rounds). Any
//! group left with a member beyond drone range is split until compliant; a
//! singleton group is always compliant because its centroid is the customer
//! itself.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use core::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Customer, Group, Point};

const MAX_ROUNDS: usize = 50;

/// Jobs longer than this are scheduled with LPT instead of the exact subset
/// DP (3^n states).
const EXACT_MAKESPAN_MAX_JOBS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub enum GroupingError {
    NoCustomers,
    BadParameter(String),
    /// target_groups cannot hold all customers under max_group_size.
    TargetTooSmall { target: usize, minimum: usize },
    /// More groups requested than there are customers.
    TargetTooLarge { target: usize, customers: usize },
    UnknownMember { group: String, member: String },
}

impl fmt::Display for GroupingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupingError::NoCustomers => write!(f, "cannot group an empty customer set"),
            GroupingError::BadParameter(msg) => write!(f, "{msg}"),
            GroupingError::TargetTooSmall { target, minimum } => write!(
                f,
                "target_groups {target} cannot hold all customers; at least {minimum} groups are needed"
            ),
            GroupingError::TargetTooLarge { target, customers } => {
                write!(f, "target_groups {target} exceeds the {customers} customers available")
            }
            GroupingError::UnknownMember { group, member } => {
                write!(f, "group '{group}' references unknown customer '{member}'")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroupingConfig {
    /// One-way drone range from the waiting location, km.
    pub drone_range_km: f64,
    /// Hard cap on members per group.
    pub max_group_size: usize,
    /// Number of groups to build; defaults to the minimum that fits.
    pub target_groups: Option<usize>,
    pub seed: u64,
    /// Drones flying sorties for one group at a time.
    pub n_drones: u32,
    pub drone_speed_kmh: f64,
    /// Handling time per delivery, seconds.
    pub service_time_s: f64,
}

/// Round-trip flight plus handling for one parcel, seconds.
pub fn sortie_duration_s(waiting: Point, member: Point, speed_kmh: f64, service_time_s: f64) -> f64 {
    2.0 * waiting.straight_line_km(member) / speed_kmh * 3600.0 + service_time_s
}

/// Minimum makespan of scheduling `durations` on `machines` identical
/// drones. Exact (subset DP) for up to 10 jobs, LPT list scheduling above.
pub fn min_makespan(durations: &[f64], machines: usize) -> f64 {
    assert!(machines >= 1, "makespan needs at least one machine");
    if durations.is_empty() {
        return 0.0;
    }
    let m = machines.min(durations.len());
    if m == 1 {
        return sum_in_index_order(durations);
    }
    if durations.len() <= EXACT_MAKESPAN_MAX_JOBS {
        exact_makespan(durations, m)
    } else {
        lpt_makespan(durations, m)
    }
}

fn sum_in_index_order(durations: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &d in durations {
        acc += d;
    }
    acc
}

fn exact_makespan(durations: &[f64], machines: usize) -> f64 {
    let n = durations.len();
    let full = (1usize << n) - 1;

    // Subset sums, accumulating jobs in ascending index order.
    let mut sums = vec![0.0f64; full + 1];
    for mask in 1..=full {
        let high = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
        sums[mask] = sums[mask ^ (1 << high)] + durations[high];
    }

    // best[mask] = makespan of mask on the machines used so far.
    let mut best = sums.clone(); // one machine
    for _ in 1..machines {
        let mut next = vec![0.0f64; full + 1];
        for mask in 1..=full {
            let mut b = best[mask]; // putting nothing on the new machine
            // Enumerate non-empty proper submasks for the new machine.
            let mut sub = mask;
            loop {
                sub = (sub - 1) & mask;
                if sub == 0 {
                    break;
                }
                let cand_new = sums[sub];
                let cand_rest = best[mask ^ sub];
                let cand = if cand_new > cand_rest { cand_new } else { cand_rest };
                if cand < b {
                    b = cand;
                }
            }
            next[mask] = b;
        }
        best = next;
    }
    best[full]
}

fn lpt_makespan(durations: &[f64], machines: usize) -> f64 {
    let mut order: Vec<usize> = (0..durations.len()).collect();
    order.sort_by(|&a, &b| durations[b].total_cmp(&durations[a]).then(a.cmp(&b)));
    let mut loads = vec![0.0f64; machines];
    for &j in &order {
        let mut argmin = 0;
        for k in 1..machines {
            if loads[k] < loads[argmin] {
                argmin = k;
            }
        }
        loads[argmin] += durations[j];
    }
    let mut best = loads[0];
    for &l in &loads[1..] {
        if l > best {
            best = l;
        }
    }
    best
}

/// Drone-delivery makespan for a group: one sortie per member, scheduled on
/// `n_drones` identical drones.
pub fn group_delivery_time(
    group: &Group,
    customer_positions: &BTreeMap<String, Point>,
    n_drones: u32,
    drone_speed_kmh: f64,
    service_time_s: f64,
) -> Result<f64, GroupingError> {
    if n_drones < 1 {
        return Err(GroupingError::BadParameter(format!("n_drones must be >= 1, got {n_drones}")));
    }
    if drone_speed_kmh.is_nan() || drone_speed_kmh <= 0.0 {
        return Err(GroupingError::BadParameter(format!(
            "drone speed must be > 0 km/h, got {drone_speed_kmh}"
        )));
    }
    let mut sorties = Vec::with_capacity(group.members.len());
    for m in &group.members {
        let p = customer_positions.get(m).ok_or_else(|| GroupingError::UnknownMember {
            group: group.id.clone(),
            member: m.clone(),
        })?;
        sorties.push(sortie_duration_s(group.waiting_location, *p, drone_speed_kmh, service_time_s));
    }
    Ok(min_makespan(&sorties, n_drones as usize))
}

/// Partitions the customers into groups, places waiting locations at member
/// centroids, and fills in each group's delivery makespan. Deterministic for
/// a fixed seed.
pub fn build_groups(customers: &[Customer], cfg: &GroupingConfig) -> Result<Vec<Group>, GroupingError> {
    if customers.is_empty() {
        return Err(GroupingError::NoCustomers);
    }
    if !cfg.drone_range_km.is_finite() || cfg.drone_range_km <= 0.0 {
        return Err(GroupingError::BadParameter(format!(
            "drone range must be finite and > 0 km, got {}",
            cfg.drone_range_km
        )));
    }
    if cfg.max_group_size < 1 {
        return Err(GroupingError::BadParameter("max_group_size must be >= 1".into()));
    }
    if cfg.n_drones < 1 {
        return Err(GroupingError::BadParameter("n_drones must be >= 1".into()));
    }
    if !cfg.drone_speed_kmh.is_finite() || cfg.drone_speed_kmh <= 0.0 {
        return Err(GroupingError::BadParameter(format!(
            "drone speed must be finite and > 0 km/h, got {}",
            cfg.drone_speed_kmh
        )));
    }
    if !cfg.service_time_s.is_finite() || cfg.service_time_s < 0.0 {
        return Err(GroupingError::BadParameter(format!(
            "service time must be finite and >= 0 s, got {}",
            cfg.service_time_s
        )));
    }

    let n = customers.len();
    let minimum = n.div_ceil(cfg.max_group_size);
    let k = cfg.target_groups.unwrap_or(minimum);
    if k < minimum {
        return Err(GroupingError::TargetTooSmall { target: k, minimum });
    }
    if k > n {
        return Err(GroupingError::TargetTooLarge { target: k, customers: n });
    }

    let points: Vec<Point> = customers.iter().map(|c| c.position).collect();
    let mut clusters = cluster(&points, k, cfg.max_group_size, cfg.seed);

    // Split any cluster whose centroid cannot reach every member.
    let mut compliant: Vec<Vec<usize>> = Vec::new();
    while let Some(members) = clusters.pop() {
        let c = centroid(&points, &members);
        if members.iter().all(|&i| c.straight_line_km(points[i]) <= cfg.drone_range_km) {
            compliant.push(members);
        } else {
            assert!(members.len() > 1, "a singleton centroid is the customer itself");
            let (a, b) = split_cluster(&points, &members);
            clusters.push(a);
            clusters.push(b);
        }
    }
    compliant.sort_by_key(|members| members[0]);

    let width = digits(compliant.len());
    let mut groups = Vec::with_capacity(compliant.len());
    for (gi, members) in compliant.iter().enumerate() {
        let waiting = centroid(&points, members);
        let sorties: Vec<f64> = members
            .iter()
            .map(|&i| sortie_duration_s(waiting, points[i], cfg.drone_speed_kmh, cfg.service_time_s))
            .collect();
        let t_delivery = min_makespan(&sorties, cfg.n_drones as usize);
        groups.push(Group {
            id: format!("g{:0width$}", gi + 1, width = width),
            members: members.iter().map(|&i| customers[i].id.clone()).collect(),
            waiting_location: waiting,
            t_delivery,
        });
    }
    Ok(groups)
}

fn digits(n: usize) -> usize {
    let mut d = 1;
    let mut v = n;
    while v >= 10 {
        v /= 10;
        d += 1;
    }
    d
}

fn centroid(points: &[Point], members: &[usize]) -> Point {
    let mut sx = 0.0;
    let mut sy = 0.0;
    for &i in members {
        sx += points[i].x;
        sy += points[i].y;
    }
    let m = members.len() as f64;
    Point::new(sx / m, sy / m)
}

/// Capacity-constrained k-means. Returns member index lists, each non-empty
/// unless a centroid ends up starved (possible but rare; such clusters are
/// dropped).
fn cluster(points: &[Point], k: usize, max_size: usize, seed: u64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Farthest-point sampling for the initial centroids.
    let start = rng.random_range(0..n);
    let mut centroids: Vec<Point> = vec![points[start]];
    let mut nearest: Vec<f64> = points.iter().map(|p| p.straight_line_km(points[start])).collect();
    while centroids.len() < k {
        let mut far = 0;
        for i in 1..n {
            if nearest[i] > nearest[far] {
                far = i;
            }
        }
        centroids.push(points[far]);
        for i in 0..n {
            let d = points[i].straight_line_km(points[far]);
            if d < nearest[i] {
                nearest[i] = d;
            }
        }
    }

    let mut assignment: Vec<usize> = vec![usize::MAX; n];
    for _ in 0..MAX_ROUNDS {
        let next = assign_capacitated(points, &centroids, max_size);
        let stable = next == assignment;
        assignment = next;
        // Move centroids to member means; empty clusters keep their spot.
        let mut sums = vec![(0.0f64, 0.0f64, 0usize); k];
        for (i, &a) in assignment.iter().enumerate() {
            sums[a].0 += points[i].x;
            sums[a].1 += points[i].y;
            sums[a].2 += 1;
        }
        for (j, &(sx, sy, m)) in sums.iter().enumerate() {
            if m > 0 {
                centroids[j] = Point::new(sx / m as f64, sy / m as f64);
            }
        }
        if stable {
            break;
        }
    }

    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &a) in assignment.iter().enumerate() {
        clusters[a].push(i);
    }
    // A starved centroid would shrink the group count below the requested
    // target; reseed it with the worst-placed customer of a multi-member
    // cluster.
    while let Some(empty) = clusters.iter().position(Vec::is_empty) {
        let mut worst: Option<(f64, usize, usize)> = None;
        for (ci, members) in clusters.iter().enumerate() {
            if members.len() < 2 {
                continue;
            }
            let c = centroid(points, members);
            for (mi, &i) in members.iter().enumerate() {
                let d = c.straight_line_km(points[i]);
                if worst.map(|(w, _, _)| d > w).unwrap_or(true) {
                    worst = Some((d, ci, mi));
                }
            }
        }
        let Some((_, ci, mi)) = worst else { break };
        let moved = clusters[ci].remove(mi);
        clusters[empty].push(moved);
    }
    clusters.retain(|c| !c.is_empty());
    clusters
}

/// Nearest-first assignment under the per-cluster cap: all (customer,
/// centroid) pairs are ranked by distance and granted greedily while the
/// customer is unassigned and the centroid has room.
fn assign_capacitated(points: &[Point], centroids: &[Point], max_size: usize) -> Vec<usize> {
    let n = points.len();
    let k = centroids.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * k);
    for (i, p) in points.iter().enumerate() {
        for (j, c) in centroids.iter().enumerate() {
            pairs.push((p.straight_line_km(*c), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut assignment = vec![usize::MAX; n];
    let mut counts = vec![0usize; k];
    let mut assigned = 0;
    for &(_, i, j) in &pairs {
        if assignment[i] == usize::MAX && counts[j] < max_size {
            assignment[i] = j;
            counts[j] += 1;
            assigned += 1;
            if assigned == n {
                break;
            }
        }
    }
    debug_assert_eq!(assigned, n, "k * max_size >= n guarantees everyone a seat");
    assignment
}

/// Two-means split seeded with the farthest pair, used on range violations.
fn split_cluster(points: &[Point], members: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut seed_a = members[0];
    let mut seed_b = members[1];
    let mut best = points[seed_a].straight_line_km(points[seed_b]);
    for (ai, &a) in members.iter().enumerate() {
        for &b in &members[ai + 1..] {
            let d = points[a].straight_line_km(points[b]);
            if d > best {
                best = d;
                seed_a = a;
                seed_b = b;
            }
        }
    }
    let mut ca = points[seed_a];
    let mut cb = points[seed_b];
    let mut side: Vec<bool> = Vec::new();
    for _ in 0..MAX_ROUNDS {
        let next: Vec<bool> = members
            .iter()
            .map(|&i| points[i].straight_line_km(cb) < points[i].straight_line_km(ca))
            .collect();
        let stable = next == side;
        side = next;
        let a_members: Vec<usize> =
            members.iter().zip(&side).filter(|&(_, s)| !s).map(|(&i, _)| i).collect();
        let b_members: Vec<usize> =
            members.iter().zip(&side).filter(|&(_, s)| *s).map(|(&i, _)| i).collect();
        if a_members.is_empty() || b_members.is_empty() {
            break;
        }
        ca = centroid(points, &a_members);
        cb = centroid(points, &b_members);
        if stable {
            return (a_members, b_members);
        }
    }
    // Degenerate geometry; halve deterministically.
    let mid = members.len() / 2;
    (members[..mid].to_vec(), members[mid..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn customers_from(points: &[(f64, f64)]) -> Vec<Customer> {
        points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Customer { id: format!("c{:03}", i + 1), position: Point::new(x, y) })
            .collect()
    }

    fn config(range: f64, max: usize, target: Option<usize>) -> GroupingConfig {
        GroupingConfig {
            drone_range_km: range,
            max_group_size: max,
            target_groups: target,
            seed: 7,
            n_drones: 3,
            drone_speed_kmh: 30.0,
            service_time_s: 60.0,
        }
    }

    #[test]
    fn two_nearby_customers_form_one_group_at_midpoint() {
        let customers = customers_from(&[(0.0, 0.0), (0.2, 0.0)]);
        let groups = build_groups(&customers, &config(1.0, 7, None)).unwrap();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].waiting_location, Point::new(0.1, 0.0));
        assert_eq!(groups[0].members, alloc::vec!["c001".to_string(), "c002".to_string()]);
    }

    #[test]
    fn singleton_group_sits_on_the_customer() {
        let customers = customers_from(&[(4.0, 5.0)]);
        let groups = build_groups(&customers, &config(1.0, 7, None)).unwrap();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].waiting_location, Point::new(4.0, 5.0));
    }

    #[test]
    fn parallel_sorties_take_one_wave() {
        // Three members each 0.5 km out: sortie = 2*0.5/30 h + 60 s = 180 s.
        let g = Group {
            id: "g1".to_string(),
            members: alloc::vec!["a".to_string(), "b".to_string(), "c".to_string()],
            waiting_location: Point::new(0.0, 0.0),
            t_delivery: 0.0,
        };
        let mut pos = BTreeMap::new();
        pos.insert("a".to_string(), Point::new(0.5, 0.0));
        pos.insert("b".to_string(), Point::new(-0.5, 0.0));
        pos.insert("c".to_string(), Point::new(0.0, 0.5));
        assert_eq!(group_delivery_time(&g, &pos, 3, 30.0, 60.0).unwrap(), 180.0);
        // One drone flies them back to back.
        assert_eq!(group_delivery_time(&g, &pos, 1, 30.0, 60.0).unwrap(), 540.0);
    }

    #[test]
    fn makespan_matches_hand_example() {
        // {180,180,180,60} on 2 drones: best split is 360.
        assert_eq!(min_makespan(&[180.0, 180.0, 180.0, 60.0], 2), 360.0);
    }

    #[test]
    fn makespan_bounds_hold() {
        let durations = [120.0, 95.0, 310.0, 40.0, 40.0, 200.0];
        for m in 1..=4 {
            let span = min_makespan(&durations, m);
            let max = durations.iter().cloned().fold(0.0, f64::max);
            let sum: f64 = durations.iter().sum();
            assert!(span >= max && span <= sum, "m={m} span={span}");
        }
    }

    #[test]
    fn target_too_small_is_rejected() {
        let customers = customers_from(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let err = build_groups(&customers, &config(5.0, 1, Some(2))).unwrap_err();
        assert!(matches!(err, GroupingError::TargetTooSmall { minimum: 3, .. }));
    }

    #[test]
    fn range_violations_force_splits() {
        // Two distant customers cannot share a group with a 1 km range.
        let customers = customers_from(&[(0.0, 0.0), (10.0, 0.0)]);
        let groups = build_groups(&customers, &config(1.0, 7, Some(1))).unwrap();
        assert_eq!(groups.len(), 2);
        for g in &groups {
            assert_eq!(g.members.len(), 1);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let pts: Vec<(f64, f64)> =
            (0..40).map(|i| ((i * 7 % 13) as f64, (i * 11 % 17) as f64)).collect();
        let customers = customers_from(&pts);
        let a = build_groups(&customers, &config(6.0, 5, Some(10))).unwrap();
        let b = build_groups(&customers, &config(6.0, 5, Some(10))).unwrap();
        assert_eq!(a, b);
    }
}
