//! Oracle equivalence for the sequencing, makespan, and cache layers: the
//! fast implementations must match brute-force enumeration exactly.

use lad_core::geo::{EuclideanTravel, Travel};
use lad_core::grouping::min_makespan;
use lad_core::model::Point;
use lad_core::segments::{precompute_segments, spot_check};
use lad_core::seqsolve::{best_sequence, route_distance, route_time, tour_totals};
use lad_core::testkit::{self, brute_force_makespan, brute_force_tsp, InstanceParams};

use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn held_karp_equals_permutation_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for round in 0..200 {
        let n_groups = rng.random_range(2..=8);
        let seed = rng.random::<u64>();
        let s = testkit::rand_instance(
            seed,
            &InstanceParams { n_groups, max_group_size: 2, ..InstanceParams::default() },
        );
        let travel = EuclideanTravel::new(1.3, 40.0).unwrap();
        let cache = precompute_segments(&s, &travel).unwrap();
        let groups: Vec<usize> = (0..n_groups).collect();
        let tour = best_sequence(&cache, &groups);
        let (brute_len, _, _) = brute_force_tsp(&cache, &groups);
        assert_eq!(tour.length_km, brute_len, "round {round} seed {seed}");
        assert!(tour.exact);
    }
}

#[test]
fn makespan_dp_equals_assignment_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for round in 0..300 {
        let n = rng.random_range(1..=8);
        let machines = rng.random_range(1..=4);
        let durations: Vec<f64> = (0..n).map(|_| rng.random_range(30.0..900.0)).collect();
        let dp = min_makespan(&durations, machines);
        let brute = brute_force_makespan(&durations, machines);
        assert_eq!(dp, brute, "round {round} durations {durations:?} machines {machines}");
    }
}

#[test]
fn route_totals_via_cache_equal_direct_provider_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for round in 0..100 {
        let seed = rng.random::<u64>();
        let s = testkit::rand_instance(
            seed,
            &InstanceParams { n_groups: 6, n_vehicles: 3, ..InstanceParams::default() },
        );
        let travel = EuclideanTravel::new(1.3, 40.0).unwrap();
        let cache = precompute_segments(&s, &travel).unwrap();

        // A random multi-trip route.
        let v = rng.random_range(0..s.vehicles.len());
        let mut groups: Vec<usize> = (0..s.groups.len()).collect();
        for i in (1..groups.len()).rev() {
            groups.swap(i, rng.random_range(0..=i));
        }
        let cut = rng.random_range(1..groups.len());
        let trips = vec![groups[..cut].to_vec(), groups[cut..].to_vec()];

        let via_cache_d = route_distance(v, &trips, &cache);
        let via_cache_t = route_time(&s.vehicles[v], v, &trips, &cache, &s);

        // Straight off the provider, folding per-trip subtotals the same way.
        let depot = s.depot;
        let home = s.vehicles[v].home;
        let mut d = travel.distance_km(home, depot).unwrap();
        let mut t = travel.travel_time_s(home, depot).unwrap();
        for trip in &trips {
            let mut trip_d = travel.distance_km(depot, s.groups[trip[0]].waiting_location).unwrap();
            let mut trip_t = travel.travel_time_s(depot, s.groups[trip[0]].waiting_location).unwrap();
            for pair in trip.windows(2) {
                let a = s.groups[pair[0]].waiting_location;
                let b = s.groups[pair[1]].waiting_location;
                trip_d += travel.distance_km(a, b).unwrap();
                trip_t += travel.travel_time_s(a, b).unwrap();
            }
            let last = s.groups[trip[trip.len() - 1]].waiting_location;
            trip_d += travel.distance_km(depot, last).unwrap();
            trip_t += travel.travel_time_s(depot, last).unwrap();
            d += trip_d;
            t += s.vehicles[v].t_load;
            t += trip_t;
        }
        d += travel.distance_km(home, depot).unwrap();
        t += travel.travel_time_s(home, depot).unwrap();
        let mut wait = 0.0;
        for g in 0..s.groups.len() {
            wait += s.groups[g].t_delivery; // every group is visited above
        }
        t += wait;

        assert_eq!(via_cache_d, d, "round {round} seed {seed}");
        assert_eq!(via_cache_t.t_tot, t, "round {round} seed {seed}");
        assert_eq!(via_cache_t.t_wait, wait, "round {round} seed {seed}");
    }
}

#[test]
fn cache_entries_match_provider_spot_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..20 {
        let seed = rng.random::<u64>();
        let s = testkit::rand_instance(seed, &InstanceParams::default());
        let travel = EuclideanTravel::new(1.3, 40.0).unwrap();
        let cache = precompute_segments(&s, &travel).unwrap();
        spot_check(&s, &cache, &travel).unwrap();
    }
}

#[test]
fn reversing_a_trip_keeps_route_distance_on_symmetric_caches() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for _ in 0..50 {
        let seed = rng.random::<u64>();
        let s = testkit::rand_instance(
            seed,
            &InstanceParams { n_groups: 5, ..InstanceParams::default() },
        );
        let travel = EuclideanTravel::new(1.0, 40.0).unwrap();
        let cache = precompute_segments(&s, &travel).unwrap();
        let trips = vec![vec![0, 1, 2], vec![3, 4]];
        let mut reversed = trips.clone();
        reversed[0].reverse();
        let a = route_distance(0, &trips, &cache);
        let b = route_distance(0, &reversed, &cache);
        assert!((a - b).abs() < 1e-9, "seed {seed}: {a} vs {b}");
    }
}

#[test]
fn single_waypoint_tour_totals() {
    let s = testkit::rand_instance(1, &InstanceParams { n_groups: 3, ..InstanceParams::default() });
    let travel = EuclideanTravel::new(1.2, 50.0).unwrap();
    let cache = precompute_segments(&s, &travel).unwrap();
    let (d, t) = tour_totals(&cache, &[1]);
    assert_eq!(d, cache.d_fw(1) + cache.d_fw(1));
    assert_eq!(t, cache.t_fw(1) + cache.t_fw(1));
}

proptest! {
    #[test]
    fn euclidean_axioms(
        ax in -50.0f64..50.0, ay in -50.0f64..50.0,
        bx in -50.0f64..50.0, by in -50.0f64..50.0,
        circuity in 1.0f64..2.5, speed in 5.0f64..120.0,
    ) {
        let m = EuclideanTravel::new(circuity, speed).unwrap();
        let a = Point::new(ax, ay);
        let b = Point::new(bx, by);
        let d_ab = m.distance_km(a, b).unwrap();
        let d_ba = m.distance_km(b, a).unwrap();
        prop_assert!(d_ab >= 0.0);
        prop_assert_eq!(d_ab, d_ba);
        prop_assert_eq!(m.distance_km(a, a).unwrap(), 0.0);
        prop_assert_eq!(m.travel_time_s(a, a).unwrap(), 0.0);
        prop_assert!(m.travel_time_s(a, b).unwrap() >= 0.0);
    }
}
