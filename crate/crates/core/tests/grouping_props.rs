//! Grouping properties over random customer sets: exact partition, the
//! drone-range bound, the size cap, makespan bounds, and seed determinism.

use std::collections::BTreeSet;

use lad_core::grouping::{build_groups, sortie_duration_s, GroupingConfig};
use lad_core::model::{Customer, Point};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_customers(rng: &mut ChaCha8Rng, n: usize, box_km: f64) -> Vec<Customer> {
    (0..n)
        .map(|i| Customer {
            id: format!("c{:03}", i + 1),
            position: Point::new(rng.random_range(0.0..box_km), rng.random_range(0.0..box_km)),
        })
        .collect()
}

#[test]
fn partition_range_and_size_hold_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for round in 0..30 {
        let n = rng.random_range(1..=120);
        let customers = random_customers(&mut rng, n, 12.0);
        let cfg = GroupingConfig {
            drone_range_km: rng.random_range(1.5..4.0),
            max_group_size: rng.random_range(1..=7),
            target_groups: None,
            seed: rng.random(),
            n_drones: rng.random_range(1..=4),
            drone_speed_kmh: 30.0,
            service_time_s: 120.0,
        };
        let groups = build_groups(&customers, &cfg).unwrap();

        // Exact partition of the customer set.
        let mut seen = BTreeSet::new();
        for g in &groups {
            assert!(!g.members.is_empty(), "round {round}");
            assert!(g.members.len() <= cfg.max_group_size, "round {round}");
            for m in &g.members {
                assert!(seen.insert(m.clone()), "round {round}: '{m}' in two groups");
            }
        }
        assert_eq!(seen.len(), n, "round {round}: not a partition");

        for g in &groups {
            let mut sorties = Vec::new();
            for m in &g.members {
                let c = customers.iter().find(|c| &c.id == m).unwrap();
                let reach = g.waiting_location.straight_line_km(c.position);
                assert!(
                    reach <= cfg.drone_range_km + 1e-12,
                    "round {round}: member {reach} km out of range {}",
                    cfg.drone_range_km
                );
                sorties.push(sortie_duration_s(
                    g.waiting_location,
                    c.position,
                    cfg.drone_speed_kmh,
                    cfg.service_time_s,
                ));
            }
            let longest = sorties.iter().cloned().fold(0.0, f64::max);
            let serial: f64 = sorties.iter().sum();
            assert!(
                g.t_delivery >= longest - 1e-9 && g.t_delivery <= serial + 1e-9,
                "round {round}: makespan {} outside [{longest}, {serial}]",
                g.t_delivery
            );
        }
    }
}

#[test]
fn target_group_count_is_honored() {
    let mut rng = ChaCha8Rng::seed_from_u64(607);
    let customers = random_customers(&mut rng, 100, 15.0);
    for target in [20, 30, 50] {
        let cfg = GroupingConfig {
            drone_range_km: 6.0, // generous, so no splits fire
            max_group_size: 7,
            target_groups: Some(target),
            seed: 3,
            n_drones: 3,
            drone_speed_kmh: 30.0,
            service_time_s: 120.0,
        };
        let groups = build_groups(&customers, &cfg).unwrap();
        assert_eq!(groups.len(), target);
    }
}
