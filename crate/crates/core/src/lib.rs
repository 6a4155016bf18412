//! Solver core for the fleet-and-drone last-mile delivery problem.
//!
//! A pool of autonomous vehicles is available to carry parcels from a
//! distribution center to customer locations. Customers are clustered into
//! groups, each served by drone sorties flown from a per-group waiting
//! location while the vehicle idles there. The solvers select vehicles from
//! the pool and assign group visit sequences to them so that every group is
//! covered at minimum operating cost, subject to budget, load capacity, fuel,
//! and available-time constraints.
//!
//! Two solvers are provided: an exact branch-and-bound search
//! ([`exact::solve_exact`]) and a fast tree-based greedy heuristic
//! ([`greedy::solve_greedy`]). Supporting modules cover customer grouping,
//! travel providers, distance/time segment precomputation, and the embedded
//! group-sequencing TSP.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats, and the CLI
//! live in the companion `lad-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod audit;
pub mod exact;
pub mod geo;
pub mod greedy;
pub mod grouping;
pub mod metrics;
pub mod model;
pub mod segments;
pub mod seqsolve;
pub mod testkit;

pub use geo::{EuclideanTravel, Leg, MatrixTravel, Travel, TravelError};
pub use model::{
    Algorithm, Customer, DroneParams, Group, Point, Scenario, Solution, Vehicle, VehicleTotals,
    VehicleType,
};
pub use segments::SegmentCache;
