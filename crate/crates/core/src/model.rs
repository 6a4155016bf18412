//! Domain types, scenario validation, and the solution shape shared by all
//! solvers.
//!
//! Coordinates are planar kilometers, times are seconds, money is USD, and
//! fuel is gallons throughout. Scenario documents are JSON; the field names
//! chosen here (`budget_usd`, `t_avail_s`, ...) are the wire names.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// A planar location in kilometers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Straight-line (crow-flight) distance in km. Used for drone sorties and
    /// by the euclidean travel provider; road providers supply their own
    /// figures.
    pub fn straight_line_km(self, other: Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Vehicle classes with distinct operating economics. `Custom` carries no
/// defaults; every parameter comes from the document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleType {
    Type1,
    Type2,
    Type3,
    Custom,
}

/// A candidate autonomous vehicle in the pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vehicle {
    pub id: String,
    /// Home location; a dispatched vehicle drives home -> depot, runs its
    /// trips, and returns depot -> home.
    pub home: Point,
    #[serde(rename = "type")]
    pub type_tag: VehicleType,
    /// Operating cost while moving, USD per km.
    #[serde(rename = "c_mob_usd_per_km")]
    pub c_mob: f64,
    /// Operating cost while parked waiting for drones, USD per second.
    #[serde(rename = "c_stop_usd_per_s")]
    pub c_stop: f64,
    /// Load capacity in parcels.
    pub cap: u32,
    /// Time the vehicle is available for delivery work, seconds.
    #[serde(rename = "t_avail_s")]
    pub t_avail: f64,
    /// Fuel on board, gallons.
    #[serde(rename = "f_avail_gal")]
    pub f_avail: f64,
    /// Fuel burn while moving, gallons per km.
    #[serde(rename = "f_mob_gal_per_km")]
    pub f_mob: f64,
    /// Fuel burn while idling, gallons per second.
    #[serde(rename = "f_stop_gal_per_s")]
    pub f_stop: f64,
    /// Parcel loading time at the depot, charged once per trip, seconds.
    #[serde(rename = "t_load_s", default = "default_t_load")]
    pub t_load: f64,
    /// Drones carried by the vehicle.
    #[serde(default = "default_n_drones")]
    pub n_drones: u32,
}

fn default_t_load() -> f64 {
    600.0
}

fn default_n_drones() -> u32 {
    3
}

/// A customer location expecting exactly one parcel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Customer {
    pub id: String,
    pub position: Point,
}

/// A cluster of customers served by drone sorties from one waiting location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Group {
    pub id: String,
    /// Customer ids, in scenario order. Non-empty.
    pub members: Vec<String>,
    /// Where the vehicle parks while drones serve this group.
    pub waiting_location: Point,
    /// Precomputed drone-delivery makespan for the group, seconds.
    #[serde(rename = "t_delivery_s")]
    pub t_delivery: f64,
}

impl Group {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Drone fleet parameters shared by the whole scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DroneParams {
    pub speed_kmh: f64,
    /// One-way flight range from the waiting location, km.
    pub range_km: f64,
    /// Per-delivery handling time at the customer, seconds.
    pub service_time_s: f64,
}

/// A full problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub depot: Point,
    #[serde(rename = "budget_usd")]
    pub budget: f64,
    pub drone: DroneParams,
    pub vehicles: Vec<Vehicle>,
    pub customers: Vec<Customer>,
    /// May be empty for a raw scenario; the grouping stage fills it in.
    #[serde(default)]
    pub groups: Vec<Group>,
}

impl Scenario {
    pub fn vehicle_index(&self, id: &str) -> Option<usize> {
        self.vehicles.iter().position(|v| v.id == id)
    }

    pub fn group_index(&self, id: &str) -> Option<usize> {
        self.groups.iter().position(|g| g.id == id)
    }

    pub fn customer_index(&self, id: &str) -> Option<usize> {
        self.customers.iter().position(|c| c.id == id)
    }

    /// Parcels demanded by group `g` (one per member).
    pub fn group_size(&self, g: usize) -> usize {
        self.groups[g].size()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Exact,
    Greedy,
}

/// Rolled-up route figures for one participating vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleTotals {
    pub d_tot_km: f64,
    pub t_wait_s: f64,
    pub t_tot_s: f64,
    pub fuel_gal: f64,
    pub cost_usd: f64,
}

/// A solver output: per-vehicle trips plus cost accounting.
///
/// A trip is one depot-loaded tour of group visits; a vehicle with several
/// trips returns to the depot to reload between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solution {
    pub algorithm: Algorithm,
    /// Vehicle id -> trips, each trip an ordered group visit sequence.
    /// Only vehicles with at least one trip appear.
    pub routes: BTreeMap<String, Vec<Vec<String>>>,
    pub per_vehicle: BTreeMap<String, VehicleTotals>,
    pub total_cost_usd: f64,
    /// Groups no solver commitment covers (greedy halts on budget).
    pub uncovered: BTreeSet<String>,
    /// Set when an exact search was cut off and returned its incumbent.
    #[serde(default)]
    pub time_limit_reached: bool,
}

impl Solution {
    pub fn n_participating(&self) -> usize {
        self.routes.len()
    }

    pub fn is_fully_covered(&self) -> bool {
        self.uncovered.is_empty()
    }
}

/// Checks every type invariant plus the group/customer partition. Returns
/// one description per violation; an empty list means the scenario is valid.
pub fn validate_scenario(s: &Scenario) -> Vec<String> {
    let mut out = Vec::new();

    if !s.depot.is_finite() {
        out.push(format!("depot coordinates must be finite, got ({}, {})", s.depot.x, s.depot.y));
    }
    if !s.budget.is_finite() || s.budget < 0.0 {
        out.push(format!("budget_usd must be finite and >= 0, got {}", s.budget));
    }
    if !s.drone.speed_kmh.is_finite() || s.drone.speed_kmh <= 0.0 {
        out.push(format!("drone.speed_kmh must be finite and > 0, got {}", s.drone.speed_kmh));
    }
    if !s.drone.range_km.is_finite() || s.drone.range_km <= 0.0 {
        out.push(format!("drone.range_km must be finite and > 0, got {}", s.drone.range_km));
    }
    if !s.drone.service_time_s.is_finite() || s.drone.service_time_s < 0.0 {
        out.push(format!(
            "drone.service_time_s must be finite and >= 0, got {}",
            s.drone.service_time_s
        ));
    }

    let mut vehicle_ids = BTreeSet::new();
    for v in &s.vehicles {
        if !vehicle_ids.insert(v.id.as_str()) {
            out.push(format!("duplicate vehicle id '{}'", v.id));
        }
        if !v.home.is_finite() {
            out.push(format!("vehicle '{}': home coordinates must be finite", v.id));
        }
        for (name, value) in [
            ("c_mob_usd_per_km", v.c_mob),
            ("c_stop_usd_per_s", v.c_stop),
            ("t_avail_s", v.t_avail),
            ("f_avail_gal", v.f_avail),
            ("f_mob_gal_per_km", v.f_mob),
            ("f_stop_gal_per_s", v.f_stop),
            ("t_load_s", v.t_load),
        ] {
            if !value.is_finite() || value < 0.0 {
                out.push(format!("vehicle '{}': {} must be finite and >= 0, got {}", v.id, name, value));
            }
        }
        if v.cap < 1 {
            out.push(format!("vehicle '{}': cap must be >= 1, got {}", v.id, v.cap));
        }
        if v.n_drones < 1 {
            out.push(format!("vehicle '{}': n_drones must be >= 1, got {}", v.id, v.n_drones));
        }
    }

    let mut customer_ids = BTreeSet::new();
    for c in &s.customers {
        if !customer_ids.insert(c.id.as_str()) {
            out.push(format!("duplicate customer id '{}'", c.id));
        }
        if !c.position.is_finite() {
            out.push(format!("customer '{}': position must be finite", c.id));
        }
    }

    let mut group_ids = BTreeSet::new();
    // customer id -> groups that claim it
    let mut claimed: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for g in &s.groups {
        if !group_ids.insert(g.id.as_str()) {
            out.push(format!("duplicate group id '{}'", g.id));
        }
        if g.members.is_empty() {
            out.push(format!("group '{}': members must be non-empty", g.id));
        }
        if !g.waiting_location.is_finite() {
            out.push(format!("group '{}': waiting_location must be finite", g.id));
        }
        if !g.t_delivery.is_finite() || g.t_delivery < 0.0 {
            out.push(format!("group '{}': t_delivery_s must be finite and >= 0, got {}", g.id, g.t_delivery));
        }
        let mut seen_in_group = BTreeSet::new();
        for m in &g.members {
            if !customer_ids.contains(m.as_str()) {
                out.push(format!("group '{}': member '{}' is not a known customer id", g.id, m));
                continue;
            }
            if !seen_in_group.insert(m.as_str()) {
                out.push(format!("group '{}': member '{}' listed twice", g.id, m));
                continue;
            }
            claimed.entry(m.as_str()).or_default().push(g.id.as_str());
        }
    }

    // The groups, when present, must partition the customer set.
    if !s.groups.is_empty() {
        for (customer, groups) in &claimed {
            if groups.len() > 1 {
                out.push(format!(
                    "customer '{}' belongs to {} groups ({}); groups must partition the customers",
                    customer,
                    groups.len(),
                    groups.join(", ")
                ));
            }
        }
        for c in &s.customers {
            if !claimed.contains_key(c.id.as_str()) {
                out.push(format!("customer '{}' belongs to no group", c.id));
            }
        }
    }

    out
}
