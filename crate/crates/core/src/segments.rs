//! Precomputed distance and time segments between the depot, waiting
//! locations, and vehicle homes.
//!
//! Solvers evaluate many candidate visit sequences; looking legs up in this
//! cache keeps the provider (possibly a remote service) out of the hot path.
//! The cache is keyed by scenario indices so matrix-backed providers can be
//! filled from a single batched table call.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use core::fmt;

use crate::geo::{Travel, TravelError};
use crate::model::Scenario;

/// Site naming used in error messages and the matrix file layout.
#[derive(Debug, Clone, PartialEq)]
pub enum SiteRef {
    Depot,
    Group(String),
    Vehicle(String),
}

impl fmt::Display for SiteRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiteRef::Depot => write!(f, "depot"),
            SiteRef::Group(id) => write!(f, "group '{id}' waiting location"),
            SiteRef::Vehicle(id) => write!(f, "vehicle '{id}' home"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentError {
    pub from: SiteRef,
    pub to: SiteRef,
    pub source: TravelError,
}

impl fmt::Display for SegmentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "segment {} -> {}: {}", self.from, self.to, self.source)
    }
}

/// All travel legs the solvers consult. Vehicle/group order matches the
/// scenario's declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentCache {
    vehicle_ids: Vec<String>,
    group_ids: Vec<String>,
    /// Vehicle home <-> depot, by vehicle index.
    d_vf: Vec<f64>,
    t_vf: Vec<f64>,
    /// Depot <-> waiting location, by group index.
    d_fw: Vec<f64>,
    t_fw: Vec<f64>,
    /// Waiting location pairs, row-major by group index.
    d_ww: Vec<f64>,
    t_ww: Vec<f64>,
}

impl SegmentCache {
    pub fn n_vehicles(&self) -> usize {
        self.vehicle_ids.len()
    }

    pub fn n_groups(&self) -> usize {
        self.group_ids.len()
    }

    pub fn vehicle_id(&self, v: usize) -> &str {
        &self.vehicle_ids[v]
    }

    pub fn group_id(&self, g: usize) -> &str {
        &self.group_ids[g]
    }

    pub fn group_index(&self, id: &str) -> Option<usize> {
        self.group_ids.iter().position(|g| g == id)
    }

    pub fn vehicle_index(&self, id: &str) -> Option<usize> {
        self.vehicle_ids.iter().position(|v| v == id)
    }

    /// Home <-> depot distance for vehicle `v`, km.
    pub fn d_vf(&self, v: usize) -> f64 {
        self.d_vf[v]
    }

    pub fn t_vf(&self, v: usize) -> f64 {
        self.t_vf[v]
    }

    /// Depot <-> waiting location distance for group `g`, km.
    pub fn d_fw(&self, g: usize) -> f64 {
        self.d_fw[g]
    }

    pub fn t_fw(&self, g: usize) -> f64 {
        self.t_fw[g]
    }

    /// Waiting-to-waiting distance from group `a` to group `b`, km.
    pub fn d_ww(&self, a: usize, b: usize) -> f64 {
        self.d_ww[a * self.group_ids.len() + b]
    }

    pub fn t_ww(&self, a: usize, b: usize) -> f64 {
        self.t_ww[a * self.group_ids.len() + b]
    }
}

/// Fills the cache with one provider call per segment: O(|V| + |G| + |G|^2)
/// calls in total. Provider failures surface with the offending site pair.
pub fn precompute_segments(s: &Scenario, travel: &dyn Travel) -> Result<SegmentCache, SegmentError> {
    let n_v = s.vehicles.len();
    let n_g = s.groups.len();

    let mut cache = SegmentCache {
        vehicle_ids: s.vehicles.iter().map(|v| v.id.clone()).collect(),
        group_ids: s.groups.iter().map(|g| g.id.clone()).collect(),
        d_vf: vec![0.0; n_v],
        t_vf: vec![0.0; n_v],
        d_fw: vec![0.0; n_g],
        t_fw: vec![0.0; n_g],
        d_ww: vec![0.0; n_g * n_g],
        t_ww: vec![0.0; n_g * n_g],
    };

    for (i, v) in s.vehicles.iter().enumerate() {
        let leg = travel.leg(v.home, s.depot).map_err(|source| SegmentError {
            from: SiteRef::Vehicle(v.id.clone()),
            to: SiteRef::Depot,
            source,
        })?;
        cache.d_vf[i] = leg.distance_km;
        cache.t_vf[i] = leg.duration_s;
    }

    for (i, g) in s.groups.iter().enumerate() {
        let leg = travel.leg(s.depot, g.waiting_location).map_err(|source| SegmentError {
            from: SiteRef::Depot,
            to: SiteRef::Group(g.id.clone()),
            source,
        })?;
        cache.d_fw[i] = leg.distance_km;
        cache.t_fw[i] = leg.duration_s;
    }

    for (i, a) in s.groups.iter().enumerate() {
        for (j, b) in s.groups.iter().enumerate() {
            let leg = travel.leg(a.waiting_location, b.waiting_location).map_err(|source| {
                SegmentError {
                    from: SiteRef::Group(a.id.clone()),
                    to: SiteRef::Group(b.id.clone()),
                    source,
                }
            })?;
            cache.d_ww[i * n_g + j] = leg.distance_km;
            cache.t_ww[i * n_g + j] = leg.duration_s;
        }
    }

    debug_assert!(cache.d_vf.iter().all(|d| *d >= 0.0));
    debug_assert!((0..n_g).all(|i| cache.d_ww(i, i) == 0.0));
    Ok(cache)
}

/// Sanity failure text for a cache whose entries drifted from the provider.
/// Used by tests and the offline dump/load path.
pub fn spot_check(
    s: &Scenario,
    cache: &SegmentCache,
    travel: &dyn Travel,
) -> Result<(), String> {
    for (i, v) in s.vehicles.iter().enumerate() {
        let leg = travel.leg(v.home, s.depot).map_err(|e| format!("{e}"))?;
        if leg.distance_km != cache.d_vf(i) || leg.duration_s != cache.t_vf(i) {
            return Err(format!("vehicle '{}' home<->depot disagrees with provider", v.id));
        }
    }
    for (i, g) in s.groups.iter().enumerate() {
        let leg = travel.leg(s.depot, g.waiting_location).map_err(|e| format!("{e}"))?;
        if leg.distance_km != cache.d_fw(i) || leg.duration_s != cache.t_fw(i) {
            return Err(format!("group '{}' depot<->waiting disagrees with provider", g.id));
        }
        for (j, h) in s.groups.iter().enumerate() {
            let leg = travel
                .leg(g.waiting_location, h.waiting_location)
                .map_err(|e| format!("{e}"))?;
            if leg.distance_km != cache.d_ww(i, j) || leg.duration_s != cache.t_ww(i, j) {
                return Err(format!("groups '{}'->'{}' disagree with provider", g.id, h.id));
            }
        }
    }
    Ok(())
}
