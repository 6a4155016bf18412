//! Travel providers: road distance and travel time between two points.
//!
//! Every consumer goes through the [`Travel`] trait, so euclidean geometry,
//! a precomputed matrix, or an external routing service are interchangeable.
//! Providers are read-only after construction and shareable across threads.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use core::fmt;

use crate::model::Point;

/// One directed road leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    pub distance_km: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TravelError {
    /// Matrix-style providers only answer for registered sites.
    UnknownSite { x: f64, y: f64 },
    /// Transport or protocol failure from an external provider. Never
    /// silently substituted; the caller decides what to do.
    Transport(String),
}

impl fmt::Display for TravelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TravelError::UnknownSite { x, y } => {
                write!(f, "point ({x}, {y}) is not a registered site")
            }
            TravelError::Transport(msg) => write!(f, "travel provider failure: {msg}"),
        }
    }
}

pub trait Travel: Send + Sync {
    fn leg(&self, a: Point, b: Point) -> Result<Leg, TravelError>;

    fn distance_km(&self, a: Point, b: Point) -> Result<f64, TravelError> {
        self.leg(a, b).map(|l| l.distance_km)
    }

    fn travel_time_s(&self, a: Point, b: Point) -> Result<f64, TravelError> {
        self.leg(a, b).map(|l| l.duration_s)
    }
}

/// Straight-line distance scaled by a road circuity factor; time follows
/// from a single vehicle speed.
#[derive(Debug, Clone, Copy)]
pub struct EuclideanTravel {
    circuity: f64,
    speed_kmh: f64,
}

impl EuclideanTravel {
    /// `circuity` >= 1 stretches crow-flight distance toward road distance;
    /// `speed_kmh` > 0 converts distance to duration.
    pub fn new(circuity: f64, speed_kmh: f64) -> Result<Self, String> {
        if !circuity.is_finite() || circuity < 1.0 {
            return Err(format!("circuity must be finite and >= 1, got {circuity}"));
        }
        if !speed_kmh.is_finite() || speed_kmh <= 0.0 {
            return Err(format!("vehicle speed must be finite and > 0 km/h, got {speed_kmh}"));
        }
        Ok(EuclideanTravel { circuity, speed_kmh })
    }

    pub fn circuity(&self) -> f64 {
        self.circuity
    }

    pub fn speed_kmh(&self) -> f64 {
        self.speed_kmh
    }
}

impl Travel for EuclideanTravel {
    fn leg(&self, a: Point, b: Point) -> Result<Leg, TravelError> {
        let distance_km = self.circuity * a.straight_line_km(b);
        Ok(Leg { distance_km, duration_s: distance_km / self.speed_kmh * 3600.0 })
    }
}

fn point_key(p: Point) -> (u64, u64) {
    (p.x.to_bits(), p.y.to_bits())
}

/// Distance/duration lookup over a fixed set of registered sites.
///
/// Points are matched to sites by exact coordinate equality: the scenario
/// that registered the sites is expected to be the one issuing queries.
/// Entries may be asymmetric; the diagonal must be zero.
#[derive(Debug, Clone)]
pub struct MatrixTravel {
    sites: Vec<Point>,
    index: alloc::collections::BTreeMap<(u64, u64), usize>,
    dist: Vec<f64>,
    dur: Vec<f64>,
}

impl MatrixTravel {
    /// `dist` and `dur` are row-major `sites.len() x sites.len()` tables.
    /// Two registered sites with identical coordinates must carry identical
    /// rows and columns, otherwise a lookup by point would be ambiguous.
    pub fn new(sites: Vec<Point>, dist: Vec<f64>, dur: Vec<f64>) -> Result<Self, String> {
        let n = sites.len();
        if dist.len() != n * n || dur.len() != n * n {
            return Err(format!(
                "matrix shape mismatch: {} sites need {} entries, got {} distances / {} durations",
                n,
                n * n,
                dist.len(),
                dur.len()
            ));
        }
        for (what, table) in [("distance", &dist), ("duration", &dur)] {
            for (k, &v) in table.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(format!(
                        "{} entry ({}, {}) must be finite and >= 0, got {}",
                        what,
                        k / n,
                        k % n,
                        v
                    ));
                }
            }
            for i in 0..n {
                if table[i * n + i] != 0.0 {
                    return Err(format!("{} diagonal entry {} must be 0, got {}", what, i, table[i * n + i]));
                }
            }
        }
        let mut index = alloc::collections::BTreeMap::new();
        for (i, &p) in sites.iter().enumerate() {
            if !p.is_finite() {
                return Err(format!("site {i} has non-finite coordinates"));
            }
            if let Some(&first) = index.get(&point_key(p)) {
                // Duplicate coordinates are fine if the data agrees.
                for j in 0..n {
                    if dist[first * n + j] != dist[i * n + j]
                        || dist[j * n + first] != dist[j * n + i]
                        || dur[first * n + j] != dur[i * n + j]
                        || dur[j * n + first] != dur[j * n + i]
                    {
                        return Err(format!(
                            "sites {first} and {i} share coordinates ({}, {}) but disagree on entries",
                            p.x, p.y
                        ));
                    }
                }
            } else {
                index.insert(point_key(p), i);
            }
        }
        Ok(MatrixTravel { sites, index, dist, dur })
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    fn site_of(&self, p: Point) -> Result<usize, TravelError> {
        self.index
            .get(&point_key(p))
            .copied()
            .ok_or(TravelError::UnknownSite { x: p.x, y: p.y })
    }
}

impl Travel for MatrixTravel {
    fn leg(&self, a: Point, b: Point) -> Result<Leg, TravelError> {
        let i = self.site_of(a)?;
        let j = self.site_of(b)?;
        let n = self.sites.len();
        Ok(Leg { distance_km: self.dist[i * n + j], duration_s: self.dur[i * n + j] })
    }
}
