//! Profit, savings, break-even, and completion-time figures over solutions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use core::fmt;

use crate::model::Solution;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    /// Savings and completion time are undefined until everything is
    /// delivered.
    PartialCoverage { uncovered: Vec<String> },
    NoParticipants,
    BadShare(f64),
    NoCustomers,
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::PartialCoverage { uncovered } => {
                write!(f, "solution leaves groups uncovered: {}", uncovered.join(", "))
            }
            MetricsError::NoParticipants => write!(f, "no participating vehicles"),
            MetricsError::BadShare(s) => write!(f, "share must be within [0, 1], got {s}"),
            MetricsError::NoCustomers => write!(f, "need at least one customer"),
        }
    }
}

fn require_full_coverage(sol: &Solution) -> Result<(), MetricsError> {
    if sol.uncovered.is_empty() {
        Ok(())
    } else {
        Err(MetricsError::PartialCoverage { uncovered: sol.uncovered.iter().cloned().collect() })
    }
}

/// Budget minus total delivery cost: what the delivery company keeps.
pub fn company_savings(sol: &Solution, budget: f64) -> Result<f64, MetricsError> {
    require_full_coverage(sol)?;
    Ok(budget - sol.total_cost_usd)
}

/// Each participating vehicle's cut under a proportional profit share
/// (0.5 for the 50:50 model).
pub fn per_vehicle_profit(savings: f64, n_participating: usize, share: f64) -> Result<f64, MetricsError> {
    if n_participating == 0 {
        return Err(MetricsError::NoParticipants);
    }
    if !(0.0..=1.0).contains(&share) || !share.is_finite() {
        return Err(MetricsError::BadShare(share));
    }
    Ok(share * savings / n_participating as f64)
}

/// Average cost per customer: the minimum shipping rate at which the
/// operation breaks even.
pub fn break_even_rate(total_cost: f64, n_customers: usize) -> Result<f64, MetricsError> {
    if n_customers == 0 {
        return Err(MetricsError::NoCustomers);
    }
    Ok(total_cost / n_customers as f64)
}

/// Delivery completion time assuming every participating vehicle dispatches
/// at time zero: the slowest vehicle's total route time.
pub fn completion_time(sol: &Solution) -> Result<f64, MetricsError> {
    require_full_coverage(sol)?;
    if sol.per_vehicle.is_empty() {
        return Err(MetricsError::NoParticipants);
    }
    let mut worst = 0.0f64;
    for totals in sol.per_vehicle.values() {
        if totals.t_tot_s > worst {
            worst = totals.t_tot_s;
        }
    }
    Ok(worst)
}

/// Half-up rounding to whole cents, used by every money column in reports.
pub fn round_to_cents(usd: f64) -> i64 {
    libm::round(usd * 100.0) as i64
}

/// Formats cents as a plain decimal string ("1302.00").
pub fn format_cents(cents: i64) -> String {
    let sign = if cents < 0 { "-" } else { "" };
    let abs = cents.unsigned_abs();
    format!("{sign}{}.{:02}", abs / 100, abs % 100)
}
