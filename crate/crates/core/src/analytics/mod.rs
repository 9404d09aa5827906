//! Performance indices and the numerical studies built on them: revenue,
//! operational cycles, payback, interconnector utilization, blocking-level
//! selection and solve-time statistics.

pub mod knee;
pub mod rainflow;
pub mod study;
pub mod sweeps;

use serde::Serialize;
use thiserror::Error;

pub use knee::{select_blocking_m1, select_blocking_m2, BlockSelection};
pub use rainflow::{count_cycles, count_cycles_weighted, rainflow, Cycle};
pub use study::{
    run_scenario, scenario_envelope, Scenario, ScenarioOutcome, StudyData, StudyError,
};
pub use sweeps::{
    sweep_blocking, sweep_rent, sweep_reserved, timing_harness, BlockingSweep, RentSweep,
    ReservedSweep, TimingStats,
};

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("empty series")]
    EmptySeries,
    #[error("line limit must be positive, got {0}")]
    BadLineLimit(f64),
}

/// Performance indices of one solved scenario.
#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub revenue_eur: f64,
    pub annual_revenue_eur: f64,
    pub cycles_100dod: f64,
    pub annual_cycles_100dod: f64,
    /// Simple payback period; infinite when the revenue is not positive.
    pub spp_years: f64,
    /// Cycles spent before the investment is recovered.
    pub cycles_to_payback: f64,
    /// Whether the payback cycles fit within the cycle life.
    pub viable: bool,
    /// Interconnector utilization factor of the study's flow series.
    pub uf_percent: f64,
}

/// Interconnector utilization factor in percent: mean absolute loading
/// relative to the line limit.
pub fn utilization_factor(flow: &[f64], l_max: f64) -> Result<f64, AnalyticsError> {
    if flow.is_empty() {
        return Err(AnalyticsError::EmptySeries);
    }
    if !(l_max > 0.0) {
        return Err(AnalyticsError::BadLineLimit(l_max));
    }
    let total: f64 = flow.iter().map(|f| f.abs()).sum();
    Ok(100.0 * total / (l_max * flow.len() as f64))
}

/// Years to recover the investment from one year of revenue (no
/// discounting); infinite when the revenue is not positive.
pub fn simple_payback(investment: f64, annual_revenue: f64) -> f64 {
    assert!(investment > 0.0, "investment must be positive");
    if annual_revenue <= 0.0 {
        f64::INFINITY
    } else {
        investment / annual_revenue
    }
}

/// Scales a partial-year quantity to a full year.
pub fn annualize(value: f64, days: f64) -> f64 {
    value * 365.0 / days
}

/// Cycles needed to reach payback given an annual cycle count.
pub fn cycles_to_payback(annual_cycles: f64, spp_years: f64) -> f64 {
    if spp_years.is_finite() {
        annual_cycles * spp_years
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn utilization_factor_hand_values() {
        let uf = utilization_factor(&[685.6; 100], 1000.0).unwrap();
        assert!((uf - 68.56).abs() < 1e-9);
        assert_eq!(utilization_factor(&[0.0; 5], 1000.0).unwrap(), 0.0);
        assert_eq!(utilization_factor(&[1000.0; 5], 1000.0).unwrap(), 100.0);
        assert!(utilization_factor(&[], 1000.0).is_err());
    }

    #[test]
    fn payback_is_ratio_with_infinite_floor() {
        assert_eq!(simple_payback(100_000.0, 10_000.0), 10.0);
        assert_eq!(simple_payback(100_000.0, 0.0), f64::INFINITY);
        assert_eq!(simple_payback(100_000.0, -5.0), f64::INFINITY);
        // Doubling the revenue halves the payback.
        assert_eq!(
            simple_payback(100_000.0, 20_000.0),
            simple_payback(100_000.0, 10_000.0) / 2.0
        );
    }

    #[test]
    fn cycles_to_payback_vs_cycle_life() {
        let life = 7200.0;
        assert!(cycles_to_payback(700.0, 10.0) <= life);
        assert!(cycles_to_payback(800.0, 10.0) > life);
        assert_eq!(cycles_to_payback(700.0, f64::INFINITY), f64::INFINITY);
    }

    #[test]
    fn annualization_scales_by_retained_days() {
        assert!((annualize(7.0, 7.0) - 365.0).abs() < 1e-12);
        assert!((annualize(10.0, 365.0) - 10.0).abs() < 1e-12);
    }
}
