//! Battery parameters, effective efficiencies, adjusted cross-border prices,
//! state-of-charge simulation and trajectory feasibility checking.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default absolute tolerance (MWh) for feasibility checks, compatible with
/// the solver's optimality tolerances.
pub const FEAS_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum BatteryError {
    #[error("invalid battery parameters: {0}")]
    InvalidParams(String),
    #[error("series length mismatch: {left} vs {right}")]
    ShapeMismatch { left: usize, right: usize },
    #[error("line efficiency must lie in (0, 1], got {0}")]
    BadLineEfficiency(f64),
    #[error("interconnector rent must be nonnegative, got {0} at step {1}")]
    NegativeRent(f64, usize),
    #[error("failed to read battery config {path}: {source}")]
    ConfigIo {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse battery config {path}: {source}")]
    ConfigParse {
        path: String,
        source: toml::de::Error,
    },
}

/// Physical and economic description of the storage asset.
///
/// Energies are MWh, rates MW, the sampling period `h` hours. `delta_min` is
/// negative (max discharging rate), `delta_max` positive (max charging rate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryParams {
    pub b_min: f64,
    pub b_max: f64,
    pub b0: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub eta_ch: f64,
    pub eta_dis: f64,
    pub eta_inv: f64,
    pub h: f64,
    pub cost_per_kwh: f64,
    pub cycle_life_100dod: f64,
    pub calendar_life_years: f64,
}

/// Charging/discharging efficiencies with the inverter folded in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveEfficiencies {
    pub eta_ch_star: f64,
    pub eta_dis_star: f64,
}

/// File layout mirroring the simulation battery table: capacities, rates,
/// efficiencies and lifetime figures.
#[derive(Debug, Deserialize)]
struct BatteryConfigFile {
    cost_per_kwh: f64,
    rated_capacity_mwh: f64,
    min_capacity_mwh: f64,
    max_rate_mw: f64,
    min_rate_mw: f64,
    charging_efficiency: f64,
    discharging_efficiency: f64,
    converter_efficiency: f64,
    initial_charge_mwh: f64,
    cycle_life_100dod: f64,
    calendar_life_years: f64,
    #[serde(default = "default_sampling_period")]
    sampling_period_h: f64,
}

fn default_sampling_period() -> f64 {
    1.0
}

impl BatteryParams {
    /// Validates the parameter set against its domain invariants.
    pub fn validate(&self) -> Result<(), BatteryError> {
        let err = |msg: String| Err(BatteryError::InvalidParams(msg));
        if !(self.b_min < self.b_max) {
            return err(format!(
                "b_min {} must be < b_max {}",
                self.b_min, self.b_max
            ));
        }
        if self.b0 < self.b_min || self.b0 > self.b_max {
            return err(format!(
                "b0 {} outside [b_min, b_max] = [{}, {}]",
                self.b0, self.b_min, self.b_max
            ));
        }
        if !(self.delta_min < 0.0 && self.delta_max > 0.0) {
            return err(format!(
                "need delta_min < 0 < delta_max, got [{}, {}]",
                self.delta_min, self.delta_max
            ));
        }
        if self.h <= 0.0 {
            return err(format!(
                "sampling period h must be positive, got {}",
                self.h
            ));
        }
        for (name, eta) in [
            ("eta_ch", self.eta_ch),
            ("eta_dis", self.eta_dis),
            ("eta_inv", self.eta_inv),
        ] {
            if !(eta > 0.0 && eta <= 1.0) {
                return err(format!("{name} must lie in (0, 1], got {eta}"));
            }
        }
        Ok(())
    }

    /// Maximum per-step energy decrease `X_min = delta_min * h` (negative, MWh).
    pub fn x_min(&self) -> f64 {
        self.delta_min * self.h
    }

    /// Maximum per-step energy increase `X_max = delta_max * h` (MWh).
    pub fn x_max(&self) -> f64 {
        self.delta_max * self.h
    }

    /// Investment cost in EUR (rated capacity priced per kWh).
    pub fn investment_cost(&self) -> f64 {
        self.cost_per_kwh * self.b_max * 1000.0
    }

    /// Folds the inverter efficiency into the charge/discharge efficiencies.
    pub fn effective_efficiencies(&self) -> EffectiveEfficiencies {
        EffectiveEfficiencies {
            eta_ch_star: self.eta_ch * self.eta_inv,
            eta_dis_star: self.eta_dis * self.eta_inv,
        }
    }

    /// Loads parameters from a TOML file with the simulation-table keys.
    pub fn from_config_file(path: &std::path::Path) -> Result<Self, BatteryError> {
        let text = std::fs::read_to_string(path).map_err(|source| BatteryError::ConfigIo {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: BatteryConfigFile =
            toml::from_str(&text).map_err(|source| BatteryError::ConfigParse {
                path: path.display().to_string(),
                source,
            })?;
        let params = BatteryParams {
            b_min: cfg.min_capacity_mwh,
            b_max: cfg.rated_capacity_mwh,
            b0: cfg.initial_charge_mwh,
            delta_min: cfg.min_rate_mw,
            delta_max: cfg.max_rate_mw,
            eta_ch: cfg.charging_efficiency,
            eta_dis: cfg.discharging_efficiency,
            eta_inv: cfg.converter_efficiency,
            h: cfg.sampling_period_h,
            cost_per_kwh: cfg.cost_per_kwh,
            cycle_life_100dod: cfg.cycle_life_100dod,
            calendar_life_years: cfg.calendar_life_years,
        };
        params.validate()?;
        Ok(params)
    }

    /// The 1 MWh / 0.5 MW reference battery used throughout the studies.
    pub fn reference() -> Self {
        BatteryParams {
            b_min: 0.1,
            b_max: 1.0,
            b0: 0.5,
            delta_min: -0.5,
            delta_max: 0.5,
            eta_ch: 0.95,
            eta_dis: 0.95,
            eta_inv: 0.95,
            h: 1.0,
            cost_per_kwh: 100.0,
            cycle_life_100dod: 7200.0,
            calendar_life_years: 10.0,
        }
    }
}

/// Per-timestep buy/sell prices for both zones plus the adjusted grid-B
/// prices seen by a battery located in grid A.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSet {
    pub p_buy_a: Vec<f64>,
    pub p_sell_a: Vec<f64>,
    pub p_buy_b: Vec<f64>,
    pub p_sell_b: Vec<f64>,
    pub p_buy_b_adj: Vec<f64>,
    pub p_sell_b_adj: Vec<f64>,
    pub rent: Vec<f64>,
    pub eta_line: f64,
}

impl PriceSet {
    /// Builds the set and applies the rent/line-loss price adjustment.
    pub fn new(
        p_buy_a: Vec<f64>,
        p_sell_a: Vec<f64>,
        p_buy_b: Vec<f64>,
        p_sell_b: Vec<f64>,
        rent: Vec<f64>,
        eta_line: f64,
    ) -> Result<Self, BatteryError> {
        let n = p_buy_a.len();
        for other in [&p_sell_a, &p_buy_b, &p_sell_b, &rent] {
            if other.len() != n {
                return Err(BatteryError::ShapeMismatch {
                    left: n,
                    right: other.len(),
                });
            }
        }
        let (p_buy_b_adj, p_sell_b_adj) = adjust_prices(&p_buy_b, &p_sell_b, &rent, eta_line)?;
        Ok(PriceSet {
            p_buy_a,
            p_sell_a,
            p_buy_b,
            p_sell_b,
            p_buy_b_adj,
            p_sell_b_adj,
            rent,
            eta_line,
        })
    }

    /// Convenience constructor for zones with a single clearing price each
    /// and a constant rent.
    pub fn from_clearing_prices(
        price_a: &[f64],
        price_b: &[f64],
        rent: f64,
        eta_line: f64,
    ) -> Result<Self, BatteryError> {
        PriceSet::new(
            price_a.to_vec(),
            price_a.to_vec(),
            price_b.to_vec(),
            price_b.to_vec(),
            vec![rent; price_a.len()],
            eta_line,
        )
    }

    pub fn len(&self) -> usize {
        self.p_buy_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_buy_a.is_empty()
    }
}

/// Applies the cross-border price adjustment: buying through the line costs
/// `(p + rent) / eta_line`, selling through it earns `(p - rent) * eta_line`.
pub fn adjust_prices(
    p_buy_b: &[f64],
    p_sell_b: &[f64],
    rent: &[f64],
    eta_line: f64,
) -> Result<(Vec<f64>, Vec<f64>), BatteryError> {
    if !(eta_line > 0.0 && eta_line <= 1.0) {
        return Err(BatteryError::BadLineEfficiency(eta_line));
    }
    if p_buy_b.len() != p_sell_b.len() || p_buy_b.len() != rent.len() {
        return Err(BatteryError::ShapeMismatch {
            left: p_buy_b.len(),
            right: p_sell_b.len().max(rent.len()),
        });
    }
    for (i, &z) in rent.iter().enumerate() {
        if z < 0.0 {
            return Err(BatteryError::NegativeRent(z, i));
        }
    }
    let buy = p_buy_b
        .iter()
        .zip(rent)
        .map(|(p, z)| (p + z) / eta_line)
        .collect();
    let sell = p_sell_b
        .iter()
        .zip(rent)
        .map(|(p, z)| (p - z) * eta_line)
        .collect();
    Ok((buy, sell))
}

/// Runs the charge-level recursion `b_i = b_{i-1} + x_i` from `b0` and
/// returns the full path (one entry per step, excluding `b0`).
pub fn simulate_soc(params: &BatteryParams, x: &[f64]) -> Vec<f64> {
    let mut soc = Vec::with_capacity(x.len());
    let mut b = params.b0;
    for &xi in x {
        b += xi;
        soc.push(b);
    }
    soc
}

/// Grid-side power draw for a battery-side energy change, using the raw
/// charge/discharge efficiencies.
pub fn grid_power(params: &BatteryParams, x: &[f64]) -> Vec<f64> {
    grid_power_with(params.h, params.eta_ch, params.eta_dis, x)
}

/// Same conversion with the inverter folded in (starred efficiencies).
pub fn grid_power_effective(params: &BatteryParams, x: &[f64]) -> Vec<f64> {
    let eff = params.effective_efficiencies();
    grid_power_with(params.h, eff.eta_ch_star, eff.eta_dis_star, x)
}

fn grid_power_with(h: f64, eta_ch: f64, eta_dis: f64, x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&xi| xi.max(0.0) / (h * eta_ch) - eta_dis * (-xi).max(0.0) / h)
        .collect()
}

/// One constraint violation found by [`check_feasible`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RampA {
        step: usize,
        value: f64,
    },
    RampB {
        step: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    JointRamp {
        step: usize,
        value: f64,
    },
    Capacity {
        step: usize,
        soc: f64,
        lo: f64,
        hi: f64,
    },
    OpposedSigns {
        step: usize,
        product: f64,
    },
}

/// Verdict of a trajectory feasibility check.
#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a two-market trajectory against ramp, envelope, capacity and
/// sign-consistency constraints with tolerance [`FEAS_TOL`].
pub fn check_feasible(
    params: &BatteryParams,
    x_a: &[f64],
    x_b: &[f64],
    envelope: &crate::envelope::OperatingEnvelope,
    b_lo: f64,
    b_hi: f64,
) -> Result<FeasibilityReport, BatteryError> {
    check_feasible_tol(params, x_a, x_b, envelope, b_lo, b_hi, FEAS_TOL)
}

pub fn check_feasible_tol(
    params: &BatteryParams,
    x_a: &[f64],
    x_b: &[f64],
    envelope: &crate::envelope::OperatingEnvelope,
    b_lo: f64,
    b_hi: f64,
    tol: f64,
) -> Result<FeasibilityReport, BatteryError> {
    if x_a.len() != x_b.len() {
        return Err(BatteryError::ShapeMismatch {
            left: x_a.len(),
            right: x_b.len(),
        });
    }
    if envelope.len() != x_a.len() {
        return Err(BatteryError::ShapeMismatch {
            left: x_a.len(),
            right: envelope.len(),
        });
    }
    let (x_min, x_max) = (params.x_min(), params.x_max());
    let mut violations = Vec::new();
    let mut soc = params.b0;
    for i in 0..x_a.len() {
        let (a, b) = (x_a[i], x_b[i]);
        if a < x_min - tol || a > x_max + tol {
            violations.push(Violation::RampA { step: i, value: a });
        }
        let (lo, hi) = (envelope.x_min_adj[i], envelope.x_max_adj[i]);
        if b < lo - tol || b > hi + tol {
            violations.push(Violation::RampB {
                step: i,
                value: b,
                lo,
                hi,
            });
        }
        let joint = a + b;
        if joint < x_min - tol || joint > x_max + tol {
            violations.push(Violation::JointRamp {
                step: i,
                value: joint,
            });
        }
        soc += joint;
        if soc < b_lo - tol || soc > b_hi + tol {
            violations.push(Violation::Capacity {
                step: i,
                soc,
                lo: b_lo,
                hi: b_hi,
            });
        }
        let product = a * b;
        if product < -tol * tol.max(1.0) {
            violations.push(Violation::OpposedSigns { step: i, product });
        }
    }
    Ok(FeasibilityReport { violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::OperatingEnvelope;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn effective_efficiencies_are_products() {
        let p = BatteryParams::reference();
        let eff = p.effective_efficiencies();
        assert_close(eff.eta_ch_star, 0.9025, 1e-12);
        assert_close(eff.eta_dis_star, 0.9025, 1e-12);

        let unit_inv = BatteryParams {
            eta_inv: 1.0,
            ..BatteryParams::reference()
        };
        assert_close(unit_inv.effective_efficiencies().eta_ch_star, 0.95, 1e-15);
    }

    #[test]
    fn price_adjustment_matches_hand_values() {
        let (buy, sell) = adjust_prices(&[40.0], &[40.0], &[5.0], 0.975).unwrap();
        assert_close(buy[0], 46.1538, 1e-4);
        assert_close(sell[0], 34.125, 1e-12);
    }

    #[test]
    fn zero_rent_lossless_line_is_identity() {
        let (buy, sell) = adjust_prices(&[31.0, 47.5], &[29.0, 46.0], &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(buy, vec![31.0, 47.5]);
        assert_eq!(sell, vec![29.0, 46.0]);
    }

    #[test]
    fn bad_line_efficiency_rejected() {
        assert!(adjust_prices(&[1.0], &[1.0], &[0.0], 0.0).is_err());
        assert!(adjust_prices(&[1.0], &[1.0], &[0.0], -0.5).is_err());
        assert!(adjust_prices(&[1.0], &[1.0], &[-1.0], 0.9).is_err());
    }

    #[test]
    fn adjusted_prices_bracket_raw_prices() {
        // Adjusted buy >= raw buy and adjusted sell <= raw sell for any
        // nonnegative rent and eta_line in (0, 1].
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..500 {
            let p_buy = 100.0 * next();
            let p_sell = 100.0 * next();
            let rent = 20.0 * next();
            let eta = 0.5 + 0.5 * next();
            let (buy, sell) = adjust_prices(&[p_buy], &[p_sell], &[rent], eta).unwrap();
            assert!(buy[0] >= p_buy - 1e-12);
            assert!(sell[0] <= p_sell + 1e-12);
        }
    }

    #[test]
    fn soc_is_prefix_sum_from_b0() {
        let p = BatteryParams {
            b0: 0.5,
            ..BatteryParams::reference()
        };
        let path = simulate_soc(&p, &[0.2, -0.3]);
        assert_close(path[0], 0.7, 1e-12);
        assert_close(path[1], 0.4, 1e-12);
        assert_eq!(simulate_soc(&p, &[0.0, 0.0, 0.0]), vec![0.5, 0.5, 0.5]);
        // Overfull path is still reported; feasibility is checked separately.
        assert_eq!(simulate_soc(&p, &[0.5, 0.5]), vec![1.0, 1.5]);
    }

    #[test]
    fn grid_power_hand_values() {
        let p = BatteryParams::reference();
        let f = grid_power(&p, &[0.5, -0.5, 0.0]);
        assert_close(f[0], 0.5263, 1e-4);
        assert_close(f[1], -0.475, 1e-12);
        assert_close(f[2], 0.0, 0.0);
    }

    #[test]
    fn grid_power_monotone_and_through_origin() {
        let p = BatteryParams::reference();
        let xs: Vec<f64> = (-50..=50).map(|k| k as f64 / 100.0).collect();
        let f = grid_power(&p, &xs);
        for w in f.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert_eq!(grid_power(&p, &[0.0])[0], 0.0);
        // Charging draws more than stored; discharging yields less than drawn down.
        assert!(grid_power(&p, &[0.4])[0] >= 0.4);
        assert!(grid_power(&p, &[-0.4])[0].abs() <= 0.4);
    }

    #[test]
    fn feasibility_flags_each_violation_kind() {
        let p = BatteryParams::reference();
        let env = OperatingEnvelope::unconstrained(1, p.x_min(), p.x_max());

        let joint = check_feasible(&p, &[0.3], &[0.3], &env, p.b_min, p.b_max).unwrap();
        assert!(joint
            .violations
            .iter()
            .any(|v| matches!(v, Violation::JointRamp { .. })));

        let signs = check_feasible(&p, &[0.2], &[-0.1], &env, p.b_min, p.b_max).unwrap();
        assert!(signs
            .violations
            .iter()
            .any(|v| matches!(v, Violation::OpposedSigns { .. })));

        let idle = check_feasible(&p, &[0.0], &[0.0], &env, p.b_min, p.b_max).unwrap();
        assert!(idle.is_feasible());
    }

    #[test]
    fn reference_battery_config_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("battery.toml");
        std::fs::write(
            &path,
            "cost_per_kwh = 100.0\n\
             rated_capacity_mwh = 1.0\n\
             min_capacity_mwh = 0.1\n\
             max_rate_mw = 0.5\n\
             min_rate_mw = -0.5\n\
             charging_efficiency = 0.95\n\
             discharging_efficiency = 0.95\n\
             converter_efficiency = 0.95\n\
             initial_charge_mwh = 0.5\n\
             cycle_life_100dod = 7200\n\
             calendar_life_years = 10\n",
        )
        .unwrap();
        let parsed = BatteryParams::from_config_file(&path).unwrap();
        assert_eq!(parsed, BatteryParams::reference());
    }

    #[test]
    fn invalid_params_are_rejected() {
        let mut p = BatteryParams::reference();
        p.b0 = 2.0;
        assert!(p.validate().is_err());
        let mut p = BatteryParams::reference();
        p.eta_ch = 0.0;
        assert!(p.validate().is_err());
        let mut p = BatteryParams::reference();
        p.delta_min = 0.1;
        assert!(p.validate().is_err());
    }
}
