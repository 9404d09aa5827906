//! Scenario wiring: which markets the battery sees and how the envelope is
//! sourced, plus the per-solution performance metrics.

use serde::Serialize;
use thiserror::Error;

use super::rainflow::count_cycles;
use super::{annualize, simple_payback, utilization_factor, Metrics};
use crate::battery::{BatteryParams, PriceSet};
use crate::envelope::{envelope_single_link, reserve_capacity, LinkState, OperatingEnvelope};
use crate::milp::{
    build_k1, build_pmilp, decode_k1, decode_solution, revenue_split, ArbitrageSolution,
    BlockingSpec, RevenueSplit,
};
use crate::solver::{self, BnbConfig, MilpStatus, SimplexConfig};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error(transparent)]
    Battery(#[from] crate::battery::BatteryError),
    #[error(transparent)]
    Envelope(#[from] crate::envelope::EnvelopeError),
    #[error(transparent)]
    Milp(#[from] crate::milp::MilpError),
    #[error("solver: {0}")]
    Solver(#[from] crate::solver::LpError),
    #[error(transparent)]
    Analytics(#[from] super::AnalyticsError),
    #[error("scenario requires an interconnector flow series or an explicit envelope")]
    MissingFlows,
    #[error("solve ended {status:?} (bound {bound})")]
    NotOptimal { status: MilpStatus, bound: f64 },
    #[error("sweep axis must be strictly increasing at position {0}")]
    AxisNotIncreasing(usize),
    #[error("sweep point {axis}: {source}")]
    AtPoint {
        axis: f64,
        #[source]
        source: Box<StudyError>,
    },
    #[error("horizon must cover whole days, got {0} hours")]
    PartialDays(usize),
    #[error("baseline revenue {0} is not positive; marginal-increase sweep undefined")]
    NonPositiveBaseline(f64),
}

/// Market-participation scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scenario {
    /// Local grid only.
    C1,
    /// Both markets, interconnector always fully available.
    C2,
    /// Both markets within the flow-derived operating envelope.
    C3,
    /// Single-variable pointwise-best-price baseline.
    K1,
}

impl std::str::FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "C1" => Ok(Scenario::C1),
            "C2" => Ok(Scenario::C2),
            "C3" => Ok(Scenario::C3),
            "K1" => Ok(Scenario::K1),
            other => Err(format!("unknown scenario {other:?}")),
        }
    }
}

/// Everything one study needs: battery, zonal prices, interconnector data
/// and the capacity-blocking / reservation knobs.
#[derive(Debug, Clone)]
pub struct StudyData {
    pub battery: BatteryParams,
    pub price_a: Vec<f64>,
    pub price_b: Vec<f64>,
    pub rent: f64,
    pub eta_line: f64,
    pub l_max: f64,
    /// Prevailing interconnector flow (MW, positive toward grid B); the
    /// envelope source for C3 on a single link.
    pub flows: Option<Vec<f64>>,
    /// Directly supplied envelope (e.g. the two-sided intersection built
    /// from a dispatch simulation); takes precedence over `flows`.
    pub envelope: Option<OperatingEnvelope>,
    pub blocking: BlockingSpec,
    /// Firm transmission reservation in MWh per step.
    pub reserved: f64,
    pub terminal_soc: bool,
}

impl StudyData {
    pub fn new(battery: BatteryParams, price_a: Vec<f64>, price_b: Vec<f64>) -> Self {
        let blocking = BlockingSpec::none(&battery);
        StudyData {
            battery,
            price_a,
            price_b,
            rent: 0.0,
            eta_line: 1.0,
            l_max: 1000.0,
            flows: None,
            envelope: None,
            blocking,
            reserved: 0.0,
            terminal_soc: false,
        }
    }

    pub fn horizon(&self) -> usize {
        self.price_a.len()
    }

    pub fn days(&self) -> f64 {
        self.horizon() as f64 / 24.0
    }

    pub fn with_rent(mut self, rent: f64) -> Self {
        self.rent = rent;
        self
    }

    pub fn with_blocking(mut self, blocking: BlockingSpec) -> Self {
        self.blocking = blocking;
        self
    }

    pub fn with_reserved(mut self, reserved: f64) -> Self {
        self.reserved = reserved;
        self
    }
}

/// One solved scenario: decoded trajectory, per-market revenue and the
/// performance indices.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub scenario: Scenario,
    pub solution: ArbitrageSolution,
    pub split: RevenueSplit,
    pub metrics: Metrics,
    pub nodes: u64,
    pub simplex_iterations: usize,
    pub solver_log: Vec<String>,
}

/// The per-step admissible grid-B range a scenario exposes.
pub fn scenario_envelope(
    data: &StudyData,
    scenario: Scenario,
) -> Result<OperatingEnvelope, StudyError> {
    let n = data.horizon();
    let (x_min, x_max) = (data.battery.x_min(), data.battery.x_max());
    let envelope = match scenario {
        Scenario::C1 => OperatingEnvelope::blocked(n),
        Scenario::C2 | Scenario::K1 => OperatingEnvelope::unconstrained(n, x_min, x_max),
        Scenario::C3 => {
            let base = if let Some(env) = &data.envelope {
                env.clone()
            } else if let Some(flows) = &data.flows {
                let link = LinkState::new(data.l_max, flows.clone(), data.eta_line)?;
                envelope_single_link(&link, x_min, x_max)?
            } else {
                return Err(StudyError::MissingFlows);
            };
            if data.reserved > 0.0 {
                reserve_capacity(&base, data.reserved, x_min, x_max)?
            } else {
                base
            }
        }
    };
    Ok(envelope)
}

/// Solves one scenario end to end and computes its performance indices.
pub fn run_scenario(
    data: &StudyData,
    scenario: Scenario,
    cfg: &BnbConfig,
) -> Result<ScenarioOutcome, StudyError> {
    if data.horizon() == 0 || !data.horizon().is_multiple_of(24) {
        return Err(StudyError::PartialDays(data.horizon()));
    }
    let prices =
        PriceSet::from_clearing_prices(&data.price_a, &data.price_b, data.rent, data.eta_line)?;

    let (solution, nodes, iterations, log) = match scenario {
        Scenario::K1 => {
            let k1 = build_k1(&prices, &data.battery)?;
            let result = solver::solve_lp(&k1.lp, SimplexConfig::default())?;
            if result.status != solver::LpStatus::Optimal {
                return Err(StudyError::NotOptimal {
                    status: match result.status {
                        solver::LpStatus::Infeasible => MilpStatus::Infeasible,
                        _ => MilpStatus::Unbounded,
                    },
                    bound: result.objective,
                });
            }
            let iterations = result.iterations;
            (
                decode_k1(&k1, &result, &data.battery)?,
                1,
                iterations,
                Vec::new(),
            )
        }
        _ => {
            let envelope = scenario_envelope(data, scenario)?;
            let problem = build_pmilp(&prices, &data.battery, &envelope, &data.blocking)?
                .with_terminal_soc(data.terminal_soc);
            let result = solver::solve_milp(&problem, cfg)?;
            if result.status != MilpStatus::Optimal {
                return Err(StudyError::NotOptimal {
                    status: result.status,
                    bound: result.best_bound,
                });
            }
            (
                decode_solution(&problem, &result.x, &data.battery)?,
                result.nodes,
                result.simplex_iterations,
                result.log,
            )
        }
    };

    let split = revenue_split(&solution, &prices, &data.battery);
    let metrics = metrics_for(data, &solution)?;
    Ok(ScenarioOutcome {
        scenario,
        solution,
        split,
        metrics,
        nodes,
        simplex_iterations: iterations,
        solver_log: log,
    })
}

fn metrics_for(data: &StudyData, solution: &ArbitrageSolution) -> Result<Metrics, StudyError> {
    let battery = &data.battery;
    let mut path = Vec::with_capacity(solution.soc.len() + 1);
    path.push(battery.b0);
    path.extend_from_slice(&solution.soc);
    let cycles = count_cycles(&path, battery.b_max);
    let days = data.days();
    let revenue = solution.revenue();
    let annual_revenue = annualize(revenue, days);
    let spp_years = simple_payback(battery.investment_cost(), annual_revenue);
    let annual_cycles = annualize(cycles, days);
    let cycles_to_payback = if spp_years.is_finite() {
        annual_cycles * spp_years
    } else {
        f64::INFINITY
    };
    let uf_percent = match &data.flows {
        Some(flows) if !flows.is_empty() => utilization_factor(flows, data.l_max)?,
        _ => 0.0,
    };
    Ok(Metrics {
        revenue_eur: revenue,
        annual_revenue_eur: annual_revenue,
        cycles_100dod: cycles,
        annual_cycles_100dod: annual_cycles,
        spp_years,
        cycles_to_payback,
        viable: cycles_to_payback <= battery.cycle_life_100dod,
        uf_percent,
    })
}
