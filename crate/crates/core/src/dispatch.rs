//! Three-node transport-model economic dispatch. Hourly LPs minimize
//! generation cost subject to nodal balance and line capacities; the duals
//! of the balance rows are the zonal clearing prices, and line flows feed
//! the operating-envelope construction.

use serde::Serialize;
use thiserror::Error;

use crate::solver::lp::{LinearProgram, LpResult, LpStatus, RowKind};
use crate::solver::simplex::{solve_lp, SimplexConfig};

#[derive(Debug, Error)]
pub enum DispatchError {
    #[error("series length mismatch: {left} vs {right}")]
    ShapeMismatch { left: usize, right: usize },
    #[error("negative demand {value} at hour {hour}")]
    NegativeDemand { value: f64, hour: usize },
    #[error("negative wind availability {value} at hour {hour}")]
    NegativeWind { value: f64, hour: usize },
    #[error("hour {hour} is infeasible: demand exceeds deliverable supply")]
    InfeasibleHour { hour: usize },
    #[error("unknown line {0}")]
    UnknownLine(String),
    #[error("hour range {start}..{end} outside horizon {horizon}")]
    BadHourRange {
        start: usize,
        end: usize,
        horizon: usize,
    },
    #[error("solver failure at hour {hour}: {source}")]
    Solver {
        hour: usize,
        source: crate::solver::lp::LpError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeId {
    Be,
    Ei,
    Uk,
}

impl NodeId {
    pub const ALL: [NodeId; 3] = [NodeId::Be, NodeId::Ei, NodeId::Uk];

    fn index(self) -> usize {
        match self {
            NodeId::Be => 0,
            NodeId::Ei => 1,
            NodeId::Uk => 2,
        }
    }

    /// Position along the BE - EI - UK chain, used to orient flows into the
    /// "positive means toward the UK" convention.
    fn chain_pos(self) -> usize {
        self.index()
    }
}

#[derive(Debug, Clone)]
pub struct Line {
    pub name: String,
    pub from: NodeId,
    pub to: NodeId,
    pub capacity_mw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GeneratorKind {
    /// Effectively unlimited source priced at the historical series.
    Infinite,
    /// Gas-block capacity derived from demand and the block size.
    Block,
    /// Offshore wind bounded by the availability series.
    Wind,
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub name: String,
    pub node: NodeId,
    pub kind: GeneratorKind,
    pub price: Vec<f64>,
    pub capacity: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DispatchCase {
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
    /// Demand per node (BE, EI, UK), MW per hour.
    pub demand: [Vec<f64>; 3],
    pub horizon: usize,
}

/// How the gas-block generators' hourly capacity is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockCapacityRule {
    /// `max(0, demand - block_size)`: one block's worth of gas has left the
    /// market mix.
    DemandMinusBlock,
    /// Alternative reading: the block generator holds exactly one block.
    FixedBlock,
}

/// Assembles the two-zone-plus-energy-island test case: infinite historical
/// generators in each zone, cheaper gas-block generators at 95% of the zonal
/// price, and an offshore wind plant on the island bidding 95% of the
/// grid-A price.
#[allow(clippy::too_many_arguments)]
pub fn build_island_case(
    prices_be: &[f64],
    prices_uk: &[f64],
    demand_be: &[f64],
    demand_uk: &[f64],
    wind: &[f64],
    block_size_mw: f64,
    rule: BlockCapacityRule,
) -> Result<DispatchCase, DispatchError> {
    let n = prices_be.len();
    for other in [
        prices_uk.len(),
        demand_be.len(),
        demand_uk.len(),
        wind.len(),
    ] {
        if other != n {
            return Err(DispatchError::ShapeMismatch {
                left: n,
                right: other,
            });
        }
    }
    for (hour, d) in demand_be.iter().chain(demand_uk.iter()).enumerate() {
        if *d < 0.0 {
            return Err(DispatchError::NegativeDemand {
                value: *d,
                hour: hour % n,
            });
        }
    }
    for (hour, w) in wind.iter().enumerate() {
        if *w < 0.0 {
            return Err(DispatchError::NegativeWind { value: *w, hour });
        }
    }

    let peak = |d: &[f64]| d.iter().cloned().fold(0.0f64, f64::max);
    // "Infinite" sources capped at ten times zonal peak keep the LPs bounded
    // without ever binding.
    let inf_cap_be = 10.0 * peak(demand_be).max(1.0);
    let inf_cap_uk = 10.0 * peak(demand_uk).max(1.0);
    let block_cap = |demand: &[f64]| -> Vec<f64> {
        demand
            .iter()
            .map(|d| match rule {
                BlockCapacityRule::DemandMinusBlock => (d - block_size_mw).max(0.0),
                BlockCapacityRule::FixedBlock => block_size_mw,
            })
            .collect()
    };

    let generators = vec![
        Generator {
            name: "g1-uk-historical".to_string(),
            node: NodeId::Uk,
            kind: GeneratorKind::Infinite,
            price: prices_uk.to_vec(),
            capacity: vec![inf_cap_uk; n],
        },
        Generator {
            name: "g2-uk-block".to_string(),
            node: NodeId::Uk,
            kind: GeneratorKind::Block,
            price: prices_uk.iter().map(|p| 0.95 * p).collect(),
            capacity: block_cap(demand_uk),
        },
        Generator {
            name: "g3-be-historical".to_string(),
            node: NodeId::Be,
            kind: GeneratorKind::Infinite,
            price: prices_be.to_vec(),
            capacity: vec![inf_cap_be; n],
        },
        Generator {
            name: "g4-be-block".to_string(),
            node: NodeId::Be,
            kind: GeneratorKind::Block,
            price: prices_be.iter().map(|p| 0.95 * p).collect(),
            capacity: block_cap(demand_be),
        },
        Generator {
            name: "owpp".to_string(),
            node: NodeId::Ei,
            kind: GeneratorKind::Wind,
            price: prices_be.iter().map(|p| 0.95 * p).collect(),
            capacity: wind.to_vec(),
        },
    ];

    Ok(DispatchCase {
        lines: island_lines(),
        generators,
        demand: [demand_be.to_vec(), vec![0.0; n], demand_uk.to_vec()],
        horizon: n,
    })
}

/// Transmission infrastructure of the second test case.
pub fn island_lines() -> Vec<Line> {
    vec![
        Line {
            name: "nautilus-uk".to_string(),
            from: NodeId::Uk,
            to: NodeId::Ei,
            capacity_mw: 1400.0,
        },
        Line {
            name: "nautilus-be".to_string(),
            from: NodeId::Ei,
            to: NodeId::Be,
            capacity_mw: 1400.0,
        },
        Line {
            name: "hvac-be".to_string(),
            from: NodeId::Ei,
            to: NodeId::Be,
            capacity_mw: 2100.0,
        },
    ]
}

/// Per-hour clearing output for the whole horizon.
#[derive(Debug, Clone)]
pub struct DispatchResult {
    /// `generation[g][hour]` in MW.
    pub generation: Vec<Vec<f64>>,
    /// `flows[line][hour]` in MW, positive in the line's from->to direction.
    pub flows: Vec<Vec<f64>>,
    /// `prices[node][hour]`: duals of the nodal balance rows (BE, EI, UK).
    pub prices: [Vec<f64>; 3],
    pub total_cost: f64,
    /// Hours whose optimal basis was degenerate (duals may be non-unique).
    pub tied_hours: Vec<usize>,
    pub first_hour: usize,
}

/// Builds the hourly clearing LP: generator columns, one forward and one
/// backward column per line (so the zero-flow point is a bound and idle
/// lines stay idle), and one balance equality per node.
pub fn build_hour_lp(case: &DispatchCase, hour: usize) -> LinearProgram {
    let ng = case.generators.len();
    let nl = case.lines.len();
    let mut lp = LinearProgram::new(ng + 2 * nl);
    for (g, generator) in case.generators.iter().enumerate() {
        lp.set_objective(g, generator.price[hour]);
        lp.set_bounds(g, 0.0, generator.capacity[hour].max(0.0));
    }
    for (l, line) in case.lines.iter().enumerate() {
        lp.set_bounds(ng + 2 * l, 0.0, line.capacity_mw);
        lp.set_bounds(ng + 2 * l + 1, 0.0, line.capacity_mw);
    }
    for node in NodeId::ALL {
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for (g, generator) in case.generators.iter().enumerate() {
            if generator.node == node {
                entries.push((g, 1.0));
            }
        }
        for (l, line) in case.lines.iter().enumerate() {
            if line.to == node {
                entries.push((ng + 2 * l, 1.0));
                entries.push((ng + 2 * l + 1, -1.0));
            } else if line.from == node {
                entries.push((ng + 2 * l, -1.0));
                entries.push((ng + 2 * l + 1, 1.0));
            }
        }
        lp.add_row(RowKind::Eq, case.demand[node.index()][hour], &entries);
    }
    lp
}

/// Net signed flow per line (in the line's from->to direction) from an
/// hourly LP solution.
pub fn hour_flows(case: &DispatchCase, x: &[f64]) -> Vec<f64> {
    let ng = case.generators.len();
    (0..case.lines.len())
        .map(|l| x[ng + 2 * l] - x[ng + 2 * l + 1])
        .collect()
}

fn hour_is_degenerate(lp: &LinearProgram, result: &LpResult) -> bool {
    let tol = 1e-9;
    for j in 0..lp.num_cols() {
        let (lo, hi) = (lp.col_lower[j], lp.col_upper[j]);
        if lo == hi {
            continue;
        }
        let at_bound = (result.x[j] - lo).abs() <= tol || (hi - result.x[j]).abs() <= tol;
        if at_bound && result.reduced_costs[j].abs() <= tol {
            return true;
        }
    }
    false
}

/// Clears the market over `hours` (hour indices are preserved in the
/// result). Hours are independent LPs solved in index order.
pub fn clear_market(
    case: &DispatchCase,
    hours: std::ops::Range<usize>,
) -> Result<DispatchResult, DispatchError> {
    if hours.end > case.horizon || hours.start >= hours.end {
        return Err(DispatchError::BadHourRange {
            start: hours.start,
            end: hours.end,
            horizon: case.horizon,
        });
    }
    let ng = case.generators.len();
    let nl = case.lines.len();
    let mut generation = vec![Vec::with_capacity(hours.len()); ng];
    let mut flows = vec![Vec::with_capacity(hours.len()); nl];
    let mut prices = [
        Vec::with_capacity(hours.len()),
        Vec::with_capacity(hours.len()),
        Vec::with_capacity(hours.len()),
    ];
    let mut total_cost = 0.0;
    let mut tied_hours = Vec::new();
    let first_hour = hours.start;

    for hour in hours {
        let lp = build_hour_lp(case, hour);
        let result = solve_lp(&lp, SimplexConfig::default())
            .map_err(|source| DispatchError::Solver { hour, source })?;
        match result.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(DispatchError::InfeasibleHour { hour }),
            LpStatus::Unbounded => {
                // Capacity caps make this unreachable; treat as data trouble.
                return Err(DispatchError::InfeasibleHour { hour });
            }
        }
        for g in 0..ng {
            generation[g].push(result.x[g]);
        }
        for (l, net) in hour_flows(case, &result.x).into_iter().enumerate() {
            flows[l].push(net);
        }
        for node in NodeId::ALL {
            prices[node.index()].push(result.row_duals[node.index()]);
        }
        total_cost += result.objective;
        if hour_is_degenerate(&lp, &result) {
            tied_hours.push(hour);
        }
    }

    Ok(DispatchResult {
        generation,
        flows,
        prices,
        total_cost,
        tied_hours,
        first_hour,
    })
}

/// Signed flow series for one line in the envelope convention (positive
/// toward the UK end of the chain).
pub fn extract_flows(
    result: &DispatchResult,
    case: &DispatchCase,
    line_name: &str,
) -> Result<Vec<f64>, DispatchError> {
    let (l, line) = case
        .lines
        .iter()
        .enumerate()
        .find(|(_, line)| line.name == line_name)
        .ok_or_else(|| DispatchError::UnknownLine(line_name.to_string()))?;
    let sign = if line.to.chain_pos() > line.from.chain_pos() {
        1.0
    } else {
        -1.0
    };
    Ok(result.flows[l].iter().map(|f| sign * f).collect())
}

/// Aggregate flow on all lines touching a side of the chain, oriented
/// toward the UK; feeds the two-sided envelope with a single series per
/// side.
pub fn side_flows(result: &DispatchResult, case: &DispatchCase, side: NodeId) -> (Vec<f64>, f64) {
    let hours = result.flows.first().map_or(0, Vec::len);
    let mut total = vec![0.0; hours];
    let mut capacity = 0.0;
    for (l, line) in case.lines.iter().enumerate() {
        if line.from == side || line.to == side {
            let sign = if line.to.chain_pos() > line.from.chain_pos() {
                1.0
            } else {
                -1.0
            };
            capacity += line.capacity_mw;
            for (h, f) in result.flows[l].iter().enumerate() {
                total[h] += sign * f;
            }
        }
    }
    (total, capacity)
}

/// Nodal prices CSV (`hour,be,ei,uk`).
pub fn prices_to_csv(result: &DispatchResult) -> String {
    let mut out = String::from("hour,lambda_be,lambda_ei,lambda_uk\n");
    for h in 0..result.prices[0].len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            result.first_hour + h,
            result.prices[0][h],
            result.prices[1][h],
            result.prices[2][h]
        ));
    }
    out
}

/// Per-line flow CSV (`hour,flow_mw`), already in the envelope convention.
pub fn flows_to_csv(
    result: &DispatchResult,
    case: &DispatchCase,
    line_name: &str,
) -> Result<String, DispatchError> {
    let series = extract_flows(result, case, line_name)?;
    let mut out = String::from("hour,flow_mw\n");
    for (h, f) in series.iter().enumerate() {
        out.push_str(&format!("{},{}\n", result.first_hour + h, f));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(n: usize, v: f64) -> Vec<f64> {
        vec![v; n]
    }

    #[test]
    fn block_capacity_follows_the_rule() {
        let case = build_island_case(
            &flat(2, 40.0),
            &flat(2, 50.0),
            &[8500.0, 900.0],
            &flat(2, 9000.0),
            &flat(2, 0.0),
            1000.0,
            BlockCapacityRule::DemandMinusBlock,
        )
        .unwrap();
        let g4 = &case.generators[3];
        assert_eq!(g4.capacity, vec![7500.0, 0.0]);
        assert!((g4.price[0] - 38.0).abs() < 1e-12);

        let fixed = build_island_case(
            &flat(2, 40.0),
            &flat(2, 50.0),
            &[8500.0, 900.0],
            &flat(2, 9000.0),
            &flat(2, 0.0),
            1000.0,
            BlockCapacityRule::FixedBlock,
        )
        .unwrap();
        assert_eq!(fixed.generators[3].capacity, vec![1000.0, 1000.0]);
    }

    #[test]
    fn no_wind_equal_prices_recovers_historical_duals() {
        let n = 4;
        let price: Vec<f64> = (0..n).map(|h| 35.0 + 5.0 * h as f64).collect();
        let case = build_island_case(
            &price,
            &price,
            &flat(n, 8500.0),
            &flat(n, 9000.0),
            &flat(n, 0.0),
            1000.0,
            BlockCapacityRule::DemandMinusBlock,
        )
        .unwrap();
        let result = clear_market(&case, 0..n).unwrap();
        for h in 0..n {
            assert!(
                (result.prices[0][h] - price[h]).abs() < 1e-6,
                "BE dual at {h}"
            );
            assert!(
                (result.prices[2][h] - price[h]).abs() < 1e-6,
                "UK dual at {h}"
            );
        }
        // No wind, no price gradient: nothing moves on the lines.
        for flows in &result.flows {
            assert!(flows.iter().all(|f| f.abs() < 1e-6));
        }
    }

    #[test]
    fn balance_holds_every_hour() {
        let n = 6;
        let price_be: Vec<f64> = (0..n).map(|h| 30.0 + 2.0 * h as f64).collect();
        let price_uk: Vec<f64> = price_be.iter().map(|p| p * 1.2 + 3.0).collect();
        let case = build_island_case(
            &price_be,
            &price_uk,
            &flat(n, 8000.0),
            &flat(n, 9000.0),
            &flat(n, 2500.0),
            1000.0,
            BlockCapacityRule::DemandMinusBlock,
        )
        .unwrap();
        let result = clear_market(&case, 0..n).unwrap();
        for h in 0..n {
            // Global balance: total generation equals total demand.
            let gen: f64 = result.generation.iter().map(|g| g[h]).sum();
            let demand = 8000.0 + 9000.0;
            assert!((gen - demand).abs() < 1e-6, "hour {h}: {gen} vs {demand}");
        }
    }

    #[test]
    fn big_wind_decouples_island_price() {
        let n = 2;
        let price_be = flat(n, 40.0);
        let price_uk = flat(n, 52.0);
        // Fixed-block capacities keep the historical units marginal in both
        // zones, so the wind price undercuts them strictly.
        let case = build_island_case(
            &price_be,
            &price_uk,
            &flat(n, 12000.0),
            &flat(n, 10000.0),
            &flat(n, 6000.0),
            1000.0,
            BlockCapacityRule::FixedBlock,
        )
        .unwrap();
        let result = clear_market(&case, 0..n).unwrap();
        // Exports saturate both sides (3500 toward BE, 1400 toward UK) and
        // the leftover wind is curtailed, so wind is marginal on the island
        // while the zones keep their historical clearing prices.
        assert!((result.prices[1][0] - 0.95 * 40.0).abs() < 1e-6);
        assert!((result.prices[0][0] - 40.0).abs() < 1e-6);
        assert!((result.prices[2][0] - 52.0).abs() < 1e-6);
        let (be_flow, be_cap) = side_flows(&result, &case, NodeId::Be);
        assert!((be_cap - 3500.0).abs() < 1e-9);
        assert!(
            (be_flow[0] + 3500.0).abs() < 1e-6,
            "BE side saturated toward BE"
        );
        let uk_flow = extract_flows(&result, &case, "nautilus-uk").unwrap();
        assert!(
            (uk_flow[0] - 1400.0).abs() < 1e-6,
            "UK side saturated toward UK"
        );
    }

    #[test]
    fn huge_lines_collapse_to_single_zone() {
        let n = 1;
        let mut case = build_island_case(
            &flat(n, 30.0),
            &flat(n, 55.0),
            &flat(n, 8000.0),
            &flat(n, 9000.0),
            &flat(n, 0.0),
            1000.0,
            BlockCapacityRule::DemandMinusBlock,
        )
        .unwrap();
        for line in case.lines.iter_mut() {
            line.capacity_mw = 1e6;
        }
        let result = clear_market(&case, 0..n).unwrap();
        // The cheapest marginal price (BE historical) sets every node.
        for node in 0..3 {
            assert!(
                (result.prices[node][0] - 30.0).abs() < 1e-6,
                "node {node}: {}",
                result.prices[node][0]
            );
        }
    }

    #[test]
    fn more_wind_never_costs_more() {
        let n = 3;
        let price_be: Vec<f64> = vec![42.0, 38.0, 45.0];
        let price_uk: Vec<f64> = vec![50.0, 47.0, 58.0];
        let mut last_cost = f64::INFINITY;
        for wind in [0.0, 1000.0, 2500.0, 4000.0] {
            let case = build_island_case(
                &price_be,
                &price_uk,
                &flat(n, 9000.0),
                &flat(n, 9500.0),
                &flat(n, wind),
                1000.0,
                BlockCapacityRule::DemandMinusBlock,
            )
            .unwrap();
            let result = clear_market(&case, 0..n).unwrap();
            assert!(result.total_cost <= last_cost + 1e-6);
            last_cost = result.total_cost;
        }
    }

    #[test]
    fn infeasible_hour_is_named() {
        // Zero out every generator: demand cannot be met at hour 0.
        let n = 2;
        let mut case = build_island_case(
            &flat(n, 30.0),
            &flat(n, 40.0),
            &flat(n, 5000.0),
            &flat(n, 5000.0),
            &flat(n, 0.0),
            1000.0,
            BlockCapacityRule::DemandMinusBlock,
        )
        .unwrap();
        for g in case.generators.iter_mut() {
            g.capacity = flat(n, 0.0);
        }
        match clear_market(&case, 0..n) {
            Err(DispatchError::InfeasibleHour { hour }) => assert_eq!(hour, 0),
            other => panic!("expected infeasible hour, got {other:?}"),
        }
    }

    #[test]
    fn flow_extraction_respects_the_chain_orientation() {
        let n = 1;
        let case = build_island_case(
            &flat(n, 40.0),
            &flat(n, 60.0),
            &flat(n, 12000.0),
            &flat(n, 10000.0),
            &flat(n, 6000.0),
            1000.0,
            BlockCapacityRule::DemandMinusBlock,
        )
        .unwrap();
        let result = clear_market(&case, 0..n).unwrap();
        // nautilus-be is oriented EI->BE in the table; toward-UK positive
        // flips its sign.
        let l = case
            .lines
            .iter()
            .position(|l| l.name == "nautilus-be")
            .unwrap();
        let raw = result.flows[l][0];
        let oriented = extract_flows(&result, &case, "nautilus-be").unwrap()[0];
        assert!((oriented + raw).abs() < 1e-12);
        assert!(matches!(
            extract_flows(&result, &case, "missing"),
            Err(DispatchError::UnknownLine(_))
        ));
    }
}
