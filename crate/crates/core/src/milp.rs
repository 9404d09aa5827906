//! Exact assembly of the two-market arbitrage problems: the single-variable
//! best-price baseline LP (K1) and the epigraph MILP with disjunctive
//! charge/discharge linearization, capacity blocking and operating-envelope
//! bounds.
//!
//! Variable layout of the MILP, per horizon step `i` of `N`:
//! `[x_A(1..N), x_B(1..N), t_A(1..N), t_B(1..N), z_ch(1..N), z_dis(1..N)]`.
//! Constraint rows come in 13 blocks of `N` rows each, in order: the four
//! epigraph cuts, capacity up/down (prefix sums), joint ramp up/down, the
//! four sign-linearization rows, and the indicator-sum row. The capacity
//! blocks are kept in prefix-sum form (memory stays linear in `N`); rows are
//! materialized on demand, and [`MilpProblem::to_lp`] is the dense-prefix
//! fallback handed to the solver.

use serde::Serialize;
use thiserror::Error;

use crate::battery::{self, BatteryParams, PriceSet};
use crate::envelope::OperatingEnvelope;
use crate::solver::lp::{LinearProgram, LpResult, RowKind};

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("series length mismatch: {left} vs {right}")]
    ShapeMismatch { left: usize, right: usize },
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("negative price {value} in {series} at step {index}; clamp inputs first")]
    NegativePrice {
        series: &'static str,
        value: f64,
        index: usize,
    },
    #[error(
        "blocking bounds [{b_min_prime}, {b_max_prime}] invalid for battery [{b_min}, {b_max}]"
    )]
    InvalidBlocking {
        b_min_prime: f64,
        b_max_prime: f64,
        b_min: f64,
        b_max: f64,
    },
    #[error("initial charge {b0} lies outside the blocked range [{lo}, {hi}]: infeasible by construction")]
    InitialChargeBlocked { b0: f64, lo: f64, hi: f64 },
    #[error("envelope violates the ramp box at step {0}")]
    EnvelopeOutOfBox(usize),
    #[error(transparent)]
    Battery(#[from] battery::BatteryError),
    #[error("solution vector has length {got}, expected {want}")]
    BadSolutionLength { got: usize, want: usize },
    #[error("solver inconsistency: {0}")]
    SolverInconsistency(String),
}

/// Arbitrage-usable capacity window after blocking battery energy for
/// emergency services.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockingSpec {
    pub b_max_prime: f64,
    pub b_min_prime: f64,
}

impl BlockingSpec {
    /// No blocking: the full physical window remains usable.
    pub fn none(battery: &BatteryParams) -> Self {
        BlockingSpec {
            b_max_prime: battery.b_max,
            b_min_prime: battery.b_min,
        }
    }

    /// Splits the blocked energy symmetrically: half raises the floor, half
    /// lowers the ceiling.
    pub fn symmetric(battery: &BatteryParams, b_block: f64) -> Self {
        BlockingSpec {
            b_max_prime: battery.b_max - 0.5 * b_block,
            b_min_prime: battery.b_min + 0.5 * b_block,
        }
    }

    /// Puts `top_share` of the blocked energy at the top of the range.
    pub fn split(battery: &BatteryParams, b_block: f64, top_share: f64) -> Self {
        BlockingSpec {
            b_max_prime: battery.b_max - top_share * b_block,
            b_min_prime: battery.b_min + (1.0 - top_share) * b_block,
        }
    }

    /// Total blocked energy `(b_max - b_max') + (b_min' - b_min)`.
    pub fn b_block(&self, battery: &BatteryParams) -> f64 {
        (battery.b_max - self.b_max_prime) + (self.b_min_prime - battery.b_min)
    }

    pub fn validate(&self, battery: &BatteryParams) -> Result<(), MilpError> {
        let eps = 1e-12;
        if self.b_min_prime < battery.b_min - eps
            || self.b_max_prime > battery.b_max + eps
            || self.b_min_prime > self.b_max_prime + eps
        {
            return Err(MilpError::InvalidBlocking {
                b_min_prime: self.b_min_prime,
                b_max_prime: self.b_max_prime,
                b_min: battery.b_min,
                b_max: battery.b_max,
            });
        }
        Ok(())
    }
}

/// The assembled epigraph MILP in the standard `min f'X, AX <= b,
/// lb <= X <= ub` layout with `13N` rows and `6N` columns (`2N` binary).
#[derive(Debug, Clone)]
pub struct MilpProblem {
    horizon: usize,
    objective: Vec<f64>,
    col_lower: Vec<f64>,
    col_upper: Vec<f64>,
    binary_idx: Vec<usize>,
    coef_buy_a: Vec<f64>,
    coef_sell_a: Vec<f64>,
    coef_buy_b: Vec<f64>,
    coef_sell_b: Vec<f64>,
    x_min: f64,
    x_max: f64,
    cap_upper: f64,
    cap_lower: f64,
    b0: f64,
    terminal_soc: bool,
}

impl MilpProblem {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_cols(&self) -> usize {
        6 * self.horizon
    }

    pub fn num_rows(&self) -> usize {
        13 * self.horizon + usize::from(self.terminal_soc)
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn col_lower(&self) -> &[f64] {
        &self.col_lower
    }

    pub fn col_upper(&self) -> &[f64] {
        &self.col_upper
    }

    pub fn binary_idx(&self) -> &[usize] {
        &self.binary_idx
    }

    pub fn col_x_a(&self, i: usize) -> usize {
        i
    }

    pub fn col_x_b(&self, i: usize) -> usize {
        self.horizon + i
    }

    pub fn col_t_a(&self, i: usize) -> usize {
        2 * self.horizon + i
    }

    pub fn col_t_b(&self, i: usize) -> usize {
        3 * self.horizon + i
    }

    pub fn col_z_ch(&self, i: usize) -> usize {
        4 * self.horizon + i
    }

    pub fn col_z_dis(&self, i: usize) -> usize {
        5 * self.horizon + i
    }

    /// Usable state-of-charge window implied by the capacity rows.
    pub fn soc_window(&self) -> (f64, f64) {
        (self.b0 - self.cap_lower, self.b0 + self.cap_upper)
    }

    /// Adds (or removes) the optional terminal-charge equality `b_N = b0`,
    /// appended after the 13 standard row blocks.
    pub fn with_terminal_soc(mut self, enforce: bool) -> Self {
        self.terminal_soc = enforce;
        self
    }

    pub fn row_is_equality(&self, row: usize) -> bool {
        let n = self.horizon;
        row >= 12 * n
    }

    /// Right-hand side of one row.
    pub fn rhs(&self, row: usize) -> f64 {
        let n = self.horizon;
        match row / n {
            0..=3 => 0.0,
            4 => self.cap_upper,
            5 => self.cap_lower,
            6 => self.x_max,
            7 => -self.x_min,
            8..=11 => 0.0,
            12 => 1.0,
            _ => 0.0, // terminal SoC row
        }
    }

    /// Materializes one constraint row as sparse `(column, coefficient)`
    /// pairs in ascending column order.
    pub fn row(&self, row: usize) -> Vec<(usize, f64)> {
        let n = self.horizon;
        if row >= 13 * n {
            let mut entries = Vec::with_capacity(2 * n);
            for j in 0..n {
                entries.push((self.col_x_a(j), 1.0));
            }
            for j in 0..n {
                entries.push((self.col_x_b(j), 1.0));
            }
            return entries;
        }
        let block = row / n;
        let k = row % n;
        match block {
            0 => vec![
                (self.col_x_a(k), self.coef_buy_a[k]),
                (self.col_t_a(k), -1.0),
            ],
            1 => vec![
                (self.col_x_a(k), self.coef_sell_a[k]),
                (self.col_t_a(k), -1.0),
            ],
            2 => vec![
                (self.col_x_b(k), self.coef_buy_b[k]),
                (self.col_t_b(k), -1.0),
            ],
            3 => vec![
                (self.col_x_b(k), self.coef_sell_b[k]),
                (self.col_t_b(k), -1.0),
            ],
            4 | 5 => {
                let sign = if block == 4 { 1.0 } else { -1.0 };
                let mut entries = Vec::with_capacity(2 * (k + 1));
                for j in 0..=k {
                    entries.push((self.col_x_a(j), sign));
                }
                for j in 0..=k {
                    entries.push((self.col_x_b(j), sign));
                }
                entries
            }
            6 => vec![(self.col_x_a(k), 1.0), (self.col_x_b(k), 1.0)],
            7 => vec![(self.col_x_a(k), -1.0), (self.col_x_b(k), -1.0)],
            8 => vec![(self.col_x_a(k), -1.0), (self.col_z_ch(k), self.x_min)],
            9 => vec![(self.col_x_a(k), 1.0), (self.col_z_dis(k), -self.x_max)],
            10 => vec![(self.col_x_b(k), -1.0), (self.col_z_ch(k), self.x_min)],
            11 => vec![(self.col_x_b(k), 1.0), (self.col_z_dis(k), -self.x_max)],
            12 => vec![(self.col_z_ch(k), 1.0), (self.col_z_dis(k), 1.0)],
            _ => unreachable!(),
        }
    }

    /// Materializes the full sparse LP (the dense-prefix fallback for the
    /// capacity blocks) for the solver and for MPS export.
    pub fn to_lp(&self) -> LinearProgram {
        let mut lp = LinearProgram::new(self.num_cols());
        for j in 0..self.num_cols() {
            lp.set_objective(j, self.objective[j]);
            lp.set_bounds(j, self.col_lower[j], self.col_upper[j]);
        }
        for row in 0..self.num_rows() {
            let kind = if self.row_is_equality(row) {
                RowKind::Eq
            } else {
                RowKind::Le
            };
            lp.add_row(kind, self.rhs(row), &self.row(row));
        }
        lp
    }
}

/// Builds the epigraph MILP. Envelope bounds land on the `x_B` columns,
/// blocking tightens the capacity right-hand sides, and epigraph bounds use
/// the tightest valid per-step box instead of an arbitrary big constant.
pub fn build_pmilp(
    prices: &PriceSet,
    battery: &BatteryParams,
    envelope: &OperatingEnvelope,
    blocking: &BlockingSpec,
) -> Result<MilpProblem, MilpError> {
    battery.validate()?;
    blocking.validate(battery)?;
    let n = prices.len();
    if n == 0 {
        return Err(MilpError::EmptyHorizon);
    }
    if envelope.len() != n {
        return Err(MilpError::ShapeMismatch {
            left: n,
            right: envelope.len(),
        });
    }
    if battery.b0 < blocking.b_min_prime - 1e-12 || battery.b0 > blocking.b_max_prime + 1e-12 {
        return Err(MilpError::InitialChargeBlocked {
            b0: battery.b0,
            lo: blocking.b_min_prime,
            hi: blocking.b_max_prime,
        });
    }
    for (series, values) in [
        ("p_buy_a", &prices.p_buy_a),
        ("p_sell_a", &prices.p_sell_a),
        ("p_buy_b", &prices.p_buy_b),
        ("p_sell_b", &prices.p_sell_b),
        ("p_buy_b_adj", &prices.p_buy_b_adj),
    ] {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(MilpError::NegativePrice {
                series,
                value,
                index,
            });
        }
    }
    let (x_min, x_max) = (battery.x_min(), battery.x_max());
    for i in 0..n {
        let (lo, hi) = (envelope.x_min_adj[i], envelope.x_max_adj[i]);
        if lo < x_min - 1e-12 || hi > x_max + 1e-12 || lo > 0.0 || hi < 0.0 {
            return Err(MilpError::EnvelopeOutOfBox(i));
        }
    }

    let eff = battery.effective_efficiencies();
    let min_eta = eff.eta_ch_star.min(eff.eta_dis_star);
    let x_mag = x_min.abs().max(x_max);
    let mut objective = vec![0.0; 6 * n];
    let mut col_lower = vec![0.0; 6 * n];
    let mut col_upper = vec![0.0; 6 * n];
    for i in 0..n {
        col_lower[i] = x_min;
        col_upper[i] = x_max;
        col_lower[n + i] = envelope.x_min_adj[i];
        col_upper[n + i] = envelope.x_max_adj[i];
        let t_a = prices.p_buy_a[i].abs().max(prices.p_sell_a[i].abs()) * x_mag / min_eta + 1.0;
        let t_b = prices.p_buy_b_adj[i]
            .abs()
            .max(prices.p_sell_b_adj[i].abs())
            * x_mag
            / min_eta
            + 1.0;
        col_lower[2 * n + i] = -t_a;
        col_upper[2 * n + i] = t_a;
        col_lower[3 * n + i] = -t_b;
        col_upper[3 * n + i] = t_b;
        objective[2 * n + i] = 1.0;
        objective[3 * n + i] = 1.0;
        col_upper[4 * n + i] = 1.0;
        col_upper[5 * n + i] = 1.0;
    }

    Ok(MilpProblem {
        horizon: n,
        objective,
        col_lower,
        col_upper,
        binary_idx: (4 * n..6 * n).collect(),
        coef_buy_a: prices.p_buy_a.iter().map(|p| p / eff.eta_ch_star).collect(),
        coef_sell_a: prices
            .p_sell_a
            .iter()
            .map(|p| p * eff.eta_dis_star)
            .collect(),
        coef_buy_b: prices
            .p_buy_b_adj
            .iter()
            .map(|p| p / eff.eta_ch_star)
            .collect(),
        coef_sell_b: prices
            .p_sell_b_adj
            .iter()
            .map(|p| p * eff.eta_dis_star)
            .collect(),
        x_min,
        x_max,
        cap_upper: blocking.b_max_prime - battery.b0,
        cap_lower: battery.b0 - blocking.b_min_prime,
        b0: battery.b0,
        terminal_soc: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolutionStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Limit,
}

/// Decoded optimizer output: per-step trajectories, indicator values, the
/// state-of-charge path and the epigraph objective.
#[derive(Debug, Clone, Serialize)]
pub struct ArbitrageSolution {
    pub x_a: Vec<f64>,
    pub x_b: Vec<f64>,
    pub t_a: Vec<f64>,
    pub t_b: Vec<f64>,
    pub z_ch: Vec<u8>,
    pub z_dis: Vec<u8>,
    pub objective: f64,
    pub soc: Vec<f64>,
    pub status: SolutionStatus,
}

impl ArbitrageSolution {
    pub fn revenue(&self) -> f64 {
        -self.objective
    }

    /// CSV rendering (`t,x_a,x_b,soc,z_ch`).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x_a,x_b,soc,z_ch\n");
        for i in 0..self.x_a.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                i, self.x_a[i], self.x_b[i], self.soc[i], self.z_ch[i]
            ));
        }
        out
    }
}

/// Slices a raw solver vector into the six blocks, canonicalizes the
/// indicators at idle steps, recomputes the charge path and re-checks
/// feasibility. A failed re-check is a hard error.
pub fn decode_solution(
    problem: &MilpProblem,
    raw_x: &[f64],
    battery: &BatteryParams,
) -> Result<ArbitrageSolution, MilpError> {
    let n = problem.horizon();
    if raw_x.len() != 6 * n {
        return Err(MilpError::BadSolutionLength {
            got: raw_x.len(),
            want: 6 * n,
        });
    }
    let x_a = raw_x[..n].to_vec();
    let x_b = raw_x[n..2 * n].to_vec();
    let t_a = raw_x[2 * n..3 * n].to_vec();
    let t_b = raw_x[3 * n..4 * n].to_vec();
    let mut z_ch = Vec::with_capacity(n);
    let mut z_dis = Vec::with_capacity(n);
    let tol = 1e-6;
    for i in 0..n {
        let zc = raw_x[4 * n + i];
        let zd = raw_x[5 * n + i];
        if (zc - zc.round()).abs() > tol || (zd - zd.round()).abs() > tol {
            return Err(MilpError::SolverInconsistency(format!(
                "non-integral indicator at step {i}: z_ch={zc}, z_dis={zd}"
            )));
        }
        if x_a[i].abs() <= tol && x_b[i].abs() <= tol {
            // Idle steps are canonicalized for reproducible outputs.
            z_ch.push(0);
            z_dis.push(1);
        } else {
            z_ch.push(zc.round() as u8);
            z_dis.push(zd.round() as u8);
        }
        if z_ch[i] + z_dis[i] != 1 {
            return Err(MilpError::SolverInconsistency(format!(
                "indicator sum differs from one at step {i}"
            )));
        }
    }
    let joint: Vec<f64> = x_a.iter().zip(&x_b).map(|(a, b)| a + b).collect();
    let soc = battery::simulate_soc(battery, &joint);
    let objective = t_a.iter().sum::<f64>() + t_b.iter().sum::<f64>();

    let envelope = OperatingEnvelope {
        x_min_adj: problem.col_lower[n..2 * n].to_vec(),
        x_max_adj: problem.col_upper[n..2 * n].to_vec(),
    };
    let (b_lo, b_hi) = problem.soc_window();
    let report = battery::check_feasible(battery, &x_a, &x_b, &envelope, b_lo, b_hi)?;
    if !report.is_feasible() {
        return Err(MilpError::SolverInconsistency(format!(
            "decoded trajectory violates {} constraints, first: {:?}",
            report.violations.len(),
            report.violations[0]
        )));
    }

    Ok(ArbitrageSolution {
        x_a,
        x_b,
        t_a,
        t_b,
        z_ch,
        z_dis,
        objective,
        soc,
        status: SolutionStatus::Optimal,
    })
}

/// Revenue broken down by market, with bought/sold energy totals.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RevenueSplit {
    pub revenue_a: f64,
    pub revenue_b: f64,
    pub bought_a_mwh: f64,
    pub sold_a_mwh: f64,
    pub bought_b_mwh: f64,
    pub sold_b_mwh: f64,
}

impl RevenueSplit {
    pub fn total(&self) -> f64 {
        self.revenue_a + self.revenue_b
    }
}

/// Re-prices a decoded trajectory into per-market cost terms.
pub fn revenue_split(
    solution: &ArbitrageSolution,
    prices: &PriceSet,
    battery: &BatteryParams,
) -> RevenueSplit {
    let eff = battery.effective_efficiencies();
    let mut split = RevenueSplit {
        revenue_a: 0.0,
        revenue_b: 0.0,
        bought_a_mwh: 0.0,
        sold_a_mwh: 0.0,
        bought_b_mwh: 0.0,
        sold_b_mwh: 0.0,
    };
    for i in 0..solution.x_a.len() {
        let (a_pos, a_neg) = (solution.x_a[i].max(0.0), (-solution.x_a[i]).max(0.0));
        let (b_pos, b_neg) = (solution.x_b[i].max(0.0), (-solution.x_b[i]).max(0.0));
        let cost_a = prices.p_buy_a[i] * a_pos / eff.eta_ch_star
            - prices.p_sell_a[i] * a_neg * eff.eta_dis_star;
        let cost_b = prices.p_buy_b_adj[i] * b_pos / eff.eta_ch_star
            - prices.p_sell_b_adj[i] * b_neg * eff.eta_dis_star;
        split.revenue_a -= cost_a;
        split.revenue_b -= cost_b;
        split.bought_a_mwh += a_pos;
        split.sold_a_mwh += a_neg;
        split.bought_b_mwh += b_pos;
        split.sold_b_mwh += b_neg;
    }
    split
}

/// The single-variable baseline: per step the battery sees the better of the
/// two buying prices and the better of the two selling prices, with the raw
/// (inverter-free) efficiencies of the original formulation.
#[derive(Debug, Clone)]
pub struct K1Problem {
    pub lp: LinearProgram,
    horizon: usize,
    buy_price: Vec<f64>,
    sell_price: Vec<f64>,
    buy_from_a: Vec<bool>,
    sell_to_a: Vec<bool>,
}

impl K1Problem {
    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

/// Builds the baseline epigraph LP over the pointwise-best prices.
pub fn build_k1(prices: &PriceSet, battery: &BatteryParams) -> Result<K1Problem, MilpError> {
    battery.validate()?;
    let n = prices.len();
    if n == 0 {
        return Err(MilpError::EmptyHorizon);
    }
    let (x_min, x_max) = (battery.x_min(), battery.x_max());
    let x_mag = x_min.abs().max(x_max);
    let min_eta = battery.eta_ch.min(battery.eta_dis);

    let mut buy_price = Vec::with_capacity(n);
    let mut sell_price = Vec::with_capacity(n);
    let mut buy_from_a = Vec::with_capacity(n);
    let mut sell_to_a = Vec::with_capacity(n);
    for i in 0..n {
        let ba = prices.p_buy_a[i];
        let bb = prices.p_buy_b_adj[i];
        buy_from_a.push(ba <= bb);
        buy_price.push(ba.min(bb));
        let sa = prices.p_sell_a[i];
        let sb = prices.p_sell_b_adj[i];
        sell_to_a.push(sa >= sb);
        sell_price.push(sa.max(sb));
    }

    // Columns: x(0..n) then epigraph t(0..n).
    let mut lp = LinearProgram::new(2 * n);
    for i in 0..n {
        lp.set_bounds(i, x_min, x_max);
        let t_bound = buy_price[i].abs().max(sell_price[i].abs()) * x_mag / min_eta + 1.0;
        lp.set_bounds(n + i, -t_bound, t_bound);
        lp.set_objective(n + i, 1.0);
    }
    for i in 0..n {
        lp.add_row(
            RowKind::Le,
            0.0,
            &[(i, buy_price[i] / battery.eta_ch), (n + i, -1.0)],
        );
    }
    for i in 0..n {
        lp.add_row(
            RowKind::Le,
            0.0,
            &[(i, sell_price[i] * battery.eta_dis), (n + i, -1.0)],
        );
    }
    for k in 0..n {
        let entries: Vec<(usize, f64)> = (0..=k).map(|j| (j, 1.0)).collect();
        lp.add_row(RowKind::Le, battery.b_max - battery.b0, &entries);
    }
    for k in 0..n {
        let entries: Vec<(usize, f64)> = (0..=k).map(|j| (j, -1.0)).collect();
        lp.add_row(RowKind::Le, battery.b0 - battery.b_min, &entries);
    }

    Ok(K1Problem {
        lp,
        horizon: n,
        buy_price,
        sell_price,
        buy_from_a,
        sell_to_a,
    })
}

/// Decodes a baseline LP optimum into the common solution shape. Each step's
/// exchange is attributed to the market whose price won the pointwise
/// min/max, and the reported objective re-prices the trajectory under the
/// physical (inverter-inclusive) efficiencies so baseline revenue is
/// comparable with the multi-market model.
pub fn decode_k1(
    k1: &K1Problem,
    lp_result: &LpResult,
    battery: &BatteryParams,
) -> Result<ArbitrageSolution, MilpError> {
    let n = k1.horizon;
    if lp_result.x.len() != 2 * n {
        return Err(MilpError::BadSolutionLength {
            got: lp_result.x.len(),
            want: 2 * n,
        });
    }
    let eff = battery.effective_efficiencies();
    let mut x_a = vec![0.0; n];
    let mut x_b = vec![0.0; n];
    let mut t_a = vec![0.0; n];
    let mut t_b = vec![0.0; n];
    let mut z_ch = vec![0u8; n];
    let mut z_dis = vec![1u8; n];
    for i in 0..n {
        let x = lp_result.x[i];
        let (to_a, cost) = if x >= 0.0 {
            (k1.buy_from_a[i], k1.buy_price[i] * x / eff.eta_ch_star)
        } else {
            (k1.sell_to_a[i], k1.sell_price[i] * x * eff.eta_dis_star)
        };
        if to_a {
            x_a[i] = x;
            t_a[i] = cost;
        } else {
            x_b[i] = x;
            t_b[i] = cost;
        }
        if x < -1e-9 {
            z_ch[i] = 1;
            z_dis[i] = 0;
        }
    }
    let joint: Vec<f64> = x_a.iter().zip(&x_b).map(|(a, b)| a + b).collect();
    let soc = battery::simulate_soc(battery, &joint);
    let objective = t_a.iter().sum::<f64>() + t_b.iter().sum::<f64>();
    let envelope = OperatingEnvelope::unconstrained(n, battery.x_min(), battery.x_max());
    let report =
        battery::check_feasible(battery, &x_a, &x_b, &envelope, battery.b_min, battery.b_max)?;
    if !report.is_feasible() {
        return Err(MilpError::SolverInconsistency(format!(
            "baseline trajectory violates {} constraints",
            report.violations.len()
        )));
    }
    Ok(ArbitrageSolution {
        x_a,
        x_b,
        t_a,
        t_b,
        z_ch,
        z_dis,
        objective,
        soc,
        status: SolutionStatus::Optimal,
    })
}
