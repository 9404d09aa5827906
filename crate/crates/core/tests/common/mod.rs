//! Shared fixtures for the acceptance suite: the synthetic study week, the
//! randomized oracle batch (computed once, shared by two criteria) and
//! small helpers.

use std::sync::OnceLock;
use std::time::Duration;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use interarb::analytics::StudyData;
use interarb::battery::BatteryParams;
use interarb::battery::PriceSet;
use interarb::envelope::OperatingEnvelope;
use interarb::milp::{build_pmilp, decode_solution, ArbitrageSolution, BlockingSpec};
use interarb::solver::{brute_force, solve_milp, BnbConfig, MilpStatus};
use interarb::synth;

/// The seven-day skewed-price study used by the ordering, rent and
/// performance criteria.
pub fn week_data() -> StudyData {
    let (price_a, price_b) = synth::price_pair(7, 42);
    let mut data = StudyData::new(BatteryParams::reference(), price_a, price_b);
    data.eta_line = 0.975;
    data.rent = 5.0;
    data.l_max = 1000.0;
    data.flows = Some(synth::congested_flows(7, 1000.0, 42));
    data
}

/// A higher-spread week for the blocking study (profitable enough that the
/// calendar-life crossing falls inside the sweep grid).
pub fn profitable_week_data() -> StudyData {
    let (price_a, price_b) = synth::price_pair_with(7, 1337, 24.0, 1.15, 4.0);
    let mut data = StudyData::new(BatteryParams::reference(), price_a, price_b);
    data.eta_line = 0.975;
    data.rent = 5.0;
    data.l_max = 1000.0;
    data.flows = Some(synth::congested_flows(7, 1000.0, 7));
    data
}

/// The fully saturated week of the reserved-capacity study.
pub fn saturated_week_data() -> StudyData {
    let mut data = week_data();
    data.flows = Some(synth::saturated_flows(7, 1000.0));
    data
}

pub struct OracleRun {
    pub horizon: usize,
    pub milp_objective: f64,
    pub brute_objective: f64,
    pub solution: ArbitrageSolution,
}

pub struct OracleBatch {
    pub runs: Vec<OracleRun>,
    pub elapsed: Duration,
}

static ORACLE: OnceLock<OracleBatch> = OnceLock::new();

/// 200 randomized small instances solved by both branch-and-bound and the
/// exhaustive oracle; computed once and shared between criteria.
pub fn oracle_batch() -> &'static OracleBatch {
    ORACLE.get_or_init(|| {
        let start = std::time::Instant::now();
        let mut rng = StdRng::seed_from_u64(20_240_817);
        let battery = BatteryParams::reference();
        let mut runs = Vec::with_capacity(200);
        for _ in 0..200 {
            let n = rng.random_range(2..=10);
            let price_a: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..100.0)).collect();
            let price_b: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..100.0)).collect();
            let rent = rng.random_range(0.0..10.0);
            let prices = PriceSet::from_clearing_prices(&price_a, &price_b, rent, 0.975).unwrap();
            let envelope = OperatingEnvelope {
                x_min_adj: (0..n).map(|_| -rng.random_range(0.0..0.5)).collect(),
                x_max_adj: (0..n).map(|_| rng.random_range(0.0..0.5)).collect(),
            };
            let problem =
                build_pmilp(&prices, &battery, &envelope, &BlockingSpec::none(&battery)).unwrap();
            let milp = solve_milp(&problem, &BnbConfig::default()).unwrap();
            assert_eq!(milp.status, MilpStatus::Optimal);
            let brute = brute_force(&problem).unwrap();
            let solution = decode_solution(&problem, &milp.x, &battery).unwrap();
            runs.push(OracleRun {
                horizon: n,
                milp_objective: milp.objective,
                brute_objective: brute.objective,
                solution,
            });
        }
        OracleBatch {
            runs,
            elapsed: start.elapsed(),
        }
    })
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b}");
}
