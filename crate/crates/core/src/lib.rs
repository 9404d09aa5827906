// Indexed loops are the house style in the linear-algebra kernels, and
// `!(x > 0.0)` guards are deliberate: they reject NaN where `x <= 0.0`
// would let it through.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Multi-market battery arbitrage toolkit: market-data cleaning,
//! interconnector operating envelopes, an exact epigraph MILP formulation
//! with capacity blocking, a bespoke LP/MILP solver, a three-node dispatch
//! model producing shadow prices, and the profitability studies built on
//! top of them.

pub mod analytics;
pub mod battery;
pub mod dispatch;
pub mod envelope;
pub mod ingest;
pub mod milp;
pub mod solver;
pub mod synth;

pub use analytics::{Metrics, Scenario, StudyData};
pub use battery::{BatteryParams, EffectiveEfficiencies, PriceSet};
pub use envelope::{LinkState, OperatingEnvelope};
pub use milp::{ArbitrageSolution, BlockingSpec, MilpProblem};
pub use solver::{BnbConfig, LinearProgram, LpResult, MilpResult, SimplexConfig};
