//! LP/MILP machinery: a bounded-variable revised simplex, best-bound-first
//! branch and bound over the arbitrage binaries, an exhaustive oracle for
//! small instances, and MPS import/export for external cross-checks.

pub mod bnb;
pub mod brute;
pub mod lp;
pub mod mps;
pub mod simplex;

pub use bnb::{solve_milp, solve_milp_lp, BnbConfig, MilpResult, MilpStatus};
pub use brute::brute_force;
pub use lp::{LinearProgram, LpError, LpResult, LpStatus, RowKind};
pub use simplex::{solve_lp, Simplex, SimplexConfig};
