//! Exhaustive verification oracle: enumerates every charge/discharge
//! indicator pattern and solves the LP restriction for each. Patterns are
//! visited in Gray-code order so consecutive LPs differ in a single step's
//! indicators and warm-start dually.

use super::lp::{LpError, LpStatus};
use super::simplex::{Simplex, SimplexConfig};
use crate::milp::MilpProblem;

const MAX_HORIZON: usize = 16;

#[derive(Debug, Clone)]
pub struct BruteResult {
    pub objective: f64,
    pub x: Vec<f64>,
    pub patterns_tried: usize,
}

/// Enumerates all `2^N` indicator assignments of an arbitrage MILP and
/// returns the best restricted-LP optimum. Limited to `N <= 16`.
pub fn brute_force(problem: &MilpProblem) -> Result<BruteResult, LpError> {
    let n = problem.horizon();
    if n > MAX_HORIZON {
        return Err(LpError::TooLarge(n, MAX_HORIZON));
    }
    let lp = problem.to_lp();
    let mut sim = Simplex::new(&lp, SimplexConfig::default())?;

    let fix = |sim: &mut Simplex, step: usize, dis: bool| {
        let (zc, zd) = if dis { (0.0, 1.0) } else { (1.0, 0.0) };
        sim.set_bound(problem.col_z_ch(step), zc, zc);
        sim.set_bound(problem.col_z_dis(step), zd, zd);
    };

    // Pattern bit i set => step i may only discharge (nonpositive orthant is
    // selected by z_ch = 1).
    let mut best: Option<(f64, Vec<f64>)> = None;
    let total: u64 = 1 << n;
    let mut gray_prev: u64 = 0;
    for k in 0..total {
        let gray = k ^ (k >> 1);
        if k == 0 {
            for step in 0..n {
                fix(&mut sim, step, (gray >> step) & 1 == 0);
            }
            sim.reset_to_logical_basis(&[]);
            if sim.primal_solve()? != LpStatus::Optimal {
                gray_prev = gray;
                continue;
            }
        } else {
            let flipped = (gray ^ gray_prev).trailing_zeros() as usize;
            fix(&mut sim, flipped, (gray >> flipped) & 1 == 0);
            sim.sync_bounds();
            if sim.dual_solve()? != LpStatus::Optimal {
                gray_prev = gray;
                continue;
            }
        }
        gray_prev = gray;
        let obj = sim.objective();
        if best.as_ref().is_none_or(|(b, _)| obj < b - 1e-12) {
            best = Some((obj, sim.x()));
        }
    }

    let (objective, x) = best.ok_or(LpError::SingularBasis)?;
    Ok(BruteResult {
        objective,
        x,
        patterns_tried: total as usize,
    })
}
