//! Best-bound-first branch and bound over binary columns, warm-starting
//! every child from its parent's optimal basis with the dual simplex.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use super::lp::{LinearProgram, LpError, LpStatus};
use super::simplex::{BasisSnapshot, Simplex, SimplexConfig};
use crate::milp::MilpProblem;

#[derive(Debug, Clone)]
pub struct BnbConfig {
    /// A binary is considered integral within this distance of 0 or 1.
    pub integer_tol: f64,
    /// Relative optimality gap at which the search stops.
    pub gap_tol: f64,
    pub node_limit: u64,
    pub time_limit: Option<Duration>,
    pub simplex: SimplexConfig,
    /// Emit `node, bound, incumbent, gap, time` log lines.
    pub log: bool,
}

impl Default for BnbConfig {
    fn default() -> Self {
        BnbConfig {
            integer_tol: 1e-6,
            gap_tol: 1e-7,
            node_limit: 5_000_000,
            time_limit: None,
            simplex: SimplexConfig::default(),
            log: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Node or time limit reached; incumbent and proven bound are reported.
    Limit,
}

#[derive(Debug, Clone)]
pub struct MilpResult {
    pub status: MilpStatus,
    pub objective: f64,
    pub best_bound: f64,
    pub x: Vec<f64>,
    pub nodes: u64,
    pub simplex_iterations: usize,
    pub log: Vec<String>,
}

struct Node {
    id: u64,
    bound: f64,
    fixes: Vec<(u32, u8)>,
    snapshot: BasisSnapshot,
    branch_col: u32,
}

struct HeapEntry {
    bound: f64,
    id: u64,
    node: Node,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.id == other.id
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap: invert so the smallest bound pops first,
        // ties resolved toward the older node id.
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Maps a relaxation point to a full set of binary fixings.
pub type DiveRule<'a> = &'a dyn Fn(&[f64]) -> Vec<(usize, f64)>;

/// Most fractional binary (largest distance from integrality), ties to the
/// lowest index. `None` means the point is integral on all binaries.
fn most_fractional(x: &[f64], binaries: &[usize], tol: f64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &j in binaries {
        let frac = x[j].min(1.0 - x[j]).max(0.0);
        if frac > tol && best.is_none_or(|(_, b)| frac > b) {
            best = Some((j, frac));
        }
    }
    best
}

/// Solves a MILP given as an LP plus a set of binary columns.
///
/// `crash_upper` columns start at their upper bound in the root crash basis;
/// `dive` maps a relaxation point to a full set of binary fixings used to
/// probe for an early incumbent.
pub fn solve_milp_lp(
    lp: &LinearProgram,
    binaries: &[usize],
    cfg: &BnbConfig,
    crash_upper: &[usize],
    dive: Option<DiveRule>,
) -> Result<MilpResult, LpError> {
    let start = Instant::now();
    let mut log = Vec::new();
    let mut sim = Simplex::new(lp, cfg.simplex)?;
    let orig_bounds: Vec<(f64, f64)> = binaries
        .iter()
        .map(|&j| (lp.col_lower[j], lp.col_upper[j]))
        .collect();

    let root_status = sim.solve_from_logical_basis(crash_upper)?;
    match root_status {
        LpStatus::Infeasible => {
            return Ok(MilpResult {
                status: MilpStatus::Infeasible,
                objective: f64::INFINITY,
                best_bound: f64::INFINITY,
                x: Vec::new(),
                nodes: 0,
                simplex_iterations: sim.iterations(),
                log,
            })
        }
        LpStatus::Unbounded => {
            return Ok(MilpResult {
                status: MilpStatus::Unbounded,
                objective: f64::NEG_INFINITY,
                best_bound: f64::NEG_INFINITY,
                x: Vec::new(),
                nodes: 0,
                simplex_iterations: sim.iterations(),
                log,
            })
        }
        LpStatus::Optimal => {}
    }
    sim.verify_and_repair(1e-8)?;

    let mut incumbent = f64::INFINITY;
    let mut incumbent_x: Vec<f64> = Vec::new();
    let mut nodes: u64 = 0;
    let gap_scale = |inc: f64| cfg.gap_tol * 1.0f64.max(inc.abs());

    let root_x = sim.x();
    let root_bound = sim.objective();
    let root_frac = most_fractional(&root_x, binaries, cfg.integer_tol);

    let emit = |log: &mut Vec<String>, node: u64, bound: f64, inc: f64, t: Duration| {
        let gap = if inc.is_finite() {
            (inc - bound).max(0.0) / 1.0f64.max(inc.abs())
        } else {
            f64::INFINITY
        };
        let line = format!(
            "node {node}, bound {bound:.6}, incumbent {inc}, gap {gap:.3e}, time {:.3}s",
            t.as_secs_f64()
        );
        if log.len() < 100_000 {
            log.push(line);
        }
    };

    if root_frac.is_none() {
        // Relaxation already integral: solved at the root, one node.
        incumbent = root_bound;
        incumbent_x = root_x;
        if cfg.log {
            emit(&mut log, 1, root_bound, incumbent, start.elapsed());
        }
        return Ok(MilpResult {
            status: MilpStatus::Optimal,
            objective: incumbent,
            best_bound: root_bound,
            x: incumbent_x,
            nodes: 1,
            simplex_iterations: sim.iterations(),
            log,
        });
    }

    // Probe for an early incumbent by fixing every binary per the dive rule.
    let root_snapshot = sim.snapshot();
    if let Some(dive_fn) = dive {
        let fixes = dive_fn(&root_x);
        for &(j, v) in &fixes {
            sim.set_bound(j, v, v);
        }
        sim.sync_bounds();
        if sim.dual_solve()? == LpStatus::Optimal {
            incumbent = sim.objective();
            incumbent_x = sim.x();
            if cfg.log {
                emit(&mut log, 0, root_bound, incumbent, start.elapsed());
            }
        }
        for (k, &j) in binaries.iter().enumerate() {
            sim.set_bound(j, orig_bounds[k].0, orig_bounds[k].1);
        }
        sim.restore(&root_snapshot)?;
    }

    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    let mut next_id: u64 = 1;
    let (branch_col, _) = root_frac.unwrap();
    heap.push(HeapEntry {
        bound: root_bound,
        id: 0,
        node: Node {
            id: 0,
            bound: root_bound,
            fixes: Vec::new(),
            snapshot: sim.snapshot(),
            branch_col: branch_col as u32,
        },
    });

    let mut status = MilpStatus::Optimal;
    let mut best_bound = root_bound;

    while let Some(entry) = heap.pop() {
        let node = entry.node;
        // The heap pops in bound order, so this is the proven global bound.
        best_bound = node.bound.min(incumbent);
        if incumbent.is_finite() && incumbent - node.bound <= gap_scale(incumbent) {
            // Every open node is within tolerance of the incumbent.
            break;
        }
        nodes += 1;
        if nodes > cfg.node_limit {
            status = MilpStatus::Limit;
            break;
        }
        if let Some(limit) = cfg.time_limit {
            if start.elapsed() > limit {
                status = MilpStatus::Limit;
                break;
            }
        }

        // Materialize the node: reset binary bounds, apply its fixes, and
        // reinstate its basis (free when the state already matches).
        for (k, &j) in binaries.iter().enumerate() {
            sim.set_bound(j, orig_bounds[k].0, orig_bounds[k].1);
        }
        for &(j, v) in &node.fixes {
            sim.set_bound(j as usize, v as f64, v as f64);
        }
        if !sim.basis_matches(&node.snapshot) {
            sim.restore(&node.snapshot)?;
        } else {
            sim.sync_bounds();
        }

        let parent_snapshot = sim.snapshot();
        let mut child_snapshots: [Option<(f64, BasisSnapshot)>; 2] = [None, None];
        for (slot, val) in [(0usize, 0u8), (1, 1)] {
            let col = node.branch_col as usize;
            sim.set_bound(col, val as f64, val as f64);
            if slot == 1 {
                sim.restore(&parent_snapshot)?;
            } else {
                sim.sync_bounds();
            }
            let st = match sim.dual_solve() {
                Ok(st) => st,
                Err(LpError::IterationLimit(_)) => {
                    status = MilpStatus::Limit;
                    break;
                }
                Err(e) => return Err(e),
            };
            if st != LpStatus::Optimal {
                continue; // infeasible child is fathomed
            }
            let obj = sim.objective();
            if incumbent.is_finite() && obj >= incumbent - gap_scale(incumbent) {
                continue; // fathomed by bound
            }
            let x = sim.x();
            match most_fractional(&x, binaries, cfg.integer_tol) {
                None => {
                    incumbent = obj;
                    incumbent_x = x;
                    if cfg.log {
                        emit(&mut log, node.id, node.bound, incumbent, start.elapsed());
                    }
                }
                Some((frac_col, _)) => {
                    let snapshot = sim.snapshot();
                    let mut fixes = node.fixes.clone();
                    fixes.push((node.branch_col, val));
                    let child = Node {
                        id: next_id,
                        bound: obj,
                        fixes,
                        snapshot: snapshot.clone(),
                        branch_col: frac_col as u32,
                    };
                    child_snapshots[slot] = Some((obj, snapshot));
                    heap.push(HeapEntry {
                        bound: obj,
                        id: child.id,
                        node: child,
                    });
                    next_id += 1;
                }
            }
        }
        if status == MilpStatus::Limit {
            break;
        }
        // Leave the state at the more promising child so the likely next pop
        // finds its basis already in place.
        match (&child_snapshots[0], &child_snapshots[1]) {
            (Some((b0, s0)), Some((b1, _))) if b0 < b1 => sim.restore(s0)?,
            (Some((_, s0)), None) => sim.restore(s0)?,
            _ => {}
        }
        if cfg.log && nodes.is_multiple_of(64) {
            emit(&mut log, node.id, node.bound, incumbent, start.elapsed());
        }
    }

    if heap.is_empty() && status == MilpStatus::Optimal {
        best_bound = incumbent;
    }
    if incumbent.is_infinite() && status == MilpStatus::Optimal {
        status = MilpStatus::Infeasible;
    }
    if cfg.log {
        emit(&mut log, nodes, best_bound, incumbent, start.elapsed());
    }
    Ok(MilpResult {
        status,
        objective: incumbent,
        best_bound,
        x: incumbent_x,
        nodes: nodes.max(1),
        simplex_iterations: sim.iterations(),
        log,
    })
}

/// Solves an assembled arbitrage MILP. The crash basis starts every
/// discharge indicator at 1 (which satisfies the indicator-sum equalities),
/// and the dive rule picks, per step, the larger of the two indicators.
pub fn solve_milp(problem: &MilpProblem, cfg: &BnbConfig) -> Result<MilpResult, LpError> {
    let lp = problem.to_lp();
    let n = problem.horizon();
    let crash: Vec<usize> = (0..n).map(|i| problem.col_z_dis(i)).collect();
    let dive = |x: &[f64]| -> Vec<(usize, f64)> {
        let mut fixes = Vec::with_capacity(2 * n);
        for i in 0..n {
            let zc = problem.col_z_ch(i);
            let zd = problem.col_z_dis(i);
            let dis = x[zd] >= x[zc];
            fixes.push((zc, if dis { 0.0 } else { 1.0 }));
            fixes.push((zd, if dis { 1.0 } else { 0.0 }));
        }
        fixes
    };
    solve_milp_lp(&lp, problem.binary_idx(), cfg, &crash, Some(&dive))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::lp::RowKind;

    #[test]
    fn knapsack_three_items() {
        // max 8a + 5b + 4c s.t. 6a + 4b + 3c <= 12, binary -> min of negation.
        let mut lp = LinearProgram::new(3);
        for (j, c) in [-8.0, -5.0, -4.0].iter().enumerate() {
            lp.set_objective(j, *c);
            lp.set_bounds(j, 0.0, 1.0);
        }
        lp.add_row(RowKind::Le, 12.0, &[(0, 6.0), (1, 4.0), (2, 3.0)]);
        let r = solve_milp_lp(&lp, &[0, 1, 2], &BnbConfig::default(), &[], None).unwrap();
        assert_eq!(r.status, MilpStatus::Optimal);
        assert!((r.objective + 13.0).abs() < 1e-9);
        assert!((r.x[0] - 1.0).abs() < 1e-9);
        assert!((r.x[1] - 1.0).abs() < 1e-9);
        assert!(r.x[2].abs() < 1e-9);
    }

    #[test]
    fn integral_relaxation_solves_at_root() {
        // Objective pushes both binaries onto integral bounds at the root.
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 1.0);
        lp.set_objective(1, -1.0);
        lp.set_bounds(0, 0.0, 1.0);
        lp.set_bounds(1, 0.0, 1.0);
        lp.add_row(RowKind::Le, 2.0, &[(0, 1.0), (1, 1.0)]);
        let r = solve_milp_lp(&lp, &[0, 1], &BnbConfig::default(), &[], None).unwrap();
        assert_eq!(r.status, MilpStatus::Optimal);
        assert_eq!(r.nodes, 1);
        assert!((r.objective + 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_milp_reported() {
        let mut lp = LinearProgram::new(1);
        lp.set_bounds(0, 0.0, 1.0);
        lp.add_row(RowKind::Le, -0.5, &[(0, 1.0)]);
        let r = solve_milp_lp(&lp, &[0], &BnbConfig::default(), &[], None).unwrap();
        assert_eq!(r.status, MilpStatus::Infeasible);
    }

    #[test]
    fn set_cover_minimization() {
        // min 3a + 2b + 4c + 3d covering three elements.
        let mut lp = LinearProgram::new(4);
        for (j, c) in [3.0, 2.0, 4.0, 3.0].iter().enumerate() {
            lp.set_objective(j, *c);
            lp.set_bounds(j, 0.0, 1.0);
        }
        // Cover rows written as <= through negation.
        lp.add_row(RowKind::Le, -1.0, &[(0, -1.0), (2, -1.0)]);
        lp.add_row(RowKind::Le, -1.0, &[(0, -1.0), (1, -1.0), (3, -1.0)]);
        lp.add_row(RowKind::Le, -1.0, &[(1, -1.0), (2, -1.0), (3, -1.0)]);
        let r = solve_milp_lp(&lp, &[0, 1, 2, 3], &BnbConfig::default(), &[], None).unwrap();
        assert_eq!(r.status, MilpStatus::Optimal);
        assert!((r.objective - 5.0).abs() < 1e-9);
    }

    /// Direct enumeration oracle for generic MILPs: tries every binary
    /// assignment with plain LP solves.
    fn enumerate_best(lp: &LinearProgram, binaries: &[usize]) -> Option<f64> {
        use crate::solver::simplex::{solve_lp, SimplexConfig};
        let k = binaries.len();
        let mut best: Option<f64> = None;
        for mask in 0..(1u64 << k) {
            let mut fixed = lp.clone();
            for (bit, &j) in binaries.iter().enumerate() {
                let v = ((mask >> bit) & 1) as f64;
                fixed.set_bounds(j, v, v);
            }
            let r = solve_lp(&fixed, SimplexConfig::default()).unwrap();
            if r.status == crate::solver::lp::LpStatus::Optimal
                && best.is_none_or(|b| r.objective < b)
            {
                best = Some(r.objective);
            }
        }
        best
    }

    #[test]
    fn random_generic_milps_match_direct_enumeration() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(4242);
        for trial in 0..60 {
            let n = rng.random_range(2..7);
            let k = rng.random_range(1..=n.min(6));
            let m = rng.random_range(1..6);
            let mut lp = LinearProgram::new(n);
            for j in 0..n {
                lp.set_objective(j, rng.random_range(-8.0..8.0));
                if j < k {
                    lp.set_bounds(j, 0.0, 1.0);
                } else {
                    let lo = rng.random_range(-3.0..0.0);
                    lp.set_bounds(j, lo, lo + rng.random_range(0.5..5.0));
                }
            }
            for _ in 0..m {
                let mut entries = Vec::new();
                for j in 0..n {
                    if rng.random_range(0.0..1.0) < 0.7 {
                        entries.push((j, rng.random_range(-3.0..3.0)));
                    }
                }
                let kind = if rng.random_range(0.0..1.0) < 0.25 {
                    RowKind::Eq
                } else {
                    RowKind::Le
                };
                lp.add_row(kind, rng.random_range(-2.0..4.0), &entries);
            }
            let binaries: Vec<usize> = (0..k).collect();
            let bnb = solve_milp_lp(&lp, &binaries, &BnbConfig::default(), &[], None).unwrap();
            let exact = enumerate_best(&lp, &binaries);
            match exact {
                None => assert_eq!(
                    bnb.status,
                    MilpStatus::Infeasible,
                    "trial {trial}: enumeration infeasible but bnb {:?}",
                    bnb.status
                ),
                Some(best) => {
                    assert_eq!(bnb.status, MilpStatus::Optimal, "trial {trial}");
                    assert!(
                        (bnb.objective - best).abs() <= 1e-6 * (1.0 + best.abs()),
                        "trial {trial}: bnb {} vs enumeration {}",
                        bnb.objective,
                        best
                    );
                }
            }
        }
    }

    #[test]
    fn node_limit_reports_limit_status() {
        // A parity-flavoured instance that needs some branching.
        let n = 8;
        let mut lp = LinearProgram::new(n);
        for j in 0..n {
            lp.set_objective(j, -1.0 - 0.01 * j as f64);
            lp.set_bounds(j, 0.0, 1.0);
        }
        let all: Vec<(usize, f64)> = (0..n).map(|j| (j, 1.0)).collect();
        lp.add_row(RowKind::Le, n as f64 / 2.0 + 0.5, &all);
        let cfg = BnbConfig {
            node_limit: 1,
            ..BnbConfig::default()
        };
        let r = solve_milp_lp(&lp, &(0..n).collect::<Vec<_>>(), &cfg, &[], None).unwrap();
        assert_eq!(r.status, MilpStatus::Limit);
        assert!(r.best_bound <= r.objective + 1e-9);
    }
}
