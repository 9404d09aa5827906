//! Bounded-variable revised simplex with a composite phase-1 and a dual
//! method for warm-started reoptimization after bound changes (the
//! branch-and-bound work-horse).
//!
//! Variable space: structural columns `0..n`, then one logical per row
//! (`n..n+m`) so that `Ax + s = rhs` with `s >= 0` for `<=` rows and `s = 0`
//! for equality rows.
//!
//! The basis inverse is kept in product form: a block factorization of the
//! refactorization-time basis (logical basic columns are unit vectors, so
//! only the kernel of structural basic columns needs a dense LU) times a
//! file of eta updates, one per pivot, rebuilt every few dozen pivots.

use super::lp::{LinearProgram, LpError, LpResult, LpStatus, RowKind};

#[derive(Debug, Clone, Copy)]
pub struct SimplexConfig {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub pivot_tol: f64,
    pub max_iterations: usize,
    /// Pivots between refactorizations of the basis.
    pub refactor_interval: usize,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        SimplexConfig {
            feas_tol: 1e-9,
            opt_tol: 1e-9,
            pivot_tol: 1e-10,
            max_iterations: 2_000_000,
            refactor_interval: 96,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VStat {
    Basic,
    AtLower,
    AtUpper,
}

/// Compact basis description sufficient to reconstruct the factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSnapshot {
    basis: Vec<u32>,
    at_upper: Vec<bool>,
}

/// One product-form update: entering column's FTRAN image and pivot row.
struct Eta {
    r: u32,
    pivot: f64,
    u: Vec<f64>,
}

/// Block factorization of the basis at refactorization time. Rows covered
/// by a basic logical are trivial; the remaining kernel rows against the
/// structural basic columns get a dense LU.
struct BaseFactor {
    /// Structural basic columns, by their A column index, kernel order.
    kernel_cols: Vec<u32>,
    /// Basis position of each kernel column.
    kernel_pos: Vec<u32>,
    /// Rows not covered by a basic logical, kernel order.
    kernel_rows: Vec<u32>,
    /// row -> kernel row index, or -1.
    row_of: Vec<i32>,
    /// row -> basis position of the covering logical, or -1.
    covered_pos: Vec<i32>,
    lu: LuFactors,
}

pub struct Simplex {
    cfg: SimplexConfig,
    m: usize,
    n: usize,
    /// Structural columns, sorted by row.
    cols: Vec<Vec<(u32, f64)>>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<u32>,
    vstat: Vec<VStat>,
    base: BaseFactor,
    etas: Vec<Eta>,
    xb: Vec<f64>,
    iterations: usize,
    degenerate_streak: usize,
    // scratch buffers
    work_u: Vec<f64>,
    work_k: Vec<f64>,
    work_m: Vec<f64>,
}

impl Simplex {
    pub fn new(lp: &LinearProgram, cfg: SimplexConfig) -> Result<Self, LpError> {
        lp.validate()?;
        let n = lp.num_cols();
        let m = lp.num_rows();
        let total = n + m;
        let mut cost = vec![0.0; total];
        cost[..n].copy_from_slice(&lp.objective);
        let mut lower = vec![0.0; total];
        let mut upper = vec![0.0; total];
        lower[..n].copy_from_slice(&lp.col_lower);
        upper[..n].copy_from_slice(&lp.col_upper);
        for i in 0..m {
            match lp.row_kind[i] {
                RowKind::Le => {
                    lower[n + i] = 0.0;
                    upper[n + i] = f64::INFINITY;
                }
                RowKind::Eq => {
                    lower[n + i] = 0.0;
                    upper[n + i] = 0.0;
                }
            }
        }
        let mut s = Simplex {
            cfg,
            m,
            n,
            cols: (0..n).map(|j| lp.col(j).to_vec()).collect(),
            cost,
            lower,
            upper,
            rhs: lp.rhs.clone(),
            basis: (0..m).map(|i| (n + i) as u32).collect(),
            vstat: vec![VStat::AtLower; total],
            base: BaseFactor::identity(m),
            etas: Vec::new(),
            xb: vec![0.0; m],
            iterations: 0,
            degenerate_streak: 0,
            work_u: vec![0.0; m],
            work_k: Vec::new(),
            work_m: vec![0.0; m],
        };
        s.reset_to_logical_basis(&[]);
        Ok(s)
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    /// Restarts from the all-logical basis. Columns listed in
    /// `at_upper_hint` start at their upper bound (a cheap crash that can
    /// make the start primal-feasible and skip phase 1 entirely).
    pub fn reset_to_logical_basis(&mut self, at_upper_hint: &[usize]) {
        let (n, m) = (self.n, self.m);
        for j in 0..n {
            self.vstat[j] = if self.lower[j].is_finite() {
                VStat::AtLower
            } else {
                VStat::AtUpper
            };
        }
        for j in at_upper_hint {
            if self.upper[*j].is_finite() {
                self.vstat[*j] = VStat::AtUpper;
            }
        }
        for i in 0..m {
            self.basis[i] = (n + i) as u32;
            self.vstat[n + i] = VStat::Basic;
        }
        self.base = BaseFactor::identity(m);
        self.etas.clear();
        self.compute_xb();
    }

    /// Updates one column's bounds (branch-and-bound bound fixing). The
    /// caller must run [`Simplex::sync_bounds`] before reoptimizing.
    pub fn set_bound(&mut self, col: usize, lo: f64, hi: f64) {
        self.lower[col] = lo;
        self.upper[col] = hi;
        if self.vstat[col] != VStat::Basic {
            // Keep the variable on a finite side after the change.
            if self.vstat[col] == VStat::AtLower && !lo.is_finite() {
                self.vstat[col] = VStat::AtUpper;
            } else if self.vstat[col] == VStat::AtUpper && !hi.is_finite() {
                self.vstat[col] = VStat::AtLower;
            }
        }
    }

    pub fn sync_bounds(&mut self) {
        self.compute_xb();
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.vstat[j] {
            VStat::AtLower => self.lower[j],
            VStat::AtUpper => self.upper[j],
            VStat::Basic => unreachable!("nonbasic_value on basic column"),
        }
    }

    /// Rebuilds the block factorization from the current basis and clears
    /// the eta file.
    fn refactor(&mut self) -> Result<(), LpError> {
        self.base = BaseFactor::build(self.m, self.n, &self.basis, &self.cols)?;
        self.etas.clear();
        self.work_k.resize(self.base.kernel_cols.len(), 0.0);
        Ok(())
    }

    /// `v` (by row) -> `B0^-1 v` (by position), in place.
    fn solve_base(&mut self, v: &mut [f64]) {
        let base = &self.base;
        let k = base.kernel_cols.len();
        self.work_k.resize(k, 0.0);
        for (ri, &row) in base.kernel_rows.iter().enumerate() {
            self.work_k[ri] = v[row as usize];
        }
        base.lu.solve_in_place(&mut self.work_k);
        // Covered rows keep v minus the structural contribution; kernel
        // positions take the LU solution.
        let contrib = &mut self.work_m;
        contrib.fill(0.0);
        for (sj, &col) in base.kernel_cols.iter().enumerate() {
            let x = self.work_k[sj];
            if x != 0.0 {
                for &(row, coef) in &self.cols[col as usize] {
                    if base.row_of[row as usize] < 0 {
                        contrib[row as usize] += coef * x;
                    }
                }
            }
        }
        let out = &mut self.work_u;
        debug_assert_eq!(out.len(), v.len());
        out.fill(0.0);
        for row in 0..self.m {
            let p = base.covered_pos[row];
            if p >= 0 {
                out[p as usize] = v[row] - contrib[row];
            }
        }
        for (sj, &p) in base.kernel_pos.iter().enumerate() {
            out[p as usize] = self.work_k[sj];
        }
        v.copy_from_slice(out);
    }

    /// `w` (by position) -> `B0^-T w` (by row), in place.
    fn solve_base_transpose(&mut self, w: &mut [f64]) {
        let base = &self.base;
        let k = base.kernel_cols.len();
        let y = &mut self.work_m;
        y.fill(0.0);
        for row in 0..self.m {
            let p = base.covered_pos[row];
            if p >= 0 {
                y[row] = w[p as usize];
            }
        }
        self.work_k.resize(k, 0.0);
        for (sj, (&col, &p)) in base
            .kernel_cols
            .iter()
            .zip(base.kernel_pos.iter())
            .enumerate()
        {
            let mut rhs = w[p as usize];
            for &(row, coef) in &self.cols[col as usize] {
                if base.row_of[row as usize] < 0 {
                    rhs -= coef * y[row as usize];
                }
            }
            self.work_k[sj] = rhs;
        }
        base.lu.solve_transpose_in_place(&mut self.work_k);
        for (ri, &row) in base.kernel_rows.iter().enumerate() {
            y[row as usize] = self.work_k[ri];
        }
        w.copy_from_slice(y);
    }

    fn apply_etas(&self, v: &mut [f64]) {
        for eta in &self.etas {
            let r = eta.r as usize;
            let t = v[r] / eta.pivot;
            if t != 0.0 {
                for (vi, ui) in v.iter_mut().zip(&eta.u) {
                    *vi -= t * ui;
                }
            }
            v[r] = t;
        }
    }

    fn apply_etas_transpose(&self, v: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let r = eta.r as usize;
            let mut dot = 0.0;
            for (vi, ui) in v.iter().zip(&eta.u) {
                dot += vi * ui;
            }
            v[r] -= (dot - v[r]) / eta.pivot;
        }
    }

    /// `u = B^-1 a_j` for a structural or logical column.
    fn ftran(&mut self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.m];
        if j >= self.n {
            v[j - self.n] = 1.0;
        } else {
            for &(row, coef) in &self.cols[j] {
                v[row as usize] = coef;
            }
        }
        self.solve_base(&mut v);
        self.apply_etas(&mut v);
        v
    }

    /// `y = cB' B^-1` (by row) for a basic-cost vector given by position.
    fn btran(&mut self, cb_by_pos: &mut [f64]) {
        self.apply_etas_transpose(cb_by_pos);
        self.solve_base_transpose(cb_by_pos);
    }

    fn duals_for(&mut self, cost: &[f64]) -> Vec<f64> {
        let mut cb = vec![0.0; self.m];
        for i in 0..self.m {
            cb[i] = cost[self.basis[i] as usize];
        }
        self.btran(&mut cb);
        cb
    }

    fn reduced_cost(&self, j: usize, y: &[f64], cost: &[f64]) -> f64 {
        if j >= self.n {
            cost[j] - y[j - self.n]
        } else {
            let mut acc = cost[j];
            for &(row, coef) in &self.cols[j] {
                acc -= y[row as usize] * coef;
            }
            acc
        }
    }

    /// Records the pivot in the eta file, refactorizing when the file gets
    /// long.
    fn push_eta(&mut self, r: usize, u: Vec<f64>) -> Result<(), LpError> {
        let pivot = u[r];
        self.etas.push(Eta {
            r: r as u32,
            pivot,
            u,
        });
        if self.etas.len() >= self.cfg.refactor_interval {
            self.refactor()?;
        }
        Ok(())
    }

    /// Recomputes basic variable values from scratch:
    /// `xb = B^-1 (rhs - N x_N)`.
    fn compute_xb(&mut self) {
        let m = self.m;
        let mut w = self.rhs.clone();
        for j in 0..self.n {
            if self.vstat[j] == VStat::Basic {
                continue;
            }
            let v = self.nonbasic_value(j);
            if v != 0.0 {
                for &(row, coef) in &self.cols[j] {
                    w[row as usize] -= coef * v;
                }
            }
        }
        for i in 0..m {
            let j = self.n + i;
            if self.vstat[j] != VStat::Basic {
                let v = self.nonbasic_value(j);
                if v != 0.0 {
                    w[i] -= v;
                }
            }
        }
        self.solve_base(&mut w);
        self.apply_etas(&mut w);
        self.xb.copy_from_slice(&w);
    }

    fn bland_active(&self) -> bool {
        self.degenerate_streak > 10 * self.m.max(10)
    }

    /// One primal iteration against the supplied cost vector. Returns
    /// `Ok(None)` when no entering candidate remains (optimal for `cost`).
    fn primal_iteration(&mut self, cost: &[f64], phase_one: bool) -> Result<Option<()>, LpError> {
        let total = self.n + self.m;
        let y = self.duals_for(cost);

        // Entering selection: Dantzig with lowest-index ties, Bland fallback.
        let bland = self.bland_active();
        let mut entering = None;
        let mut best_score = self.cfg.opt_tol;
        for j in 0..total {
            if self.vstat[j] == VStat::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.reduced_cost(j, &y, cost);
            let score = match self.vstat[j] {
                VStat::AtLower => -d,
                VStat::AtUpper => d,
                VStat::Basic => unreachable!(),
            };
            if score > best_score {
                entering = Some(j);
                if bland {
                    break;
                }
                best_score = score;
            }
        }
        let q = match entering {
            Some(q) => q,
            None => return Ok(None),
        };
        let dir = if self.vstat[q] == VStat::AtLower {
            1.0
        } else {
            -1.0
        };

        let u = self.ftran(q);

        // Two-pass ratio test. Basic r moves at rate `-dir * u[r]`; in
        // phase 1 a variable outside a bound blocks when it reaches that
        // bound from outside. Pass one finds the tolerance-relaxed minimum
        // ratio, pass two picks the largest pivot among qualifying rows and
        // steps by that row's exact limit.
        let feas = self.cfg.feas_tol;
        let range_q = self.upper[q] - self.lower[q];
        let row_limit = |r: usize, xb: &[f64]| -> Option<(f64, bool)> {
            let rate = -dir * u[r];
            if rate.abs() <= self.cfg.pivot_tol {
                return None;
            }
            let b = self.basis[r] as usize;
            let (lo, hi) = (self.lower[b], self.upper[b]);
            let xv = xb[r];
            if rate > 0.0 {
                if phase_one && xv > hi + feas {
                    return None; // already above, moving further up
                }
                let (target, to_upper) = if phase_one && xv < lo - feas {
                    (lo, false)
                } else {
                    (hi, true)
                };
                target.is_finite().then(|| ((target - xv) / rate, to_upper))
            } else {
                if phase_one && xv < lo - feas {
                    return None;
                }
                let (target, to_upper) = if phase_one && xv > hi + feas {
                    (hi, true)
                } else {
                    (lo, false)
                };
                target.is_finite().then(|| ((target - xv) / rate, to_upper))
            }
        };

        let mut theta_relaxed = if range_q.is_finite() {
            range_q
        } else {
            f64::INFINITY
        };
        for r in 0..self.m {
            if let Some((limit, _)) = row_limit(r, &self.xb) {
                let rate = (dir * u[r]).abs();
                theta_relaxed = theta_relaxed.min(limit.max(0.0) + feas / rate);
            }
        }
        if theta_relaxed.is_infinite() {
            return Err(LpError::IterationLimit(usize::MAX)); // sentinel, caller maps to Unbounded
        }

        let bland_ratio = self.bland_active();
        let mut chosen: Option<(usize, f64, f64, bool)> = None; // (row, |pivot|, exact, to_upper)
        for r in 0..self.m {
            if let Some((limit, to_upper)) = row_limit(r, &self.xb) {
                let exact = limit.max(0.0);
                if exact <= theta_relaxed {
                    let pivot = u[r].abs();
                    let better = match &chosen {
                        None => true,
                        Some((_, best_pivot, best_exact, _)) => {
                            if bland_ratio {
                                exact < best_exact - 1e-15
                            } else {
                                pivot > *best_pivot
                            }
                        }
                    };
                    if better {
                        chosen = Some((r, pivot, exact, to_upper));
                    }
                }
            }
        }

        let flip = match &chosen {
            None => true,
            Some((_, _, exact, _)) => range_q.is_finite() && range_q <= *exact,
        };
        let theta = if flip {
            range_q
        } else {
            chosen.as_ref().unwrap().2
        };
        self.degenerate_streak = if theta <= 1e-12 {
            self.degenerate_streak + 1
        } else {
            0
        };

        let step = dir * theta;
        for i in 0..self.m {
            self.xb[i] -= u[i] * step;
        }
        if flip {
            // The entering variable traverses its whole range.
            self.vstat[q] = if self.vstat[q] == VStat::AtLower {
                VStat::AtUpper
            } else {
                VStat::AtLower
            };
        } else {
            let (r, _, _, to_upper) = chosen.unwrap();
            let b_leave = self.basis[r] as usize;
            let entering_value = self.nonbasic_value(q) + step;
            self.vstat[b_leave] = if to_upper {
                VStat::AtUpper
            } else {
                VStat::AtLower
            };
            self.vstat[q] = VStat::Basic;
            self.basis[r] = q as u32;
            self.xb[r] = entering_value;
            self.push_eta(r, u)?;
        }
        self.iterations += 1;
        if self.iterations > self.cfg.max_iterations {
            return Err(LpError::IterationLimit(self.cfg.max_iterations));
        }
        Ok(Some(()))
    }

    fn infeasibility_cost(&self) -> Option<Vec<f64>> {
        let mut any = false;
        let mut cost = vec![0.0; self.n + self.m];
        for r in 0..self.m {
            let b = self.basis[r] as usize;
            if self.xb[r] > self.upper[b] + self.cfg.feas_tol {
                cost[b] = 1.0;
                any = true;
            } else if self.xb[r] < self.lower[b] - self.cfg.feas_tol {
                cost[b] = -1.0;
                any = true;
            }
        }
        if any {
            Some(cost)
        } else {
            None
        }
    }

    /// Full primal solve (phase 1 then phase 2) from the current basis.
    pub fn primal_solve(&mut self) -> Result<LpStatus, LpError> {
        self.degenerate_streak = 0;
        loop {
            if let Some(p1_cost) = self.infeasibility_cost() {
                match self.primal_iteration(&p1_cost, true) {
                    Ok(Some(())) => continue,
                    Ok(None) => return Ok(LpStatus::Infeasible),
                    Err(LpError::IterationLimit(k)) if k == usize::MAX => {
                        // A phase-1 ray means the infeasibility measure is
                        // unbounded below, which cannot happen; treat as a
                        // numerical failure.
                        return Err(LpError::SingularBasis);
                    }
                    Err(e) => return Err(e),
                }
            }
            let cost = self.cost.clone();
            match self.primal_iteration(&cost, false) {
                Ok(Some(())) => continue,
                Ok(None) => return Ok(LpStatus::Optimal),
                Err(LpError::IterationLimit(k)) if k == usize::MAX => {
                    return Ok(LpStatus::Unbounded)
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Dual reoptimization from a dual-feasible basis (e.g. after bound
    /// changes at an optimal basis). Falls back to primal cleanup at the end.
    pub fn dual_solve(&mut self) -> Result<LpStatus, LpError> {
        self.degenerate_streak = 0;
        let total = self.n + self.m;
        loop {
            // Leaving: worst primal bound violation.
            let mut leave: Option<(usize, f64, bool)> = None; // (row, violation, above)
            for r in 0..self.m {
                let b = self.basis[r] as usize;
                let above = self.xb[r] - self.upper[b];
                let below = self.lower[b] - self.xb[r];
                let (v, is_above) = if above >= below {
                    (above, true)
                } else {
                    (below, false)
                };
                if v > self.cfg.feas_tol && leave.is_none_or(|(_, best, _)| v > best) {
                    leave = Some((r, v, is_above));
                }
            }
            let (r, _, above) = match leave {
                Some(t) => t,
                // Primal feasible; polish with the primal method (usually a
                // no-op when the start was dual feasible).
                None => return self.primal_solve(),
            };

            // rho = r-th row of B^-1.
            let mut rho = vec![0.0; self.m];
            rho[r] = 1.0;
            self.apply_etas_transpose(&mut rho);
            self.solve_base_transpose(&mut rho);
            let cost = self.cost.clone();
            let y = self.duals_for(&cost);

            let s = if above { 1.0 } else { -1.0 };
            let bland = self.bland_active();
            let mut entering: Option<(usize, f64, f64)> = None; // (col, ratio, |alpha|)
            for j in 0..total {
                if self.vstat[j] == VStat::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let alpha = if j >= self.n {
                    rho[j - self.n]
                } else {
                    let mut acc = 0.0;
                    for &(row, coef) in &self.cols[j] {
                        acc += rho[row as usize] * coef;
                    }
                    acc
                };
                let sa = s * alpha;
                let ok = match self.vstat[j] {
                    VStat::AtLower => sa > self.cfg.pivot_tol,
                    VStat::AtUpper => sa < -self.cfg.pivot_tol,
                    VStat::Basic => unreachable!(),
                };
                if !ok {
                    continue;
                }
                let d = self.reduced_cost(j, &y, &self.cost);
                let ratio = (d / sa).max(0.0);
                let better = match entering {
                    None => true,
                    Some((_, best, best_alpha)) => {
                        if bland {
                            false
                        } else {
                            ratio < best - self.cfg.opt_tol
                                || (ratio < best + self.cfg.opt_tol && sa.abs() > best_alpha * 4.0)
                        }
                    }
                };
                if better {
                    entering = Some((j, ratio, sa.abs()));
                    if bland {
                        break;
                    }
                }
            }
            let (q, ratio, _) = match entering {
                Some(t) => t,
                None => return Ok(LpStatus::Infeasible),
            };
            self.degenerate_streak = if ratio <= 1e-12 {
                self.degenerate_streak + 1
            } else {
                0
            };

            let u = self.ftran(q);
            let b_leave = self.basis[r] as usize;
            let bound = if above {
                self.upper[b_leave]
            } else {
                self.lower[b_leave]
            };
            let delta = (self.xb[r] - bound) / u[r];
            for i in 0..self.m {
                self.xb[i] -= u[i] * delta;
            }
            let entering_value = self.nonbasic_value(q) + delta;
            self.vstat[b_leave] = if above {
                VStat::AtUpper
            } else {
                VStat::AtLower
            };
            self.vstat[q] = VStat::Basic;
            self.basis[r] = q as u32;
            self.xb[r] = entering_value;
            self.push_eta(r, u)?;

            self.iterations += 1;
            if self.iterations > self.cfg.max_iterations {
                return Err(LpError::IterationLimit(self.cfg.max_iterations));
            }
        }
    }

    /// Solves from a fresh logical basis (optionally crashing some columns
    /// to their upper bound first).
    pub fn solve_from_logical_basis(
        &mut self,
        at_upper_hint: &[usize],
    ) -> Result<LpStatus, LpError> {
        self.reset_to_logical_basis(at_upper_hint);
        self.primal_solve()
    }

    pub fn snapshot(&self) -> BasisSnapshot {
        BasisSnapshot {
            basis: self.basis.clone(),
            at_upper: self.vstat.iter().map(|s| *s == VStat::AtUpper).collect(),
        }
    }

    pub fn basis_matches(&self, snap: &BasisSnapshot) -> bool {
        self.basis == snap.basis
            && self
                .vstat
                .iter()
                .zip(&snap.at_upper)
                .all(|(s, up)| (*s == VStat::AtUpper) == *up)
    }

    /// Reinstates an arbitrary basis, refactorizes and recomputes the basic
    /// solution.
    pub fn restore(&mut self, snap: &BasisSnapshot) -> Result<(), LpError> {
        let total = self.n + self.m;
        debug_assert_eq!(snap.basis.len(), self.m);
        for j in 0..total {
            self.vstat[j] = if snap.at_upper[j] {
                VStat::AtUpper
            } else {
                VStat::AtLower
            };
        }
        for (r, &b) in snap.basis.iter().enumerate() {
            self.basis[r] = b;
            self.vstat[b as usize] = VStat::Basic;
        }
        self.refactor()?;
        self.compute_xb();
        Ok(())
    }

    /// Refactorizes and recomputes the basic solution if the row residual
    /// has drifted beyond `tol`; returns whether a repair was necessary.
    pub fn verify_and_repair(&mut self, tol: f64) -> Result<bool, LpError> {
        if self.residual() > tol {
            self.refactor()?;
            self.compute_xb();
            return Ok(true);
        }
        Ok(false)
    }

    fn residual(&self) -> f64 {
        let x = self.full_solution();
        let mut worst = 0.0f64;
        let mut act = vec![0.0; self.m];
        for j in 0..self.n {
            if x[j] != 0.0 {
                for &(row, coef) in &self.cols[j] {
                    act[row as usize] += coef * x[j];
                }
            }
        }
        for i in 0..self.m {
            worst = worst.max((act[i] + x[self.n + i] - self.rhs[i]).abs());
        }
        worst
    }

    fn full_solution(&self) -> Vec<f64> {
        let total = self.n + self.m;
        let mut x = vec![0.0; total];
        for j in 0..total {
            if self.vstat[j] != VStat::Basic {
                x[j] = self.nonbasic_value(j);
            }
        }
        for (r, &b) in self.basis.iter().enumerate() {
            x[b as usize] = self.xb[r];
        }
        x
    }

    /// Structural part of the current solution.
    pub fn x(&self) -> Vec<f64> {
        self.full_solution()[..self.n].to_vec()
    }

    pub fn objective(&self) -> f64 {
        let x = self.full_solution();
        (0..self.n).map(|j| self.cost[j] * x[j]).sum()
    }

    /// Row duals `y = cB' B^-1`.
    pub fn duals(&mut self) -> Vec<f64> {
        let cost = self.cost.clone();
        self.duals_for(&cost)
    }

    pub fn reduced_costs(&mut self) -> Vec<f64> {
        let y = self.duals();
        (0..self.n)
            .map(|j| self.reduced_cost(j, &y, &self.cost))
            .collect()
    }

    pub fn result(&mut self, status: LpStatus) -> LpResult {
        match status {
            LpStatus::Optimal => LpResult {
                status,
                x: self.x(),
                objective: self.objective(),
                iterations: self.iterations,
                row_duals: self.duals(),
                reduced_costs: self.reduced_costs(),
            },
            LpStatus::Infeasible => LpResult::infeasible(self.iterations),
            LpStatus::Unbounded => LpResult::unbounded(self.iterations),
        }
    }
}

impl BaseFactor {
    fn identity(m: usize) -> Self {
        BaseFactor {
            kernel_cols: Vec::new(),
            kernel_pos: Vec::new(),
            kernel_rows: Vec::new(),
            row_of: vec![-1; m],
            covered_pos: (0..m as i32).collect(),
            lu: LuFactors::empty(),
        }
    }

    fn build(m: usize, n: usize, basis: &[u32], cols: &[Vec<(u32, f64)>]) -> Result<Self, LpError> {
        let mut covered_pos: Vec<i32> = vec![-1; m];
        let mut kernel_cols: Vec<u32> = Vec::new();
        let mut kernel_pos: Vec<u32> = Vec::new();
        for (p, &b) in basis.iter().enumerate() {
            let b = b as usize;
            if b >= n {
                if covered_pos[b - n] >= 0 {
                    return Err(LpError::SingularBasis);
                }
                covered_pos[b - n] = p as i32;
            } else {
                kernel_cols.push(b as u32);
                kernel_pos.push(p as u32);
            }
        }
        let kernel_rows: Vec<u32> = (0..m as u32)
            .filter(|r| covered_pos[*r as usize] < 0)
            .collect();
        let k = kernel_rows.len();
        if k != kernel_cols.len() {
            return Err(LpError::SingularBasis);
        }
        let mut row_of: Vec<i32> = vec![-1; m];
        for (ri, &r) in kernel_rows.iter().enumerate() {
            row_of[r as usize] = ri as i32;
        }
        let mut mat = vec![0.0; k * k];
        for (sj, &col) in kernel_cols.iter().enumerate() {
            for &(row, coef) in &cols[col as usize] {
                let ri = row_of[row as usize];
                if ri >= 0 {
                    mat[ri as usize * k + sj] = coef;
                }
            }
        }
        let lu = LuFactors::factor(mat, k).ok_or(LpError::SingularBasis)?;
        Ok(BaseFactor {
            kernel_cols,
            kernel_pos,
            kernel_rows,
            row_of,
            covered_pos,
            lu,
        })
    }
}

/// Dense LU with partial pivoting for the kernel block.
struct LuFactors {
    k: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    fn empty() -> Self {
        LuFactors {
            k: 0,
            lu: Vec::new(),
            perm: Vec::new(),
        }
    }

    fn factor(mut a: Vec<f64>, k: usize) -> Option<Self> {
        let mut perm: Vec<usize> = (0..k).collect();
        for col in 0..k {
            let mut pivot_row = col;
            let mut best = a[col * k + col].abs();
            for r in col + 1..k {
                let v = a[r * k + col].abs();
                if v > best {
                    best = v;
                    pivot_row = r;
                }
            }
            if best < 1e-12 {
                return None;
            }
            if pivot_row != col {
                for c in 0..k {
                    a.swap(col * k + c, pivot_row * k + c);
                }
                perm.swap(col, pivot_row);
            }
            let pivot = a[col * k + col];
            for r in col + 1..k {
                let factor = a[r * k + col] / pivot;
                a[r * k + col] = factor;
                if factor != 0.0 {
                    for c in col + 1..k {
                        a[r * k + c] -= factor * a[col * k + c];
                    }
                }
            }
        }
        Some(LuFactors { k, lu: a, perm })
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let k = self.k;
        debug_assert_eq!(b.len(), k);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 1..k {
            let mut acc = x[r];
            for c in 0..r {
                acc -= self.lu[r * k + c] * x[c];
            }
            x[r] = acc;
        }
        for r in (0..k).rev() {
            let mut acc = x[r];
            for c in r + 1..k {
                acc -= self.lu[r * k + c] * x[c];
            }
            x[r] = acc / self.lu[r * k + r];
        }
        b.copy_from_slice(&x);
    }

    /// Solves `A' x = b` for the same factored `A` (`PA = LU`).
    fn solve_transpose_in_place(&self, b: &mut [f64]) {
        let k = self.k;
        debug_assert_eq!(b.len(), k);
        // U' t = b (forward, dividing by the diagonal).
        let mut t = vec![0.0; k];
        for r in 0..k {
            let mut acc = b[r];
            for c in 0..r {
                acc -= self.lu[c * k + r] * t[c];
            }
            t[r] = acc / self.lu[r * k + r];
        }
        // L' v = t (backward, unit diagonal).
        for r in (0..k).rev() {
            let mut acc = t[r];
            for c in r + 1..k {
                acc -= self.lu[c * k + r] * t[c];
            }
            t[r] = acc;
        }
        // x = P' v.
        for (i, &p) in self.perm.iter().enumerate() {
            b[p] = t[i];
        }
    }
}

/// One-shot LP solve used by everything that does not need warm starts.
pub fn solve_lp(lp: &LinearProgram, cfg: SimplexConfig) -> Result<LpResult, LpError> {
    let mut s = Simplex::new(lp, cfg)?;
    let mut status = s.primal_solve()?;
    if status == LpStatus::Optimal && s.verify_and_repair(1e-8)? {
        // A refactorization may leave tiny bound violations; polish them out.
        status = s.primal_solve()?;
    }
    Ok(s.result(status))
}
