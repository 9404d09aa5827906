//! Standard-form container consumed by the simplex and branch-and-bound
//! routines: minimize `f'x` subject to rows `Ax <= b` or `Ax = b` and box
//! bounds `lb <= x <= ub`.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("column {col} has crossing bounds [{lo}, {hi}]")]
    CrossingBounds { col: usize, lo: f64, hi: f64 },
    #[error("column {0} is unbounded on both sides; free variables are not supported")]
    FreeColumn(usize),
    #[error("non-finite coefficient in row {0}")]
    NonFinite(usize),
    #[error("numerically singular basis after refactorization retries")]
    SingularBasis,
    #[error("iteration limit {0} exceeded")]
    IterationLimit(usize),
    #[error("instance too large for exhaustive enumeration: {0} binaries (max {1})")]
    TooLarge(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// `a'x <= rhs`
    Le,
    /// `a'x = rhs`
    Eq,
}

/// Sparse column-major LP. Rows are appended in order; each column keeps its
/// entries sorted by row index as a consequence.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    pub row_kind: Vec<RowKind>,
    pub rhs: Vec<f64>,
    cols: Vec<Vec<(u32, f64)>>,
}

impl LinearProgram {
    pub fn new(num_cols: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; num_cols],
            col_lower: vec![0.0; num_cols],
            col_upper: vec![f64::INFINITY; num_cols],
            row_kind: Vec::new(),
            rhs: Vec::new(),
            cols: vec![Vec::new(); num_cols],
        }
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn set_objective(&mut self, col: usize, coef: f64) {
        self.objective[col] = coef;
    }

    pub fn set_bounds(&mut self, col: usize, lo: f64, hi: f64) {
        self.col_lower[col] = lo;
        self.col_upper[col] = hi;
    }

    /// Appends a row; entries may arrive in any column order but must not
    /// repeat a column.
    pub fn add_row(&mut self, kind: RowKind, rhs: f64, entries: &[(usize, f64)]) -> usize {
        let row = self.rhs.len() as u32;
        for &(col, coef) in entries {
            if coef != 0.0 {
                self.cols[col].push((row, coef));
            }
        }
        self.row_kind.push(kind);
        self.rhs.push(rhs);
        row as usize
    }

    pub fn col(&self, j: usize) -> &[(u32, f64)] {
        &self.cols[j]
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_cols();
        if self.objective.len() != n || self.col_lower.len() != n || self.col_upper.len() != n {
            return Err(LpError::Shape(format!(
                "objective/bounds lengths disagree with {n} columns"
            )));
        }
        for j in 0..n {
            let (lo, hi) = (self.col_lower[j], self.col_upper[j]);
            if lo > hi {
                return Err(LpError::CrossingBounds { col: j, lo, hi });
            }
            if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
                return Err(LpError::FreeColumn(j));
            }
        }
        for (j, col) in self.cols.iter().enumerate() {
            for &(row, coef) in col {
                if !coef.is_finite() {
                    return Err(LpError::NonFinite(row as usize));
                }
                if row as usize >= self.num_rows() {
                    return Err(LpError::Shape(format!(
                        "column {j} references row {row} beyond {}",
                        self.num_rows()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Row activities `Ax` computed column-wise.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.num_rows()];
        for (j, col) in self.cols.iter().enumerate() {
            let v = x[j];
            if v != 0.0 {
                for &(row, coef) in col {
                    act[row as usize] += coef * v;
                }
            }
        }
        act
    }

    /// Largest constraint violation of `x` (row residuals and bound breaches).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.num_cols() {
            worst = worst.max(self.col_lower[j] - x[j]);
            worst = worst.max(x[j] - self.col_upper[j]);
        }
        for (i, act) in self.activities(x).iter().enumerate() {
            match self.row_kind[i] {
                RowKind::Le => worst = worst.max(act - self.rhs[i]),
                RowKind::Eq => worst = worst.max((act - self.rhs[i]).abs()),
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver output: primal point, objective, iteration count and the dual
/// information needed for shadow prices and optimality certificates.
#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// One dual per row (shadow price of the row's right-hand side).
    pub row_duals: Vec<f64>,
    /// Reduced cost per structural column.
    pub reduced_costs: Vec<f64>,
}

impl LpResult {
    pub fn infeasible(iterations: usize) -> Self {
        LpResult {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            objective: f64::INFINITY,
            iterations,
            row_duals: Vec::new(),
            reduced_costs: Vec::new(),
        }
    }

    pub fn unbounded(iterations: usize) -> Self {
        LpResult {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            objective: f64::NEG_INFINITY,
            iterations,
            row_duals: Vec::new(),
            reduced_costs: Vec::new(),
        }
    }
}
