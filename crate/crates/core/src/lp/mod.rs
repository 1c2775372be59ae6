//! Bounded-variable linear programming.
//!
//! Every model in the crate is solved through [`Simplex`], a primal/dual
//! simplex over `min c'x` with per-column bounds and per-row senses. Each row
//! gets a logical column so that all constraints become `a'x - r = 0` with
//! bounds on `r`; the basis inverse is kept explicitly and refreshed by
//! product-form pivots.

mod simplex;

pub use simplex::{Simplex, VarStatus};

use crate::error::LpError;

pub const PIVOT_TOL: f64 = 1e-9;
pub const FEAS_TOL: f64 = 1e-6;
pub const OPT_TOL: f64 = 1e-6;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
pub const BLAND_AFTER: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Ge,
    Le,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Ge => ">=",
            Sense::Le => "<=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn new(coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Self { coeffs, sense, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }

    /// Bounds on the row activity implied by the sense.
    pub fn activity_bounds(&self) -> (f64, f64) {
        match self.sense {
            Sense::Ge => (self.rhs, f64::INFINITY),
            Sense::Le => (f64::NEG_INFINITY, self.rhs),
            Sense::Eq => (self.rhs, self.rhs),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Column {
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
}

/// `min c'x` subject to sparse rows and column bounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    columns: Vec<Column>,
    rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_column(&mut self, lower: f64, upper: f64, cost: f64) -> usize {
        assert!(lower <= upper, "column bounds out of order");
        self.columns.push(Column { lower, upper, cost });
        self.columns.len() - 1
    }

    pub fn add_row(&mut self, row: Row) -> usize {
        assert!(row.rhs.is_finite(), "row rhs must be finite");
        debug_assert!(row.coeffs.iter().all(|&(j, _)| j < self.columns.len()));
        self.rows.push(row);
        self.rows.len() - 1
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn columns_mut(&mut self) -> &mut [Column] {
        &mut self.columns
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn num_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.columns.iter().zip(x).map(|(c, v)| c.cost * v).sum()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let bounds = self
            .columns
            .iter()
            .zip(x)
            .map(|(c, &v)| (c.lower - v).max(v - c.upper).max(0.0));
        let rows = self.rows.iter().map(|r| r.violation(x));
        bounds.chain(rows).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Warm-start snapshot: the status of every structural and logical column.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub status: Vec<VarStatus>,
    pub num_cols: usize,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    /// Lagrangian dual bound; equals `objective` up to tolerance at optimality.
    pub dual_objective: f64,
    pub primal: Vec<f64>,
    /// One multiplier per row; nonnegative on binding `>=` rows.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
    pub basis: Basis,
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let mut spx = Simplex::new(lp);
    spx.solve()?;
    Ok(spx.solution())
}

/// Appends `row` to `lp` and re-optimizes from the basis stored in `solution`.
pub fn add_row_and_resolve(
    lp: &mut LinearProgram,
    solution: &LpSolution,
    row: Row,
) -> Result<LpSolution, LpError> {
    lp.add_row(row);
    let mut spx = Simplex::with_basis(lp, &solution.basis);
    spx.solve()?;
    Ok(spx.solution())
}
