//! The three MIP models over a shared variable naming scheme.
//!
//! Indices are zero-based in code; [`VarRef`]'s `Display` prints the one-based
//! names used in model dumps (`x1`, `s3_2`, ...).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cuts::Cut;
use crate::error::CutError;
use crate::instance::{DemandStats, Instance};
use crate::lp::{LinearProgram, Row, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formulation {
    Dep,
    Compact,
    BendersMaster,
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Dep => "dep",
            Formulation::Compact => "compact",
            Formulation::BendersMaster => "benders",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarRef {
    X(usize),
    Y(usize),
    Z(usize),
    /// Inventory of scenario `j` at the end of period `t`.
    S(usize, usize),
    ThetaPrime(usize),
    ThetaScen(usize),
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VarRef::X(i) => write!(f, "x{}", i + 1),
            VarRef::Y(i) => write!(f, "y{}", i + 1),
            VarRef::Z(j) => write!(f, "z{}", j + 1),
            VarRef::S(j, t) => write!(f, "s{}_{}", j + 1, t + 1),
            VarRef::ThetaPrime(i) => write!(f, "thetap{}", i + 1),
            VarRef::ThetaScen(j) => write!(f, "theta{}", j + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowKind {
    /// Cumulative demand of scenario `j` through period `t`, waived when `z_j = 1`.
    Demand { scenario: usize, period: usize },
    Cardinality,
    Setup(usize),
    Inventory { scenario: usize, period: usize },
    /// Supporting line `q` of the aggregate inventory at period `i`.
    Envelope { period: usize, q: usize },
    Cut,
}

impl RowKind {
    /// Rows the solver may hold back and add only once violated.
    pub fn is_lazy(self) -> bool {
        matches!(self, RowKind::Demand { .. } | RowKind::Inventory { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelRow {
    pub name: String,
    pub kind: RowKind,
    pub row: Row,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelColumn {
    pub var: VarRef,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
    pub binary: bool,
}

#[derive(Debug, Clone)]
pub struct MipModel {
    formulation: Formulation,
    inst: Instance,
    stats: DemandStats,
    columns: Vec<ModelColumn>,
    index: HashMap<VarRef, usize>,
    rows: Vec<ModelRow>,
}

impl MipModel {
    fn empty(inst: &Instance, formulation: Formulation) -> Self {
        Self {
            formulation,
            inst: inst.clone(),
            stats: inst.stats(),
            columns: Vec::new(),
            index: HashMap::new(),
            rows: Vec::new(),
        }
    }

    fn push_column(&mut self, var: VarRef, lower: f64, upper: f64, cost: f64, binary: bool) {
        self.index.insert(var, self.columns.len());
        self.columns.push(ModelColumn { var, lower, upper, cost, binary });
    }

    fn push_row(&mut self, kind: RowKind, terms: Vec<(VarRef, f64)>, sense: Sense, rhs: f64) {
        let name = match kind {
            RowKind::Demand { scenario, period } => format!("demand_{}_{}", scenario + 1, period + 1),
            RowKind::Cardinality => "card".to_string(),
            RowKind::Setup(i) => format!("setup_{}", i + 1),
            RowKind::Inventory { scenario, period } => format!("inv_{}_{}", scenario + 1, period + 1),
            RowKind::Envelope { period, q } => format!("env_{}_{}", period + 1, q),
            RowKind::Cut => format!("cut_{}", self.rows.len() + 1),
        };
        let coeffs = terms.into_iter().map(|(v, a)| (self.index[&v], a)).collect();
        self.rows.push(ModelRow { name, kind, row: Row::new(coeffs, sense, rhs) });
    }

    /// Columns x, y, z and the first-stage rows shared by all three models.
    fn first_stage(&mut self, inst: &Instance) {
        let (n, m) = (inst.n(), inst.m());
        for i in 0..n {
            self.push_column(VarRef::X(i), 0.0, 1.0, inst.setup_cost()[i], true);
        }
        for i in 0..n {
            self.push_column(VarRef::Y(i), 0.0, f64::INFINITY, inst.unit_cost()[i], false);
        }
        for j in 0..m {
            self.push_column(VarRef::Z(j), 0.0, 1.0, 0.0, true);
        }
    }

    fn first_stage_rows(&mut self) {
        let (n, m, k) = (self.stats.n(), self.stats.m(), self.stats.k());
        for j in 0..m {
            for t in 0..n {
                let big = self.stats.cum(j, t);
                let mut terms: Vec<_> = (0..=t).map(|i| (VarRef::Y(i), 1.0)).collect();
                terms.push((VarRef::Z(j), big));
                self.push_row(RowKind::Demand { scenario: j, period: t }, terms, Sense::Ge, big);
            }
        }
        let card = (0..m).map(|j| (VarRef::Z(j), 1.0)).collect();
        self.push_row(RowKind::Cardinality, card, Sense::Le, k as f64);
        for i in 0..n {
            let big = self.stats.big_m()[i];
            let terms = vec![(VarRef::Y(i), 1.0), (VarRef::X(i), -big)];
            self.push_row(RowKind::Setup(i), terms, Sense::Le, 0.0);
        }
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn instance(&self) -> &Instance {
        &self.inst
    }

    pub fn stats(&self) -> &DemandStats {
        &self.stats
    }

    pub fn n(&self) -> usize {
        self.stats.n()
    }

    pub fn m(&self) -> usize {
        self.stats.m()
    }

    pub fn columns(&self) -> &[ModelColumn] {
        &self.columns
    }

    pub fn rows(&self) -> &[ModelRow] {
        &self.rows
    }

    pub fn num_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column(&self, var: VarRef) -> Option<usize> {
        self.index.get(&var).copied()
    }

    pub fn owns(&self, var: VarRef) -> bool {
        self.index.contains_key(&var)
    }

    pub fn owns_stock(&self) -> bool {
        self.formulation == Formulation::Dep
    }

    /// Column indices of the binary variables, x before z.
    pub fn binaries(&self) -> Vec<usize> {
        (0..self.columns.len()).filter(|&c| self.columns[c].binary).collect()
    }

    /// Translates a cut into a row over this model's columns.
    pub fn cut_row(&self, cut: &Cut) -> Result<Row, CutError> {
        let mut coeffs = Vec::with_capacity(cut.terms.len());
        for &(var, a) in &cut.terms {
            let col = self.column(var).ok_or(CutError::ModelMismatch {
                var: var.to_string(),
                formulation: self.formulation,
            })?;
            coeffs.push((col, a));
        }
        Ok(Row::new(coeffs, Sense::Ge, cut.rhs))
    }

    /// Appends a cut permanently to the model.
    pub fn add_cut(&mut self, cut: &Cut) -> Result<usize, CutError> {
        let row = self.cut_row(cut)?;
        let name = format!("{}_{}", cut.family.name(), self.rows.len() + 1);
        self.rows.push(ModelRow { name, kind: RowKind::Cut, row });
        Ok(self.rows.len() - 1)
    }

    /// The continuous relaxation with every row.
    pub fn relaxation(&self) -> LinearProgram {
        self.relaxation_with(|_| true)
    }

    /// The continuous relaxation restricted to rows accepted by `keep`.
    pub fn relaxation_with(&self, keep: impl Fn(&ModelRow) -> bool) -> LinearProgram {
        let mut lp = LinearProgram::new();
        for c in &self.columns {
            lp.add_column(c.lower, c.upper, c.cost);
        }
        for r in self.rows.iter().filter(|r| keep(r)) {
            lp.add_row(r.row.clone());
        }
        lp
    }

    pub fn value(&self, point: &[f64], var: VarRef) -> f64 {
        self.column(var).map_or(0.0, |c| point[c])
    }

    pub fn objective(&self, point: &[f64]) -> f64 {
        self.columns.iter().zip(point).map(|(c, v)| c.cost * v).sum()
    }

    /// Splits a column vector into its x, y and z parts.
    pub fn first_stage_values(&self, point: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.n();
        let m = self.m();
        (point[..n].to_vec(), point[n..2 * n].to_vec(), point[2 * n..2 * n + m].to_vec())
    }

    /// Completes a first-stage plan with the cheapest recourse values the
    /// rows allow.
    pub fn complete(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let (n, m) = (self.n(), self.m());
        let mut point = Vec::with_capacity(self.columns.len());
        point.extend_from_slice(x);
        point.extend_from_slice(y);
        point.extend_from_slice(z);
        let mut prod = vec![0.0; n];
        let mut acc = 0.0;
        for i in 0..n {
            acc += y[i];
            prod[i] = acc;
        }
        match self.formulation {
            Formulation::Dep => {
                for j in 0..m {
                    for t in 0..n {
                        point.push((prod[t] - self.stats.cum(j, t)).max(0.0));
                    }
                }
            }
            Formulation::Compact => {
                let k = self.stats.k();
                for i in 0..n {
                    let mut best: f64 = 0.0;
                    for q in 0..=k {
                        best = best.max(envelope_value(&self.stats, i, q, prod[i]));
                    }
                    point.push(best);
                }
            }
            Formulation::BendersMaster => {
                for j in 0..m {
                    let v: f64 = (0..n).map(|t| self.inst.holding_cost()[t] * (prod[t] - self.stats.cum(j, t)).max(0.0)).sum();
                    point.push(v);
                }
            }
        }
        point
    }

    /// LP-text style dump, one row per line.
    pub fn to_lp_text(&self) -> String {
        let mut out = String::new();
        out.push_str("minimize\n obj:");
        for c in self.columns.iter().filter(|c| c.cost != 0.0) {
            out.push_str(&format!(" {:+} {}", c.cost, c.var));
        }
        out.push_str("\nsubject to\n");
        for r in &self.rows {
            out.push_str(&format!(" {}:", r.name));
            for &(col, a) in &r.row.coeffs {
                out.push_str(&format!(" {:+} {}", a, self.columns[col].var));
            }
            out.push_str(&format!(" {} {}\n", r.row.sense.symbol(), r.row.rhs));
        }
        out.push_str("bounds\n");
        for c in &self.columns {
            out.push_str(&format!(" {} <= {} <= {}\n", c.lower, c.var, c.upper));
        }
        out.push_str("binary\n");
        let bins: Vec<String> = self.columns.iter().filter(|c| c.binary).map(|c| c.var.to_string()).collect();
        out.push_str(&format!(" {}\nend\n", bins.join(" ")));
        out
    }
}

/// Right-hand side of the supporting line `q` at period `i` evaluated at
/// cumulative production `prod`.
pub fn envelope_value(stats: &DemandStats, i: usize, q: usize, prod: f64) -> f64 {
    let m = stats.m();
    let (slope, constant) = envelope_line(stats, i, q);
    debug_assert!(q < m);
    slope * prod - constant
}

/// `(m - q, sum of the m - q smallest cumulative demands at period i)`.
pub fn envelope_line(stats: &DemandStats, i: usize, q: usize) -> (f64, f64) {
    let m = stats.m();
    let constant = stats.sigma_asc(i)[..m - q].iter().map(|&j| stats.cum(j, i)).sum();
    ((m - q) as f64, constant)
}

pub fn build_dep(inst: &Instance) -> MipModel {
    let (n, m) = (inst.n(), inst.m());
    let mut model = MipModel::empty(inst, Formulation::Dep);
    model.first_stage(inst);
    let weight = inst.probability();
    for j in 0..m {
        for t in 0..n {
            model.push_column(VarRef::S(j, t), 0.0, f64::INFINITY, weight * inst.holding_cost()[t], false);
        }
    }
    model.first_stage_rows();
    for j in 0..m {
        for t in 0..n {
            let mut terms = vec![(VarRef::S(j, t), 1.0)];
            terms.extend((0..=t).map(|i| (VarRef::Y(i), -1.0)));
            let rhs = -model.stats.cum(j, t);
            model.push_row(RowKind::Inventory { scenario: j, period: t }, terms, Sense::Ge, rhs);
        }
    }
    model
}

pub fn build_compact(inst: &Instance) -> MipModel {
    let n = inst.n();
    let mut model = MipModel::empty(inst, Formulation::Compact);
    model.first_stage(inst);
    let weight = inst.probability();
    for i in 0..n {
        model.push_column(VarRef::ThetaPrime(i), 0.0, f64::INFINITY, weight * inst.holding_cost()[i], false);
    }
    model.first_stage_rows();
    for i in 0..n {
        for q in 0..=inst.k() {
            let (slope, constant) = envelope_line(&model.stats, i, q);
            let mut terms = vec![(VarRef::ThetaPrime(i), 1.0)];
            terms.extend((0..=i).map(|p| (VarRef::Y(p), -slope)));
            model.push_row(RowKind::Envelope { period: i, q }, terms, Sense::Ge, -constant);
        }
    }
    model
}

pub fn build_benders_master(inst: &Instance) -> MipModel {
    let mut model = MipModel::empty(inst, Formulation::BendersMaster);
    model.first_stage(inst);
    let weight = inst.probability();
    for j in 0..inst.m() {
        model.push_column(VarRef::ThetaScen(j), 0.0, f64::INFINITY, weight, false);
    }
    model.first_stage_rows();
    model
}

pub fn build(inst: &Instance, formulation: Formulation) -> MipModel {
    match formulation {
        Formulation::Dep => build_dep(inst),
        Formulation::Compact => build_compact(inst),
        Formulation::BendersMaster => build_benders_master(inst),
    }
}

/// Tolerance used by [`chance_feasible`].
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Checks the first-stage rows directly on `(x, y, z)`.
pub fn chance_feasible(inst: &Instance, x: &[f64], y: &[f64], z: &[f64]) -> bool {
    let (n, m) = (inst.n(), inst.m());
    if x.len() != n || y.len() != n || z.len() != m {
        return false;
    }
    let stats = inst.stats();
    let violated = z.iter().filter(|&&v| v > 0.5).count();
    if violated > inst.k() {
        return false;
    }
    for i in 0..n {
        if y[i] < -FEASIBILITY_TOL || y[i] > stats.big_m()[i] * x[i] + FEASIBILITY_TOL {
            return false;
        }
    }
    for j in (0..m).filter(|&j| z[j] <= 0.5) {
        let mut prod = 0.0;
        for t in 0..n {
            prod += y[t];
            if prod < stats.cum(j, t) - FEASIBILITY_TOL {
                return false;
            }
        }
    }
    true
}
