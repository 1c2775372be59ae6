use std::time::Instant;

use super::{Basis, LinearProgram, LpSolution, LpStatus, Row, BLAND_AFTER, FEAS_TOL, OPT_TOL, PIVOT_TOL};
use crate::error::LpError;

const REFACTOR_EVERY: usize = 100;
const DEGENERATE_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free column held at zero.
    Free,
}

enum PrimalEnd {
    Optimal,
    Unbounded,
    /// Phase one stalled with residual infeasibility.
    Infeasible,
}

enum DualEnd {
    Feasible,
    Infeasible,
}

/// Stateful simplex engine; supports bound, cost, and row changes followed by
/// a warm re-solve.
#[derive(Debug, Clone)]
pub struct Simplex {
    n: usize,
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    status: Vec<VarStatus>,
    basis: Vec<usize>,
    /// Column-major dense inverse: entry (i, k) at `binv[k * m + i]`.
    binv: Vec<f64>,
    since_refactor: usize,
    needs_refactor: bool,
    values_stale: bool,
    iterations: usize,
    iteration_limit: usize,
    deadline: Option<Instant>,
    degenerate_run: usize,
    bland: bool,
    last_status: Option<LpStatus>,
}

fn nonbasic_status(lower: f64, upper: f64) -> VarStatus {
    if lower.is_finite() {
        VarStatus::AtLower
    } else if upper.is_finite() {
        VarStatus::AtUpper
    } else {
        VarStatus::Free
    }
}

impl Simplex {
    pub fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_cols();
        let m = lp.num_rows();
        let mut spx = Self {
            n,
            m,
            cols: vec![Vec::new(); n],
            lower: Vec::with_capacity(n + m),
            upper: Vec::with_capacity(n + m),
            cost: Vec::with_capacity(n + m),
            x: vec![0.0; n + m],
            status: Vec::with_capacity(n + m),
            basis: (n..n + m).collect(),
            binv: Vec::new(),
            since_refactor: 0,
            needs_refactor: true,
            values_stale: true,
            iterations: 0,
            iteration_limit: 0,
            deadline: None,
            degenerate_run: 0,
            bland: false,
            last_status: None,
        };
        for c in lp.columns() {
            spx.lower.push(c.lower);
            spx.upper.push(c.upper);
            spx.cost.push(c.cost);
            spx.status.push(nonbasic_status(c.lower, c.upper));
        }
        for (r, row) in lp.rows().iter().enumerate() {
            for &(j, a) in &row.coeffs {
                if a != 0.0 {
                    spx.cols[j].push((r, a));
                }
            }
            let (lo, hi) = row.activity_bounds();
            spx.lower.push(lo);
            spx.upper.push(hi);
            spx.cost.push(0.0);
            spx.status.push(VarStatus::Basic);
        }
        for j in 0..n {
            spx.x[j] = spx.bound_value(j);
        }
        spx.reset_limit();
        spx
    }

    /// Builds the engine and installs `basis` as the starting point. Rows
    /// added since the snapshot start with their logical basic.
    pub fn with_basis(lp: &LinearProgram, basis: &Basis) -> Self {
        let mut spx = Self::new(lp);
        let n = spx.n;
        if basis.num_cols == n {
            let known_rows = basis.status.len().saturating_sub(n).min(spx.m);
            for v in 0..n + known_rows {
                let want = basis.status[v];
                spx.status[v] = match want {
                    VarStatus::AtUpper if spx.upper[v].is_finite() => VarStatus::AtUpper,
                    VarStatus::AtLower if spx.lower[v].is_finite() => VarStatus::AtLower,
                    VarStatus::Basic => VarStatus::Basic,
                    _ => nonbasic_status(spx.lower[v], spx.upper[v]),
                };
            }
            for v in 0..n + spx.m {
                if spx.status[v] != VarStatus::Basic {
                    spx.x[v] = spx.bound_value(v);
                }
            }
            spx.basis = (0..n + spx.m)
                .filter(|&v| spx.status[v] == VarStatus::Basic)
                .collect();
            // refactor() trims or pads the basic set to exactly m columns.
        }
        spx
    }

    fn reset_limit(&mut self) {
        self.iteration_limit = self.iterations + 20_000 + 50 * (self.n + self.m);
    }

    pub fn num_cols(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    fn bound_value(&self, v: usize) -> f64 {
        match self.status[v] {
            VarStatus::AtLower => self.lower[v],
            VarStatus::AtUpper => self.upper[v],
            VarStatus::Free => 0.0,
            VarStatus::Basic => self.x[v],
        }
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) -> Result<(), LpError> {
        if j >= self.n {
            return Err(LpError::BadColumn(j));
        }
        assert!(lower <= upper, "column bounds out of order");
        if self.lower[j] == lower && self.upper[j] == upper {
            return Ok(());
        }
        self.lower[j] = lower;
        self.upper[j] = upper;
        if self.status[j] != VarStatus::Basic {
            self.status[j] = match self.status[j] {
                VarStatus::AtUpper if upper.is_finite() => VarStatus::AtUpper,
                VarStatus::AtLower if lower.is_finite() => VarStatus::AtLower,
                _ => nonbasic_status(lower, upper),
            };
            self.x[j] = self.bound_value(j);
            self.values_stale = true;
        }
        self.last_status = None;
        Ok(())
    }

    pub fn set_cost(&mut self, j: usize, cost: f64) -> Result<(), LpError> {
        if j >= self.n {
            return Err(LpError::BadColumn(j));
        }
        self.cost[j] = cost;
        self.last_status = None;
        Ok(())
    }

    /// Appends a row; its logical column enters the basis, so the current
    /// basis stays dual feasible.
    pub fn add_row(&mut self, row: &Row) -> Result<usize, LpError> {
        if self.needs_refactor {
            self.refactor()?;
        }
        if self.values_stale {
            self.compute_basic_values();
        }
        let m = self.m;
        let r = m;
        let logical = self.n + m;
        if let Some(&(j, _)) = row.coeffs.iter().find(|&&(j, _)| j >= self.n) {
            return Err(LpError::BadColumn(j));
        }
        let (lo, hi) = row.activity_bounds();
        let mut rvec = vec![0.0; m];
        for &(j, a) in &row.coeffs {
            if a != 0.0 {
                self.cols[j].push((r, a));
                if self.status[j] == VarStatus::Basic {
                    let slot = self.slot_of(j);
                    rvec[slot] += a;
                }
            }
        }
        // New inverse [[Binv, 0], [r'Binv, -1]].
        let m1 = m + 1;
        let mut nb = vec![0.0; m1 * m1];
        for k in 0..m {
            let src = &self.binv[k * m..(k + 1) * m];
            let dst = &mut nb[k * m1..k * m1 + m];
            dst.copy_from_slice(src);
            nb[k * m1 + m] = dot(&rvec, src);
        }
        nb[m * m1 + m] = -1.0;
        self.binv = nb;
        self.m = m1;
        self.lower.push(lo);
        self.upper.push(hi);
        self.cost.push(0.0);
        self.status.push(VarStatus::Basic);
        self.basis.push(logical);
        let act = row.activity(&self.x[..self.n]);
        self.x.push(act);
        self.last_status = None;
        self.iteration_limit += 50 + 50 * self.n;
        Ok(r)
    }

    fn slot_of(&self, v: usize) -> usize {
        self.basis.iter().position(|&b| b == v).expect("basic column has a slot")
    }

    #[inline]
    fn binv_col(&self, k: usize) -> &[f64] {
        &self.binv[k * self.m..(k + 1) * self.m]
    }

    /// `B^{-1} a_v`.
    fn ftran(&self, v: usize, out: &mut [f64]) {
        out.fill(0.0);
        if v < self.n {
            for &(r, a) in &self.cols[v] {
                axpy(out, a, self.binv_col(r));
            }
        } else {
            axpy(out, -1.0, self.binv_col(v - self.n));
        }
    }

    #[inline]
    fn col_dot(&self, v: usize, y: &[f64]) -> f64 {
        if v < self.n {
            self.cols[v].iter().map(|&(r, a)| a * y[r]).sum()
        } else {
            -y[v - self.n]
        }
    }

    /// `y' = cb' B^{-1}`.
    fn btran_costs(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.m;
        let nz: Vec<usize> = (0..m).filter(|&i| cb[i] != 0.0).collect();
        (0..m)
            .map(|k| {
                let col = &self.binv[k * m..(k + 1) * m];
                nz.iter().map(|&i| cb[i] * col[i]).sum()
            })
            .collect()
    }

    fn pivot(&mut self, r: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[r];
        for k in 0..m {
            let col = &mut self.binv[k * m..(k + 1) * m];
            let v = col[r];
            if v == 0.0 {
                continue;
            }
            let v = v / piv;
            for (i, c) in col.iter_mut().enumerate() {
                *c -= alpha[i] * v;
            }
            col[r] = v;
        }
        self.since_refactor += 1;
    }

    /// Rebuilds the inverse from scratch, repairing a singular basis by
    /// swapping in logical columns.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let n = self.n;
        // Normalise the requested basic set to exactly m columns.
        let mut structurals: Vec<usize> = Vec::new();
        let mut listed = vec![false; n];
        let mut logical_basic = vec![false; m];
        let order = self.basis.iter().copied().chain(0..n + m);
        for v in order {
            if self.status[v] != VarStatus::Basic {
                continue;
            }
            if v < n {
                if !listed[v] {
                    listed[v] = true;
                    structurals.push(v);
                }
            } else {
                logical_basic[v - n] = true;
            }
        }
        self.binv = vec![0.0; m * m];
        for k in 0..m {
            self.binv[k * m + k] = -1.0;
        }
        let mut slots: Vec<usize> = (n..n + m).collect();
        let mut open: Vec<bool> = (0..m).map(|r| !logical_basic[r]).collect();
        let mut alpha = vec![0.0; m];
        let mut demoted = Vec::new();
        for &s in &structurals {
            self.ftran(s, &mut alpha);
            let scale = alpha.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            let mut best = None;
            let mut best_val = 0.0;
            for r in 0..m {
                if open[r] && alpha[r].abs() > best_val {
                    best_val = alpha[r].abs();
                    best = Some(r);
                }
            }
            match best {
                Some(r) if best_val > 1e-9 * scale.max(1.0) && best_val > 1e-11 => {
                    self.pivot(r, &alpha);
                    slots[r] = s;
                    open[r] = false;
                }
                _ => demoted.push(s),
            }
        }
        for &s in &demoted {
            let (lo, hi) = (self.lower[s], self.upper[s]);
            self.status[s] = if lo.is_finite() && (!hi.is_finite() || (self.x[s] - lo).abs() <= (hi - self.x[s]).abs()) {
                VarStatus::AtLower
            } else if hi.is_finite() {
                VarStatus::AtUpper
            } else {
                VarStatus::Free
            };
            self.x[s] = self.bound_value(s);
        }
        // Any still-open slot keeps its logical; demote logicals beyond m.
        for r in 0..m {
            let l = n + r;
            if slots[r] == l {
                self.status[l] = VarStatus::Basic;
            } else if self.status[l] == VarStatus::Basic {
                self.status[l] = nonbasic_status(self.lower[l], self.upper[l]);
                self.x[l] = self.bound_value(l);
            }
        }
        self.basis = slots;
        for &v in &self.basis {
            self.status[v] = VarStatus::Basic;
        }
        self.since_refactor = 0;
        self.needs_refactor = false;
        self.compute_basic_values();
        Ok(())
    }

    fn compute_basic_values(&mut self) {
        let m = self.m;
        let mut b = vec![0.0; m];
        for v in 0..self.n + m {
            if self.status[v] == VarStatus::Basic {
                continue;
            }
            let xv = self.x[v];
            if xv == 0.0 {
                continue;
            }
            if v < self.n {
                for &(r, a) in &self.cols[v] {
                    b[r] -= a * xv;
                }
            } else {
                b[v - self.n] += xv;
            }
        }
        let mut xb = vec![0.0; m];
        for (k, &bk) in b.iter().enumerate() {
            if bk != 0.0 {
                axpy(&mut xb, bk, self.binv_col(k));
            }
        }
        for (i, &v) in self.basis.iter().enumerate() {
            self.x[v] = xb[i];
        }
        self.values_stale = false;
    }

    fn infeasibility(&self, v: usize) -> f64 {
        let xv = self.x[v];
        if xv < self.lower[v] - FEAS_TOL {
            self.lower[v] - xv
        } else if xv > self.upper[v] + FEAS_TOL {
            xv - self.upper[v]
        } else {
            0.0
        }
    }

    fn max_primal_infeasibility(&self) -> f64 {
        self.basis
            .iter()
            .map(|&v| self.infeasibility(v))
            .fold(0.0, f64::max)
    }

    fn phase_two_duals(&self) -> Vec<f64> {
        let cb: Vec<f64> = self.basis.iter().map(|&v| self.cost[v]).collect();
        self.btran_costs(&cb)
    }

    fn dual_infeasibility(&self, v: usize, d: f64) -> f64 {
        if self.lower[v] == self.upper[v] {
            return 0.0;
        }
        match self.status[v] {
            VarStatus::Basic => 0.0,
            VarStatus::AtLower => (-d).max(0.0),
            VarStatus::AtUpper => d.max(0.0),
            VarStatus::Free => d.abs(),
        }
    }

    fn is_dual_feasible(&self) -> bool {
        let y = self.phase_two_duals();
        (0..self.n + self.m).all(|v| {
            let d = self.cost[v] - self.col_dot(v, &y);
            self.dual_infeasibility(v, d) <= OPT_TOL
        })
    }

    /// Makes `solve` fail with [`LpError::TimeLimit`] once `deadline` passes.
    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    fn check_limit(&self) -> Result<(), LpError> {
        if self.iterations % 64 == 0 && self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(LpError::TimeLimit);
        }
        if self.iterations >= self.iteration_limit {
            Err(LpError::IterationLimit(self.iterations))
        } else {
            Ok(())
        }
    }

    fn maintain(&mut self) -> Result<(), LpError> {
        if self.needs_refactor || self.since_refactor >= REFACTOR_EVERY {
            self.refactor()?;
        } else if self.values_stale {
            self.compute_basic_values();
        }
        Ok(())
    }

    fn note_step(&mut self, step: f64) {
        if step <= DEGENERATE_STEP {
            self.degenerate_run += 1;
            if self.degenerate_run >= BLAND_AFTER {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
            self.bland = false;
        }
    }

    fn primal(&mut self, phase_one: bool) -> Result<PrimalEnd, LpError> {
        let total = self.n + self.m;
        let mut alpha = vec![0.0; self.m];
        loop {
            self.check_limit()?;
            self.maintain()?;
            let cb: Vec<f64> = if phase_one {
                self.basis
                    .iter()
                    .map(|&v| {
                        if self.x[v] < self.lower[v] - FEAS_TOL {
                            -1.0
                        } else if self.x[v] > self.upper[v] + FEAS_TOL {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            } else {
                self.basis.iter().map(|&v| self.cost[v]).collect()
            };
            if phase_one && cb.iter().all(|&c| c == 0.0) {
                return Ok(PrimalEnd::Optimal);
            }
            let y = self.btran_costs(&cb);

            let mut entering = None;
            let mut best_score = 0.0;
            for v in 0..total {
                if self.status[v] == VarStatus::Basic || self.lower[v] == self.upper[v] {
                    continue;
                }
                let c = if phase_one { 0.0 } else { self.cost[v] };
                let d = c - self.col_dot(v, &y);
                let infeas = self.dual_infeasibility(v, d);
                if infeas > OPT_TOL {
                    if self.bland {
                        entering = Some((v, d));
                        break;
                    }
                    if infeas > best_score {
                        best_score = infeas;
                        entering = Some((v, d));
                    }
                }
            }
            let Some((q, dq)) = entering else {
                if phase_one {
                    return Ok(PrimalEnd::Infeasible);
                }
                return Ok(PrimalEnd::Optimal);
            };
            let dir = if self.status[q] == VarStatus::Free {
                if dq < 0.0 { 1.0 } else { -1.0 }
            } else if self.status[q] == VarStatus::AtLower {
                1.0
            } else {
                -1.0
            };
            self.ftran(q, &mut alpha);

            // Harris two-pass ratio test.
            let flip = self.upper[q] - self.lower[q];
            let mut theta_max = flip;
            let limit = |spx: &Self, i: usize, rate: f64, relax: f64| -> Option<(f64, bool)> {
                let v = spx.basis[i];
                let xv = spx.x[v];
                let (lo, hi) = (spx.lower[v], spx.upper[v]);
                let below = phase_one && xv < lo - FEAS_TOL;
                let above = phase_one && xv > hi + FEAS_TOL;
                if rate < 0.0 {
                    if above {
                        Some(((xv - hi + relax) / -rate, true))
                    } else if below || !lo.is_finite() {
                        None
                    } else {
                        Some(((xv - lo + relax) / -rate, false))
                    }
                } else if below {
                    Some(((lo - xv + relax) / rate, false))
                } else if above || !hi.is_finite() {
                    None
                } else {
                    Some(((hi - xv + relax) / rate, true))
                }
            };
            for i in 0..self.m {
                if alpha[i].abs() <= PIVOT_TOL {
                    continue;
                }
                let rate = -dir * alpha[i];
                let relax = if self.bland { 0.0 } else { FEAS_TOL };
                if let Some((t, _)) = limit(self, i, rate, relax) {
                    theta_max = theta_max.min(t);
                }
            }
            if !theta_max.is_finite() {
                if phase_one {
                    return Err(LpError::Numerical("unbounded phase-one ray".into()));
                }
                return Ok(PrimalEnd::Unbounded);
            }
            let mut leave: Option<(usize, f64, bool)> = None;
            let mut best_piv = 0.0;
            for i in 0..self.m {
                if alpha[i].abs() <= PIVOT_TOL {
                    continue;
                }
                let rate = -dir * alpha[i];
                if let Some((t, to_upper)) = limit(self, i, rate, 0.0) {
                    let t = t.max(0.0);
                    if t <= theta_max {
                        let better = if self.bland {
                            match leave {
                                None => true,
                                Some((li, lt, _)) => {
                                    t < lt - 1e-15 || (t <= lt + 1e-15 && self.basis[i] < self.basis[li])
                                }
                            }
                        } else {
                            alpha[i].abs() > best_piv
                        };
                        if better {
                            best_piv = alpha[i].abs();
                            leave = Some((i, t, to_upper));
                        }
                    }
                }
            }
            self.iterations += 1;
            let take_flip = match leave {
                None => true,
                Some((_, t, _)) => flip.is_finite() && flip <= t,
            };
            if take_flip {
                if !flip.is_finite() {
                    return Err(LpError::Numerical("ratio test found no pivot".into()));
                }
                for i in 0..self.m {
                    let v = self.basis[i];
                    self.x[v] -= dir * alpha[i] * flip;
                }
                self.status[q] = if dir > 0.0 { VarStatus::AtUpper } else { VarStatus::AtLower };
                self.x[q] = self.bound_value(q);
                self.note_step(flip);
                continue;
            }
            let (r, theta, to_upper) = leave.expect("leaving row");
            for i in 0..self.m {
                let v = self.basis[i];
                self.x[v] -= dir * alpha[i] * theta;
            }
            self.x[q] += dir * theta;
            let out = self.basis[r];
            self.status[out] = if to_upper { VarStatus::AtUpper } else { VarStatus::AtLower };
            self.x[out] = self.bound_value(out);
            self.pivot(r, &alpha);
            self.basis[r] = q;
            self.status[q] = VarStatus::Basic;
            self.note_step(theta);
        }
    }

    fn dual(&mut self) -> Result<DualEnd, LpError> {
        let total = self.n + self.m;
        let mut alpha = vec![0.0; self.m];
        let mut rho = vec![0.0; self.m];
        let mut best_obj = f64::NEG_INFINITY;
        loop {
            self.check_limit()?;
            self.maintain()?;
            let mut leave = None;
            let mut worst = 0.0;
            for i in 0..self.m {
                let inf = self.infeasibility(self.basis[i]);
                if self.bland {
                    if inf > 0.0 && leave.is_none_or(|l: usize| self.basis[i] < self.basis[l]) {
                        leave = Some(i);
                    }
                } else if inf > worst {
                    worst = inf;
                    leave = Some(i);
                }
            }
            let Some(r) = leave else {
                return Ok(DualEnd::Feasible);
            };
            let out = self.basis[r];
            let increase = self.x[out] < self.lower[out];
            let target = if increase { self.lower[out] } else { self.upper[out] };
            let m = self.m;
            for k in 0..m {
                rho[k] = self.binv[k * m + r];
            }
            let y = self.phase_two_duals();

            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            let mut theta_max = f64::INFINITY;
            for v in 0..total {
                if self.status[v] == VarStatus::Basic || self.lower[v] == self.upper[v] {
                    continue;
                }
                let a = self.col_dot(v, &rho);
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                // x_out moves by -a per unit increase of x_v.
                let ok = match self.status[v] {
                    VarStatus::AtLower => (a < 0.0) == increase,
                    VarStatus::AtUpper => (a > 0.0) == increase,
                    VarStatus::Free => true,
                    VarStatus::Basic => false,
                };
                if !ok {
                    continue;
                }
                let d = self.cost[v] - self.col_dot(v, &y);
                let dabs = match self.status[v] {
                    VarStatus::AtLower => d.max(0.0),
                    VarStatus::AtUpper => (-d).max(0.0),
                    _ => d.abs(),
                };
                let relax = if self.bland { 0.0 } else { OPT_TOL };
                theta_max = theta_max.min((dabs + relax) / a.abs());
                cands.push((v, a, dabs));
            }
            if cands.is_empty() {
                return Ok(DualEnd::Infeasible);
            }
            let mut entering = None;
            let mut best = 0.0;
            for &(v, a, dabs) in &cands {
                let t = dabs / a.abs();
                if t <= theta_max {
                    let better = if self.bland {
                        entering.map_or(true, |(e, _): (usize, f64)| v < e)
                    } else {
                        a.abs() > best
                    };
                    if better {
                        best = a.abs();
                        entering = Some((v, t));
                    }
                }
            }
            let (q, _) = entering.expect("candidate within Harris bound");
            self.ftran(q, &mut alpha);
            if alpha[r].abs() <= PIVOT_TOL {
                self.needs_refactor = true;
                self.iterations += 1;
                continue;
            }
            self.iterations += 1;
            let delta = (self.x[out] - target) / alpha[r];
            for i in 0..self.m {
                let v = self.basis[i];
                self.x[v] -= alpha[i] * delta;
            }
            self.x[q] += delta;
            self.status[out] = if increase { VarStatus::AtLower } else { VarStatus::AtUpper };
            self.x[out] = target;
            self.pivot(r, &alpha);
            self.basis[r] = q;
            self.status[q] = VarStatus::Basic;
            let obj = self.objective();
            let gain = obj - best_obj;
            best_obj = best_obj.max(obj);
            self.note_step(if gain > 1e-9 * (1.0 + obj.abs()) { gain } else { 0.0 });
        }
    }

    /// Optimizes from the current basis, choosing dual simplex when the basis
    /// is dual feasible but primal infeasible. A stalled or numerically broken
    /// warm start is retried once from the slack basis.
    pub fn solve(&mut self) -> Result<LpStatus, LpError> {
        match self.solve_from_current() {
            Err(LpError::Numerical(_) | LpError::IterationLimit(_)) => {
                self.cold_start();
                self.solve_from_current()
            }
            other => other,
        }
    }

    fn cold_start(&mut self) {
        for v in 0..self.n {
            self.status[v] = nonbasic_status(self.lower[v], self.upper[v]);
            self.x[v] = self.bound_value(v);
        }
        for v in self.n..self.n + self.m {
            self.status[v] = VarStatus::Basic;
        }
        self.basis = (self.n..self.n + self.m).collect();
        self.needs_refactor = true;
        self.values_stale = true;
    }

    fn solve_from_current(&mut self) -> Result<LpStatus, LpError> {
        self.reset_limit();
        self.degenerate_run = 0;
        self.bland = false;
        if self.needs_refactor {
            self.refactor()?;
        } else if self.values_stale {
            self.compute_basic_values();
        }
        for attempt in 0..4 {
            if self.max_primal_infeasibility() > 0.0 {
                let use_dual = attempt < 2 && self.is_dual_feasible();
                if use_dual {
                    if let DualEnd::Infeasible = self.dual()? {
                        self.refactor()?;
                        if self.max_primal_infeasibility() > 0.0 {
                            if let DualEnd::Infeasible = self.dual()? {
                                self.last_status = Some(LpStatus::Infeasible);
                                return Ok(LpStatus::Infeasible);
                            }
                        }
                    }
                } else if let PrimalEnd::Infeasible = self.primal(true)? {
                    self.refactor()?;
                    if self.max_primal_infeasibility() > 0.0 {
                        if let PrimalEnd::Infeasible = self.primal(true)? {
                            self.last_status = Some(LpStatus::Infeasible);
                            return Ok(LpStatus::Infeasible);
                        }
                    }
                }
            }
            if let PrimalEnd::Unbounded = self.primal(false)? {
                self.last_status = Some(LpStatus::Unbounded);
                return Ok(LpStatus::Unbounded);
            }
            self.compute_basic_values();
            if self.max_primal_infeasibility() == 0.0 {
                self.last_status = Some(LpStatus::Optimal);
                return Ok(LpStatus::Optimal);
            }
            self.refactor()?;
        }
        Err(LpError::Numerical("could not restore primal feasibility".into()))
    }

    pub fn status(&self) -> Option<LpStatus> {
        self.last_status
    }

    /// Structural column values.
    pub fn values(&self) -> &[f64] {
        &self.x[..self.n]
    }

    pub fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.x[j]).sum()
    }

    pub fn row_duals(&self) -> Vec<f64> {
        self.phase_two_duals()
    }

    pub fn basis(&self) -> Basis {
        Basis {
            status: self.status.clone(),
            num_cols: self.n,
        }
    }

    pub fn solution(&self) -> LpSolution {
        let status = self.last_status.unwrap_or(LpStatus::Infeasible);
        let y = self.phase_two_duals();
        let reduced: Vec<f64> = (0..self.n).map(|j| self.cost[j] - self.col_dot(j, &y)).collect();
        let mut dual_obj = 0.0;
        for v in 0..self.n + self.m {
            if self.status[v] == VarStatus::Basic {
                continue;
            }
            let d = if v < self.n { reduced[v] } else { y[v - self.n] };
            if d == 0.0 {
                continue;
            }
            let b = if d > 0.0 { self.lower[v] } else { self.upper[v] };
            if b.is_finite() {
                dual_obj += d * b;
            } else if d.abs() > OPT_TOL {
                dual_obj = f64::NEG_INFINITY;
            }
        }
        LpSolution {
            status,
            objective: self.objective(),
            dual_objective: dual_obj,
            primal: self.values().to_vec(),
            duals: y,
            reduced_costs: reduced,
            iterations: self.iterations,
            basis: self.basis(),
        }
    }
}

#[inline]
fn axpy(out: &mut [f64], a: f64, x: &[f64]) {
    for (o, &v) in out.iter_mut().zip(x) {
        *o += a * v;
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
