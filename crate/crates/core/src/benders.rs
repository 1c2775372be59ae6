//! Benders decomposition over the first-stage master with one inventory
//! subproblem per scenario, solved in closed form.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::cuts::{Cut, Family};
use crate::error::SolveError;
use crate::formulation::{build_benders_master, VarRef};
use crate::instance::Instance;
use crate::solver::{solve, CutConfig, SolveOptions, SolveReport, SolveStatus};

pub const TRACE_HEADER: &str = "iter,master_obj,violated_scenarios,cuts_added";

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub scenario: usize,
    /// `gamma[i]` is either 0 or `h_i`.
    pub gamma: Vec<f64>,
    pub value: f64,
}

/// Optimal dual of scenario `j`'s inventory problem at production `y`.
pub fn subproblem_dual(inst: &Instance, j: usize, y: &[f64]) -> DualSolution {
    let h = inst.holding_cost();
    let d = &inst.demand()[j];
    let mut stock = 0.0;
    let mut gamma = Vec::with_capacity(y.len());
    let mut value = 0.0;
    for i in 0..y.len() {
        stock += y[i] - d[i];
        if stock > 0.0 {
            gamma.push(h[i]);
            value += h[i] * stock;
        } else {
            gamma.push(0.0);
        }
    }
    DualSolution { scenario: j, gamma, value }
}

/// `theta_j - sum_i gamma_i Y_i >= -sum_i gamma_i D_ji`; `None` when the dual
/// is zero and the cut reduces to `theta_j >= 0`.
pub fn optimality_cut(inst: &Instance, dual: &DualSolution) -> Option<Cut> {
    if dual.gamma.iter().all(|&g| g == 0.0) {
        return None;
    }
    let d = &inst.demand()[dual.scenario];
    let n = dual.gamma.len();
    let mut terms = vec![(VarRef::ThetaScen(dual.scenario), 1.0)];
    let mut tail = 0.0;
    let mut coef = vec![0.0; n];
    for t in (0..n).rev() {
        tail += dual.gamma[t];
        coef[t] = tail;
    }
    terms.extend(coef.iter().enumerate().map(|(t, &a)| (VarRef::Y(t), -a)));
    let mut cum = 0.0;
    let mut rhs = 0.0;
    for i in 0..n {
        cum += d[i];
        rhs -= dual.gamma[i] * cum;
    }
    Some(Cut::new(Family::BendersOpt, terms, rhs))
}

fn theta_tol(value: f64) -> f64 {
    1e-6 * (1.0 + value.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub master_obj: f64,
    pub violated_scenarios: usize,
    pub cuts_added: usize,
}

#[derive(Debug, Clone)]
pub struct BendersReport {
    pub report: SolveReport,
    pub trace: Vec<TraceRow>,
}

impl BendersReport {
    pub fn trace_csv(&self) -> String {
        let mut out = format!("{TRACE_HEADER}\n");
        for r in &self.trace {
            let _ = writeln!(out, "{},{},{},{}", r.iter, r.master_obj, r.violated_scenarios, r.cuts_added);
        }
        out
    }
}

/// Re-solves the master to optimality, adding one optimality cut per
/// scenario whose value is underestimated, until no cut is violated.
pub fn solve_benders(inst: &Instance, cfg: &CutConfig, time_limit: Duration) -> Result<BendersReport, SolveError> {
    let start = Instant::now();
    let deadline = start + time_limit;
    let mut master = build_benders_master(inst);
    let m = inst.m();
    let mut seen: Vec<HashSet<Vec<bool>>> = vec![HashSet::new(); m];
    let mut trace = Vec::new();
    let mut totals: BTreeMap<Family, usize> = BTreeMap::new();
    let mut nodes = 0;
    let mut root_lp = f64::NAN;
    let mut hint: Option<Vec<f64>> = None;
    let mut last: SolveReport;
    let mut opt_cuts = 0;

    loop {
        let left = deadline.saturating_duration_since(Instant::now());
        let opts = SolveOptions { time_limit: left, incumbent: hint.take(), log_cuts: false };
        last = solve(&master, cfg, &opts)?;
        nodes += last.nodes;
        if root_lp.is_nan() {
            root_lp = last.root_lp;
        }
        for (f, c) in &last.cuts {
            *totals.entry(*f).or_insert(0) += c;
        }
        if last.status != SolveStatus::Optimal {
            trace.push(TraceRow { iter: trace.len() + 1, master_obj: last.bound, violated_scenarios: 0, cuts_added: 0 });
            break;
        }
        let point = last.incumbent.clone().expect("optimal master has a point");
        let (x, y, z) = master.first_stage_values(&point);
        let mut violated = 0;
        let mut fresh = Vec::new();
        for j in 0..m {
            let dual = subproblem_dual(inst, j, &y);
            let theta = master.value(&point, VarRef::ThetaScen(j));
            if dual.value <= theta + theta_tol(dual.value) {
                continue;
            }
            violated += 1;
            let key: Vec<bool> = dual.gamma.iter().map(|&g| g != 0.0).collect();
            if !seen[j].insert(key) {
                continue;
            }
            if let Some(cut) = optimality_cut(inst, &dual) {
                fresh.push(cut);
            }
        }
        trace.push(TraceRow {
            iter: trace.len() + 1,
            master_obj: last.objective,
            violated_scenarios: violated,
            cuts_added: fresh.len(),
        });
        if fresh.is_empty() {
            break;
        }
        for cut in &fresh {
            master.add_cut(cut)?;
        }
        opt_cuts += fresh.len();
        if Instant::now() >= deadline {
            last.status = SolveStatus::TimeLimit;
            break;
        }
        // the current plan stays feasible; completing it prices theta exactly
        hint = Some(master.complete(&x, &y, &z));
    }

    if opt_cuts > 0 {
        totals.insert(Family::BendersOpt, opt_cuts);
    }
    let master_bound = trace.last().map_or(f64::NEG_INFINITY, |r| r.master_obj);
    let (objective, bound, incumbent) = match &last.incumbent {
        Some(point) if last.status == SolveStatus::Optimal => {
            let (x, y, z) = master.first_stage_values(point);
            let exact = master.complete(&x, &y, &z);
            (master.objective(&exact), master_bound, Some(exact))
        }
        _ => (last.objective, last.bound, last.incumbent.clone()),
    };
    let report = SolveReport {
        status: last.status,
        objective,
        bound,
        incumbent,
        nodes,
        cuts: totals,
        root_lp,
        root_gap_pct: crate::solver::root_gap(objective, root_lp),
        time_sec: start.elapsed().as_secs_f64(),
        cut_log: Vec::new(),
    };
    Ok(BendersReport { report, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::example_instance;
    use crate::lp::{solve_lp, LinearProgram, Row, Sense};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn inventory_lp(inst: &Instance, j: usize, y: &[f64]) -> f64 {
        let n = y.len();
        let mut lp = LinearProgram::new();
        let s: Vec<usize> = (0..n).map(|t| lp.add_column(0.0, f64::INFINITY, inst.holding_cost()[t])).collect();
        let (mut prod, mut dem) = (0.0, 0.0);
        for t in 0..n {
            prod += y[t];
            dem += inst.demand()[j][t];
            lp.add_row(Row::new(vec![(s[t], 1.0)], Sense::Ge, prod - dem));
        }
        solve_lp(&lp).unwrap().objective
    }

    #[test]
    fn zero_production_zero_dual() {
        let inst = example_instance([1.0, 1.0], [1.0, 1.0], [1.0, 1.0]);
        let d = subproblem_dual(&inst, 0, &[0.0, 0.0]);
        assert_eq!(d.gamma, vec![0.0, 0.0]);
        assert_eq!(d.value, 0.0);
        assert!(optimality_cut(&inst, &d).is_none());
    }

    #[test]
    fn example_dual_and_cut() {
        let inst = example_instance([1.0, 1.0], [1.0, 1.0], [1.0, 1.0]);
        assert_eq!(inst.demand()[0], vec![6.0, 1.0]);
        let d = subproblem_dual(&inst, 0, &[11.0, 0.0]);
        assert_eq!(d.gamma, vec![1.0, 1.0]);
        assert_eq!(d.value, 9.0);
        let cut = optimality_cut(&inst, &d).unwrap();
        assert_eq!(cut.to_string(), "-2 y1 - y2 + theta1 >= -13");
    }

    #[test]
    fn dual_matches_lp_and_cut_is_tight() {
        let inst = example_instance([1.0, 1.0], [1.0, 1.0], [2.0, 0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let y = vec![rng.gen_range(0.0..15.0), rng.gen_range(0.0..15.0)];
            let j = rng.gen_range(0..inst.m());
            let d = subproblem_dual(&inst, j, &y);
            assert!((d.value - inventory_lp(&inst, j, &y)).abs() < 1e-9);
            if let Some(cut) = optimality_cut(&inst, &d) {
                let slack = d.value - cut.coefficient(VarRef::Y(0)) * -y[0] - cut.coefficient(VarRef::Y(1)) * -y[1];
                assert!((slack - cut.rhs).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn no_holding_cost_needs_one_master() {
        let inst = example_instance([50.0, 50.0], [5.0, 5.0], [0.0, 0.0]);
        let rep = solve_benders(&inst, &CutConfig::default(), Duration::from_secs(30)).unwrap();
        assert_eq!(rep.trace.len(), 1);
        assert_eq!(rep.trace[0].cuts_added, 0);
        assert_eq!(rep.report.cut_count(Family::BendersOpt), 0);
    }

    #[test]
    fn trace_csv_header() {
        let inst = example_instance([50.0, 50.0], [5.0, 5.0], [1.0, 1.0]);
        let rep = solve_benders(&inst, &CutConfig::default(), Duration::from_secs(30)).unwrap();
        let csv = rep.trace_csv();
        assert!(csv.starts_with(TRACE_HEADER));
        assert_eq!(csv.lines().count(), rep.trace.len() + 1);
    }
}
