//! Root cutting-plane loop and best-bound branch-and-bound over the binary
//! columns of a [`MipModel`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::cuts::{self, Cut, CutPool, Family, Point};
use crate::error::{LpError, SolveError};
use crate::formulation::{chance_feasible, MipModel, RowKind, VarRef};
use crate::instance::Instance;
use crate::lp::{LinearProgram, LpStatus, Simplex};

pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Relative optimality tolerance used for pruning.
pub const GAP_TOL: f64 = 1e-6;
const LAZY_TOL: f64 = 1e-7;
const TAILING_ROUNDS: usize = 3;
const TAILING_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutConfig {
    pub ls: bool,
    pub mixing: bool,
    pub new: bool,
    pub stock: bool,
    pub mixing_limit: usize,
    /// Separate NEW, STOCK and LS cuts only at the root.
    pub new_root_only: bool,
    pub max_rounds: usize,
}

impl Default for CutConfig {
    fn default() -> Self {
        Self {
            ls: false,
            mixing: true,
            new: true,
            stock: true,
            mixing_limit: 150,
            new_root_only: true,
            max_rounds: 50,
        }
    }
}

impl CutConfig {
    pub fn none() -> Self {
        Self::only(&[])
    }

    pub fn only(families: &[Family]) -> Self {
        Self {
            ls: families.contains(&Family::LsBigM),
            mixing: families.contains(&Family::Mixing),
            new: families.contains(&Family::New),
            stock: families.contains(&Family::Stock),
            ..Self::default()
        }
    }

    pub fn families(&self) -> Vec<Family> {
        let mut out = Vec::new();
        if self.mixing {
            out.push(Family::Mixing);
        }
        if self.new {
            out.push(Family::New);
        }
        if self.stock {
            out.push(Family::Stock);
        }
        if self.ls {
            out.push(Family::LsBigM);
        }
        out
    }

    /// Comma-separated family list as used on the command line.
    pub fn label(&self) -> String {
        self.families()
            .iter()
            .map(|f| match f {
                Family::Mixing => "mixing",
                Family::New => "new",
                Family::Stock => "stock",
                Family::LsBigM => "ls",
                Family::BendersOpt => "benders",
            })
            .collect::<Vec<_>>()
            .join("+")
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub time_limit: Duration,
    /// A feasible column vector of the model used as the starting incumbent.
    pub incumbent: Option<Vec<f64>>,
    pub log_cuts: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { time_limit: Duration::from_secs(600), incumbent: None, log_cuts: false }
    }
}

impl SolveOptions {
    pub fn with_time_limit(time_limit: Duration) -> Self {
        Self { time_limit, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    TimeLimit,
    Infeasible,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Best objective found (`+inf` without an incumbent).
    pub objective: f64,
    pub bound: f64,
    /// Full column vector of the incumbent.
    pub incumbent: Option<Vec<f64>>,
    /// Branch nodes processed after the root.
    pub nodes: usize,
    pub cuts: BTreeMap<Family, usize>,
    pub root_lp: f64,
    pub root_gap_pct: f64,
    pub time_sec: f64,
    pub cut_log: Vec<String>,
}

impl SolveReport {
    pub fn cut_count(&self, family: Family) -> usize {
        self.cuts.get(&family).copied().unwrap_or(0)
    }

    /// Relative gap between objective and bound in percent.
    pub fn gap_pct(&self) -> f64 {
        if !self.objective.is_finite() {
            return f64::INFINITY;
        }
        if self.objective.abs() < 1e-12 {
            return 0.0;
        }
        (100.0 * (self.objective - self.bound) / self.objective.abs()).max(0.0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let finite = |v: f64| if v.is_finite() { Some(v) } else { None };
        let cuts: BTreeMap<&str, usize> = Family::ALL.iter().map(|f| (f.name(), self.cut_count(*f))).collect();
        serde_json::json!({
            "status": self.status.name(),
            "objective": finite(self.objective),
            "bound": finite(self.bound),
            "nodes": self.nodes,
            "root_lp": finite(self.root_lp),
            "root_gap_pct": finite(self.root_gap_pct),
            "cuts": cuts,
            "time_sec": self.time_sec,
        })
    }
}

/// Percentage gap between the best objective and the root bound; zero when
/// the best objective is zero.
pub fn root_gap(best: f64, root_lp: f64) -> f64 {
    if best.abs() < 1e-12 || !best.is_finite() || !root_lp.is_finite() {
        return 0.0;
    }
    100.0 * (best - root_lp) / best
}

/// Holds the LP of a model with lazily loaded model rows and the cuts added
/// so far.
pub struct Engine<'a> {
    model: &'a MipModel,
    spx: Simplex,
    pending: Vec<usize>,
    pool: CutPool,
    counts: BTreeMap<Family, usize>,
    log: Option<Vec<String>>,
    binaries: Vec<usize>,
}

impl<'a> Engine<'a> {
    pub fn new(model: &'a MipModel) -> Self {
        let mut lp = LinearProgram::new();
        for c in model.columns() {
            lp.add_column(c.lower, c.upper, c.cost);
        }
        let mut pending = Vec::new();
        for (r, row) in model.rows().iter().enumerate() {
            if row.kind.is_lazy() {
                pending.push(r);
            } else {
                lp.add_row(row.row.clone());
            }
        }
        Self {
            model,
            spx: Simplex::new(&lp),
            pending,
            pool: CutPool::new(),
            counts: BTreeMap::new(),
            log: None,
            binaries: model.binaries(),
        }
    }

    pub fn model(&self) -> &MipModel {
        self.model
    }

    pub fn values(&self) -> &[f64] {
        self.spx.values()
    }

    pub fn objective(&self) -> f64 {
        self.spx.objective()
    }

    pub fn cut_counts(&self) -> &BTreeMap<Family, usize> {
        &self.counts
    }

    pub fn num_rows(&self) -> usize {
        self.spx.num_rows()
    }

    fn set_binary_bounds(&mut self, bounds: &[(f64, f64)]) -> Result<(), SolveError> {
        for (slot, &(lo, hi)) in bounds.iter().enumerate() {
            self.spx.set_bounds(self.binaries[slot], lo, hi)?;
        }
        Ok(())
    }

    /// Solves the LP, loading violated model rows until none remain.
    /// Returns `None` when infeasible.
    pub fn solve_lp(&mut self) -> Result<Option<f64>, SolveError> {
        loop {
            match self.spx.solve()? {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return Ok(None),
                LpStatus::Unbounded => {
                    return Err(SolveError::Lp(crate::LpError::Numerical("unbounded relaxation".into())))
                }
            }
            let values = self.spx.values().to_vec();
            let rows = self.model.rows();
            // demand rows of one period are loaded one at a time, most violated first
            let mut pick: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
            for (slot, &r) in self.pending.iter().enumerate() {
                let row = &rows[r].row;
                let viol = row.violation(&values);
                if viol <= LAZY_TOL * row.rhs.abs().max(1.0) {
                    continue;
                }
                let key = match rows[r].kind {
                    RowKind::Demand { period, .. } => (0, period),
                    _ => (1, slot),
                };
                let e = pick.entry(key).or_insert((viol, slot));
                if viol > e.0 {
                    *e = (viol, slot);
                }
            }
            if pick.is_empty() {
                return Ok(Some(self.spx.objective()));
            }
            let mut chosen: Vec<usize> = pick.values().map(|&(_, slot)| slot).collect();
            chosen.sort_unstable();
            for &slot in &chosen {
                self.spx.add_row(&rows[self.pending[slot]].row)?;
            }
            let mut slot = 0;
            self.pending.retain(|_| {
                slot += 1;
                chosen.binary_search(&(slot - 1)).is_err()
            });
        }
    }

    fn add_cut(&mut self, cut: &Cut, point: &Point) -> Result<bool, SolveError> {
        if !self.pool.insert(cut) {
            return Ok(false);
        }
        let row = self.model.cut_row(cut)?;
        self.spx.add_row(&row)?;
        *self.counts.entry(cut.family).or_insert(0) += 1;
        if let Some(log) = self.log.as_mut() {
            log.push(cut.log_line(cut.violation(point)));
        }
        Ok(true)
    }

    /// One separation round at the current LP point; returns the number of
    /// cuts added.
    pub fn separate(&mut self, cfg: &CutConfig, at_root: bool) -> Result<usize, SolveError> {
        let point = Point::from_model(self.model, self.spx.values());
        let stats = self.model.stats();
        let mut found: Vec<Cut> = Vec::new();
        if cfg.mixing {
            let room = cfg.mixing_limit.saturating_sub(self.counts.get(&Family::Mixing).copied().unwrap_or(0));
            let mut mix = cuts::separate_mixing(stats, &point);
            mix.retain(|c| !self.pool.contains(c));
            mix.truncate(room);
            found.extend(mix);
        }
        let extras = at_root || !cfg.new_root_only;
        if cfg.new && extras {
            found.extend(cuts::separate_new(stats, &point));
        }
        if cfg.stock && extras && self.model.owns_stock() {
            found.extend(cuts::separate_stock(stats, &point));
        }
        if cfg.ls && extras {
            found.extend(cuts::separate_ls(stats, &point));
        }
        let mut added = 0;
        for cut in &found {
            if self.add_cut(cut, &point)? {
                added += 1;
            }
        }
        Ok(added)
    }

    /// Alternates LP solves and separation rounds. Returns the final bound,
    /// or `None` when the LP is infeasible.
    pub fn cut_loop(&mut self, cfg: &CutConfig, at_root: bool, deadline: Instant) -> Result<Option<f64>, SolveError> {
        let Some(mut bound) = self.solve_lp()? else {
            return Ok(None);
        };
        let mut history = vec![bound];
        for _ in 0..cfg.max_rounds {
            if Instant::now() >= deadline {
                break;
            }
            if self.separate(cfg, at_root)? == 0 {
                break;
            }
            match self.solve_lp()? {
                Some(b) => bound = b,
                None => return Ok(None),
            }
            history.push(bound);
            if history.len() > TAILING_ROUNDS {
                let old = history[history.len() - 1 - TAILING_ROUNDS];
                if bound - old < TAILING_TOL * old.abs().max(1.0) {
                    break;
                }
            }
        }
        Ok(Some(bound))
    }
}

/// Root cutting loop exposed on its own so that several cut configurations
/// can be run in sequence over one shared LP.
pub struct RootLoop<'a> {
    engine: Engine<'a>,
}

impl<'a> RootLoop<'a> {
    pub fn new(model: &'a MipModel) -> Self {
        Self { engine: Engine::new(model) }
    }

    /// Runs the loop with `cfg` on top of every cut added by earlier calls.
    pub fn run(&mut self, cfg: &CutConfig) -> Result<Option<f64>, SolveError> {
        let far = Instant::now() + Duration::from_secs(365 * 24 * 3600);
        self.engine.cut_loop(cfg, true, far)
    }

    pub fn cut_counts(&self) -> &BTreeMap<Family, usize> {
        self.engine.cut_counts()
    }

    pub fn values(&self) -> &[f64] {
        self.engine.values()
    }
}

#[derive(Debug)]
struct Node {
    bound: f64,
    seq: usize,
    fixings: Vec<(usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Max-heap order: smallest bound first, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.seq.cmp(&self.seq))
    }
}

fn prunable(bound: f64, best: f64) -> bool {
    best.is_finite() && bound >= best - GAP_TOL * best.abs().max(1.0)
}

/// Builds a feasible plan near an LP point: opens every period with
/// production, marks unmet scenarios violated, and tops up production where
/// rounding left a small shortfall. Returns `None` when too many scenarios
/// would be violated.
fn round_plan(model: &MipModel, values: &[f64]) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let stats = model.stats();
    let (n, m, k) = (stats.n(), stats.m(), stats.k());
    let (xh, yh, _) = model.first_stage_values(values);
    let bigm = stats.big_m();
    let mut y: Vec<f64> = yh
        .iter()
        .zip(bigm)
        .map(|(&v, &cap)| if v > 1e-9 { v.min(cap) } else { 0.0 })
        .collect();
    let mut x: Vec<f64> = (0..n).map(|i| if xh[i] > 0.5 || y[i] > 0.0 { 1.0 } else { 0.0 }).collect();
    let mut prod = vec![0.0; n];
    let mut acc = 0.0;
    for i in 0..n {
        acc += y[i];
        prod[i] = acc;
    }
    let z: Vec<f64> = (0..m)
        .map(|j| {
            let unmet = (0..n).any(|t| prod[t] < stats.cum(j, t) - INTEGRALITY_TOL * stats.cum(j, t).max(1.0));
            if unmet {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    if z.iter().filter(|&&v| v > 0.5).count() > k {
        return None;
    }
    // Exact repair of shortfalls within tolerance.
    let mut acc = 0.0;
    for t in 0..n {
        acc += y[t];
        let need = (0..m).filter(|&j| z[j] < 0.5).map(|j| stats.cum(j, t)).fold(0.0, f64::max);
        if acc < need {
            let deficit = need - acc;
            let p = (0..=t).rev().find(|&p| x[p] > 0.5).unwrap_or(t);
            x[p] = 1.0;
            y[p] += deficit;
            acc += deficit;
        }
    }
    if y.iter().zip(bigm).any(|(v, cap)| *v > *cap) {
        return None;
    }
    Some((x, y, z))
}

/// A binary that looks integral in the LP but whose rounding leaves the
/// plan infeasible: an `x` near zero with production, or a `z` near zero
/// whose scenario is short.
fn disagreement(model: &MipModel, values: &[f64], bounds: &[(f64, f64)], binaries: &[usize]) -> Option<usize> {
    let stats = model.stats();
    let n = stats.n();
    let (x, y, z) = model.first_stage_values(values);
    let mut prod = vec![0.0; n];
    let mut acc = 0.0;
    for i in 0..n {
        acc += y[i];
        prod[i] = acc;
    }
    let free = |slot: usize| bounds[slot].0 != bounds[slot].1;
    for (slot, &col) in binaries.iter().enumerate() {
        if !free(slot) {
            continue;
        }
        let off = match model.columns()[col].var {
            VarRef::X(i) => x[i] < 0.5 && y[i] > 1e-9,
            VarRef::Z(j) => z[j] < 0.5 && (0..n).any(|t| prod[t] < stats.cum(j, t) - 1e-9),
            _ => false,
        };
        if off {
            return Some(slot);
        }
    }
    None
}

fn accept(model: &MipModel, inst_check: &Instance, plan: (Vec<f64>, Vec<f64>, Vec<f64>)) -> Option<(f64, Vec<f64>)> {
    let (x, y, z) = plan;
    if !chance_feasible(inst_check, &x, &y, &z) {
        return None;
    }
    let point = model.complete(&x, &y, &z);
    Some((model.objective(&point), point))
}

pub fn solve(model: &MipModel, cfg: &CutConfig, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    let deadline = start + opts.time_limit;
    let inst = model.instance().clone();
    let mut engine = Engine::new(model);
    engine.spx.set_deadline(Some(deadline));
    if opts.log_cuts {
        engine.log = Some(Vec::new());
    }
    let nb = engine.binaries.len();
    let root_bounds: Vec<(f64, f64)> = engine
        .binaries
        .iter()
        .map(|&c| (model.columns()[c].lower, model.columns()[c].upper))
        .collect();

    let mut best = f64::INFINITY;
    let mut incumbent: Option<Vec<f64>> = None;
    if let Some(start_point) = &opts.incumbent {
        let (x, y, z) = model.first_stage_values(start_point);
        if let Some((obj, point)) = accept(model, &inst, (x, y, z)) {
            best = obj;
            incumbent = Some(point);
        }
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Node { bound: f64::NEG_INFINITY, seq, fixings: Vec::new() });
    let mut nodes = 0usize;
    let mut root_lp = f64::NAN;
    let mut timed_out = false;
    let mut first = true;

    while let Some(node) = heap.pop() {
        if prunable(node.bound, best) {
            continue;
        }
        if !first && Instant::now() >= deadline {
            heap.push(node);
            timed_out = true;
            break;
        }
        let at_root = first;
        first = false;
        if !at_root {
            nodes += 1;
        }
        let mut bounds = root_bounds.clone();
        for &(slot, v) in &node.fixings {
            bounds[slot] = (v, v);
        }
        engine.set_binary_bounds(&bounds)?;
        let bound = match engine.cut_loop(cfg, at_root, deadline) {
            Ok(Some(b)) => b,
            Ok(None) => continue,
            Err(SolveError::Lp(LpError::TimeLimit)) => {
                heap.push(node);
                timed_out = true;
                break;
            }
            Err(e) => return Err(e),
        };
        if at_root {
            root_lp = bound;
        }
        if prunable(bound, best) {
            continue;
        }
        let values = engine.values().to_vec();
        let mut rounded = false;
        if let Some(plan) = round_plan(model, &values) {
            if let Some((obj, point)) = accept(model, &inst, plan) {
                rounded = true;
                if obj < best - 1e-12 {
                    best = obj;
                    incumbent = Some(point);
                }
            }
        }
        if prunable(bound, best) {
            continue;
        }
        // Most fractional binary; x columns precede z columns.
        let mut pick: Option<(usize, f64)> = None;
        for slot in 0..nb {
            let v = values[engine.binaries[slot]];
            let frac = (v - v.floor()).min(v.ceil() - v);
            let better = match pick {
                None => true,
                Some((_, f)) => frac > f,
            };
            if frac > INTEGRALITY_TOL && better {
                pick = Some((slot, frac));
            }
        }
        if pick.is_none() {
            let mut point = values.clone();
            for &col in &engine.binaries {
                point[col] = point[col].round();
            }
            let (x, y, z) = model.first_stage_values(&point);
            if chance_feasible(&inst, &x, &y, &z) {
                let obj = model.objective(&point);
                if obj < best - 1e-12 {
                    best = obj;
                    incumbent = Some(point);
                }
                continue;
            }
            pick = disagreement(model, &values, &bounds, &engine.binaries).map(|slot| (slot, 0.0));
        }
        if pick.is_none() && !rounded {
            pick = (0..nb).find(|&slot| bounds[slot].0 != bounds[slot].1).map(|slot| (slot, 0.0));
        }
        let Some((slot, _)) = pick else { continue };
        if bounds[slot].0 == bounds[slot].1 {
            continue;
        }
        for v in [0.0, 1.0] {
            seq += 1;
            let mut fixings = node.fixings.clone();
            fixings.push((slot, v));
            heap.push(Node { bound, seq, fixings });
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let status = if timed_out {
        SolveStatus::TimeLimit
    } else if incumbent.is_some() {
        SolveStatus::Optimal
    } else {
        SolveStatus::Infeasible
    };
    let bound = match status {
        SolveStatus::Optimal => best,
        SolveStatus::Infeasible => f64::INFINITY,
        SolveStatus::TimeLimit => open_bound.min(best),
    };
    Ok(SolveReport {
        status,
        objective: best,
        bound,
        incumbent,
        nodes,
        cuts: engine.counts.clone(),
        root_lp,
        root_gap_pct: root_gap(best, root_lp),
        time_sec: start.elapsed().as_secs_f64(),
        cut_log: engine.log.take().unwrap_or_default(),
    })
}
