//! Valid inequalities and their separation routines.
//!
//! Periods and scenarios are zero-based. A mixing chain at period `i` is a
//! list of scenarios from `T*_i` in descending cumulative-demand order; it is
//! always closed by the scenario ranked `k + 1`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CutError;
use crate::formulation::{MipModel, VarRef};
use crate::instance::DemandStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    LsBigM,
    Mixing,
    New,
    Stock,
    BendersOpt,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::LsBigM, Family::Mixing, Family::New, Family::Stock, Family::BendersOpt];

    pub fn name(self) -> &'static str {
        match self {
            Family::LsBigM => "LS_BIGM",
            Family::Mixing => "MIXING",
            Family::New => "NEW",
            Family::Stock => "STOCK",
            Family::BendersOpt => "BENDERS_OPT",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a cut came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub ell: Option<usize>,
    pub scenario: Option<usize>,
    pub s: Vec<usize>,
    /// `(period, chain)` pairs.
    pub tsets: Vec<(usize, Vec<usize>)>,
}

/// `sum(coef * var) >= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub family: Family,
    pub terms: Vec<(VarRef, f64)>,
    pub rhs: f64,
    pub provenance: Provenance,
}

/// Relative violation threshold for emitting a cut.
pub fn violation_tol(rhs: f64) -> f64 {
    1e-6 * rhs.abs().max(1.0)
}

impl Cut {
    /// Merges repeated variables, drops zero coefficients and sorts by variable.
    pub fn new(family: Family, terms: Vec<(VarRef, f64)>, rhs: f64) -> Self {
        let mut merged: BTreeMap<VarRef, f64> = BTreeMap::new();
        for (v, a) in terms {
            *merged.entry(v).or_insert(0.0) += a;
        }
        let terms = merged.into_iter().filter(|&(_, a)| a != 0.0).collect();
        Self { family, terms, rhs, provenance: Provenance::default() }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn coefficient(&self, var: VarRef) -> f64 {
        self.terms.iter().find(|(v, _)| *v == var).map_or(0.0, |&(_, a)| a)
    }

    pub fn lhs(&self, point: &Point) -> f64 {
        self.terms.iter().map(|&(v, a)| a * point.value(v)).sum()
    }

    /// `lhs - rhs`; negative when the point violates the cut.
    pub fn slack(&self, point: &Point) -> f64 {
        self.lhs(point) - self.rhs
    }

    pub fn violation(&self, point: &Point) -> f64 {
        (-self.slack(point)).max(0.0)
    }

    pub fn is_violated(&self, point: &Point) -> bool {
        -self.slack(point) > violation_tol(self.rhs)
    }

    /// One cut-log CSV record (see [`CUT_LOG_HEADER`]).
    pub fn log_line(&self, violation: f64) -> String {
        let p = &self.provenance;
        let opt = |v: Option<usize>| v.map_or(String::new(), |v| (v + 1).to_string());
        let s = p.s.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(";");
        let t = p
            .tsets
            .iter()
            .map(|(i, set)| {
                let members = set.iter().map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(";");
                format!("{}:{}", i + 1, members)
            })
            .collect::<Vec<_>>()
            .join("|");
        format!("{},{},{},{},{},{},{}", self.family, opt(p.ell), opt(p.scenario), s, t, violation, self.rhs)
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            f.write_str("0")?;
        }
        for (p, &(v, a)) in self.terms.iter().enumerate() {
            let mag = a.abs();
            match (p, a < 0.0) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if mag == 1.0 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag} {v}")?;
            }
        }
        write!(f, " >= {}", self.rhs)
    }
}

pub const CUT_LOG_HEADER: &str = "family,ell,scenario,S,Tsets,violation,rhs";

/// A candidate point in the variable space of any model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    /// `s[j][t]`; empty when the model has no inventory columns.
    pub s: Vec<Vec<f64>>,
    pub theta_prime: Vec<f64>,
    pub theta: Vec<f64>,
}

impl Point {
    pub fn new(x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> Self {
        Self { x, y, z, ..Self::default() }
    }

    /// Reads a column vector of `model` into named parts.
    pub fn from_model(model: &MipModel, values: &[f64]) -> Self {
        let (n, m) = (model.n(), model.m());
        let (x, y, z) = model.first_stage_values(values);
        let mut p = Self::new(x, y, z);
        if model.owns(VarRef::S(0, 0)) {
            p.s = (0..m).map(|j| (0..n).map(|t| model.value(values, VarRef::S(j, t))).collect()).collect();
        }
        if model.owns(VarRef::ThetaPrime(0)) {
            p.theta_prime = (0..n).map(|i| model.value(values, VarRef::ThetaPrime(i))).collect();
        }
        if model.owns(VarRef::ThetaScen(0)) {
            p.theta = (0..m).map(|j| model.value(values, VarRef::ThetaScen(j))).collect();
        }
        p
    }

    pub fn value(&self, var: VarRef) -> f64 {
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        match var {
            VarRef::X(i) => get(&self.x, i),
            VarRef::Y(i) => get(&self.y, i),
            VarRef::Z(j) => get(&self.z, j),
            VarRef::S(j, t) => self.s.get(j).map_or(0.0, |row| get(row, t)),
            VarRef::ThetaPrime(i) => get(&self.theta_prime, i),
            VarRef::ThetaScen(j) => get(&self.theta, j),
        }
    }
}

/// A subset of `T*_ell` kept in descending cumulative-demand order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixingSet {
    pub ell: usize,
    pub members: Vec<usize>,
}

impl MixingSet {
    /// Validates membership in `T*_ell` and sorts by rank.
    pub fn new(stats: &DemandStats, ell: usize, members: &[usize]) -> Result<Self, CutError> {
        if ell >= stats.n() {
            return Err(CutError::InvalidSpec(format!("period {} out of range", ell + 1)));
        }
        let mut ranked = Vec::with_capacity(members.len());
        for &j in members {
            if j >= stats.m() {
                return Err(CutError::InvalidSpec(format!("scenario {} out of range", j + 1)));
            }
            let r = stats.rank_of(ell, j);
            if r >= stats.k() {
                return Err(CutError::InvalidSpec(format!(
                    "scenario {} is not among the {} largest at period {}",
                    j + 1,
                    stats.k(),
                    ell + 1
                )));
            }
            ranked.push(r);
        }
        ranked.sort_unstable();
        ranked.dedup();
        if ranked.len() != members.len() {
            return Err(CutError::InvalidSpec("repeated scenario".into()));
        }
        let members = ranked.iter().map(|&r| stats.sigma_desc(ell)[r]).collect();
        Ok(Self { ell, members })
    }

    /// Demand of the chain head (`t(1)`, or the closing scenario when empty).
    pub fn head_demand(&self, stats: &DemandStats) -> f64 {
        let head = self.members.first().copied().unwrap_or_else(|| stats.closing(self.ell));
        stats.cum(head, self.ell)
    }

    /// Consecutive-difference coefficients of the chain.
    pub fn coefficients(&self, stats: &DemandStats) -> Vec<(usize, f64)> {
        chain_coefficients(stats, self.ell, &self.members)
    }
}

fn chain_coefficients(stats: &DemandStats, i: usize, chain: &[usize]) -> Vec<(usize, f64)> {
    let closing = stats.cum(stats.closing(i), i);
    (0..chain.len())
        .map(|p| {
            let next = chain.get(p + 1).map_or(closing, |&q| stats.cum(q, i));
            (chain[p], stats.cum(chain[p], i) - next)
        })
        .collect()
}

fn check_period(stats: &DemandStats, ell: usize) -> Result<(), CutError> {
    if ell >= stats.n() {
        return Err(CutError::InvalidSpec(format!("period {} out of range", ell + 1)));
    }
    Ok(())
}

fn check_subset(ell: usize, s: &[usize]) -> Result<Vec<usize>, CutError> {
    let mut s = s.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.iter().any(|&i| i > ell) {
        return Err(CutError::InvalidSpec(format!("S must lie within periods 1..={}", ell + 1)));
    }
    Ok(s)
}

/// Big-M `(ell, S)` inequality for a single scenario `j`.
pub fn ls_bigm_cut(stats: &DemandStats, j: usize, ell: usize, s: &[usize]) -> Result<Cut, CutError> {
    check_period(stats, ell)?;
    if j >= stats.m() {
        return Err(CutError::InvalidSpec(format!("scenario {} out of range", j + 1)));
    }
    let s = check_subset(ell, s)?;
    let total = stats.cum(j, ell);
    let mut terms = Vec::new();
    for i in 0..=ell {
        if s.binary_search(&i).is_ok() {
            terms.push((VarRef::Y(i), 1.0));
        } else {
            terms.push((VarRef::X(i), stats.range_demand(j, i, ell)));
        }
    }
    terms.push((VarRef::Z(j), total));
    let prov = Provenance { ell: Some(ell), scenario: Some(j), s, tsets: Vec::new() };
    Ok(Cut::new(Family::LsBigM, terms, total).with_provenance(prov))
}

pub fn mixing_cut(stats: &DemandStats, ms: &MixingSet) -> Cut {
    let mut terms: Vec<_> = (0..=ms.ell).map(|i| (VarRef::Y(i), 1.0)).collect();
    terms.extend(ms.coefficients(stats).into_iter().map(|(j, a)| (VarRef::Z(j), a)));
    let prov = Provenance {
        ell: Some(ms.ell),
        scenario: None,
        s: (0..=ms.ell).collect(),
        tsets: vec![(ms.ell, ms.members.clone())],
    };
    Cut::new(Family::Mixing, terms, ms.head_demand(stats)).with_provenance(prov)
}

/// Parameters of the hybrid inequality: a period `ell`, the set `S` of
/// periods whose production appears (period 0 always included), one chain
/// `T_{i-1}` for every period `i` outside `S`, and the chain `T_ell`.
#[derive(Debug, Clone, PartialEq)]
pub struct NewCutSpec {
    pub ell: usize,
    pub s: Vec<usize>,
    /// `T_{i-1}` keyed by `i` for each `i` in the complement of `S`.
    pub t_prev: BTreeMap<usize, Vec<usize>>,
    pub t_ell: Vec<usize>,
}

impl NewCutSpec {
    pub fn s_bar(&self) -> Vec<usize> {
        (0..=self.ell).filter(|i| !self.s.contains(i)).collect()
    }
}

pub fn new_cut(stats: &DemandStats, spec: &NewCutSpec) -> Result<Cut, CutError> {
    let ell = spec.ell;
    check_period(stats, ell)?;
    let s = check_subset(ell, &spec.s)?;
    if s.first() != Some(&0) {
        return Err(CutError::InvalidSpec("period 1 must belong to S".into()));
    }
    let s_bar: Vec<usize> = (0..=ell).filter(|i| s.binary_search(i).is_err()).collect();
    let top = stats.top(ell);
    let t_ell = MixingSet::new(stats, ell, &spec.t_ell)?;
    if stats.k() > 0 && t_ell.members.first() != Some(&top) {
        return Err(CutError::InvalidSpec(format!(
            "T_ell must contain scenario {}, the largest at period {}",
            top + 1,
            ell + 1
        )));
    }
    let d_top = stats.cum(top, ell);
    let mut alpha: BTreeMap<usize, f64> = BTreeMap::new();
    let mut bump = |j: usize, a: f64| {
        let e = alpha.entry(j).or_insert(0.0);
        *e = e.max(a);
    };
    for (j, a) in t_ell.coefficients(stats) {
        bump(j, a);
    }
    let mut terms: Vec<_> = s.iter().map(|&i| (VarRef::Y(i), 1.0)).collect();
    let mut tsets = Vec::new();
    for &i in &s_bar {
        let chain = spec.t_prev.get(&i).map_or(&[][..], |v| v.as_slice());
        let prev = MixingSet::new(stats, i - 1, chain)?;
        terms.push((VarRef::X(i), d_top - prev.head_demand(stats)));
        for (j, a) in prev.coefficients(stats) {
            bump(j, a);
        }
        tsets.push((i - 1, prev.members));
    }
    if let Some(extra) = spec.t_prev.keys().find(|i| s_bar.binary_search(i).is_err()) {
        return Err(CutError::InvalidSpec(format!("chain given for period {} which is in S", extra + 1)));
    }
    tsets.push((ell, t_ell.members));
    terms.extend(alpha.into_iter().map(|(j, a)| (VarRef::Z(j), a)));
    let prov = Provenance { ell: Some(ell), scenario: None, s, tsets };
    Ok(Cut::new(Family::New, terms, d_top).with_provenance(prov))
}

/// Inventory-based inequality for scenario `j` at the end of period `ell - 1`.
pub fn stock_cut(stats: &DemandStats, ell: usize, j: usize, t_ell: &MixingSet) -> Result<Cut, CutError> {
    check_period(stats, ell)?;
    if ell == 0 {
        return Err(CutError::InvalidSpec("stock inequalities start at period 2".into()));
    }
    if t_ell.ell != ell {
        return Err(CutError::InvalidSpec("chain period differs from ell".into()));
    }
    if j >= stats.m() {
        return Err(CutError::InvalidSpec(format!("scenario {} out of range", j + 1)));
    }
    let gap = t_ell.head_demand(stats) - stats.cum(j, ell - 1);
    let mut terms = vec![(VarRef::S(j, ell - 1), 1.0), (VarRef::X(ell), gap)];
    terms.extend(t_ell.coefficients(stats).into_iter().map(|(j, a)| (VarRef::Z(j), a)));
    let prov = Provenance {
        ell: Some(ell),
        scenario: Some(j),
        s: Vec::new(),
        tsets: vec![(ell, t_ell.members.clone())],
    };
    Ok(Cut::new(Family::Stock, terms, gap).with_provenance(prov))
}

/// `(ell, S)` inequality of the risk-free case, where the maximum cumulative
/// demand plays the role of a single scenario and period 0 may leave `S`.
pub fn hull_cut(stats: &DemandStats, ell: usize, s: &[usize]) -> Result<Cut, CutError> {
    if stats.k() != 0 {
        return Err(CutError::InvalidSpec("hull inequalities require k = 0".into()));
    }
    check_period(stats, ell)?;
    let s = check_subset(ell, s)?;
    let d_top = stats.cum(stats.top(ell), ell);
    let mut terms = Vec::new();
    for i in 0..=ell {
        if s.binary_search(&i).is_ok() {
            terms.push((VarRef::Y(i), 1.0));
        } else {
            let before = if i == 0 { 0.0 } else { stats.cum(stats.top(i - 1), i - 1) };
            terms.push((VarRef::X(i), d_top - before));
        }
    }
    let prov = Provenance { ell: Some(ell), scenario: None, s, tsets: Vec::new() };
    Ok(Cut::new(Family::New, terms, d_top).with_provenance(prov))
}

/// Minimum over chains `T` in `T*_i` of `-D_{t(1)} * x_next + sum alpha * z`,
/// with the attaining chain. The empty chain is headed by the closing scenario.
pub fn separate_mixing_free(stats: &DemandStats, i: usize, z: &[f64], x_next: f64) -> (f64, Vec<usize>) {
    let chains = ChainTable::new(stats, i, z);
    let mut best = -chains.d[chains.k] * x_next;
    let mut start = None;
    for p in 0..chains.k {
        let v = -chains.d[p] * x_next + chains.g[p];
        if v < best {
            best = v;
            start = Some(p);
        }
    }
    (best, chains.walk(stats, i, start))
}

/// Same minimum with the period's largest scenario forced to head the chain
/// (and no `x` term). With `k = 0` the chain is empty and the value is zero.
pub fn separate_mixing_anchored(stats: &DemandStats, i: usize, z: &[f64]) -> (f64, Vec<usize>) {
    let chains = ChainTable::new(stats, i, z);
    if chains.k == 0 {
        return (0.0, Vec::new());
    }
    (chains.g[0], chains.walk(stats, i, Some(0)))
}

/// `g[p]`: cheapest chain tail starting at rank `p`.
struct ChainTable {
    k: usize,
    d: Vec<f64>,
    g: Vec<f64>,
    next: Vec<Option<usize>>,
}

impl ChainTable {
    fn new(stats: &DemandStats, i: usize, z: &[f64]) -> Self {
        let k = stats.k();
        let order = stats.sigma_desc(i);
        let d: Vec<f64> = order[..=k].iter().map(|&j| stats.cum(j, i)).collect();
        let mut g = vec![0.0; k];
        let mut next = vec![None; k];
        for p in (0..k).rev() {
            let zp = z[order[p]];
            let mut best = (d[p] - d[k]) * zp;
            for q in p + 1..k {
                let v = (d[p] - d[q]) * zp + g[q];
                if v < best {
                    best = v;
                    next[p] = Some(q);
                }
            }
            g[p] = best;
        }
        Self { k, d, g, next }
    }

    fn walk(&self, stats: &DemandStats, i: usize, mut at: Option<usize>) -> Vec<usize> {
        let mut chain = Vec::new();
        while let Some(p) = at {
            chain.push(stats.sigma_desc(i)[p]);
            at = self.next[p];
        }
        chain
    }
}

/// Violated mixing inequalities, at most one per period.
pub fn separate_mixing(stats: &DemandStats, point: &Point) -> Vec<Cut> {
    (0..stats.n())
        .filter_map(|i| {
            let (_, chain) = separate_mixing_free(stats, i, &point.z, 1.0);
            let ms = MixingSet { ell: i, members: chain };
            let cut = mixing_cut(stats, &ms);
            cut.is_violated(point).then_some(cut)
        })
        .collect()
}

/// The hybrid inequality the separation heuristic picks for each period
/// `ell >= 1`, violated or not.
pub fn new_cut_candidates(stats: &DemandStats, point: &Point) -> Vec<(NewCutSpec, Cut)> {
    let n = stats.n();
    let free: Vec<(f64, Vec<usize>)> = (1..n)
        .map(|i| separate_mixing_free(stats, i - 1, &point.z, point.x[i]))
        .collect();
    let mut out = Vec::new();
    for ell in 1..n {
        let d_top = stats.cum(stats.top(ell), ell);
        let mut s = vec![0];
        let mut t_prev = BTreeMap::new();
        for i in 1..=ell {
            let (y_prev, chain) = &free[i - 1];
            if point.y[i] <= d_top * point.x[i] + y_prev {
                s.push(i);
            } else {
                t_prev.insert(i, chain.clone());
            }
        }
        let (_, t_ell) = separate_mixing_anchored(stats, ell, &point.z);
        let spec = NewCutSpec { ell, s, t_prev, t_ell };
        let cut = new_cut(stats, &spec).expect("separation builds legal specs");
        out.push((spec, cut));
    }
    out
}

pub fn separate_new(stats: &DemandStats, point: &Point) -> Vec<Cut> {
    new_cut_candidates(stats, point)
        .into_iter()
        .map(|(_, cut)| cut)
        .filter(|cut| cut.is_violated(point))
        .collect()
}

/// Stock inequalities for `j` = the largest scenario at `ell - 1`, one pass
/// over `ell = 1..n`.
pub fn separate_stock(stats: &DemandStats, point: &Point) -> Vec<Cut> {
    let mut out = Vec::new();
    if point.s.is_empty() {
        return out;
    }
    for ell in 1..stats.n() {
        let j = stats.top(ell - 1);
        let (_, chain) = separate_mixing_anchored(stats, ell, &point.z);
        let ms = MixingSet { ell, members: chain };
        let cut = stock_cut(stats, ell, j, &ms).expect("legal stock cut");
        if cut.is_violated(point) {
            out.push(cut);
        }
    }
    out
}

/// Most violated big-M `(ell, S)` inequality for every scenario and period.
pub fn separate_ls(stats: &DemandStats, point: &Point) -> Vec<Cut> {
    let mut out = Vec::new();
    for j in 0..stats.m() {
        for ell in 0..stats.n() {
            let total = stats.cum(j, ell);
            let mut lhs = total * point.z[j];
            let mut s = Vec::new();
            for i in 0..=ell {
                let dx = stats.range_demand(j, i, ell) * point.x[i];
                if point.y[i] <= dx {
                    s.push(i);
                    lhs += point.y[i];
                } else {
                    lhs += dx;
                }
            }
            if total - lhs > violation_tol(total) {
                out.push(ls_bigm_cut(stats, j, ell, &s).expect("legal (l,S) cut"));
            }
        }
    }
    out
}

/// Duplicate filter keyed on coefficients rounded to 1e-9.
#[derive(Debug, Default, Clone)]
pub struct CutPool {
    seen: HashSet<(Vec<(VarRef, i64)>, i64)>,
}

impl CutPool {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(cut: &Cut) -> (Vec<(VarRef, i64)>, i64) {
        let q = |v: f64| (v * 1e9).round() as i64;
        (cut.terms.iter().map(|&(v, a)| (v, q(a))).collect(), q(cut.rhs))
    }

    /// Returns `false` when an identical cut was inserted before.
    pub fn insert(&mut self, cut: &Cut) -> bool {
        self.seen.insert(Self::key(cut))
    }

    pub fn contains(&self, cut: &Cut) -> bool {
        self.seen.contains(&Self::key(cut))
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{example_instance, generate};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn stats() -> DemandStats {
        example_instance([50.0, 50.0], [5.0, 5.0], [1.0, 1.0]).stats()
    }

    fn brute(stats: &DemandStats, i: usize, z: &[f64], x_next: Option<f64>) -> f64 {
        let k = stats.k();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << k) {
            if x_next.is_none() && mask & 1 == 0 {
                continue;
            }
            let chain: Vec<usize> = (0..k).filter(|p| mask >> p & 1 == 1).map(|p| stats.sigma_desc(i)[p]).collect();
            let ms = MixingSet { ell: i, members: chain };
            let mut v: f64 = ms.coefficients(stats).iter().map(|&(j, a)| a * z[j]).sum();
            if let Some(x) = x_next {
                v -= ms.head_demand(stats) * x;
            }
            best = best.min(v);
        }
        if k == 0 && x_next.is_none() {
            best = 0.0;
        }
        best
    }

    #[test]
    fn table_ls_cut() {
        let cut = ls_bigm_cut(&stats(), 2, 1, &[0]).unwrap();
        assert_eq!(cut.terms, vec![(VarRef::X(1), 10.0), (VarRef::Y(0), 1.0), (VarRef::Z(2), 11.0)]);
        assert_eq!(cut.rhs, 11.0);
    }

    #[test]
    fn ls_with_full_s_is_demand_row() {
        let cut = ls_bigm_cut(&stats(), 1, 1, &[0, 1]).unwrap();
        assert_eq!(cut.terms, vec![(VarRef::Y(0), 1.0), (VarRef::Y(1), 1.0), (VarRef::Z(1), 9.0)]);
        assert_eq!(cut.rhs, 9.0);
    }

    #[test]
    fn table_mixing_cut() {
        let st = stats();
        let ms = MixingSet::new(&st, 0, &[4, 0]).unwrap();
        assert_eq!(ms.members, vec![0, 4]);
        let cut = mixing_cut(&st, &ms);
        assert_eq!(cut.terms, vec![(VarRef::Y(0), 1.0), (VarRef::Z(0), 2.0), (VarRef::Z(4), 1.0)]);
        assert_eq!(cut.rhs, 6.0);
    }

    #[test]
    fn empty_mixing_set_without_risk() {
        let inst = generate(2, 3, 0.0, 4).unwrap();
        let st = inst.stats();
        let cut = mixing_cut(&st, &MixingSet::new(&st, 1, &[]).unwrap());
        assert_eq!(cut.terms.len(), 2);
        assert_eq!(cut.rhs, st.cum(st.top(1), 1));
    }

    #[test]
    fn mixing_set_rejects_outsiders() {
        assert!(MixingSet::new(&stats(), 0, &[2]).is_err());
    }

    #[test]
    fn table_new_cut() {
        let st = stats();
        let spec = NewCutSpec {
            ell: 1,
            s: vec![0],
            t_prev: BTreeMap::from([(1, vec![0, 4])]),
            t_ell: vec![2, 3],
        };
        let cut = new_cut(&st, &spec).unwrap();
        assert_eq!(cut.to_string(), "5 x2 + y1 + 2 z1 + z3 + z4 + z5 >= 11");
    }

    #[test]
    fn new_cut_without_complement_is_mixing() {
        let st = stats();
        let spec = NewCutSpec { ell: 1, s: vec![0, 1], t_prev: BTreeMap::new(), t_ell: vec![2, 3] };
        let a = new_cut(&st, &spec).unwrap();
        let b = mixing_cut(&st, &MixingSet::new(&st, 1, &[2, 3]).unwrap());
        assert_eq!(a.terms, b.terms);
        assert_eq!(a.rhs, b.rhs);
    }

    #[test]
    fn new_cut_requires_first_period_in_s() {
        let st = stats();
        let spec = NewCutSpec {
            ell: 1,
            s: vec![1],
            t_prev: BTreeMap::from([(0, vec![])]),
            t_ell: vec![2],
        };
        assert!(new_cut(&st, &spec).is_err());
    }

    #[test]
    fn table_stock_cut() {
        let st = stats();
        let cut = stock_cut(&st, 1, 0, &MixingSet::new(&st, 1, &[2, 3]).unwrap()).unwrap();
        assert_eq!(cut.to_string(), "5 x2 + z3 + z4 + s1_1 >= 5");
    }

    #[test]
    fn stock_cut_with_zero_gap() {
        let inst = crate::Instance::new(0.0, vec![1.0; 2], vec![1.0; 2], vec![1.0; 2], vec![vec![4.0, 0.0]]).unwrap();
        let st = inst.stats();
        let cut = stock_cut(&st, 1, 0, &MixingSet::new(&st, 1, &[]).unwrap()).unwrap();
        assert_eq!(cut.rhs, 0.0);
        assert_eq!(cut.terms, vec![(VarRef::S(0, 0), 1.0)]);
    }

    #[test]
    fn table_stock_separation() {
        let st = stats();
        let mut point = Point::new(vec![1.0, 0.0], vec![6.0, 0.0], vec![0.0; 5]);
        point.s = vec![vec![0.0, 0.0]; 5];
        let cuts = separate_stock(&st, &point);
        assert_eq!(cuts.len(), 1);
        let cut = &cuts[0];
        assert_eq!(cut.coefficient(VarRef::S(0, 0)), 1.0);
        assert_eq!(cut.coefficient(VarRef::X(1)), 5.0);
        assert_eq!(cut.rhs, 5.0);
        assert!((cut.violation(&point) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn hull_cut_needs_zero_risk() {
        assert!(hull_cut(&stats(), 1, &[0]).is_err());
        let inst = generate(3, 4, 0.0, 2).unwrap();
        let st = inst.stats();
        let cut = hull_cut(&st, 2, &[1]).unwrap();
        let d = |i: usize| st.cum(st.top(i), i);
        assert_eq!(cut.coefficient(VarRef::X(0)), d(2));
        assert_eq!(cut.coefficient(VarRef::X(2)), d(2) - d(1));
        assert_eq!(cut.coefficient(VarRef::Y(1)), 1.0);
    }

    #[test]
    fn free_separation_examples() {
        let st = stats();
        let mut z = vec![0.0; 5];
        for &j in st.tstar(1) {
            z[j] = 1.0;
        }
        assert_eq!(separate_mixing_free(&st, 1, &z, 0.0), (0.0, vec![]));
        let (v, chain) = separate_mixing_free(&st, 1, &[0.0; 5], 1.0);
        assert_eq!(v, -11.0);
        assert_eq!(chain, vec![2]);
    }

    #[test]
    fn anchored_separation_examples() {
        let st = stats();
        assert_eq!(separate_mixing_anchored(&st, 1, &[0.0; 5]), (0.0, vec![2]));
        let mut z = vec![0.0; 5];
        z[2] = 1.0;
        let (v, chain) = separate_mixing_anchored(&st, 1, &z);
        assert_eq!(chain, vec![2, 3]);
        assert_eq!(v, 1.0);
    }

    #[test]
    fn separation_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for seed in 0..60 {
            let m = rng.gen_range(2..16);
            let eps = rng.gen_range(0.0..0.8);
            let inst = generate(3, m, eps, seed).unwrap();
            let st = inst.stats();
            for _ in 0..10 {
                let z: Vec<f64> = (0..m).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) }).collect();
                let x = rng.gen_range(0.0..1.0);
                let i = rng.gen_range(0..3);
                let (fv, fc) = separate_mixing_free(&st, i, &z, x);
                assert!((fv - brute(&st, i, &z, Some(x))).abs() < 1e-9);
                let ms = MixingSet::new(&st, i, &fc).unwrap();
                let direct: f64 = ms.coefficients(&st).iter().map(|&(j, a)| a * z[j]).sum::<f64>() - ms.head_demand(&st) * x;
                assert!((direct - fv).abs() < 1e-9);
                let (av, _) = separate_mixing_anchored(&st, i, &z);
                assert!((av - brute(&st, i, &z, None)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pool_suppresses_duplicates() {
        let st = stats();
        let a = mixing_cut(&st, &MixingSet::new(&st, 0, &[0]).unwrap());
        let mut pool = CutPool::new();
        assert!(pool.insert(&a));
        assert!(!pool.insert(&a.clone()));
        assert_eq!(pool.len(), 1);
    }

    #[test]
    fn log_line_format() {
        let cut = ls_bigm_cut(&stats(), 2, 1, &[0]).unwrap();
        assert_eq!(cut.log_line(1.5), "LS_BIGM,2,3,1,,1.5,11");
    }
}
