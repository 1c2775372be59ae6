//! Brute-force certifiers: global optimum by enumeration, cut validity by LP,
//! exhaustive separation, integrality of the risk-free hull, and tight-point
//! rank for facet spot checks.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cuts::{hull_cut, new_cut, Cut, NewCutSpec, Point};
use crate::error::OracleError;
use crate::formulation::VarRef;
use crate::instance::{DemandStats, Instance};
use crate::lp::{solve_lp, LinearProgram, LpStatus, Row, Sense, Simplex};

pub const PATTERN_GUARD: u128 = 1_000_000;
pub const SEPARATION_K_GUARD: usize = 15;
pub const HULL_N_GUARD: usize = 6;
pub const RANK_TOL: f64 = 1e-7;

const INTEGRAL_TOL: f64 = 1e-6;

/// Number of `(x, z)` patterns with at most `k` violated scenarios.
pub fn pattern_count(n: usize, m: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for q in 0..=k.min(m) {
        if q > 0 {
            binom = binom * (m - q + 1) as u128 / q as u128;
        }
        total = total.saturating_add(binom);
    }
    if n >= 100 {
        return u128::MAX;
    }
    total.saturating_mul(1u128 << n)
}

fn guard(inst: &Instance) -> Result<(), OracleError> {
    let count = pattern_count(inst.n(), inst.m(), inst.k());
    if count > PATTERN_GUARD {
        return Err(OracleError::TooLarge(format!(
            "{count} patterns for n={}, m={}, k={}",
            inst.n(),
            inst.m(),
            inst.k()
        )));
    }
    Ok(())
}

/// All subsets of `items` with at most `k` elements, in lexicographic order.
fn subsets_up_to(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if cur.len() == k {
            return;
        }
        for p in start..items.len() {
            cur.push(items[p]);
            rec(items, k, p + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::new(), &mut out);
    out
}

fn cumulative(inst: &Instance) -> Vec<Vec<f64>> {
    inst.demand()
        .iter()
        .map(|row| {
            let mut acc = 0.0;
            row.iter()
                .map(|d| {
                    acc += d;
                    acc
                })
                .collect()
        })
        .collect()
}

/// Cumulative production needed in each period when the scenarios in
/// `violated` may go unmet.
fn requirement(cum: &[Vec<f64>], violated: &[usize]) -> Vec<f64> {
    let n = cum.first().map_or(0, Vec::len);
    let mut req = vec![0.0f64; n];
    for (j, row) in cum.iter().enumerate() {
        if violated.contains(&j) {
            continue;
        }
        for (r, d) in req.iter_mut().zip(row) {
            *r = r.max(*d);
        }
    }
    req
}

fn req_key(req: &[f64]) -> Vec<u64> {
    req.iter().map(|v| v.to_bits()).collect()
}

fn opened(mask: u64, i: usize) -> bool {
    mask >> i & 1 == 1
}

/// Whether every positive requirement has an open period at or before it.
fn coverable(mask: u64, req: &[f64]) -> bool {
    let mut any_open = false;
    for (t, r) in req.iter().enumerate() {
        any_open |= opened(mask, t);
        if *r > 0.0 && !any_open {
            return false;
        }
    }
    true
}

fn big_m(cum: &[Vec<f64>]) -> Vec<f64> {
    let n = cum.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            cum.iter()
                .map(|row| row[n - 1] - if i == 0 { 0.0 } else { row[i - 1] })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// A binary first-stage pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub x: Vec<bool>,
    pub z: Vec<bool>,
}

impl Pattern {
    fn build(n: usize, m: usize, mask: u64, violated: &[usize]) -> Self {
        Self {
            x: (0..n).map(|i| opened(mask, i)).collect(),
            z: (0..m).map(|j| violated.contains(&j)).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BruteForce {
    pub objective: f64,
    pub pattern: Pattern,
    pub y: Vec<f64>,
}

/// Exact optimum of the deterministic equivalent by enumerating `(x, z)`.
///
/// Patterns that leave the requirement vector unchanged give the same LP, so
/// each distinct requirement is solved once per `x`.
pub fn brute_force_optimum(inst: &Instance) -> Result<BruteForce, OracleError> {
    guard(inst)?;
    let (n, m, k) = (inst.n(), inst.m(), inst.k());
    let cum = cumulative(inst);
    let bigm = big_m(&cum);
    let mut groups: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    let mut seen = HashMap::new();
    for z in subsets_up_to(&(0..m).collect::<Vec<_>>(), k) {
        let req = requirement(&cum, &z);
        seen.entry(req_key(&req)).or_insert_with(|| {
            groups.push((req, z));
            groups.len() - 1
        });
    }
    let f = inst.setup_cost();
    let c = inst.unit_cost();
    let h = inst.holding_cost();
    let prune = h.iter().chain(c).all(|&v| v >= 0.0);
    let mut best: Option<BruteForce> = None;
    for mask in 0..1u64 << n {
        let setup: f64 = (0..n).filter(|&i| opened(mask, i)).map(|i| f[i]).sum();
        if best.as_ref().is_some_and(|b| setup > b.objective) {
            continue;
        }
        for (req, z) in &groups {
            if !coverable(mask, req) {
                continue;
            }
            if prune && best.as_ref().is_some_and(|b| setup + greedy_y(c, mask, req) > b.objective + 1e-9) {
                continue;
            }
            let mut lp = LinearProgram::new();
            let y: Vec<usize> = (0..n)
                .map(|i| lp.add_column(0.0, if opened(mask, i) { bigm[i] } else { 0.0 }, c[i]))
                .collect();
            for (t, r) in req.iter().enumerate() {
                if *r > 0.0 {
                    lp.add_row(Row::new(y[..=t].iter().map(|&v| (v, 1.0)).collect(), Sense::Ge, *r));
                }
            }
            for (t, &ht) in h.iter().enumerate() {
                if ht == 0.0 {
                    continue;
                }
                for row in &cum {
                    let s = lp.add_column(0.0, f64::INFINITY, ht / m as f64);
                    let mut coeffs = vec![(s, 1.0)];
                    coeffs.extend(y[..=t].iter().map(|&v| (v, -1.0)));
                    lp.add_row(Row::new(coeffs, Sense::Ge, -row[t]));
                }
            }
            let sol = solve_lp(&lp)?;
            if sol.status != LpStatus::Optimal {
                continue;
            }
            let total = setup + sol.objective;
            if best.as_ref().is_none_or(|b| total < b.objective) {
                best = Some(BruteForce {
                    objective: total,
                    pattern: Pattern::build(n, m, mask, z),
                    y: y.iter().map(|&v| sol.primal[v]).collect(),
                });
            }
        }
    }
    best.ok_or_else(|| OracleError::Unsupported("no feasible pattern".into()))
}

/// Variable space in which validity is certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// `(x, y, z)`.
    P,
    /// `(x, y, z, s)` with `s_jt >= max(0, Y_t - D_jt)`.
    PPlus,
}

#[derive(Debug, Clone)]
pub struct ValidityVerdict {
    pub valid: bool,
    pub worst_slack: f64,
    /// Pattern attaining the worst slack; `None` when every pattern is infeasible.
    pub witness: Option<Pattern>,
}

pub fn validity_tol(rhs: f64) -> f64 {
    1e-6 * (1.0 + rhs.abs())
}

pub fn validate_cut(inst: &Instance, cut: &Cut, space: Space) -> Result<ValidityVerdict, OracleError> {
    validate_cuts(inst, std::slice::from_ref(cut), space).map(|mut v| v.remove(0))
}

struct Split {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<((usize, usize), f64)>,
}

fn split(cut: &Cut, n: usize, m: usize, space: Space) -> Result<Split, OracleError> {
    let mut sp = Split { x: vec![0.0; n], y: vec![0.0; n], z: vec![0.0; m], s: Vec::new() };
    for &(var, a) in &cut.terms {
        match var {
            VarRef::X(i) if i < n => sp.x[i] = a,
            VarRef::Y(i) if i < n => sp.y[i] = a,
            VarRef::Z(j) if j < m => sp.z[j] = a,
            VarRef::S(j, t) if space == Space::PPlus && j < m && t < n => sp.s.push(((j, t), a)),
            other => {
                return Err(OracleError::Unsupported(format!("variable {other} in cut {cut}")));
            }
        }
    }
    Ok(sp)
}

/// Min of `sum a_i y_i` over `Y_t >= req_t` with `y` only in open periods,
/// for nonnegative `a`: every increment of the requirement is bought at the
/// cheapest open period so far.
fn greedy_y(a: &[f64], mask: u64, req: &[f64]) -> f64 {
    let mut cheapest = f64::INFINITY;
    let mut prev = 0.0;
    let mut total = 0.0;
    for (t, r) in req.iter().enumerate() {
        if opened(mask, t) {
            cheapest = cheapest.min(a[t]);
        }
        let inc = r - prev;
        if inc > 0.0 {
            total += inc * cheapest;
        }
        prev = prev.max(*r);
    }
    total
}

fn lp_y(sp: &Split, mask: u64, req: &[f64], cum: &[Vec<f64>], bigm: &[f64]) -> Result<f64, OracleError> {
    let n = req.len();
    let mut lp = LinearProgram::new();
    let y: Vec<usize> = (0..n)
        .map(|i| lp.add_column(0.0, if opened(mask, i) { bigm[i] } else { 0.0 }, sp.y[i]))
        .collect();
    for (t, r) in req.iter().enumerate() {
        if *r > 0.0 {
            lp.add_row(Row::new(y[..=t].iter().map(|&v| (v, 1.0)).collect(), Sense::Ge, *r));
        }
    }
    for &((j, t), a) in &sp.s {
        let s = lp.add_column(0.0, f64::INFINITY, a);
        let mut coeffs = vec![(s, 1.0)];
        coeffs.extend(y[..=t].iter().map(|&v| (v, -1.0)));
        lp.add_row(Row::new(coeffs, Sense::Ge, -cum[j][t]));
    }
    let sol = solve_lp(&lp)?;
    Ok(match sol.status {
        LpStatus::Optimal => sol.objective,
        LpStatus::Unbounded => f64::NEG_INFINITY,
        LpStatus::Infeasible => f64::INFINITY,
    })
}

/// Certifies each cut over every pattern with at most `k` violated scenarios.
pub fn validate_cuts(inst: &Instance, cuts: &[Cut], space: Space) -> Result<Vec<ValidityVerdict>, OracleError> {
    guard(inst)?;
    let (n, m, k) = (inst.n(), inst.m(), inst.k());
    let cum = cumulative(inst);
    let bigm = big_m(&cum);
    let splits = cuts.iter().map(|c| split(c, n, m, space)).collect::<Result<Vec<_>, _>>()?;

    // per requirement vector: the cheapest z-part of each cut and its pattern
    let mut groups: Vec<(Vec<f64>, Vec<(f64, Vec<usize>)>)> = Vec::new();
    let mut index = HashMap::new();
    for z in subsets_up_to(&(0..m).collect::<Vec<_>>(), k) {
        let req = requirement(&cum, &z);
        let g = *index.entry(req_key(&req)).or_insert_with(|| {
            groups.push((req, vec![(f64::INFINITY, Vec::new()); cuts.len()]));
            groups.len() - 1
        });
        for (c, sp) in splits.iter().enumerate() {
            let v: f64 = z.iter().map(|&j| sp.z[j]).sum();
            let slot = &mut groups[g].1[c];
            if v < slot.0 {
                *slot = (v, z.clone());
            }
        }
    }

    let mut verdicts: Vec<ValidityVerdict> = cuts
        .iter()
        .map(|_| ValidityVerdict { valid: true, worst_slack: f64::INFINITY, witness: None })
        .collect();
    for mask in 0..1u64 << n {
        for (req, zbest) in &groups {
            if !coverable(mask, req) {
                continue;
            }
            for (c, sp) in splits.iter().enumerate() {
                let xpart: f64 = (0..n).filter(|&i| opened(mask, i)).map(|i| sp.x[i]).sum();
                let ypart = if sp.s.is_empty() && sp.y.iter().all(|&a| a >= 0.0) {
                    greedy_y(&sp.y, mask, req)
                } else {
                    lp_y(sp, mask, req, &cum, &bigm)?
                };
                let slack = xpart + ypart + zbest[c].0 - cuts[c].rhs;
                let v = &mut verdicts[c];
                if slack < v.worst_slack {
                    v.worst_slack = slack;
                    v.witness = Some(Pattern::build(n, m, mask, &zbest[c].1));
                }
            }
        }
    }
    for (v, cut) in verdicts.iter_mut().zip(cuts) {
        v.valid = v.worst_slack >= -validity_tol(cut.rhs);
    }
    Ok(verdicts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeparationVariant {
    /// Chains may be empty; the head demand multiplies the given `x` value.
    Free { x_next: f64 },
    /// Chains must contain the largest scenario; no `x` term.
    Anchored,
}

/// Exhaustive minimum of the mixing separation objective over subsets of `T*_i`.
/// Returns the value and the minimizing subset in descending demand order.
pub fn brute_force_separation(
    stats: &DemandStats,
    i: usize,
    z: &[f64],
    variant: SeparationVariant,
) -> Result<(f64, Vec<usize>), OracleError> {
    let k = stats.k();
    if k > SEPARATION_K_GUARD {
        return Err(OracleError::TooLarge(format!("k = {k} exceeds {SEPARATION_K_GUARD}")));
    }
    if k == 0 && variant == SeparationVariant::Anchored {
        return Ok((0.0, Vec::new()));
    }
    let order = stats.sigma_desc(i);
    let d = |p: usize| stats.cum(order[p], i);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 0u32..1 << k {
        if matches!(variant, SeparationVariant::Anchored) && mask & 1 == 0 {
            continue;
        }
        let ranks: Vec<usize> = (0..k).filter(|p| mask >> p & 1 == 1).collect();
        let mut value = 0.0;
        for (q, &p) in ranks.iter().enumerate() {
            let next = ranks.get(q + 1).copied().unwrap_or(k);
            value += (d(p) - d(next)) * z[order[p]];
        }
        if let SeparationVariant::Free { x_next } = variant {
            value -= d(ranks.first().copied().unwrap_or(k)) * x_next;
        }
        if best.as_ref().is_none_or(|b| value < b.0) {
            best = Some((value, ranks.iter().map(|&p| order[p]).collect()));
        }
    }
    Ok(best.expect("at least one subset"))
}

/// The most violated NEW inequality over every `(ell, S, T-sets)` choice.
/// Returns the smallest slack with its specification.
pub fn brute_force_new_separation(
    stats: &DemandStats,
    point: &Point,
) -> Result<Option<(f64, NewCutSpec)>, OracleError> {
    let k = stats.k();
    if k > SEPARATION_K_GUARD {
        return Err(OracleError::TooLarge(format!("k = {k} exceeds {SEPARATION_K_GUARD}")));
    }
    let mut best: Option<(f64, NewCutSpec)> = None;
    for ell in 1..stats.n() {
        let chains = |i: usize| -> Vec<Vec<usize>> {
            subsets_up_to(stats.tstar(i), k)
                .into_iter()
                .map(|mut t| {
                    t.sort_by_key(|&j| stats.rank_of(i, j));
                    t
                })
                .collect()
        };
        let ell_chains: Vec<Vec<usize>> = if k == 0 {
            vec![Vec::new()]
        } else {
            chains(ell).into_iter().filter(|t| t.first() == Some(&stats.top(ell))).collect()
        };
        for mask in 0u64..1 << ell {
            let s: Vec<usize> = std::iter::once(0).chain((1..=ell).filter(|i| mask >> (i - 1) & 1 == 1)).collect();
            let s_bar: Vec<usize> = (1..=ell).filter(|i| !s.contains(i)).collect();
            let options: Vec<Vec<Vec<usize>>> = s_bar.iter().map(|&i| chains(i - 1)).collect();
            let mut pick = vec![0usize; s_bar.len()];
            loop {
                for t_ell in &ell_chains {
                    let spec = NewCutSpec {
                        ell,
                        s: s.clone(),
                        t_prev: s_bar
                            .iter()
                            .enumerate()
                            .map(|(pos, &i)| (i, options[pos][pick[pos]].clone()))
                            .collect(),
                        t_ell: t_ell.clone(),
                    };
                    let cut = new_cut(stats, &spec).map_err(|e| OracleError::Unsupported(e.to_string()))?;
                    let slack = cut.slack(point);
                    if best.as_ref().is_none_or(|b| slack < b.0) {
                        best = Some((slack, spec));
                    }
                }
                // odometer over the chain choices
                let mut pos = 0;
                while pos < pick.len() {
                    pick[pos] += 1;
                    if pick[pos] < options[pos].len() {
                        break;
                    }
                    pick[pos] = 0;
                    pos += 1;
                }
                if pos == pick.len() {
                    break;
                }
            }
        }
    }
    Ok(best)
}

/// `T*_{p-1} ∩ T*_{q-1} ∩ T*_ell` is empty for all `p != q` in `1..=ell`.
pub fn triple_disjoint(stats: &DemandStats) -> bool {
    for ell in 1..stats.n() {
        for p in 1..=ell {
            for q in p + 1..=ell {
                let hit = stats.tstar(p - 1).iter().any(|j| {
                    stats.tstar(q - 1).contains(j) && stats.tstar(ell).contains(j)
                });
                if hit {
                    return false;
                }
            }
        }
    }
    true
}

/// The top-k sets of all periods are pairwise disjoint.
pub fn tstar_pairwise_disjoint(stats: &DemandStats) -> bool {
    let mut seen = vec![false; stats.m()];
    for i in 0..stats.n() {
        for &j in stats.tstar(i) {
            if seen[j] {
                return false;
            }
            seen[j] = true;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullReport {
    pub trials: usize,
    pub fractional_trials: usize,
    pub max_fractionality: f64,
}

impl HullReport {
    pub fn integral(&self) -> bool {
        self.fractional_trials == 0
    }
}

/// Solves the risk-free relaxation under random nonnegative costs and counts
/// the trials whose optimal `x` is fractional. With `with_cuts`, every
/// `(ell, S)` inequality is present.
pub fn hull_integrality_check(
    inst: &Instance,
    with_cuts: bool,
    trials: usize,
    seed: u64,
) -> Result<HullReport, OracleError> {
    if inst.k() != 0 {
        return Err(OracleError::Unsupported("hull check needs k = 0".into()));
    }
    let n = inst.n();
    if n > HULL_N_GUARD {
        return Err(OracleError::TooLarge(format!("n = {n} exceeds {HULL_N_GUARD}")));
    }
    let stats = inst.stats();
    let cum = cumulative(inst);
    let bigm = big_m(&cum);
    let mut lp = LinearProgram::new();
    let x: Vec<usize> = (0..n).map(|_| lp.add_column(0.0, 1.0, 0.0)).collect();
    let y: Vec<usize> = (0..n).map(|_| lp.add_column(0.0, f64::INFINITY, 0.0)).collect();
    for row in &cum {
        for t in 0..n {
            lp.add_row(Row::new(y[..=t].iter().map(|&v| (v, 1.0)).collect(), Sense::Ge, row[t]));
        }
    }
    for i in 0..n {
        lp.add_row(Row::new(vec![(y[i], 1.0), (x[i], -bigm[i])], Sense::Le, 0.0));
    }
    if with_cuts {
        for ell in 0..n {
            for mask in 0u64..1 << (ell + 1) {
                let s: Vec<usize> = (0..=ell).filter(|i| mask >> i & 1 == 1).collect();
                let cut = hull_cut(&stats, ell, &s).map_err(|e| OracleError::Unsupported(e.to_string()))?;
                let coeffs = cut
                    .terms
                    .iter()
                    .map(|&(v, a)| match v {
                        VarRef::X(i) => (x[i], a),
                        VarRef::Y(i) => (y[i], a),
                        _ => unreachable!("hull cuts use x and y only"),
                    })
                    .collect();
                lp.add_row(Row::new(coeffs, Sense::Ge, cut.rhs));
            }
        }
    }
    let mut spx = Simplex::new(&lp);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = HullReport { trials, fractional_trials: 0, max_fractionality: 0.0 };
    for _ in 0..trials {
        for (rank, &col) in x.iter().chain(&y).enumerate() {
            let base: f64 = if col < n { rng.gen_range(0.0..100.0) } else { rng.gen_range(0.0..10.0) };
            // tiny lexicographic tilt so ties pick a unique vertex
            spx.set_cost(col, base + 1e-9 * (rank + 1) as f64)?;
        }
        if spx.solve()? != LpStatus::Optimal {
            return Err(OracleError::Unsupported("risk-free relaxation not optimal".into()));
        }
        let frac = x
            .iter()
            .map(|&c| {
                let v = spx.values()[c];
                v.min(1.0 - v).max(0.0)
            })
            .fold(0.0, f64::max);
        report.max_fractionality = report.max_fractionality.max(frac);
        if frac > INTEGRAL_TOL {
            report.fractional_trials += 1;
        }
    }
    Ok(report)
}

/// Number of affinely independent points among `points`, by fully pivoted
/// elimination on the differences to the first point.
pub fn affine_rank(points: &[Vec<f64>]) -> usize {
    let Some(first) = points.first() else {
        return 0;
    };
    let mut rows: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(first).map(|(a, b)| a - b).collect())
        .collect();
    let cols = first.len();
    let scale = rows.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let tol = RANK_TOL * scale;
    let mut rank = 0;
    let mut col_used = vec![false; cols];
    while rank < rows.len() {
        let mut piv = None;
        let mut best = tol;
        for (r, row) in rows.iter().enumerate().skip(rank) {
            for (c, v) in row.iter().enumerate() {
                if !col_used[c] && v.abs() > best {
                    best = v.abs();
                    piv = Some((r, c));
                }
            }
        }
        let Some((r, c)) = piv else { break };
        rows.swap(rank, r);
        col_used[c] = true;
        let pivot_row = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            let f = row[c] / pivot_row[c];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
        rank += 1;
    }
    rank + 1
}

#[derive(Debug, Clone)]
pub struct RankReport {
    /// Affinely independent tight points found.
    pub rank: usize,
    /// Affinely independent points of the whole polyhedron found by the
    /// same sampling; one more than its dimension when the sample is rich.
    pub polyhedron_rank: usize,
    pub tight_points: usize,
}

impl RankReport {
    /// True when the tight points span a face of codimension one.
    pub fn facet_confirmed(&self, dim: usize) -> bool {
        self.rank == dim && self.polyhedron_rank == dim + 1
    }
}

/// Samples tight points of `cut` by optimizing random directions over the
/// face inside every binary pattern; `budget` directions per pattern, each
/// minimized and maximized.
pub fn tight_point_rank(
    inst: &Instance,
    cut: &Cut,
    space: Space,
    budget: usize,
    seed: u64,
) -> Result<RankReport, OracleError> {
    guard(inst)?;
    let (n, m, k) = (inst.n(), inst.m(), inst.k());
    let cum = cumulative(inst);
    let bigm = big_m(&cum);
    let sp = split(cut, n, m, space)?;
    let with_s = space == Space::PPlus;
    let s_cap = cum.iter().map(|r| r[n - 1]).fold(0.0, f64::max) + 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all = Vec::new();
    let mut tight = Vec::new();

    for mask in 0..1u64 << n {
        for z in subsets_up_to(&(0..m).collect::<Vec<_>>(), k) {
            let req = requirement(&cum, &z);
            if !coverable(mask, &req) {
                continue;
            }
            let mut lp = LinearProgram::new();
            let y: Vec<usize> = (0..n)
                .map(|i| lp.add_column(0.0, if opened(mask, i) { bigm[i] } else { 0.0 }, 0.0))
                .collect();
            for (t, r) in req.iter().enumerate() {
                if *r > 0.0 {
                    lp.add_row(Row::new(y[..=t].iter().map(|&v| (v, 1.0)).collect(), Sense::Ge, *r));
                }
            }
            let mut s_cols = Vec::new();
            if with_s {
                for (j, row) in cum.iter().enumerate() {
                    for t in 0..n {
                        let s = lp.add_column(0.0, s_cap, 0.0);
                        let mut coeffs = vec![(s, 1.0)];
                        coeffs.extend(y[..=t].iter().map(|&v| (v, -1.0)));
                        lp.add_row(Row::new(coeffs, Sense::Ge, -row[t]));
                        s_cols.push(((j, t), s));
                    }
                }
            }
            let fixed: f64 = (0..n).filter(|&i| opened(mask, i)).map(|i| sp.x[i]).sum::<f64>()
                + z.iter().map(|&j| sp.z[j]).sum::<f64>();
            let mut face_coeffs: Vec<(usize, f64)> =
                y.iter().zip(&sp.y).filter(|(_, a)| **a != 0.0).map(|(&v, &a)| (v, a)).collect();
            for &((j, t), a) in &sp.s {
                let col = s_cols.iter().find(|(key, _)| *key == (j, t)).expect("s column").1;
                face_coeffs.push((col, a));
            }
            let face_row = Row::new(face_coeffs, Sense::Eq, cut.rhs - fixed);

            let point_of = |vals: &[f64]| -> Vec<f64> {
                let mut p: Vec<f64> = (0..n).map(|i| if opened(mask, i) { 1.0 } else { 0.0 }).collect();
                p.extend(y.iter().map(|&v| vals[v]));
                p.extend((0..m).map(|j| if z.contains(&j) { 1.0 } else { 0.0 }));
                p.extend(s_cols.iter().map(|&(_, c)| vals[c]));
                p
            };
            let ncols = lp.num_cols();
            let sample = |lp: &LinearProgram, out: &mut Vec<Vec<f64>>, rng: &mut ChaCha8Rng| -> Result<(), OracleError> {
                let mut spx = Simplex::new(lp);
                for _ in 0..budget {
                    let dir: Vec<f64> = (0..ncols).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    for sign in [1.0, -1.0] {
                        for (c, d) in dir.iter().enumerate() {
                            spx.set_cost(c, sign * d)?;
                        }
                        match spx.solve()? {
                            LpStatus::Optimal => out.push(point_of(spx.values())),
                            LpStatus::Infeasible => return Ok(()),
                            LpStatus::Unbounded => {}
                        }
                    }
                }
                Ok(())
            };
            sample(&lp, &mut all, &mut rng)?;
            lp.add_row(face_row);
            sample(&lp, &mut tight, &mut rng)?;
        }
    }
    Ok(RankReport {
        rank: affine_rank(&dedup(tight.clone())),
        polyhedron_rank: affine_rank(&dedup(all)),
        tight_points: tight.len(),
    })
}

fn dedup(mut points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let key = |p: &Vec<f64>| p.iter().map(|v| (v * 1e7).round() as i64).collect::<Vec<_>>();
    let mut seen = std::collections::HashSet::new();
    points.retain(|p| seen.insert(key(p)));
    points
}
