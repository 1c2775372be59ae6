//! Textbook two-phase dense tableau simplex with Bland's rule, used only as a
//! reference for the bounded-variable engine. Requires finite lower bounds.

use spls_core::lp::{LinearProgram, Sense};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TableauResult {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

pub fn tableau_solve(lp: &LinearProgram) -> TableauResult {
    let n = lp.num_cols();
    let lower: Vec<f64> = lp.columns().iter().map(|c| c.lower).collect();
    assert!(lower.iter().all(|l| l.is_finite()));
    let shift: f64 = lp.columns().iter().map(|c| c.cost * c.lower).sum();

    // rows over shifted variables x' = x - l >= 0: (coeffs, kind, rhs)
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
    for r in lp.rows() {
        let mut a = vec![0.0; n];
        let mut rhs = r.rhs;
        for &(j, v) in &r.coeffs {
            a[j] += v;
            rhs -= v * lower[j];
        }
        rows.push((a, r.sense, rhs));
    }
    for (j, c) in lp.columns().iter().enumerate() {
        if c.upper.is_finite() {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            rows.push((a, Sense::Le, c.upper - c.lower));
        }
    }
    for row in rows.iter_mut() {
        if row.2 < 0.0 {
            for v in row.0.iter_mut() {
                *v = -*v;
            }
            row.2 = -row.2;
            row.1 = match row.1 {
                Sense::Ge => Sense::Le,
                Sense::Le => Sense::Ge,
                Sense::Eq => Sense::Eq,
            };
        }
    }
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let width = n + n_slack + n_art + 1;
    let mut t = vec![vec![0.0; width]; m];
    let mut basis = vec![0usize; m];
    let mut s_idx = n;
    let mut a_idx = n + n_slack;
    let art_start = n + n_slack;
    for (i, (a, sense, rhs)) in rows.iter().enumerate() {
        t[i][..n].copy_from_slice(a);
        t[i][width - 1] = *rhs;
        match sense {
            Sense::Le => {
                t[i][s_idx] = 1.0;
                basis[i] = s_idx;
                s_idx += 1;
            }
            Sense::Ge => {
                t[i][s_idx] = -1.0;
                s_idx += 1;
                t[i][a_idx] = 1.0;
                basis[i] = a_idx;
                a_idx += 1;
            }
            Sense::Eq => {
                t[i][a_idx] = 1.0;
                basis[i] = a_idx;
                a_idx += 1;
            }
        }
    }
    let mut phase1 = vec![0.0; width - 1];
    for v in phase1.iter_mut().skip(art_start) {
        *v = 1.0;
    }
    match run(&mut t, &mut basis, &phase1, width - 1) {
        Outcome::Optimal => {}
        Outcome::Unbounded => unreachable!("phase one is bounded"),
    }
    let infeas: f64 = (0..m)
        .filter(|&i| basis[i] >= art_start)
        .map(|i| t[i][width - 1])
        .sum();
    if infeas > 1e-7 {
        return TableauResult::Infeasible;
    }
    // Drive zero-level artificials out where possible, then forbid them.
    for i in 0..m {
        if basis[i] >= art_start {
            if let Some(j) = (0..art_start).find(|&j| t[i][j].abs() > 1e-9) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }
    let mut cost = vec![0.0; width - 1];
    for (j, c) in lp.columns().iter().enumerate() {
        cost[j] = c.cost;
    }
    match run(&mut t, &mut basis, &cost, art_start) {
        Outcome::Unbounded => TableauResult::Unbounded,
        Outcome::Optimal => {
            let mut obj = shift;
            for i in 0..m {
                if basis[i] < n {
                    obj += cost[basis[i]] * t[i][width - 1];
                }
            }
            TableauResult::Optimal(obj)
        }
    }
}

enum Outcome {
    Optimal,
    Unbounded,
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, q: usize) {
    let p = t[r][q];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r {
            let f = row[q];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
            }
        }
    }
    basis[r] = q;
}

/// Bland's rule over columns `0..allowed`.
fn run(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], allowed: usize) -> Outcome {
    let m = t.len();
    let rhs = t.first().map_or(0, |r| r.len() - 1);
    loop {
        let mut entering = None;
        for j in 0..allowed {
            if basis.contains(&j) {
                continue;
            }
            let mut d = cost[j];
            for i in 0..m {
                d -= cost[basis[i]] * t[i][j];
            }
            if d < -1e-9 {
                entering = Some(j);
                break;
            }
        }
        let Some(q) = entering else {
            return Outcome::Optimal;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][q] > 1e-9 {
                let ratio = t[i][rhs] / t[i][q];
                let better = match leave {
                    None => true,
                    Some((li, lr)) => ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && basis[i] < basis[li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        match leave {
            None => return Outcome::Unbounded,
            Some((r, _)) => pivot(t, basis, r, q),
        }
    }
}
