//! Acceptance checks, one PASS/FAIL line each. Runs as a plain binary so the
//! lines show up in `cargo test` output; exits nonzero if any check fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spls_core::benders::{solve_benders, subproblem_dual, TraceRow};
use spls_core::cuts::{mixing_cut, Cut, Family, MixingSet};
use spls_core::formulation::{build, build_compact, build_dep, Formulation, RowKind, VarRef};
use spls_core::instance::generate;
use spls_core::lp::{solve_lp, LinearProgram, Row, Sense};
use spls_core::oracle::{brute_force_optimum, pattern_count, validate_cut, Space, PATTERN_GUARD};
use spls_core::solver::{solve, CutConfig, RootLoop, SolveOptions, SolveStatus};
use spls_core::suites::{
    facets_suite, hull_suite, instance_with_k, random_point, separation_suite, small_demand_config,
    table_instance, table_new_cut, table_stock_cut, validity_suite, SuiteReport,
};
use spls_core::Instance;

const EQUIV_TOL: f64 = 1e-6;
const DUAL_TOL: f64 = 1e-9;
const DOMINANCE_TOL: f64 = 1e-9;
const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn from_suite(r: &SuiteReport) -> Outcome {
    let mut detail = r.summary();
    for note in &r.notes {
        detail.push_str(&format!("\n    note: {note}"));
    }
    for f in r.failures.iter().take(3) {
        detail.push_str(&format!("\n    failure: {}\n    instance: {}", f.detail, f.instance));
    }
    Outcome::new(r.passed(), detail)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn same_terms(cut: &Cut, expected: &[(VarRef, f64)], rhs: f64) -> bool {
    let mut got: Vec<(VarRef, f64)> = cut.terms.iter().copied().filter(|t| t.1 != 0.0).collect();
    let mut want = expected.to_vec();
    got.sort_by_key(|t| t.0);
    want.sort_by_key(|t| t.0);
    got == want && cut.rhs == rhs
}

fn golden() -> Outcome {
    let inst = table_instance();
    let eq7 = table_new_cut(&inst);
    let eq7_ok = same_terms(
        &eq7,
        &[
            (VarRef::Y(0), 1.0),
            (VarRef::X(1), 5.0),
            (VarRef::Z(0), 2.0),
            (VarRef::Z(2), 1.0),
            (VarRef::Z(3), 1.0),
            (VarRef::Z(4), 1.0),
        ],
        11.0,
    );
    let stock = table_stock_cut(&inst);
    let stock_ok = same_terms(
        &stock,
        &[(VarRef::S(0, 0), 1.0), (VarRef::X(1), 5.0), (VarRef::Z(2), 1.0), (VarRef::Z(3), 1.0)],
        5.0,
    );
    let compact = build_compact(&inst);
    let mut lines = Vec::new();
    for r in compact.rows() {
        if let RowKind::Envelope { period: 1, .. } = r.kind {
            let coef = |v| {
                let col = compact.column(v).expect("column");
                r.row.coeffs.iter().filter(|c| c.0 == col).map(|c| c.1).sum::<f64>()
            };
            lines.push((coef(VarRef::ThetaPrime(1)), coef(VarRef::Y(0)), coef(VarRef::Y(1)), r.row.rhs));
        }
    }
    let want = vec![(1.0, -5.0, -5.0, -46.0), (1.0, -4.0, -4.0, -35.0), (1.0, -3.0, -3.0, -25.0)];
    let env_ok = lines == want;
    Outcome::new(
        eq7_ok && stock_ok && env_ok,
        format!("new: {eq7}; stock: {stock}; theta'2 rows {lines:?}"),
    )
}

struct EquivRun {
    inst: Instance,
    dep: f64,
    compact: f64,
    benders: f64,
    trace: Vec<TraceRow>,
    brute: Option<f64>,
}

fn equivalence_runs() -> Vec<Result<EquivRun, String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let limit = Duration::from_secs(120);
    let opts = SolveOptions::with_time_limit(limit);
    let cfg = CutConfig::default();
    (0..50)
        .map(|_| {
            let n = rng.gen_range(2..=8);
            let m = rng.gen_range(2..=30);
            let eps = [0.0, 0.05, 0.1, 0.15, 0.2][rng.gen_range(0..5)];
            let inst = generate(n, m, eps, rng.gen()).map_err(|e| e.to_string())?;
            let run = |f| -> Result<f64, String> {
                let r = solve(&build(&inst, f), &cfg, &opts).map_err(|e| e.to_string())?;
                if r.status != SolveStatus::Optimal {
                    return Err(format!("{f} ended {}", r.status.name()));
                }
                Ok(r.objective)
            };
            let dep = run(Formulation::Dep)?;
            let compact = run(Formulation::Compact)?;
            let b = solve_benders(&inst, &cfg, limit).map_err(|e| e.to_string())?;
            if b.report.status != SolveStatus::Optimal {
                return Err(format!("benders ended {}", b.report.status.name()));
            }
            let brute = if pattern_count(n, m, inst.k()) <= PATTERN_GUARD {
                Some(brute_force_optimum(&inst).map_err(|e| e.to_string())?.objective)
            } else {
                None
            };
            Ok(EquivRun { inst, dep, compact, benders: b.report.objective, trace: b.trace, brute })
        })
        .collect()
}

fn equivalence(runs: &[Result<EquivRun, String>]) -> Outcome {
    let mut bad = Vec::new();
    let mut brute_checked = 0;
    for (idx, r) in runs.iter().enumerate() {
        match r {
            Err(e) => bad.push(format!("#{idx}: {e}")),
            Ok(r) => {
                if !rel_close(r.dep, r.compact, EQUIV_TOL) || !rel_close(r.dep, r.benders, EQUIV_TOL) {
                    bad.push(format!("#{idx}: dep {} compact {} benders {}", r.dep, r.compact, r.benders));
                }
                if let Some(b) = r.brute {
                    brute_checked += 1;
                    if !rel_close(r.dep, b, EQUIV_TOL) {
                        bad.push(format!("#{idx}: dep {} brute force {b}\n    instance: {}", r.dep, r.inst.to_json()));
                    }
                }
            }
        }
    }
    Outcome::new(
        bad.is_empty(),
        format!("{} instances, {brute_checked} against brute force; {}", runs.len(), bad.join("; ")),
    )
}

fn inventory_lp(inst: &Instance, j: usize, y: &[f64]) -> f64 {
    let mut lp = LinearProgram::new();
    let (mut prod, mut dem) = (0.0, 0.0);
    for t in 0..y.len() {
        let s = lp.add_column(0.0, f64::INFINITY, inst.holding_cost()[t]);
        prod += y[t];
        dem += inst.demand()[j][t];
        lp.add_row(Row::new(vec![(s, 1.0)], Sense::Ge, prod - dem));
    }
    solve_lp(&lp).expect("bounded").objective
}

fn benders_mechanics(runs: &[Result<EquivRun, String>]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let n = rng.gen_range(1..=8);
        let inst = generate(n, rng.gen_range(1..=10), 0.0, rng.gen()).expect("legal");
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..60.0)).collect();
        let j = rng.gen_range(0..inst.m());
        let d = subproblem_dual(&inst, j, &y);
        worst = worst.max((d.value - inventory_lp(&inst, j, &y)).abs());
    }
    let mut non_monotone = 0;
    let mut mismatch = 0;
    let mut iters = 0;
    for r in runs.iter().flatten() {
        iters += r.trace.len();
        if r.trace.windows(2).any(|w| w[1].master_obj < w[0].master_obj - EQUIV_TOL * (1.0 + w[0].master_obj.abs())) {
            non_monotone += 1;
        }
        if !rel_close(r.benders, r.dep, EQUIV_TOL) {
            mismatch += 1;
        }
    }
    Outcome::new(
        worst <= DUAL_TOL && non_monotone == 0 && mismatch == 0 && runs.iter().all(|r| r.is_ok()),
        format!(
            "max |dual - lp| {worst:.2e} over 500 points; {iters} master iterations, {non_monotone} non-monotone traces, {mismatch} value mismatches"
        ),
    )
}

/// Mixing inequality on `T_ell` lifted to period `ell + 1` with an empty
/// chain there and `x_{ell+1}` carrying the demand step.
fn lifted_mixing(stats: &spls_core::DemandStats, ms: &MixingSet) -> Cut {
    let ell = ms.ell;
    let base = mixing_cut(stats, ms);
    let next = stats.cum(stats.sigma_desc(ell + 1)[stats.k()], ell + 1);
    let top = stats.cum(stats.sigma_desc(ell)[0], ell);
    let mut terms = base.terms.clone();
    terms.push((VarRef::X(ell + 1), next - top));
    Cut::new(Family::New, terms, next)
}

fn dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let cfg = small_demand_config();
    let (mut found, mut worst, mut invalid, mut tries) = (0, f64::INFINITY, 0, 0);
    while found < 20 && tries < 10_000 {
        tries += 1;
        let n = rng.gen_range(2..=6);
        let m = rng.gen_range(3..=12);
        let k = rng.gen_range(1..=3.min(m - 1));
        let inst = instance_with_k(&cfg, n, m, k, rng.gen());
        let st = inst.stats();
        let Some(ell) = (0..n - 1).find(|&l| st.cum(st.sigma_desc(l + 1)[k], l + 1) >= st.cum(st.sigma_desc(l)[0], l))
        else {
            continue;
        };
        found += 1;
        let mut members = vec![st.sigma_desc(ell)[0]];
        members.extend(st.tstar(ell)[1..].iter().filter(|_| rng.gen_bool(0.5)));
        let ms = MixingSet::new(&st, ell, &members).expect("legal");
        let eq5 = mixing_cut(&st, &ms);
        let eq9 = lifted_mixing(&st, &ms);
        if !validate_cut(&inst, &eq9, Space::P).map(|v| v.valid).unwrap_or(false) {
            invalid += 1;
        }
        for _ in 0..100 {
            let p = random_point(&st, &mut rng, false);
            worst = worst.min(eq5.slack(&p) - eq9.slack(&p));
        }
    }
    Outcome::new(
        found == 20 && worst >= -DOMINANCE_TOL && invalid == 0,
        format!("{found} instances ({tries} drawn), min slack difference {worst:.3e}, {invalid} lifted cuts invalid"),
    )
}

fn scale() -> Outcome {
    let (n, m, eps) = (10, 500, 0.05);
    let first = generate(n, m, eps, 0).expect("legal");
    let k = first.k();
    let count = |model: &spls_core::formulation::MipModel, f: fn(RowKind) -> bool| {
        model.rows().iter().filter(|r| f(r.kind)).count()
    };
    let env = count(&build_compact(&first), |k| matches!(k, RowKind::Envelope { .. }));
    let inv = count(&build_dep(&first), |k| matches!(k, RowKind::Inventory { .. }));
    let counts_ok = env == n * (k + 1) && inv == n * m;
    let mut detail = format!("(a) compact {env} rows = n(k+1) = {}, dep {inv} rows = nm = {}", n * (k + 1), n * m);

    let mut worse = 0;
    let mixing = CutConfig::only(&[Family::Mixing]);
    let both = CutConfig::only(&[Family::Mixing, Family::New]);
    let opts = SolveOptions::with_time_limit(Duration::from_secs(60));
    let (mut gap_mix, mut gap_both, mut compact_time, mut solved) = (0.0, 0.0, 0.0, 0);
    for seed in 0..10 {
        let inst = generate(n, m, eps, seed).expect("legal");
        let model = build_compact(&inst);
        let mut root = RootLoop::new(&model);
        let (Ok(Some(b_mix)), Ok(Some(b_both))) = (root.run(&mixing), root.run(&both)) else {
            worse += 1;
            continue;
        };
        if b_both < b_mix - 1e-6 * (1.0 + b_mix.abs()) {
            worse += 1;
        }
        let t = Instant::now();
        let best = solve(&model, &CutConfig::default(), &opts);
        compact_time += t.elapsed().as_secs_f64();
        match best {
            Ok(r) if r.status == SolveStatus::Optimal => {
                solved += 1;
                gap_mix += 100.0 * (r.objective - b_mix) / r.objective;
                gap_both += 100.0 * (r.objective - b_both) / r.objective;
            }
            Ok(r) => detail.push_str(&format!("\n    seed {seed}: compact {} after 60s", r.status.name())),
            Err(e) => detail.push_str(&format!("\n    seed {seed}: compact failed: {e}")),
        }
    }
    let solved_f = solved.max(1) as f64;
    let (gap_mix, gap_both) = (gap_mix / solved_f, gap_both / solved_f);
    let cap = Duration::from_secs(20);
    let t = Instant::now();
    let dep = solve(&build_dep(&first), &CutConfig::default(), &SolveOptions::with_time_limit(cap));
    let dep_time = t.elapsed().as_secs_f64();
    let dep_status = match dep {
        Ok(r) => r.status.name().to_string(),
        Err(e) => e.to_string(),
    };
    detail.push_str(&format!(
        "\n    (b) mean root gap over {solved} solved: mixing {gap_mix:.3}% vs mixing+new {gap_both:.3}%, {worse} of 10 bounds worse\n    wall time: compact mean {:.2}s, dep seed 0 {dep_time:.2}s ({dep_status}, capped at {}s)",
        compact_time / 10.0,
        cap.as_secs()
    ));
    Outcome::new(counts_ok && worse == 0, detail)
}

fn main() {
    let mut failed = 0;
    let mut report = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("criterion {id} {name}: {verdict} ({:.1}s) {}", t.elapsed().as_secs_f64(), o.detail);
    };
    let suite = |r: Result<SuiteReport, spls_core::OracleError>| match r {
        Ok(r) => from_suite(&r),
        Err(e) => Outcome::new(false, e.to_string()),
    };

    report(1, "golden-coefficients", &mut golden);
    report(2, "validity", &mut || suite(validity_suite(200, SEED)));
    let t = Instant::now();
    let runs = equivalence_runs();
    let elapsed = t.elapsed().as_secs_f64();
    report(3, "formulation-equivalence", &mut || {
        let mut o = equivalence(&runs);
        o.detail.push_str(&format!(" solved in {elapsed:.1}s"));
        o
    });
    report(4, "separation-exactness", &mut || suite(separation_suite(1000, 200, SEED)));
    report(5, "convex-hull", &mut || suite(hull_suite(10, 100, SEED)));
    report(6, "dominance", &mut dominance);
    report(7, "benders-mechanics", &mut || benders_mechanics(&runs));
    report(8, "facets", &mut || suite(facets_suite(12, SEED)));
    report(9, "scale-directional", &mut scale);

    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
