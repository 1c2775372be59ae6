use std::time::Duration;

use spls_core::cuts::Family;
use spls_core::formulation::{build, Formulation};
use spls_core::instance::{example_instance, generate, generate_with};
use spls_core::oracle::brute_force_optimum;
use spls_core::solver::{root_gap, solve, CutConfig, RootLoop, SolveOptions, SolveStatus};
use spls_core::GeneratorConfig;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn opts() -> SolveOptions {
    SolveOptions::with_time_limit(Duration::from_secs(60))
}

#[test]
fn example_one_matches_enumeration() {
    let inst = example_instance([50.0, 50.0], [5.0, 5.0], [1.0, 1.0]);
    let bf = brute_force_optimum(&inst).unwrap();
    for f in [Formulation::Dep, Formulation::Compact] {
        let model = build(&inst, f);
        let rep = solve(&model, &CutConfig::default(), &opts()).unwrap();
        assert_eq!(rep.status, SolveStatus::Optimal);
        assert!(rel(rep.objective, bf.objective) < 1e-6, "{f}: {} vs {}", rep.objective, bf.objective);
    }
}

#[test]
fn random_small_instances_match_enumeration() {
    for seed in 0..25u64 {
        let n = 2 + (seed % 4) as usize;
        let m = 3 + (seed % 6) as usize;
        let eps = [0.0, 0.1, 0.2, 0.3][(seed % 4) as usize];
        let inst = generate(n, m, eps, seed).unwrap();
        let bf = brute_force_optimum(&inst).unwrap();
        for f in [Formulation::Dep, Formulation::Compact] {
            let model = build(&inst, f);
            for cfg in [CutConfig::none(), CutConfig::default()] {
                let rep = solve(&model, &cfg, &opts()).unwrap();
                assert_eq!(rep.status, SolveStatus::Optimal, "seed {seed} {f} {}", cfg.label());
                assert!(
                    rel(rep.objective, bf.objective) < 1e-6,
                    "seed {seed} {f} {}: {} vs {}",
                    cfg.label(),
                    rep.objective,
                    bf.objective
                );
                assert!(rep.bound <= rep.objective + 1e-6 * rep.objective.abs().max(1.0));
            }
        }
    }
}

#[test]
fn risk_free_with_all_families() {
    let cfg = CutConfig { ls: true, ..CutConfig::default() };
    for seed in 0..10u64 {
        let inst = generate(4, 6, 0.0, seed).unwrap();
        let bf = brute_force_optimum(&inst).unwrap();
        let rep = solve(&build(&inst, Formulation::Dep), &cfg, &opts()).unwrap();
        assert!(rel(rep.objective, bf.objective) < 1e-6);
    }
}

#[test]
fn root_gap_arithmetic() {
    assert!((root_gap(200.0, 150.0) - 25.0).abs() < 1e-12);
    assert_eq!(root_gap(0.0, 0.0), 0.0);
}

#[test]
fn report_json_shape() {
    let inst = example_instance([50.0, 50.0], [5.0, 5.0], [1.0, 1.0]);
    let rep = solve(&build(&inst, Formulation::Dep), &CutConfig::default(), &opts()).unwrap();
    let v = rep.to_json();
    for key in ["status", "objective", "bound", "nodes", "root_lp", "root_gap_pct", "cuts", "time_sec"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["status"], "optimal");
    assert!(v["cuts"].is_object());
}

#[test]
fn root_bound_never_drops_when_families_are_added() {
    let cfg = GeneratorConfig::default();
    for seed in 0..5u64 {
        let inst = generate_with(&cfg, 6, 40, 0.1, seed).unwrap();
        let model = build(&inst, Formulation::Compact);
        let mut root = RootLoop::new(&model);
        let plain = root.run(&CutConfig::none()).unwrap().unwrap();
        let mixing = root.run(&CutConfig::only(&[Family::Mixing])).unwrap().unwrap();
        let both = root.run(&CutConfig::only(&[Family::Mixing, Family::New])).unwrap().unwrap();
        assert!(mixing >= plain - 1e-7 * plain.abs().max(1.0));
        assert!(both >= mixing - 1e-7 * mixing.abs().max(1.0));
    }
}

