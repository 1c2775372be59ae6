//! Fixtures shared by the criterion benches.

use spls_core::cuts::Point;
use spls_core::formulation::{build, Formulation};
use spls_core::instance::generate;
use spls_core::solver::{CutConfig, RootLoop};
use spls_core::Instance;

/// Desk-scale instance with the default generator distributions.
pub fn instance(n: usize, m: usize, eps: f64) -> Instance {
    generate(n, m, eps, 7).expect("legal parameters")
}

/// Optimal point of the compact model's LP relaxation, before any cuts.
pub fn root_point(inst: &Instance) -> Point {
    let model = build(inst, Formulation::Compact);
    let mut root = RootLoop::new(&model);
    root.run(&CutConfig::none()).expect("root LP solves");
    Point::from_model(&model, root.values())
}
