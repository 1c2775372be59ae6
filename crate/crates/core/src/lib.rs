//! Models, valid inequalities, and certifiers for the static probabilistic
//! lot-sizing problem with finitely many equiprobable demand scenarios.

pub mod benders;
pub mod cuts;
pub mod error;
pub mod instance;
pub mod formulation;
pub mod lp;
pub mod oracle;
pub mod solver;
pub mod suites;

pub use error::{CutError, InstanceError, LpError, OracleError, SolveError};
pub use instance::{DemandStats, GeneratorConfig, Instance};
