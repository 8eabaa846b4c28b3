//! 2D incompressible flow under a rigid lid with wind forcing, solved on a
//! staggered MAC grid, with three interchangeable transport closures:
//! direct simulation, the Leray-alpha model and a deconvolution model that
//! evolves the Helmholtz-filtered velocity in a pseudo-time towards the
//! unfiltered one.
//!
//! See the `examples/` directory for runnable entry points covering each
//! capability; the `deconv-les` binary wraps the same machinery behind
//! `simulate`, `oracle` and `compare` subcommands.

pub mod diag;
pub mod error;
pub mod field;
pub mod filter;
pub mod grid;
pub mod oracle;
pub mod output;
pub mod scenario;
pub mod solver;
pub mod stepper;
pub mod wind;

pub use error::{Error, Result};
pub use field::{Loc, ScalarField, VelocityField};
pub use filter::{DeconvParams, FilterParams, ModelKind};
pub use grid::{build_grid, Grid, GridSpec};
pub use scenario::Scenario;
pub use solver::SolverParams;
pub use wind::{build_psi, LiftField, WindStress};
