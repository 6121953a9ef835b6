//! Weak derivatives, jump lifts, operator algebra and factorized solvers.

mod assemble;
mod block;
mod solver;

pub use assemble::{assemble_d, assemble_l, d_kernel};
pub use block::{BandedOperator, BlockOperator};
pub use solver::{DeflatedSolver, LinearSolver, CONSISTENCY_TOL, SINGULAR_TOL};
