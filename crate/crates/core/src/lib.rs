//! Discontinuous Galerkin discretizations of multi-symplectic Hamiltonian PDEs
//! `M z_t + K z_x = ∇S(z)` on periodic 1D meshes.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh_basis`]: meshes, Gauss–Legendre quadrature, the orthonormal modal basis,
//!   projections and norms.
//! * [`operators`]: the weak derivative `D_α`, the jump lift `L`, block-banded operator
//!   algebra and factorized solvers (including deflated inverses on the range of `D_α`).
//! * [`flux`]: the numerical flux family `K{z} + A[z] + B[z]_t` and its interface identities.
//! * [`systems`]: the model catalogue (wave, KdV, BBM, Camassa–Holm, NLS, BBM–KdV) with
//!   reduced semi-discrete right-hand sides, auxiliary reconstruction and discrete energies.
//! * [`time_integration`]: explicit Runge–Kutta tableaus and a filtered SSPRK3 stepper.
//! * [`verification`]: pointwise checks of the discrete multi-symplectic and energy laws.
//! * [`harness`]: configuration-driven convergence studies, simulations and sweeps.

pub mod error;
pub mod flux;
pub mod harness;
pub mod mesh_basis;
pub mod operators;
pub mod parallel;
pub mod systems;
pub mod time_integration;
pub mod verification;

pub use error::{Error, Result};
