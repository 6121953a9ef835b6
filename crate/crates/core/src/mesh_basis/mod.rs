//! Meshes, quadrature, the modal basis and DG fields.

mod function;
mod legendre;
mod mesh;
mod quadrature;
mod space;

pub use function::{DgFunction, Side};
pub use legendre::{legendre, legendre_with_derivative};
pub use mesh::{Mesh1D, MeshPattern};
pub use quadrature::{gauss_legendre, QuadratureRule};
pub use space::DgSpace;
