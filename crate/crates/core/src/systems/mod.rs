//! Model catalogue: descriptors, reduced semi-discrete schemes, discrete energies and
//! reference profiles.

mod bbm;
mod bbm_kdv;
mod ch;
mod common;
pub mod exact;
mod kdv;
mod model;
mod nls;
mod wave;

use std::sync::Arc;

pub use bbm::BbmScheme;
pub use bbm_kdv::BbmKdvScheme;
pub use ch::ChScheme;
pub use exact::{cnoidal_period, elliptic_k, jacobi_cn, jacobi_sn_cn_dn, Profile, Wave};
pub use kdv::KdvScheme;
pub use model::{
    flux_presets, flux_spec, make_system, FluxPreset, FluxScalars, ModelKind, ModelParams,
    MultiSymplecticSystem, Potential, FLUX_SCALAR_CAP,
};
pub use nls::NlsScheme;
pub use wave::WaveScheme;

use crate::flux::FluxSpec;
use crate::mesh_basis::{DgSpace, Mesh1D};
use crate::Result;

/// What the auxiliary output field approximates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuxKind {
    /// `u_x`.
    Derivative,
    /// The imaginary part `q`.
    Imaginary,
}

/// A semi-discrete scheme after elimination of the auxiliary variables.
///
/// The state holds one or two DG fields (`u`; `(u, u_t)` for the wave equation;
/// `(p, q)` for NLS). The full `m`-component DG solution is recovered from the state
/// and its time derivative by [`ReducedScheme::reconstruct`]. Components on the support
/// of `M` and `B` depend linearly on the state alone.
pub trait ReducedScheme: Send + Sync {
    fn system(&self) -> &MultiSymplecticSystem;
    fn space(&self) -> &Arc<DgSpace>;
    fn flux(&self) -> &FluxSpec;
    fn scalars(&self) -> &FluxScalars;

    /// Number of evolved DG fields.
    fn n_state_fields(&self) -> usize;

    fn state_len(&self) -> usize {
        self.n_state_fields() * self.space().ndof()
    }

    /// `ds/dt` at time `t` (the time only enters through sources).
    fn rhs(&self, t: f64, s: &[f64]) -> Result<Vec<f64>>;

    /// Directional derivative of the source-free right-hand side at `s` along `ds`.
    fn tangent_rhs(&self, s: &[f64], ds: &[f64]) -> Result<Vec<f64>>;

    /// The `m` DG fields of the full scheme.
    fn reconstruct(&self, s: &[f64], s_t: &[f64]) -> Result<Vec<Vec<f64>>>;

    /// Derivative of [`reconstruct`](Self::reconstruct) at `(s, s_t)` along `(ds, ds_t)`.
    fn reconstruct_linearized(&self, s: &[f64], s_t: &[f64], ds: &[f64], ds_t: &[f64]) -> Result<Vec<Vec<f64>>>;

    /// The conserved discrete energy.
    fn energy(&self, s: &[f64]) -> Result<f64>;

    /// The field compared against `u`.
    fn primary<'a>(&self, s: &'a [f64]) -> &'a [f64] {
        &s[..self.space().ndof()]
    }

    fn auxiliary(&self, s: &[f64]) -> Result<Vec<f64>>;

    fn aux_kind(&self) -> AuxKind {
        AuxKind::Derivative
    }

    fn charge(&self, _s: &[f64]) -> Option<f64> {
        None
    }

    /// Projects a state (or tangent) onto the set on which the reduced scheme and the
    /// full DG system coincide.
    fn constrain_state(&self, _s: &mut [f64]) {}

    /// Non-fatal remarks produced while building the scheme.
    fn warnings(&self) -> &[String] {
        &[]
    }

    /// Initial state from a profile.
    fn initial_state(&self, profile: &Profile, t: f64) -> Vec<f64> {
        let sp = self.space();
        let mut s = sp.project_fn(|x| profile.value(x, t));
        match self.system().kind() {
            ModelKind::Wave => s.extend(sp.project_fn(|x| profile.dt(x, t))),
            ModelKind::Nls => s.extend(sp.project_fn(|x| profile.imag(x, t))),
            _ => {}
        }
        s
    }
}

/// Product-quadrature degree needed by a model.
pub(crate) fn product_degree(params: &ModelParams) -> usize {
    match params {
        ModelParams::Wave { potential } => potential.degree().saturating_sub(1).max(3),
        _ => 3,
    }
}

/// Builds the reduced scheme on a fresh space with the model's default quadrature.
pub fn build_reduced_scheme(
    params: &ModelParams,
    mesh: Arc<Mesh1D>,
    k: usize,
    flux: &FluxScalars,
) -> Result<Box<dyn ReducedScheme>> {
    let space = Arc::new(DgSpace::with_product_degree(mesh, k, product_degree(params))?);
    build_reduced_scheme_on(params, space, flux)
}

/// Builds the reduced scheme on a given space.
pub fn build_reduced_scheme_on(
    params: &ModelParams,
    space: Arc<DgSpace>,
    flux: &FluxScalars,
) -> Result<Box<dyn ReducedScheme>> {
    let system = make_system(params)?;
    let spec = flux_spec(&system, flux)?;
    Ok(match params {
        ModelParams::Wave { .. } => Box::new(WaveScheme::new(system, space, spec, *flux)?),
        ModelParams::Kdv { .. } => Box::new(KdvScheme::new(system, space, spec, *flux)?),
        ModelParams::Bbm { .. } => Box::new(BbmScheme::new(system, space, spec, *flux)?),
        ModelParams::Ch { .. } => Box::new(ChScheme::new(system, space, spec, *flux)?),
        ModelParams::Nls { .. } => Box::new(NlsScheme::new(system, space, spec, *flux)?),
        ModelParams::BbmKdv { .. } => Box::new(BbmKdvScheme::new(system, space, spec, *flux)?),
    })
}
