use std::sync::Arc;

use super::common::{dot, lin, project_out, scaled, Ops};
use super::{FluxScalars, ModelParams, MultiSymplecticSystem, ReducedScheme};
use crate::flux::FluxSpec;
use crate::mesh_basis::DgSpace;
use crate::operators::BlockOperator;
use crate::{Error, Result};

/// `u_t = -ε² D_0 D_{-α2} D_{α2} u - (η/2) D_0 Π u²`.
///
/// Only `α1 = 0` is supported; the auxiliary `φ` is then `D_0^{-1} u`.
pub struct KdvScheme {
    system: MultiSymplecticSystem,
    flux: FluxSpec,
    scalars: FluxScalars,
    ops: Ops,
    eta: f64,
    eps: f64,
    dp: BlockOperator,
    dm: BlockOperator,
}

impl KdvScheme {
    pub fn new(system: MultiSymplecticSystem, space: Arc<DgSpace>, flux: FluxSpec, scalars: FluxScalars) -> Result<Self> {
        let (eta, eps) = match &system.params {
            ModelParams::Kdv { eta, eps } => (*eta, *eps),
            _ => unreachable!("kdv scheme for another model"),
        };
        if scalars.alpha1 != 0.0 {
            return Err(Error::InvalidConfig(
                "the reduced KdV scheme requires alpha1 = 0".into(),
            ));
        }
        let ops = Ops::new(space)?;
        let dp = ops.d(scalars.alpha2);
        let dm = ops.d(-scalars.alpha2);
        Ok(KdvScheme {
            system,
            flux,
            scalars,
            ops,
            eta,
            eps,
            dp,
            dm,
        })
    }

    /// `g = ε² D_{-α2} D_{α2} u + (η/2) Π u²`, so that `u_t = -D_0 g`.
    fn g(&self, u: &[f64]) -> Vec<f64> {
        let lin_part = self.ops.apply(&self.dm, &self.ops.apply(&self.dp, u));
        let sq = self.ops.space.product(&[u, u]);
        lin(self.eps * self.eps, &lin_part, 0.5 * self.eta, &sq)
    }

    fn dg(&self, u: &[f64], du: &[f64]) -> Vec<f64> {
        let lin_part = self.ops.apply(&self.dm, &self.ops.apply(&self.dp, du));
        let pr = self.ops.space.product(&[u, du]);
        lin(self.eps * self.eps, &lin_part, self.eta, &pr)
    }
}

impl ReducedScheme for KdvScheme {
    fn system(&self) -> &MultiSymplecticSystem {
        &self.system
    }

    fn space(&self) -> &Arc<DgSpace> {
        &self.ops.space
    }

    fn flux(&self) -> &FluxSpec {
        &self.flux
    }

    fn scalars(&self) -> &FluxScalars {
        &self.scalars
    }

    fn n_state_fields(&self) -> usize {
        1
    }

    fn rhs(&self, _t: f64, s: &[f64]) -> Result<Vec<f64>> {
        Ok(scaled(-1.0, &self.ops.apply(&self.ops.d0, &self.g(s))))
    }

    fn tangent_rhs(&self, s: &[f64], ds: &[f64]) -> Result<Vec<f64>> {
        Ok(scaled(-1.0, &self.ops.apply(&self.ops.d0, &self.dg(s, ds))))
    }

    fn reconstruct(&self, s: &[f64], s_t: &[f64]) -> Result<Vec<Vec<f64>>> {
        let phi = self.ops.pinv(s);
        let v = scaled(self.eps, &self.ops.apply(&self.dp, s));
        let w = lin(0.5, &self.ops.pinv(s_t), 1.0, &self.g(s));
        Ok(vec![phi, s.to_vec(), v, w])
    }

    fn reconstruct_linearized(&self, s: &[f64], _s_t: &[f64], ds: &[f64], ds_t: &[f64]) -> Result<Vec<Vec<f64>>> {
        let phi = self.ops.pinv(ds);
        let v = scaled(self.eps, &self.ops.apply(&self.dp, ds));
        let w = lin(0.5, &self.ops.pinv(ds_t), 1.0, &self.dg(s, ds));
        Ok(vec![phi, ds.to_vec(), v, w])
    }

    fn energy(&self, s: &[f64]) -> Result<f64> {
        let v = scaled(self.eps, &self.ops.apply(&self.dp, s));
        let cubic = self.ops.space.integrate_pointwise(&[s], |z| z[0].powi(3));
        Ok(self.eta / 6.0 * cubic - 0.5 * dot(&v, &v))
    }

    fn auxiliary(&self, s: &[f64]) -> Result<Vec<f64>> {
        Ok(self.ops.apply(&self.dp, s))
    }

    fn constrain_state(&self, s: &mut [f64]) {
        project_out(s, &self.ops.consistency_vectors(false));
    }
}
