use std::sync::Arc;

use super::common::{dot, lin, project_out, Ops};
use super::{FluxScalars, ModelParams, MultiSymplecticSystem, ReducedScheme};
use crate::flux::FluxSpec;
use crate::mesh_basis::DgSpace;
use crate::operators::LinearSolver;
use crate::Result;

/// BBM–KdV with central fluxes: `(I - σD_0²) u_t = D_0 (ν D_0² u + Π V'(u))`, `V = a u³`.
pub struct BbmKdvScheme {
    system: MultiSymplecticSystem,
    flux: FluxSpec,
    scalars: FluxScalars,
    ops: Ops,
    sigma: f64,
    nu: f64,
    a: f64,
    helmholtz: LinearSolver,
}

impl BbmKdvScheme {
    pub fn new(system: MultiSymplecticSystem, space: Arc<DgSpace>, flux: FluxSpec, scalars: FluxScalars) -> Result<Self> {
        let (sigma, nu, a) = match &system.params {
            ModelParams::BbmKdv { sigma, nu, v_cubic } => (*sigma, *nu, *v_cubic),
            _ => unreachable!("bbm_kdv scheme for another model"),
        };
        let ops = Ops::new(space)?;
        let helmholtz = ops.helmholtz(sigma)?;
        Ok(BbmKdvScheme {
            system,
            flux,
            scalars,
            ops,
            sigma,
            nu,
            a,
            helmholtz,
        })
    }

    /// `g = ν D_0² u + nonlinear`.
    fn g(&self, u: &[f64], nonlinear: &[f64]) -> Vec<f64> {
        let d2 = self.ops.apply(&self.ops.d0, &self.ops.apply(&self.ops.d0, u));
        lin(self.nu, &d2, 1.0, nonlinear)
    }

    fn vp(&self, u: &[f64]) -> Vec<f64> {
        let mut r = self.ops.space.product(&[u, u]);
        r.iter_mut().for_each(|v| *v *= 3.0 * self.a);
        r
    }

    fn vpp(&self, u: &[f64], du: &[f64]) -> Vec<f64> {
        let mut r = self.ops.space.product(&[u, du]);
        r.iter_mut().for_each(|v| *v *= 6.0 * self.a);
        r
    }

    fn evolve(&self, g: &[f64]) -> Vec<f64> {
        let mut r = self.ops.apply(&self.ops.d0, g);
        self.helmholtz.solve_in_place(&mut r);
        r
    }

    /// `(u, θ, φ, w, ρ, v)` with `w = σ D_0 u_t - ½ φ_t + g`.
    fn fields(&self, u: &[f64], u_t: &[f64], g: &[f64]) -> Vec<Vec<f64>> {
        let du = self.ops.apply(&self.ops.d0, u);
        let mut w = lin(self.sigma, &self.ops.apply(&self.ops.d0, u_t), -0.5, &self.ops.pinv(u_t));
        w.iter_mut().zip(g).for_each(|(x, y)| *x += y);
        vec![u.to_vec(), du.clone(), self.ops.pinv(u), w, u_t.to_vec(), du]
    }
}

impl ReducedScheme for BbmKdvScheme {
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
        Ok(self.evolve(&self.g(s, &self.vp(s))))
    }

    fn tangent_rhs(&self, s: &[f64], ds: &[f64]) -> Result<Vec<f64>> {
        Ok(self.evolve(&self.g(ds, &self.vpp(s, ds))))
    }

    fn reconstruct(&self, s: &[f64], s_t: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(self.fields(s, s_t, &self.g(s, &self.vp(s))))
    }

    fn reconstruct_linearized(&self, s: &[f64], _s_t: &[f64], ds: &[f64], ds_t: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(self.fields(ds, ds_t, &self.g(ds, &self.vpp(s, ds))))
    }

    fn energy(&self, s: &[f64]) -> Result<f64> {
        let v = self.ops.apply(&self.ops.d0, s);
        let cubic = self.ops.space.integrate_pointwise(&[s], |z| z[0].powi(3));
        Ok(-self.a * cubic + 0.5 * self.nu * dot(&v, &v))
    }

    fn auxiliary(&self, s: &[f64]) -> Result<Vec<f64>> {
        Ok(self.ops.apply(&self.ops.d0, s))
    }

    fn constrain_state(&self, s: &mut [f64]) {
        project_out(s, &self.ops.consistency_vectors(false));
    }
}
