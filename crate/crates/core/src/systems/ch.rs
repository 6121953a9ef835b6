use std::sync::Arc;

use super::common::{lin, project_out, Ops};
use super::{FluxScalars, ModelParams, MultiSymplecticSystem, ReducedScheme};
use crate::flux::FluxSpec;
use crate::mesh_basis::DgSpace;
use crate::operators::LinearSolver;
use crate::Result;

/// Camassa–Holm:
/// `(I - D_0²) u_t = D_0 (D_0 Π(uρ) - Π(3/2 u² + ½ρ²)) - α0 (D_0 L D_0^† - P L) u + Π f`,
/// with `ρ = D_0 u`.
pub struct ChScheme {
    system: MultiSymplecticSystem,
    flux: FluxSpec,
    scalars: FluxScalars,
    ops: Ops,
    helmholtz: LinearSolver,
    forcing: bool,
    warnings: Vec<String>,
}

/// Source making `u = sin(x + t)` an exact solution.
pub fn ch_forcing(x: f64, t: f64) -> f64 {
    let th = x + t;
    2.0 * th.cos() + 3.0 * (2.0 * th).sin()
}

impl ChScheme {
    pub fn new(system: MultiSymplecticSystem, space: Arc<DgSpace>, flux: FluxSpec, scalars: FluxScalars) -> Result<Self> {
        let forcing = match &system.params {
            ModelParams::Ch { forcing } => *forcing,
            _ => unreachable!("ch scheme for another model"),
        };
        let ops = Ops::new(space)?;
        let helmholtz = ops.helmholtz(1.0)?;
        let mut warnings = Vec::new();
        if scalars.alpha0 < 0.0 {
            warnings.push(format!(
                "alpha0 = {} < 0: this flux is known to behave unstably in practice",
                scalars.alpha0
            ));
        }
        Ok(ChScheme {
            system,
            flux,
            scalars,
            ops,
            helmholtz,
            forcing,
            warnings,
        })
    }

    /// `(Π(uρ), Π(3/2 u² + ½ρ²))` and their linearizations share this shape.
    fn nonlinear(&self, u: &[f64], rho: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let sp = &self.ops.space;
        (
            sp.product(&[u, rho]),
            sp.project_pointwise(&[u, rho], |z| 1.5 * z[0] * z[0] + 0.5 * z[1] * z[1]),
        )
    }

    fn nonlinear_lin(&self, u: &[f64], rho: &[f64], du: &[f64], drho: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let sp = &self.ops.space;
        (
            sp.project_pointwise(&[u, rho, du, drho], |z| z[2] * z[1] + z[0] * z[3]),
            sp.project_pointwise(&[u, rho, du, drho], |z| 3.0 * z[0] * z[2] + z[1] * z[3]),
        )
    }

    fn evolve(&self, du: &[f64], a: &[f64], b: &[f64], source: Option<Vec<f64>>) -> Vec<f64> {
        let inner = lin(1.0, &self.ops.apply(&self.ops.d0, a), -1.0, b);
        let mut r = self.ops.apply(&self.ops.d0, &inner);
        let g = self.ops.alpha0_term(self.scalars.alpha0, du);
        r.iter_mut().zip(&g).for_each(|(x, y)| *x -= y);
        if let Some(f) = source {
            r.iter_mut().zip(&f).for_each(|(x, y)| *x += y);
        }
        self.helmholtz.solve_in_place(&mut r);
        r
    }

    /// `w = -½(φ_t - ρ_t) + D_0 v - α0 L φ - b`.
    fn w(&self, phi: &[f64], phi_t: &[f64], rho_t: &[f64], v: &[f64], b: &[f64]) -> Vec<f64> {
        let mut w = lin(-0.5, phi_t, 0.5, rho_t);
        let dv = self.ops.apply(&self.ops.d0, v);
        w.iter_mut().zip(&dv).zip(b).for_each(|((x, y), z)| *x += y - z);
        if self.scalars.alpha0 != 0.0 {
            let lp = self.ops.apply(&self.ops.l, phi);
            w.iter_mut().zip(&lp).for_each(|(x, y)| *x -= self.scalars.alpha0 * y);
        }
        w
    }
}

impl ReducedScheme for ChScheme {
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

    fn rhs(&self, t: f64, s: &[f64]) -> Result<Vec<f64>> {
        let rho = self.ops.apply(&self.ops.d0, s);
        let (a, b) = self.nonlinear(s, &rho);
        let source = self
            .forcing
            .then(|| self.ops.space.project_fn(|x| ch_forcing(x, t)));
        Ok(self.evolve(s, &a, &b, source))
    }

    fn tangent_rhs(&self, s: &[f64], ds: &[f64]) -> Result<Vec<f64>> {
        let rho = self.ops.apply(&self.ops.d0, s);
        let drho = self.ops.apply(&self.ops.d0, ds);
        let (a, b) = self.nonlinear_lin(s, &rho, ds, &drho);
        Ok(self.evolve(ds, &a, &b, None))
    }

    fn reconstruct(&self, s: &[f64], s_t: &[f64]) -> Result<Vec<Vec<f64>>> {
        let rho = self.ops.apply(&self.ops.d0, s);
        let phi = self.ops.pinv(s);
        let (a, b) = self.nonlinear(s, &rho);
        let v = lin(0.5, s_t, 1.0, &a);
        let w = self.w(&phi, &self.ops.pinv(s_t), &self.ops.apply(&self.ops.d0, s_t), &v, &b);
        Ok(vec![s.to_vec(), phi, rho, v, w])
    }

    fn reconstruct_linearized(&self, s: &[f64], _s_t: &[f64], ds: &[f64], ds_t: &[f64]) -> Result<Vec<Vec<f64>>> {
        let rho = self.ops.apply(&self.ops.d0, s);
        let drho = self.ops.apply(&self.ops.d0, ds);
        let dphi = self.ops.pinv(ds);
        let (a, b) = self.nonlinear_lin(s, &rho, ds, &drho);
        let v = lin(0.5, ds_t, 1.0, &a);
        let w = self.w(&dphi, &self.ops.pinv(ds_t), &self.ops.apply(&self.ops.d0, ds_t), &v, &b);
        Ok(vec![ds.to_vec(), dphi, drho, v, w])
    }

    fn energy(&self, s: &[f64]) -> Result<f64> {
        let rho = self.ops.apply(&self.ops.d0, s);
        let cubic = self
            .ops
            .space
            .integrate_pointwise(&[s, &rho], |z| z[0] * (z[0] * z[0] + z[1] * z[1]));
        let mut e = -0.5 * cubic;
        if self.scalars.alpha0 != 0.0 {
            e += self.scalars.alpha0 * self.ops.jump_product(s, &self.ops.pinv(s));
        }
        Ok(e)
    }

    fn auxiliary(&self, s: &[f64]) -> Result<Vec<f64>> {
        Ok(self.ops.apply(&self.ops.d0, s))
    }

    fn constrain_state(&self, s: &mut [f64]) {
        project_out(s, &self.ops.consistency_vectors(self.scalars.alpha0 != 0.0));
    }

    fn warnings(&self) -> &[String] {
        &self.warnings
    }
}
