use std::sync::Arc;

use super::common::{dot, Ops};
use super::{AuxKind, FluxScalars, ModelParams, MultiSymplecticSystem, ReducedScheme};
use crate::flux::FluxSpec;
use crate::mesh_basis::DgSpace;
use crate::operators::BlockOperator;
use crate::Result;

/// Nonlinear Schrödinger in real form:
/// `p_t = -D_{-a} w - Π(α r q)`, `q_t = D_{-a} v + Π(α r p)`, with `v = D_a p`,
/// `w = D_a q` and `r = p² + q²`.
pub struct NlsScheme {
    system: MultiSymplecticSystem,
    flux: FluxSpec,
    scalars: FluxScalars,
    ops: Ops,
    alpha: f64,
    dp: BlockOperator,
    dm: BlockOperator,
}

impl NlsScheme {
    pub fn new(system: MultiSymplecticSystem, space: Arc<DgSpace>, flux: FluxSpec, scalars: FluxScalars) -> Result<Self> {
        let alpha = match &system.params {
            ModelParams::Nls { alpha } => *alpha,
            _ => unreachable!("nls scheme for another model"),
        };
        let ops = Ops::new(space)?;
        let dp = ops.d(scalars.alpha);
        let dm = ops.d(-scalars.alpha);
        Ok(NlsScheme {
            system,
            flux,
            scalars,
            ops,
            alpha,
            dp,
            dm,
        })
    }

    fn assemble(&self, v: &[f64], w: &[f64], gp: Vec<f64>, gq: Vec<f64>) -> Vec<f64> {
        let dw = self.ops.apply(&self.dm, w);
        let dv = self.ops.apply(&self.dm, v);
        let mut out: Vec<f64> = dw.iter().zip(&gq).map(|(a, b)| -a - b).collect();
        out.extend(dv.iter().zip(&gp).map(|(a, b)| a + b));
        out
    }
}

impl ReducedScheme for NlsScheme {
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
        2
    }

    fn rhs(&self, _t: f64, s: &[f64]) -> Result<Vec<f64>> {
        let (p, q) = s.split_at(self.ops.ndof());
        let v = self.ops.apply(&self.dp, p);
        let w = self.ops.apply(&self.dp, q);
        let al = self.alpha;
        let sp = &self.ops.space;
        let gp = sp.project_pointwise(&[p, q], |z| al * (z[0] * z[0] + z[1] * z[1]) * z[0]);
        let gq = sp.project_pointwise(&[p, q], |z| al * (z[0] * z[0] + z[1] * z[1]) * z[1]);
        Ok(self.assemble(&v, &w, gp, gq))
    }

    fn tangent_rhs(&self, s: &[f64], ds: &[f64]) -> Result<Vec<f64>> {
        let n = self.ops.ndof();
        let (p, q) = s.split_at(n);
        let (dp, dq) = ds.split_at(n);
        let v = self.ops.apply(&self.dp, dp);
        let w = self.ops.apply(&self.dp, dq);
        let al = self.alpha;
        let sp = &self.ops.space;
        let gp = sp.project_pointwise(&[p, q, dp, dq], |z| {
            let r = z[0] * z[0] + z[1] * z[1];
            let dr = 2.0 * (z[0] * z[2] + z[1] * z[3]);
            al * (r * z[2] + dr * z[0])
        });
        let gq = sp.project_pointwise(&[p, q, dp, dq], |z| {
            let r = z[0] * z[0] + z[1] * z[1];
            let dr = 2.0 * (z[0] * z[2] + z[1] * z[3]);
            al * (r * z[3] + dr * z[1])
        });
        Ok(self.assemble(&v, &w, gp, gq))
    }

    fn reconstruct(&self, s: &[f64], _s_t: &[f64]) -> Result<Vec<Vec<f64>>> {
        let (p, q) = s.split_at(self.ops.ndof());
        Ok(vec![
            p.to_vec(),
            q.to_vec(),
            self.ops.apply(&self.dp, p),
            self.ops.apply(&self.dp, q),
        ])
    }

    fn reconstruct_linearized(&self, _s: &[f64], _s_t: &[f64], ds: &[f64], _ds_t: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.reconstruct(ds, &[])
    }

    fn energy(&self, s: &[f64]) -> Result<f64> {
        let z = self.reconstruct(s, &[])?;
        let quartic = self
            .ops
            .space
            .integrate_pointwise(&[&z[0], &z[1]], |x| (x[0] * x[0] + x[1] * x[1]).powi(2));
        Ok(0.25 * self.alpha * quartic - 0.5 * (dot(&z[2], &z[2]) + dot(&z[3], &z[3])))
    }

    fn auxiliary(&self, s: &[f64]) -> Result<Vec<f64>> {
        Ok(s[self.ops.ndof()..].to_vec())
    }

    fn aux_kind(&self) -> AuxKind {
        AuxKind::Imaginary
    }

    fn charge(&self, s: &[f64]) -> Option<f64> {
        Some(dot(s, s))
    }
}
