use std::sync::Arc;

use super::common::{dot, Ops};
use super::{FluxScalars, ModelParams, MultiSymplecticSystem, Potential, ReducedScheme};
use crate::flux::FluxSpec;
use crate::mesh_basis::DgSpace;
use crate::operators::{BlockOperator, LinearSolver};
use crate::Result;

/// `u_tt = (I+βL)^{-2} (D_{α13} (I+α33 L)^{-1} D_{-α13} u + α11 L u + Π V'(u))`,
/// evolved as a first-order system in `(u, u_t)`.
pub struct WaveScheme {
    system: MultiSymplecticSystem,
    flux: FluxSpec,
    scalars: FluxScalars,
    ops: Ops,
    potential: Potential,
    dp: BlockOperator,
    dm: BlockOperator,
    /// `(I + α33 L)^{-1}`.
    c_inv: Option<LinearSolver>,
    /// `I + β L` and its inverse.
    b_op: BlockOperator,
    b_inv: Option<LinearSolver>,
}

impl WaveScheme {
    pub fn new(system: MultiSymplecticSystem, space: Arc<DgSpace>, flux: FluxSpec, scalars: FluxScalars) -> Result<Self> {
        let potential = match &system.params {
            ModelParams::Wave { potential } => potential.clone(),
            _ => unreachable!("wave scheme for a non-wave model"),
        };
        let ops = Ops::new(space)?;
        let dp = ops.d(scalars.alpha13);
        let dm = ops.d(-scalars.alpha13);
        let c_inv = if scalars.alpha33 != 0.0 {
            Some(ops.shifted(&ops.l, scalars.alpha33)?)
        } else {
            None
        };
        let b_op = ops.l.shift_identity(scalars.beta);
        let b_inv = if scalars.beta != 0.0 {
            Some(LinearSolver::factorize(&b_op)?)
        } else {
            None
        };
        Ok(WaveScheme {
            system,
            flux,
            scalars,
            ops,
            potential,
            dp,
            dm,
            c_inv,
            b_op,
            b_inv,
        })
    }

    fn w_of(&self, u: &[f64]) -> Vec<f64> {
        let mut w = self.ops.apply(&self.dm, u);
        if let Some(c) = &self.c_inv {
            c.solve_in_place(&mut w);
        }
        w
    }

    fn b_inv2(&self, mut r: Vec<f64>) -> Vec<f64> {
        if let Some(b) = &self.b_inv {
            b.solve_in_place(&mut r);
            b.solve_in_place(&mut r);
        }
        r
    }

    fn accel(&self, du: &[f64], nonlinear: Vec<f64>) -> Vec<f64> {
        let w = self.w_of(du);
        let mut r = self.ops.apply(&self.dp, &w);
        if self.scalars.alpha11 != 0.0 {
            let lu = self.ops.apply(&self.ops.l, du);
            r.iter_mut().zip(&lu).for_each(|(a, b)| *a += self.scalars.alpha11 * b);
        }
        r.iter_mut().zip(&nonlinear).for_each(|(a, b)| *a += b);
        self.b_inv2(r)
    }
}

impl ReducedScheme for WaveScheme {
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
        let n = self.ops.ndof();
        let (u, y) = s.split_at(n);
        let nl = if self.potential.is_zero() {
            vec![0.0; n]
        } else {
            self.ops.space.project_pointwise(&[u], |z| self.potential.d1(z[0]))
        };
        let mut out = y.to_vec();
        out.extend(self.accel(u, nl));
        Ok(out)
    }

    fn tangent_rhs(&self, s: &[f64], ds: &[f64]) -> Result<Vec<f64>> {
        let n = self.ops.ndof();
        let u = &s[..n];
        let (du, dy) = ds.split_at(n);
        let nl = if self.potential.degree() < 2 {
            vec![0.0; n]
        } else {
            self.ops
                .space
                .project_pointwise(&[u, du], |z| self.potential.d2(z[0]) * z[1])
        };
        let mut out = dy.to_vec();
        out.extend(self.accel(du, nl));
        Ok(out)
    }

    fn reconstruct(&self, s: &[f64], _s_t: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = self.ops.ndof();
        let (u, y) = s.split_at(n);
        Ok(vec![u.to_vec(), self.ops.apply(&self.b_op, y), self.w_of(u)])
    }

    fn reconstruct_linearized(&self, _s: &[f64], _s_t: &[f64], ds: &[f64], _ds_t: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.reconstruct(ds, &[])
    }

    fn energy(&self, s: &[f64]) -> Result<f64> {
        let z = self.reconstruct(s, &[])?;
        let (u, v, w) = (&z[0], &z[1], &z[2]);
        let sp = &self.ops.space;
        let pot = if self.potential.is_zero() {
            0.0
        } else {
            sp.integrate_pointwise(&[u], |q| self.potential.value(q[0]))
        };
        let mut e = 0.5 * (dot(v, v) + dot(w, w)) - pot;
        if self.scalars.alpha11 != 0.0 {
            e += 0.5 * self.scalars.alpha11 * self.ops.jump_product(u, u);
        }
        if self.scalars.alpha33 != 0.0 {
            e -= 0.5 * self.scalars.alpha33 * self.ops.jump_product(w, w);
        }
        Ok(e)
    }

    fn auxiliary(&self, s: &[f64]) -> Result<Vec<f64>> {
        Ok(self.w_of(&s[..self.ops.ndof()]))
    }
}
