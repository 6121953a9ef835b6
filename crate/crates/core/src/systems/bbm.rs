use nalgebra::DMatrix;
use std::sync::Arc;

use super::common::{lin, project_out, Ops};
use super::{FluxScalars, ModelParams, MultiSymplecticSystem, ReducedScheme};
use crate::flux::FluxSpec;
use crate::mesh_basis::DgSpace;
use crate::operators::{BlockOperator, DeflatedSolver, LinearSolver};
use crate::{Error, Result};

enum Mode {
    /// `α1 = 0`: `(I - σD_0²) u_t = -D_0 Π V'(u) - α0 (D_0 L D_0^† - P L) u`.
    Central { helmholtz: LinearSolver },
    /// `α0 = 0, α1 ≠ 0`: `P2 u_t = -D_{-α1} Π V'(u)` with
    /// `P2 = (I + D_{-α1} D_{α1}^†)/2 - σ D_{-α1} D_0`.
    Alternating {
        d_alpha1_pinv: DeflatedSolver,
        d_minus: BlockOperator,
        p2: LinearSolver,
    },
}

/// BBM scheme with `V(u) = a u³`.
pub struct BbmScheme {
    system: MultiSymplecticSystem,
    flux: FluxSpec,
    scalars: FluxScalars,
    ops: Ops,
    sigma: f64,
    a: f64,
    d_alpha2: BlockOperator,
    mode: Mode,
    warnings: Vec<String>,
}

impl BbmScheme {
    pub fn new(system: MultiSymplecticSystem, space: Arc<DgSpace>, flux: FluxSpec, scalars: FluxScalars) -> Result<Self> {
        let (sigma, a) = match &system.params {
            ModelParams::Bbm { sigma, v_cubic } => (*sigma, *v_cubic),
            _ => unreachable!("bbm scheme for another model"),
        };
        let ops = Ops::new(space)?;
        let mut warnings = Vec::new();
        if scalars.alpha0 < 0.0 {
            warnings.push(format!(
                "alpha0 = {} < 0: this flux is known to behave unstably in practice",
                scalars.alpha0
            ));
        }
        let mode = if scalars.alpha1 == 0.0 {
            Mode::Central {
                helmholtz: ops.helmholtz(sigma)?,
            }
        } else {
            if scalars.alpha0 != 0.0 {
                return Err(Error::InvalidConfig(
                    "bbm: alpha0 and alpha1 cannot both be nonzero".into(),
                ));
            }
            let sp = &ops.space;
            let d_plus = ops.d(scalars.alpha1);
            let d_minus = ops.d(-scalars.alpha1);
            let d_alpha1_pinv = DeflatedSolver::with_symmetric_kernel(&d_plus, &[sp.ones()])?;
            let n = sp.ndof();
            let dm_dense = d_minus.to_dense();
            let mut z = DMatrix::zeros(n, n);
            let mut e = vec![0.0; n];
            for c in 0..n {
                e.iter_mut().for_each(|v| *v = 0.0);
                e[c] = 1.0;
                let col = d_alpha1_pinv.solve_projected(&e);
                z.set_column(c, &nalgebra::DVector::from_vec(col));
            }
            let p2 = (DMatrix::identity(n, n) + &dm_dense * z) * 0.5 - &dm_dense * ops.d0.to_dense() * sigma;
            // singular unless k is even and N is odd
            let p2 = LinearSolver::factorize(&BlockOperator::Dense(p2))?;
            Mode::Alternating {
                d_alpha1_pinv,
                d_minus,
                p2,
            }
        };
        let d_alpha2 = ops.d(scalars.alpha2);
        Ok(BbmScheme {
            system,
            flux,
            scalars,
            ops,
            sigma,
            a,
            d_alpha2,
            mode,
            warnings,
        })
    }

    /// `Π V'(u) = 3a Π u²`.
    fn vp(&self, u: &[f64]) -> Vec<f64> {
        let mut r = self.ops.space.product(&[u, u]);
        r.iter_mut().for_each(|v| *v *= 3.0 * self.a);
        r
    }

    /// `Π V''(u) du = 6a Π(u du)`.
    fn vpp(&self, u: &[f64], du: &[f64]) -> Vec<f64> {
        let mut r = self.ops.space.product(&[u, du]);
        r.iter_mut().for_each(|v| *v *= 6.0 * self.a);
        r
    }

    fn evolve(&self, u: &[f64], force: Vec<f64>) -> Vec<f64> {
        match &self.mode {
            Mode::Central { helmholtz } => {
                let mut r = self.ops.apply(&self.ops.d0, &force);
                let g = self.ops.alpha0_term(self.scalars.alpha0, u);
                r.iter_mut().zip(&g).for_each(|(a, b)| *a = -*a - b);
                helmholtz.solve_in_place(&mut r);
                r
            }
            Mode::Alternating { d_minus, p2, .. } => {
                let mut r = self.ops.apply(d_minus, &force);
                r.iter_mut().for_each(|v| *v = -*v);
                p2.solve_in_place(&mut r);
                r
            }
        }
    }

    /// `φ` from `u`.
    fn phi(&self, u: &[f64]) -> Vec<f64> {
        match &self.mode {
            Mode::Central { .. } => self.ops.pinv(u),
            Mode::Alternating { d_alpha1_pinv, .. } => d_alpha1_pinv.solve_projected(u),
        }
    }

    /// `p = ½ φ_t - σ D_0 u_t + α0 L φ + nonlinear`.
    fn p(&self, u: &[f64], u_t: &[f64], nonlinear: &[f64]) -> Vec<f64> {
        let mut p = lin(0.5, &self.phi(u_t), -self.sigma, &self.ops.apply(&self.ops.d0, u_t));
        if self.scalars.alpha0 != 0.0 {
            let lp = self.ops.apply(&self.ops.l, &self.phi(u));
            p.iter_mut().zip(&lp).for_each(|(a, b)| *a += self.scalars.alpha0 * b);
        }
        p.iter_mut().zip(nonlinear).for_each(|(a, b)| *a += b);
        p
    }
}

impl ReducedScheme for BbmScheme {
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
        Ok(self.evolve(s, self.vp(s)))
    }

    fn tangent_rhs(&self, s: &[f64], ds: &[f64]) -> Result<Vec<f64>> {
        Ok(self.evolve(ds, self.vpp(s, ds)))
    }

    fn reconstruct(&self, s: &[f64], s_t: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(vec![
            self.phi(s),
            s.to_vec(),
            self.ops.apply(&self.d_alpha2, s),
            s_t.to_vec(),
            self.p(s, s_t, &self.vp(s)),
        ])
    }

    fn reconstruct_linearized(&self, s: &[f64], _s_t: &[f64], ds: &[f64], ds_t: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(vec![
            self.phi(ds),
            ds.to_vec(),
            self.ops.apply(&self.d_alpha2, ds),
            ds_t.to_vec(),
            self.p(ds, ds_t, &self.vpp(s, ds)),
        ])
    }

    fn energy(&self, s: &[f64]) -> Result<f64> {
        let cubic = self.ops.space.integrate_pointwise(&[s], |z| z[0].powi(3));
        let mut e = -self.a * cubic;
        if self.scalars.alpha0 != 0.0 {
            e += self.scalars.alpha0 * self.ops.jump_product(s, &self.phi(s));
        }
        Ok(e)
    }

    fn auxiliary(&self, s: &[f64]) -> Result<Vec<f64>> {
        Ok(self.ops.apply(&self.ops.d0, s))
    }

    fn constrain_state(&self, s: &mut [f64]) {
        match self.mode {
            Mode::Central { .. } => project_out(s, &self.ops.consistency_vectors(self.scalars.alpha0 != 0.0)),
            Mode::Alternating { .. } => project_out(s, &[self.ops.space.ones()]),
        }
    }

    fn warnings(&self) -> &[String] {
        &self.warnings
    }
}
