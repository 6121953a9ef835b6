use std::sync::Arc;

use crate::mesh_basis::DgSpace;
use crate::operators::{assemble_d, assemble_l, d_kernel, BlockOperator, DeflatedSolver, LinearSolver};
use crate::Result;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `a x + b y`.
pub(crate) fn lin(a: f64, x: &[f64], b: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(p, q)| a * p + b * q).collect()
}

pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(p, q)| *p += a * q);
}

pub(crate) fn scaled(a: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| a * v).collect()
}

/// Orthogonal projection onto the complement of `span(vectors)`.
pub(crate) fn project_out(x: &mut [f64], vectors: &[Vec<f64>]) {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut e = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&e, b);
                axpy(&mut e, -c, b);
            }
        }
        let n = dot(&e, &e).sqrt();
        if n > 1e-12 {
            e.iter_mut().for_each(|x| *x /= n);
            basis.push(e);
        }
    }
    for b in &basis {
        let c = dot(x, b);
        axpy(x, -c, b);
    }
}

/// Operators shared by several schemes.
#[derive(Clone, Debug)]
pub(crate) struct Ops {
    pub space: Arc<DgSpace>,
    pub d0: BlockOperator,
    pub l: BlockOperator,
    /// Moore–Penrose inverse of `D_0`.
    pub d0_pinv: DeflatedSolver,
}

impl Ops {
    pub fn new(space: Arc<DgSpace>) -> Result<Self> {
        let d0 = assemble_d(&space, 0.0);
        let l = assemble_l(&space);
        let d0_pinv = DeflatedSolver::with_symmetric_kernel(&d0, &d_kernel(&space, 0.0))?;
        Ok(Ops {
            space,
            d0,
            l,
            d0_pinv,
        })
    }

    pub fn ndof(&self) -> usize {
        self.space.ndof()
    }

    pub fn apply(&self, op: &BlockOperator, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; op.dim()];
        op.apply_into(self.space.execution(), x, &mut y);
        y
    }

    pub fn d(&self, alpha: f64) -> BlockOperator {
        if alpha == 0.0 {
            self.d0.clone()
        } else {
            assemble_d(&self.space, alpha)
        }
    }

    pub fn pinv(&self, x: &[f64]) -> Vec<f64> {
        self.d0_pinv.solve_projected(x)
    }

    /// `I + c·op` factorized.
    pub fn shifted(&self, op: &BlockOperator, c: f64) -> Result<LinearSolver> {
        LinearSolver::factorize(&op.shift_identity(c))
    }

    /// `I - c D_0²` factorized.
    pub fn helmholtz(&self, c: f64) -> Result<LinearSolver> {
        let d2 = self.d0.compose(&self.d0)?;
        self.shifted(&d2, -c)
    }

    /// `α_0 (D_0 L D_0^† u - P L u)`, with `P` the projector onto `range(D_0)`.
    pub fn alpha0_term(&self, alpha0: f64, u: &[f64]) -> Vec<f64> {
        if alpha0 == 0.0 {
            return vec![0.0; u.len()];
        }
        let phi = self.pinv(u);
        let a = self.apply(&self.d0, &self.apply(&self.l, &phi));
        let mut b = self.apply(&self.l, u);
        self.d0_pinv.project_to_range(&mut b);
        lin(alpha0, &a, -alpha0, &b)
    }

    /// `Σ_j [a]_{j+1/2} [b]_{j+1/2} = -⟨L a, b⟩`.
    pub fn jump_product(&self, a: &[f64], b: &[f64]) -> f64 {
        -dot(&self.apply(&self.l, a), b)
    }

    /// Vectors a state must be orthogonal to for the reduced scheme to coincide with
    /// the full DG system when `D_0^{-1}` enters: `{1, ψ}` and, with an `α_0` term, `Lψ`.
    pub fn consistency_vectors(&self, with_alpha0: bool) -> Vec<Vec<f64>> {
        let mut v = d_kernel(&self.space, 0.0);
        if with_alpha0 {
            if let Some(psi) = self.space.central_kernel_mode() {
                v.push(self.apply(&self.l, &psi));
            }
        }
        v
    }
}
