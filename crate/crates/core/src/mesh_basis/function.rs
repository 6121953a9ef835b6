use std::sync::Arc;

use super::space::DgSpace;

/// Which one-sided value to take at a cell edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A field in `V_h` together with its space.
#[derive(Clone, Debug)]
pub struct DgFunction {
    space: Arc<DgSpace>,
    coeffs: Vec<f64>,
}

impl DgFunction {
    pub fn zeros(space: Arc<DgSpace>) -> Self {
        let n = space.ndof();
        DgFunction {
            space,
            coeffs: vec![0.0; n],
        }
    }

    pub fn from_coeffs(space: Arc<DgSpace>, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), space.ndof(), "coefficient length mismatch");
        DgFunction { space, coeffs }
    }

    pub fn project(space: Arc<DgSpace>, f: impl Fn(f64) -> f64 + Sync) -> Self {
        let coeffs = space.project_fn(f);
        DgFunction { space, coeffs }
    }

    pub fn space(&self) -> &Arc<DgSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Value at `x`. On a cell edge, `side` picks the one-sided limit.
    pub fn eval(&self, x: f64, side: Side) -> f64 {
        let mesh = self.space.mesh();
        let (mut j, mut xi) = mesh.locate(x);
        if side == Side::Left && xi <= -1.0 + 1e-14 {
            j = (j + mesh.n_cells() - 1) % mesh.n_cells();
            xi = 1.0;
        }
        self.space.eval_in_cell(&self.coeffs, j, xi)
    }

    /// `(u(x_{j+1/2}^-), u(x_{j+1/2}^+))`.
    pub fn traces(&self, j: usize) -> (f64, f64) {
        self.space.edge_traces(&self.coeffs, j)
    }

    pub fn l2_norm(&self) -> f64 {
        self.space.l2_norm(&self.coeffs)
    }

    pub fn l2_error(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.space.l2_error(&self.coeffs, f)
    }

    pub fn integral(&self) -> f64 {
        self.space.integral(&self.coeffs)
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.space.mesh().length()
    }

    pub fn sample(&self, per_cell: usize) -> Vec<(f64, f64)> {
        self.space.sample(&self.coeffs, per_cell)
    }

    /// Largest sampled value and where it occurs.
    pub fn max_sample(&self, per_cell: usize) -> (f64, f64) {
        self.sample(per_cell)
            .into_iter()
            .fold((f64::NAN, f64::NEG_INFINITY), |acc, (x, u)| {
                if u > acc.1 {
                    (x, u)
                } else {
                    acc
                }
            })
    }
}
