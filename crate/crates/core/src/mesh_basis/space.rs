use std::sync::Arc;

use crate::parallel::{self, Execution};
use crate::{Error, Result};

use super::legendre::legendre_with_derivative;
use super::mesh::Mesh1D;
use super::quadrature::{gauss_legendre, QuadratureRule};

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 10;

/// The broken space `V_h` of degree-`k` piecewise polynomials on a periodic mesh.
///
/// Coefficients are stored cell by cell; in cell `j` of width `h` the basis is
/// `φ_i(x) = sqrt((2i+1)/h) P_i(ξ)`, orthonormal in `L²(I_j)`, so the mass matrix
/// is the identity and the `L²` inner product of two fields is the dot product of
/// their coefficient vectors.
#[derive(Clone, Debug)]
pub struct DgSpace {
    mesh: Arc<Mesh1D>,
    k: usize,
    quad: QuadratureRule,
    /// `sqrt(2i+1) P_i(ξ_q)`, row-major `[q][i]`.
    basis: Vec<f64>,
    /// `sqrt(2i+1) P_i'(ξ_q)`, row-major `[q][i]`.
    basis_dxi: Vec<f64>,
    err_quad: QuadratureRule,
    err_basis: Vec<f64>,
    sqrt_h: Vec<f64>,
    /// `sqrt(2i+1)`: scaled right-end basis values.
    right: Vec<f64>,
    /// `sqrt(2i+1) (-1)^i`: scaled left-end basis values.
    left: Vec<f64>,
    exec: Execution,
}

fn table(k: usize, nodes: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let s = k + 1;
    let mut b = vec![0.0; nodes.len() * s];
    let mut d = vec![0.0; nodes.len() * s];
    for (q, &x) in nodes.iter().enumerate() {
        let (p, dp) = legendre_with_derivative(k, x);
        for i in 0..s {
            let c = ((2 * i + 1) as f64).sqrt();
            b[q * s + i] = c * p[i];
            d[q * s + i] = c * dp[i];
        }
    }
    (b, d)
}

impl DgSpace {
    /// Space whose product quadrature integrates cubic nonlinearities exactly.
    pub fn new(mesh: Arc<Mesh1D>, k: usize) -> Result<Self> {
        Self::with_product_degree(mesh, k, 3)
    }

    /// Space whose product quadrature integrates `p`-fold products of degree-`k`
    /// fields times a test function exactly: `max(k+2, ⌈(p k + k + 1)/2⌉)` points.
    pub fn with_product_degree(mesh: Arc<Mesh1D>, k: usize, p: usize) -> Result<Self> {
        if k > MAX_DEGREE {
            return Err(Error::InvalidConfig(format!(
                "degree {k} exceeds the supported maximum {MAX_DEGREE}"
            )));
        }
        let exact = p.max(1) * k + k;
        let nq = (k + 2).max((exact + 2) / 2);
        Self::with_quadrature(mesh, k, nq)
    }

    pub fn with_quadrature(mesh: Arc<Mesh1D>, k: usize, nq: usize) -> Result<Self> {
        let quad = gauss_legendre(nq)?;
        let err_quad = gauss_legendre((2 * k + 4).min(32))?;
        let (basis, basis_dxi) = table(k, &quad.nodes);
        let (err_basis, _) = table(k, &err_quad.nodes);
        let sqrt_h = mesh.widths().iter().map(|h| h.sqrt()).collect();
        let right = (0..=k).map(|i| ((2 * i + 1) as f64).sqrt()).collect();
        let left = (0..=k)
            .map(|i| ((2 * i + 1) as f64).sqrt() * if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        Ok(DgSpace {
            mesh,
            k,
            quad,
            basis,
            basis_dxi,
            err_quad,
            err_basis,
            sqrt_h,
            right,
            left,
            exec: Execution::default(),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    /// Unknowns per cell, `k + 1`.
    pub fn block(&self) -> usize {
        self.k + 1
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells()
    }

    pub fn ndof(&self) -> usize {
        self.n_cells() * self.block()
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    pub fn n_quad(&self) -> usize {
        self.quad.len()
    }

    pub fn same_as(&self, other: &DgSpace) -> bool {
        self.k == other.k && (Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh)
    }

    /// Value of basis function `i` of cell `j` at its right end, `φ_i(x_{j+1/2}^-)`.
    pub fn right_value(&self, j: usize, i: usize) -> f64 {
        self.right[i] / self.sqrt_h[j]
    }

    /// Value of basis function `i` of cell `j` at its left end, `φ_i(x_{j-1/2}^+)`.
    pub fn left_value(&self, j: usize, i: usize) -> f64 {
        self.left[i] / self.sqrt_h[j]
    }

    /// `u(x_{j+1/2}^-)` from the coefficients of cell `j`.
    pub fn right_trace(&self, coeffs: &[f64], j: usize) -> f64 {
        let s = self.block();
        let c = &coeffs[j * s..(j + 1) * s];
        c.iter().zip(&self.right).map(|(a, b)| a * b).sum::<f64>() / self.sqrt_h[j]
    }

    /// `u(x_{j-1/2}^+)` from the coefficients of cell `j`.
    pub fn left_trace(&self, coeffs: &[f64], j: usize) -> f64 {
        let s = self.block();
        let c = &coeffs[j * s..(j + 1) * s];
        c.iter().zip(&self.left).map(|(a, b)| a * b).sum::<f64>() / self.sqrt_h[j]
    }

    /// Traces at the right edge of cell `j`: `(u^-, u^+)` with `u^+` from cell `j+1` (periodic).
    pub fn edge_traces(&self, coeffs: &[f64], j: usize) -> (f64, f64) {
        let jn = (j + 1) % self.n_cells();
        (self.right_trace(coeffs, j), self.left_trace(coeffs, jn))
    }

    /// Evaluates the field at reference coordinate `xi` of cell `j`.
    pub fn eval_in_cell(&self, coeffs: &[f64], j: usize, xi: f64) -> f64 {
        let s = self.block();
        let (p, _) = legendre_with_derivative(self.k, xi);
        let mut v = 0.0;
        for i in 0..s {
            v += coeffs[j * s + i] * ((2 * i + 1) as f64).sqrt() * p[i];
        }
        v / self.sqrt_h[j]
    }

    /// Values at the product quadrature nodes, laid out `[cell][node]`.
    pub fn to_quad(&self, coeffs: &[f64], out: &mut [f64]) {
        let s = self.block();
        let nq = self.n_quad();
        debug_assert_eq!(coeffs.len(), self.ndof());
        debug_assert_eq!(out.len(), self.n_cells() * nq);
        for j in 0..self.n_cells() {
            let c = &coeffs[j * s..(j + 1) * s];
            let inv = 1.0 / self.sqrt_h[j];
            for q in 0..nq {
                let b = &self.basis[q * s..(q + 1) * s];
                let mut v = 0.0;
                for i in 0..s {
                    v += c[i] * b[i];
                }
                out[j * nq + q] = v * inv;
            }
        }
    }

    pub fn quad_values(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cells() * self.n_quad()];
        self.to_quad(coeffs, &mut out);
        out
    }

    /// Values of the elementwise derivative `u_x` at the product quadrature nodes.
    pub fn quad_derivative_values(&self, coeffs: &[f64]) -> Vec<f64> {
        let s = self.block();
        let nq = self.n_quad();
        let mut out = vec![0.0; self.n_cells() * nq];
        for j in 0..self.n_cells() {
            let h = self.mesh.width(j);
            let scale = 2.0 / (h * self.sqrt_h[j]);
            for q in 0..nq {
                let mut v = 0.0;
                for i in 0..s {
                    v += coeffs[j * s + i] * self.basis_dxi[q * s + i];
                }
                out[j * nq + q] = v * scale;
            }
        }
        out
    }

    /// L² projection of nodal values given at the product quadrature nodes.
    pub fn from_quad(&self, values: &[f64], out: &mut [f64]) {
        let s = self.block();
        let nq = self.n_quad();
        let w = &self.quad.weights;
        for j in 0..self.n_cells() {
            let f = 0.5 * self.sqrt_h[j];
            let c = &mut out[j * s..(j + 1) * s];
            c.iter_mut().for_each(|v| *v = 0.0);
            for q in 0..nq {
                let wv = w[q] * values[j * nq + q] * f;
                let b = &self.basis[q * s..(q + 1) * s];
                for i in 0..s {
                    c[i] += wv * b[i];
                }
            }
        }
    }

    /// L² projection `Π f` of a function of `x`, using the product quadrature.
    pub fn project_fn(&self, f: impl Fn(f64) -> f64 + Sync) -> Vec<f64> {
        let s = self.block();
        let nq = self.n_quad();
        let mut out = vec![0.0; self.ndof()];
        let mesh = &self.mesh;
        let quad = &self.quad;
        parallel::for_each_chunk(self.exec, &mut out, s, |j, c| {
            let f_scale = 0.5 * mesh.width(j).sqrt();
            for q in 0..nq {
                let x = mesh.map_to_cell(j, quad.nodes[q]);
                let wv = quad.weights[q] * f(x) * f_scale;
                for i in 0..s {
                    c[i] += wv * self.basis[q * s + i];
                }
            }
        });
        out
    }

    /// `Π g(z_1, ..., z_r)` for fields `z_i` and a pointwise map `g`.
    pub fn project_pointwise(&self, fields: &[&[f64]], g: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let vals = self.pointwise_values(fields, g);
        let mut out = vec![0.0; self.ndof()];
        self.from_quad(&vals, &mut out);
        out
    }

    /// `Π (z_1 z_2 ... z_r)`.
    pub fn product(&self, factors: &[&[f64]]) -> Vec<f64> {
        self.project_pointwise(factors, |z| z.iter().product())
    }

    /// `g(z(x_q))` at every product quadrature node.
    pub fn pointwise_values(&self, fields: &[&[f64]], g: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let nq = self.n_quad();
        let total = self.n_cells() * nq;
        let qv: Vec<Vec<f64>> = fields.iter().map(|c| self.quad_values(c)).collect();
        let mut z = vec![0.0; fields.len()];
        let mut out = vec![0.0; total];
        for p in 0..total {
            for (zi, v) in z.iter_mut().zip(&qv) {
                *zi = v[p];
            }
            out[p] = g(&z);
        }
        out
    }

    /// Per-cell integrals of nodal values at the product quadrature nodes.
    pub fn cell_integrals_of_values(&self, values: &[f64]) -> Vec<f64> {
        let nq = self.n_quad();
        (0..self.n_cells())
            .map(|j| {
                let h = self.mesh.width(j);
                0.5 * h
                    * (0..nq)
                        .map(|q| self.quad.weights[q] * values[j * nq + q])
                        .sum::<f64>()
            })
            .collect()
    }

    /// `∫_{I_j} g(z) dx` for every cell `j`.
    pub fn cell_integrals(&self, fields: &[&[f64]], g: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        self.cell_integrals_of_values(&self.pointwise_values(fields, g))
    }

    /// `∫_Ω g(z) dx`.
    pub fn integrate_pointwise(&self, fields: &[&[f64]], g: impl Fn(&[f64]) -> f64) -> f64 {
        self.cell_integrals(fields, g).iter().sum()
    }

    /// `∫_Ω u dx`.
    pub fn integral(&self, coeffs: &[f64]) -> f64 {
        let s = self.block();
        (0..self.n_cells())
            .map(|j| coeffs[j * s] * self.sqrt_h[j])
            .sum()
    }

    /// Coefficients of the constant function 1.
    pub fn ones(&self) -> Vec<f64> {
        let s = self.block();
        let mut v = vec![0.0; self.ndof()];
        for j in 0..self.n_cells() {
            v[j * s] = self.sqrt_h[j];
        }
        v
    }

    /// Removes the mean: `u - (1/|Ω|) ∫u`.
    pub fn remove_mean(&self, coeffs: &mut [f64]) {
        let m = self.integral(coeffs) / self.mesh.length();
        let s = self.block();
        for j in 0..self.n_cells() {
            coeffs[j * s] -= m * self.sqrt_h[j];
        }
    }

    /// Second kernel vector of the central weak derivative `D_0`, when it exists.
    ///
    /// The top Legendre mode with the same sign in every cell (odd `k`) or alternating
    /// signs (even `k`, even `N`) has vanishing averages at every interface and zero
    /// volume term, so `D_0` maps it to zero.
    pub fn central_kernel_mode(&self) -> Option<Vec<f64>> {
        let n = self.n_cells();
        let k = self.k;
        if k % 2 == 0 && n % 2 == 1 {
            return None;
        }
        let s = self.block();
        let mut v = vec![0.0; self.ndof()];
        let scale = 1.0 / ((2 * k + 1) as f64).sqrt();
        for j in 0..n {
            let sign = if k % 2 == 1 || j % 2 == 0 { 1.0 } else { -1.0 };
            v[j * s + k] = sign * self.sqrt_h[j] * scale;
        }
        Some(v)
    }

    /// `‖u_h - f‖_{L²}` with an over-integrating rule of `2k+4` points.
    pub fn l2_error(&self, coeffs: &[f64], f: impl Fn(f64) -> f64) -> f64 {
        let s = self.block();
        let nq = self.err_quad.len();
        let mut acc = 0.0;
        for j in 0..self.n_cells() {
            let h = self.mesh.width(j);
            let inv = 1.0 / self.sqrt_h[j];
            for q in 0..nq {
                let mut v = 0.0;
                for i in 0..s {
                    v += coeffs[j * s + i] * self.err_basis[q * s + i];
                }
                let x = self.mesh.map_to_cell(j, self.err_quad.nodes[q]);
                let d = v * inv - f(x);
                acc += 0.5 * h * self.err_quad.weights[q] * d * d;
            }
        }
        acc.sqrt()
    }

    pub fn l2_norm(&self, coeffs: &[f64]) -> f64 {
        coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Samples `(x, u(x))` at `per_cell` equispaced interior points of every cell.
    pub fn sample(&self, coeffs: &[f64], per_cell: usize) -> Vec<(f64, f64)> {
        let per_cell = per_cell.max(1);
        let mut out = Vec::with_capacity(self.n_cells() * per_cell);
        for j in 0..self.n_cells() {
            for p in 0..per_cell {
                let xi = -1.0 + (2.0 * p as f64 + 1.0) / per_cell as f64;
                out.push((self.mesh.map_to_cell(j, xi), self.eval_in_cell(coeffs, j, xi)));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_basis::MeshPattern;
    use std::f64::consts::PI;

    fn space(n: usize, k: usize) -> DgSpace {
        let mesh = Mesh1D::build((0.0, 2.0 * PI), n, MeshPattern::Uniform).unwrap();
        DgSpace::new(Arc::new(mesh), k).unwrap()
    }

    #[test]
    fn polynomials_are_reproduced() {
        let sp = space(5, 3);
        let f = |x: f64| 1.0 - 0.5 * x + 0.25 * x * x - 0.01 * x.powi(3);
        let c = sp.project_fn(f);
        for j in 0..5 {
            for &xi in &[-0.9, -0.2, 0.4, 1.0] {
                let x = sp.mesh().map_to_cell(j, xi);
                assert!((sp.eval_in_cell(&c, j, xi) - f(x)).abs() < 1e-13);
            }
        }
        assert!(sp.l2_error(&c, f) < 1e-13);
    }

    #[test]
    fn sine_cell_averages_k0() {
        let mesh = Mesh1D::build((0.0, 2.0 * PI), 2, MeshPattern::Uniform).unwrap();
        let sp = DgSpace::with_quadrature(Arc::new(mesh), 0, 16).unwrap();
        let c = sp.project_fn(f64::sin);
        let h = PI;
        // cell average of sin over (0, π) is 2/π; coefficient = average * sqrt(h)
        assert!((c[0] - 2.0 / PI * h.sqrt()).abs() < 1e-12);
        assert!((c[1] + 2.0 / PI * h.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn unit_norm_of_one() {
        let sp = space(7, 2);
        let one = sp.ones();
        assert!((sp.l2_norm(&one) - (2.0 * PI).sqrt()).abs() < 1e-13);
        assert!((sp.integral(&one) - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn continuous_traces_agree() {
        let sp = space(6, 2);
        let c = sp.project_fn(|x| 0.5 * x * x - x);
        for j in 0..5 {
            let (m, p) = sp.edge_traces(&c, j);
            assert!((m - p).abs() < 1e-13);
        }
    }

    #[test]
    fn central_kernel_mode_exists_when_expected() {
        assert!(space(4, 1).central_kernel_mode().is_some());
        assert!(space(5, 1).central_kernel_mode().is_some());
        assert!(space(4, 2).central_kernel_mode().is_some());
        assert!(space(5, 2).central_kernel_mode().is_none());
    }
}
