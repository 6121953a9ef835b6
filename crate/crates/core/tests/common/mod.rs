//! Brute-force dense assembly of the DG operators, built independently of the crate's
//! basis tables and quadrature.
#![allow(dead_code)]

use std::sync::Arc;

use msdg::mesh_basis::{DgSpace, Mesh1D, MeshPattern};
use msdg::operators::{assemble_d, assemble_l, BlockOperator};
use nalgebra::DMatrix;

pub const TOL: f64 = 1e-12;
pub const CASES: [(usize, usize); 4] = [(2, 0), (2, 1), (3, 2), (4, 1)];

pub fn legendre_p(n: usize, x: f64) -> (f64, f64) {
    // value and derivative by the three-term recurrence
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    if n == 0 {
        return (1.0, 0.0);
    }
    for m in 1..n {
        let m = m as f64;
        let p2 = ((2.0 * m + 1.0) * x * p1 - m * p0) / (m + 1.0);
        let d2 = d0 + (2.0 * m + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_p(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_p(n, x);
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

pub struct Oracle {
    pub edges: Vec<f64>,
    pub s: usize,
}

impl Oracle {
    pub fn n(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn h(&self, j: usize) -> f64 {
        self.edges[j + 1] - self.edges[j]
    }

    /// Orthonormal basis function `i` of cell `j` at reference point `xi`, and its x-derivative.
    pub fn phi(&self, j: usize, i: usize, xi: f64) -> (f64, f64) {
        let h = self.h(j);
        let c = ((2 * i + 1) as f64 / h).sqrt();
        let (p, dp) = legendre_p(i, xi);
        (c * p, c * dp * 2.0 / h)
    }

    pub fn idx(&self, j: usize, i: usize) -> usize {
        j * self.s + i
    }

    pub fn d(&self, alpha: f64) -> DMatrix<f64> {
        let (n, s) = (self.n(), self.s);
        let mut m = DMatrix::zeros(n * s, n * s);
        let q = gauss(s + 1);
        for j in 0..n {
            let h = self.h(j);
            for i in 0..s {
                for l in 0..s {
                    let vol: f64 = q.iter().map(|&(x, w)| w * 0.5 * h * self.phi(j, l, x).0 * self.phi(j, i, x).1).sum();
                    m[(self.idx(j, i), self.idx(j, l))] -= vol;
                }
            }
        }
        // each face: û = (1/2 - α) u^- + (1/2 + α) u^+, tested with φ^- of the left cell
        // and -φ^+ of the right cell
        for f in 0..n {
            let (jl, jr) = (f, (f + 1) % n);
            for i in 0..s {
                let vm = self.phi(jl, i, 1.0).0;
                let vp = self.phi(jr, i, -1.0).0;
                for l in 0..s {
                    let um = self.phi(jl, l, 1.0).0;
                    let up = self.phi(jr, l, -1.0).0;
                    m[(self.idx(jl, i), self.idx(jl, l))] += vm * (0.5 - alpha) * um;
                    m[(self.idx(jl, i), self.idx(jr, l))] += vm * (0.5 + alpha) * up;
                    m[(self.idx(jr, i), self.idx(jl, l))] -= vp * (0.5 - alpha) * um;
                    m[(self.idx(jr, i), self.idx(jr, l))] -= vp * (0.5 + alpha) * up;
                }
            }
        }
        m
    }

    pub fn l(&self) -> DMatrix<f64> {
        let (n, s) = (self.n(), self.s);
        let mut m = DMatrix::zeros(n * s, n * s);
        for f in 0..n {
            let (jl, jr) = (f, (f + 1) % n);
            for i in 0..s {
                let vm = self.phi(jl, i, 1.0).0;
                let vp = self.phi(jr, i, -1.0).0;
                for l in 0..s {
                    let um = self.phi(jl, l, 1.0).0;
                    let up = self.phi(jr, l, -1.0).0;
                    // [u] = u^+ - u^-
                    m[(self.idx(jl, i), self.idx(jr, l))] += vm * up;
                    m[(self.idx(jl, i), self.idx(jl, l))] -= vm * um;
                    m[(self.idx(jr, i), self.idx(jr, l))] -= vp * up;
                    m[(self.idx(jr, i), self.idx(jl, l))] += vp * um;
                }
            }
        }
        m
    }

    pub fn eval(&self, c: &[f64], j: usize, xi: f64) -> f64 {
        (0..self.s).map(|i| c[self.idx(j, i)] * self.phi(j, i, xi).0).sum()
    }

    /// L² projection of the pointwise product of DG functions.
    pub fn product(&self, fields: &[&[f64]]) -> Vec<f64> {
        let q = gauss(self.s * (fields.len() + 1));
        let mut out = vec![0.0; self.n() * self.s];
        for j in 0..self.n() {
            let h = self.h(j);
            for i in 0..self.s {
                out[self.idx(j, i)] = q
                    .iter()
                    .map(|&(x, w)| {
                        let p: f64 = fields.iter().map(|f| self.eval(f, j, x)).product();
                        w * 0.5 * h * p * self.phi(j, i, x).0
                    })
                    .sum();
            }
        }
        out
    }
}

pub fn meshes(n: usize) -> Vec<Mesh1D> {
    let uniform = Mesh1D::build((0.0, 2.0), n, MeshPattern::Uniform).unwrap();
    let mut edges: Vec<f64> = (0..=n).map(|i| 2.0 * i as f64 / n as f64).collect();
    for (i, e) in edges.iter_mut().enumerate().take(n).skip(1) {
        *e += 0.37 / n as f64 * if i % 2 == 0 { 1.0 } else { -0.6 };
    }
    vec![uniform, Mesh1D::from_edges(edges).unwrap()]
}

pub fn setup(mesh: Mesh1D, k: usize) -> (Arc<DgSpace>, Oracle) {
    let oracle = Oracle {
        edges: mesh.edges().to_vec(),
        s: k + 1,
    };
    (Arc::new(DgSpace::new(Arc::new(mesh), k).unwrap()), oracle)
}

pub fn close(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

pub fn pseudo_random(len: usize, seed: u64) -> Vec<f64> {
    let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..len)
        .map(|_| {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (x >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
        .collect()
}


/// Largest relative deviation of the banded assemblies from the dense oracle over
/// every case: `D_α`, `L`, compositions, application and projected products.
pub fn max_oracle_error() -> f64 {
    let mut worst = 0.0f64;
    for (n, k) in CASES {
        for mesh in meshes(n) {
            let (sp, o) = setup(mesh, k);
            for alpha in [0.0, 0.5, -0.5, 0.25, 1.3] {
                worst = worst.max(close(&assemble_d(&sp, alpha).to_dense(), &o.d(alpha)));
            }
            worst = worst.max(close(&assemble_l(&sp).to_dense(), &o.l()));
            let d0 = assemble_d(&sp, 0.0);
            let da = assemble_d(&sp, 0.5);
            let l = assemble_l(&sp);
            let pairs: [(&BlockOperator, &BlockOperator, DMatrix<f64>); 3] = [
                (&d0, &d0, o.d(0.0) * o.d(0.0)),
                (&d0, &l, o.d(0.0) * o.l()),
                (&l, &da, o.l() * o.d(0.5)),
            ];
            for (a, b, want) in pairs {
                worst = worst.max(close(&a.compose(b).unwrap().to_dense(), &want));
            }
            let x = pseudo_random(sp.ndof(), 5);
            let y = pseudo_random(sp.ndof(), 6);
            let got = sp.product(&[&x, &y]);
            let want = o.product(&[&x, &y]);
            let scale = want.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (g, w) in got.iter().zip(&want) {
                worst = worst.max((g - w).abs() / scale);
            }
        }
    }
    worst
}
