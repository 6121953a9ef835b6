use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

use super::block::{BandedOperator, BlockOperator};

/// Pivots below this fraction of `max|A|` mark the matrix as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Systems at most this large are factored densely.
const DENSE_LIMIT: usize = 64;

/// LU factors of a banded matrix with partial pivoting (LAPACK `gbtrf` layout:
/// after pivoting `U` has upper bandwidth `kl + ku`).
#[derive(Clone, Debug)]
struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    a: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    fn factor(n: usize, kl: usize, ku: usize, entries: impl Fn(&mut dyn FnMut(usize, usize, f64))) -> Result<Self> {
        let width = 2 * kl + ku + 1;
        let mut lu = BandLu {
            n,
            kl,
            ku,
            width,
            a: vec![0.0; n * width],
            piv: vec![0; n],
        };
        let mut amax = 0.0f64;
        entries(&mut |i, j, v| {
            debug_assert!(j + kl >= i && j <= i + ku);
            let k = lu.idx(i, j);
            lu.a[k] += v;
        });
        for v in &lu.a {
            amax = amax.max(v.abs());
        }
        if amax == 0.0 {
            return Err(Error::Singular { pivot: 0.0 });
        }
        for c in 0..n {
            let last = (c + kl).min(n - 1);
            let mut p = c;
            let mut best = lu.a[lu.idx(c, c)].abs();
            for r in c + 1..=last {
                let v = lu.a[lu.idx(r, c)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= SINGULAR_TOL * amax {
                return Err(Error::Singular { pivot: best / amax });
            }
            lu.piv[c] = p;
            let cmax = (c + kl + ku).min(n - 1);
            if p != c {
                for j in c..=cmax {
                    let (x, y) = (lu.idx(c, j), lu.idx(p, j));
                    lu.a.swap(x, y);
                }
            }
            let d = lu.a[lu.idx(c, c)];
            for r in c + 1..=last {
                let irc = lu.idx(r, c);
                let m = lu.a[irc] / d;
                lu.a[irc] = m;
                if m == 0.0 {
                    continue;
                }
                for j in c + 1..=cmax {
                    let u = lu.a[lu.idx(c, j)];
                    let k = lu.idx(r, j);
                    lu.a[k] -= m * u;
                }
            }
        }
        Ok(lu)
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for c in 0..n {
            let p = self.piv[c];
            if p != c {
                b.swap(c, p);
            }
            let bc = b[c];
            if bc != 0.0 {
                for r in c + 1..=(c + self.kl).min(n - 1) {
                    b[r] -= self.a[self.idx(r, c)] * bc;
                }
            }
        }
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in i + 1..=(i + self.kl + self.ku).min(n - 1) {
                acc -= self.a[self.idx(i, j)] * b[j];
            }
            b[i] = acc / self.a[self.idx(i, i)];
        }
    }
}

/// Position of cell `j` in the interleaved ordering `0, n-1, 1, n-2, ...`, which turns a
/// periodic band of width `w` into an ordinary band of width `2w`.
fn interleave(j: usize, n: usize) -> usize {
    if 2 * j < n {
        2 * j
    } else {
        2 * (n - 1 - j) + 1
    }
}

#[derive(Clone, Debug)]
enum Factors {
    Dense(nalgebra::linalg::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    Banded { lu: BandLu, s: usize, n: usize },
}

/// A factored nonsingular operator.
#[derive(Clone, Debug)]
pub struct LinearSolver {
    dim: usize,
    factors: Factors,
}

impl LinearSolver {
    pub fn factorize(op: &BlockOperator) -> Result<Self> {
        Self::factorize_perturbed(op, &[])
    }

    /// Factors `op + Σ c e_i e_j^T` for the given `(i, j, c)` triples.
    pub fn factorize_perturbed(op: &BlockOperator, extra: &[(usize, usize, f64)]) -> Result<Self> {
        let dim = op.dim();
        match op {
            BlockOperator::Banded(b) if dim > DENSE_LIMIT && b.n_cells() > 4 * b.bandwidth() + 2 => {
                Self::banded(b, extra)
            }
            _ => {
                let mut m = op.to_dense();
                for &(i, j, c) in extra {
                    m[(i, j)] += c;
                }
                Self::dense(m)
            }
        }
    }

    fn dense(m: DMatrix<f64>) -> Result<Self> {
        let dim = m.nrows();
        let amax = m.amax();
        if amax == 0.0 {
            return Err(Error::Singular { pivot: 0.0 });
        }
        let lu = m.lu();
        let u = lu.u();
        for i in 0..dim {
            if u[(i, i)].abs() <= SINGULAR_TOL * amax {
                return Err(Error::Singular { pivot: u[(i, i)].abs() / amax });
            }
        }
        Ok(LinearSolver {
            dim,
            factors: Factors::Dense(lu),
        })
    }

    fn banded(b: &BandedOperator, extra: &[(usize, usize, f64)]) -> Result<Self> {
        let n = b.n_cells();
        let s = b.block_size();
        let w = b.bandwidth() as isize;
        let half = (2 * b.bandwidth() + 1) * s - 1;
        // single-entry perturbations may couple arbitrary cells; widen the band to cover them
        let mut kl = half;
        let mut ku = half;
        let pos = |i: usize| interleave(i / s, n) * s + i % s;
        for &(i, j, _) in extra {
            let (pi, pj) = (pos(i), pos(j));
            if pi > pj {
                kl = kl.max(pi - pj);
            } else {
                ku = ku.max(pj - pi);
            }
        }
        let dim = n * s;
        let lu = BandLu::factor(dim, kl, ku, |put| {
            for j in 0..n {
                let pj = interleave(j, n);
                for p in -w..=w {
                    let c = (j as isize + p).rem_euclid(n as isize) as usize;
                    let pc = interleave(c, n);
                    for a in 0..s {
                        for bb in 0..s {
                            let v = b.entry(j, p, a, bb);
                            if v != 0.0 {
                                put(pj * s + a, pc * s + bb, v);
                            }
                        }
                    }
                }
            }
            for &(i, j, c) in extra {
                put(pos(i), pos(j), c);
            }
        })?;
        Ok(LinearSolver {
            dim,
            factors: Factors::Banded { lu, s, n },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        match &self.factors {
            Factors::Dense(lu) => {
                let mut v = DVector::from_column_slice(b);
                lu.solve_mut(&mut v);
                b.copy_from_slice(v.as_slice());
            }
            Factors::Banded { lu, s, n } => {
                let mut p = vec![0.0; self.dim];
                for j in 0..*n {
                    let pj = interleave(j, *n);
                    p[pj * s..(pj + 1) * s].copy_from_slice(&b[j * s..(j + 1) * s]);
                }
                lu.solve_in_place(&mut p);
                for j in 0..*n {
                    let pj = interleave(j, *n);
                    b[j * s..(j + 1) * s].copy_from_slice(&p[pj * s..(pj + 1) * s]);
                }
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn orthonormalize(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut u = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = dot(&u, q);
                u.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nu = norm(&u);
        if nu > 1e-12 * norm(v).max(f64::MIN_POSITIVE) {
            u.iter_mut().for_each(|x| *x /= nu);
            out.push(u);
        }
    }
    out
}

/// Greedy complete pivoting on the rows of `basis`: returns `r` coordinates on which the
/// kernel restriction is well conditioned.
fn pick_coordinates(basis: &[Vec<f64>]) -> Vec<usize> {
    let mut rows: Vec<Vec<f64>> = basis.to_vec();
    let mut picked = Vec::new();
    for t in 0..rows.len() {
        let (mut bi, mut br, mut bv) = (0, t, -1.0);
        for (r, row) in rows.iter().enumerate().skip(t) {
            for (i, v) in row.iter().enumerate() {
                if v.abs() > bv {
                    bv = v.abs();
                    bi = i;
                    br = r;
                }
            }
        }
        rows.swap(t, br);
        let piv = rows[t].clone();
        for row in rows.iter_mut().skip(t + 1) {
            let m = row[bi] / piv[bi];
            row.iter_mut().zip(&piv).for_each(|(x, y)| *x -= m * y);
        }
        picked.push(bi);
    }
    picked
}

/// Minimum-norm inverse of a singular operator with known kernel and left kernel.
///
/// Factors `A + c Σ e_{p_t} e_{q_t}^T`, where `p_t` and `q_t` are coordinates on which the
/// left and right kernels restrict to nonsingular matrices. For `b ⊥ ker A^T` the solution
/// `x` of the perturbed system satisfies `A x = b` exactly, and removing its kernel part
/// gives the Moore–Penrose solution.
#[derive(Clone, Debug)]
pub struct DeflatedSolver {
    solver: LinearSolver,
    kernel: Vec<Vec<f64>>,
    left_kernel: Vec<Vec<f64>>,
}

/// Relative size of the left-kernel component above which a right-hand side is rejected.
pub const CONSISTENCY_TOL: f64 = 1e-10;

impl DeflatedSolver {
    pub fn new(op: &BlockOperator, kernel: &[Vec<f64>], left_kernel: &[Vec<f64>]) -> Result<Self> {
        let kernel = orthonormalize(kernel);
        let left_kernel = orthonormalize(left_kernel);
        if kernel.len() != left_kernel.len() {
            return Err(Error::DimensionMismatch(format!(
                "kernel dimension {} differs from left kernel dimension {}",
                kernel.len(),
                left_kernel.len()
            )));
        }
        let scale = op.to_dense_amax();
        let p = pick_coordinates(&left_kernel);
        let q = pick_coordinates(&kernel);
        let extra: Vec<(usize, usize, f64)> =
            p.iter().zip(&q).map(|(&i, &j)| (i, j, scale)).collect();
        let solver = LinearSolver::factorize_perturbed(op, &extra)?;
        Ok(DeflatedSolver {
            solver,
            kernel,
            left_kernel,
        })
    }

    /// For skew or symmetric operators the left kernel is the kernel.
    pub fn with_symmetric_kernel(op: &BlockOperator, kernel: &[Vec<f64>]) -> Result<Self> {
        Self::new(op, kernel, kernel)
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    pub fn left_kernel(&self) -> &[Vec<f64>] {
        &self.left_kernel
    }

    /// Orthogonal projection onto `range(A) = (ker A^T)^⊥`.
    pub fn project_to_range(&self, b: &mut [f64]) {
        for l in &self.left_kernel {
            let c = dot(b, l);
            b.iter_mut().zip(l).for_each(|(x, y)| *x -= c * y);
        }
    }

    /// Removes the kernel component.
    pub fn project_out_kernel(&self, x: &mut [f64]) {
        for k in &self.kernel {
            let c = dot(x, k);
            x.iter_mut().zip(k).for_each(|(v, y)| *v -= c * y);
        }
    }

    /// Solves `A x = b` with `x ⊥ ker A`. Fails if `b` has a left-kernel component.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let nb = norm(b);
        for l in &self.left_kernel {
            let c = dot(b, l).abs();
            if c > CONSISTENCY_TOL * nb {
                return Err(Error::InconsistentRhs { component: c / nb });
            }
        }
        let mut x = b.to_vec();
        self.project_to_range(&mut x);
        self.solver.solve_in_place(&mut x);
        self.project_out_kernel(&mut x);
        Ok(x)
    }

    /// Pseudo-inverse: solves with `b` replaced by its projection onto the range.
    pub fn solve_projected(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.project_to_range(&mut x);
        self.solver.solve_in_place(&mut x);
        self.project_out_kernel(&mut x);
        x
    }
}

impl BlockOperator {
    fn to_dense_amax(&self) -> f64 {
        match self {
            BlockOperator::Banded(b) => {
                let mut m = 0.0f64;
                let w = b.bandwidth() as isize;
                let s = b.block_size();
                for j in 0..b.n_cells() {
                    for p in -w..=w {
                        for a in 0..s {
                            for c in 0..s {
                                m = m.max(b.entry(j, p, a, c).abs());
                            }
                        }
                    }
                }
                m
            }
            BlockOperator::Dense(d) => d.amax(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_basis::{DgSpace, Mesh1D, MeshPattern};
    use crate::operators::{assemble_d, assemble_l, d_kernel};
    use std::sync::Arc;

    fn space(n: usize, k: usize, pattern: MeshPattern) -> DgSpace {
        let mesh = Mesh1D::build((0.0, 2.0 * std::f64::consts::PI), n, pattern).unwrap();
        DgSpace::new(Arc::new(mesh), k).unwrap()
    }

    fn residual(op: &BlockOperator, x: &[f64], b: &[f64]) -> f64 {
        let y = op.apply(x);
        y.iter().zip(b).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn banded_solve_matches_operator() {
        for &(n, k) in &[(40, 1), (41, 2), (30, 3)] {
            let sp = space(n, k, MeshPattern::Uniform);
            let d0 = assemble_d(&sp, 0.0);
            let a = d0.compose(&d0).unwrap().shift_identity(-0.01);
            let solver = LinearSolver::factorize(&a).unwrap();
            assert!(matches!(solver.factors, Factors::Banded { .. }));
            let b: Vec<f64> = (0..sp.ndof()).map(|i| ((i * 7 % 13) as f64) - 6.0).collect();
            let x = solver.solve(&b);
            assert!(residual(&a, &x, &b) < 1e-10);
        }
    }

    #[test]
    fn banded_pivoting_handles_skew_blocks() {
        let sp = space(50, 0, MeshPattern::Uniform);
        let d = assemble_d(&sp, 0.5);
        let solver = DeflatedSolver::with_symmetric_kernel(&d, &d_kernel(&sp, 0.5)).unwrap();
        let mut b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        solver.project_to_range(&mut b);
        let x = solver.solve(&b).unwrap();
        assert!(residual(&d, &x, &b) < 1e-10);
    }

    #[test]
    fn deflated_central_derivative() {
        for &(n, k) in &[(4, 1), (8, 2), (9, 2), (40, 1), (41, 1), (40, 2), (3, 0), (2, 0)] {
            for pattern in [MeshPattern::Uniform, MeshPattern::TwoOneAlternating] {
                if pattern == MeshPattern::TwoOneAlternating && n % 2 == 1 {
                    continue;
                }
                let sp = space(n, k, pattern);
                let d0 = assemble_d(&sp, 0.0);
                let ker = d_kernel(&sp, 0.0);
                let solver = DeflatedSolver::with_symmetric_kernel(&d0, &ker).unwrap();
                let u = sp.project_fn(|x| (2.0 * x).cos() + 0.3 * x.sin());
                let b = d0.apply(&u);
                let x = solver.solve(&b).unwrap();
                assert!(residual(&d0, &x, &b) < 1e-10, "n={n} k={k}");
                for kv in &ker {
                    assert!(dot(&x, kv).abs() < 1e-10);
                }
                let mut bad = b.clone();
                bad.iter_mut().zip(&ker[0]).for_each(|(v, o)| *v += o);
                assert!(matches!(solver.solve(&bad), Err(Error::InconsistentRhs { .. })));
                let y = solver.solve_projected(&bad);
                assert!(residual(&d0, &y, &b) < 1e-10);
            }
        }
    }

    #[test]
    fn singular_detection() {
        let sp = space(20, 1, MeshPattern::Uniform);
        let l = assemble_l(&sp);
        assert!(matches!(LinearSolver::factorize(&l), Err(Error::Singular { .. })));
        let sp = space(3, 1, MeshPattern::Uniform);
        let d = assemble_d(&sp, 0.0);
        assert!(matches!(LinearSolver::factorize(&d), Err(Error::Singular { .. })));
    }
}
