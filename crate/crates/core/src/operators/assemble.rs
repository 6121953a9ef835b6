use crate::mesh_basis::DgSpace;

use super::block::{BandedOperator, BlockOperator};

/// The weak derivative `D_α`: `(D_α u, v) = -∫ u v_x + Σ_j û_{j+1/2} [v]`-style
/// lifting with the one-parameter trace `û = (1/2 + α) u^+ + (1/2 - α) u^-`.
///
/// Row `i` of cell `j` is
/// `-∫_{I_j} u φ_i' + û_{j+1/2} φ_i(x_{j+1/2}^-) - û_{j-1/2} φ_i(x_{j-1/2}^+)`.
pub fn assemble_d(space: &DgSpace, alpha: f64) -> BlockOperator {
    let n = space.n_cells();
    let s = space.block();
    let mut m = BandedOperator::zeros(n, s, 1);
    let wp = 0.5 + alpha;
    let wm = 0.5 - alpha;
    for j in 0..n {
        let h = space.mesh().width(j);
        let jn = (j + 1) % n;
        let jp = (j + n - 1) % n;
        for i in 0..s {
            let ri = space.right_value(j, i);
            let li = space.left_value(j, i);
            for l in 0..s {
                let mut vol = 0.0;
                if l < i && (i + l) % 2 == 1 {
                    vol = 2.0 * (((2 * l + 1) * (2 * i + 1)) as f64).sqrt() / h;
                }
                *m.entry_mut(j, 0, i, l) +=
                    -vol + wm * ri * space.right_value(j, l) - wp * li * space.left_value(j, l);
                *m.entry_mut(j, 1, i, l) += wp * ri * space.left_value(jn, l);
                *m.entry_mut(j, -1, i, l) += -wm * li * space.right_value(jp, l);
            }
        }
    }
    BlockOperator::Banded(m)
}

/// The jump lift `L`, `(L u, v) = -Σ_j [u]_{j+1/2} [v]_{j+1/2}` with `[u] = u^+ - u^-`.
pub fn assemble_l(space: &DgSpace) -> BlockOperator {
    let n = space.n_cells();
    let s = space.block();
    let mut m = BandedOperator::zeros(n, s, 1);
    for j in 0..n {
        let jn = (j + 1) % n;
        let jp = (j + n - 1) % n;
        for i in 0..s {
            let ri = space.right_value(j, i);
            let li = space.left_value(j, i);
            for l in 0..s {
                *m.entry_mut(j, 0, i, l) +=
                    -ri * space.right_value(j, l) - li * space.left_value(j, l);
                *m.entry_mut(j, 1, i, l) += ri * space.left_value(jn, l);
                *m.entry_mut(j, -1, i, l) += li * space.right_value(jp, l);
            }
        }
    }
    BlockOperator::Banded(m)
}

/// A basis of `ker D_α` (which is also the left kernel, as `D_α^T = -D_{-α}` and the
/// kernel of `D_{-α}` has the same description).
///
/// Constants always lie in the kernel; for `α = 0` the sign-patterned top mode
/// joins them when `k` is odd or `N` is even.
pub fn d_kernel(space: &DgSpace, alpha: f64) -> Vec<Vec<f64>> {
    let mut k = vec![space.ones()];
    if alpha == 0.0 {
        if let Some(psi) = space.central_kernel_mode() {
            k.push(psi);
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_basis::{Mesh1D, MeshPattern};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn space(n: usize, k: usize, pattern: MeshPattern) -> DgSpace {
        let mesh = Mesh1D::build((0.0, 2.0 * PI), n, pattern).unwrap();
        DgSpace::new(Arc::new(mesh), k).unwrap()
    }

    #[test]
    fn transpose_identity() {
        for pattern in [MeshPattern::Uniform, MeshPattern::TwoOneAlternating] {
            let sp = space(6, 2, pattern);
            for &a in &[0.0, 0.5, -0.3] {
                let d = assemble_d(&sp, a).to_dense();
                let dm = assemble_d(&sp, -a).to_dense();
                assert!((d.transpose() + dm).abs().max() < 1e-12);
            }
        }
    }

    #[test]
    fn d_alpha_is_d0_plus_alpha_l() {
        let sp = space(5, 3, MeshPattern::Uniform);
        let d0 = assemble_d(&sp, 0.0).to_dense();
        let l = assemble_l(&sp).to_dense();
        let d = assemble_d(&sp, 0.37).to_dense();
        assert!((d - d0 - l * 0.37).abs().max() < 1e-12);
    }

    #[test]
    fn kernel_vectors() {
        for &(n, k) in &[(4, 1), (5, 1), (4, 2), (5, 2), (4, 0), (6, 3)] {
            for pattern in [MeshPattern::Uniform, MeshPattern::TwoOneAlternating] {
                if pattern == MeshPattern::TwoOneAlternating && n % 2 == 1 {
                    continue;
                }
                let sp = space(n, k, pattern);
                let d0 = assemble_d(&sp, 0.0);
                for v in d_kernel(&sp, 0.0) {
                    let y = d0.apply(&v);
                    assert!(y.iter().all(|x| x.abs() < 1e-12), "n={n} k={k}");
                }
                let dense = d0.to_dense();
                let rank = dense.clone().svd(false, false).rank(1e-9);
                assert_eq!(sp.ndof() - rank, d_kernel(&sp, 0.0).len(), "n={n} k={k}");
                let da = assemble_d(&sp, 0.25).to_dense();
                assert_eq!(da.svd(false, false).rank(1e-9), sp.ndof() - 1);
            }
        }
    }

    #[test]
    fn derivative_of_smooth_function_converges() {
        let mut prev = f64::INFINITY;
        for &n in &[8, 16, 32] {
            let sp = space(n, 2, MeshPattern::Uniform);
            let u = sp.project_fn(f64::sin);
            let du = assemble_d(&sp, 0.5).apply(&u);
            let e = sp.l2_error(&du, f64::cos);
            assert!(e < prev / 3.5);
            prev = e;
        }
    }
}
