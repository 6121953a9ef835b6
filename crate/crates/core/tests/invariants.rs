use std::sync::Arc;

use msdg::flux::{interface_residuals, FluxSpec, Traces};
use msdg::harness::compute_order;
use msdg::mesh_basis::{DgSpace, Mesh1D};
use msdg::operators::{assemble_d, assemble_l};
use msdg::time_integration::Filter;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn mesh_strategy() -> impl Strategy<Value = Mesh1D> {
    (2usize..10)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(-0.35f64..0.35, n - 1)))
        .prop_map(|(n, shifts)| {
            let h = 1.0 / n as f64;
            let mut edges: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
            for (e, s) in edges[1..n].iter_mut().zip(shifts) {
                *e += s * h;
            }
            Mesh1D::from_edges(edges).unwrap()
        })
}

fn space_strategy() -> impl Strategy<Value = Arc<DgSpace>> {
    (mesh_strategy(), 0usize..5).prop_map(|(m, k)| Arc::new(DgSpace::new(Arc::new(m), k).unwrap()))
}

fn with_vectors(count: usize) -> impl Strategy<Value = (Arc<DgSpace>, Vec<Vec<f64>>)> {
    space_strategy().prop_flat_map(move |sp| {
        let nd = sp.ndof();
        (Just(sp), prop::collection::vec(prop::collection::vec(-1.0f64..1.0, nd), count))
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn jumps(sp: &DgSpace, u: &[f64]) -> Vec<f64> {
    let n = sp.n_cells();
    (0..n).map(|j| sp.left_trace(u, (j + 1) % n) - sp.right_trace(u, j)).collect()
}

fn matrix(m: usize, vals: &[f64], sym: f64) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(m, m);
    let mut it = vals.iter();
    for i in 0..m {
        for j in i..m {
            let v = *it.next().unwrap();
            if i == j {
                a[(i, i)] = if sym > 0.0 { v } else { 0.0 };
            } else {
                a[(i, j)] = v;
                a[(j, i)] = sym * v;
            }
        }
    }
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d_alpha_transpose_is_minus_d_minus_alpha(sp in space_strategy(), alpha in -1.5f64..1.5) {
        let a = assemble_d(&sp, alpha).to_dense();
        let b = assemble_d(&sp, -alpha).to_dense();
        prop_assert!((a.transpose() + b).amax() < 1e-12 * a.amax().max(1.0));
    }

    #[test]
    fn d_alpha_annihilates_constants(sp in space_strategy(), alpha in -1.5f64..1.5) {
        let y = assemble_d(&sp, alpha).apply(&sp.ones());
        let scale = 1.0 / sp.mesh().h_min();
        prop_assert!(y.iter().all(|v| v.abs() < 1e-12 * scale));
    }

    #[test]
    fn lift_pairs_jumps((sp, v) in with_vectors(2)) {
        let l = assemble_l(&sp);
        let lhs = dot(&l.apply(&v[0]), &v[1]);
        let rhs: f64 = -dot(&jumps(&sp, &v[0]), &jumps(&sp, &v[1]));
        prop_assert!((lhs - rhs).abs() < 1e-11 * (1.0 + rhs.abs()));
        prop_assert!(dot(&l.apply(&v[0]), &v[0]) <= 1e-12);
    }

    #[test]
    fn central_derivative_is_skew((sp, v) in with_vectors(2)) {
        let d0 = assemble_d(&sp, 0.0);
        let s = dot(&d0.apply(&v[0]), &v[1]) + dot(&v[0], &d0.apply(&v[1]));
        prop_assert!(s.abs() < 1e-10 / sp.mesh().h_min());
    }

    #[test]
    fn alternating_pair_sums_to_twice_central((sp, v) in with_vectors(1), alpha in -1.0f64..1.0) {
        let a = assemble_d(&sp, alpha).apply(&v[0]);
        let b = assemble_d(&sp, -alpha).apply(&v[0]);
        let c = assemble_d(&sp, 0.0).apply(&v[0]);
        for i in 0..a.len() {
            prop_assert!((a[i] + b[i] - 2.0 * c[i]).abs() < 1e-10 / sp.mesh().h_min());
        }
    }

    #[test]
    fn filter_never_amplifies(
        strength in 0.0f64..50.0,
        order in 1u32..10,
        k in 0usize..6,
        dt in 0.0f64..1.0,
        y in prop::collection::vec(-10.0f64..10.0, 1..8),
    ) {
        let f = Filter { strength, order };
        let mut z: Vec<f64> = y.iter().cycle().take((k + 1) * 3).copied().collect();
        let before = z.clone();
        f.apply(&mut z, k, dt);
        for (a, b) in z.iter().zip(&before) {
            prop_assert!(a.abs() <= b.abs());
        }
        // the cell mean is untouched
        for c in 0..3 {
            prop_assert_eq!(z[c * (k + 1)], before[c * (k + 1)]);
        }
        let mut w = before.clone();
        Filter { strength: 0.0, order }.apply(&mut w, k, dt);
        prop_assert_eq!(w, before);
    }

    #[test]
    fn observed_order_of_power_laws(p in 0.5f64..6.0, c in 1e-6f64..10.0, n0 in 5usize..50) {
        let ns = [n0, 2 * n0, 4 * n0, 8 * n0];
        let errs: Vec<f64> = ns.iter().map(|&n| c * (n as f64).powf(-p)).collect();
        let orders = compute_order(&errs, &ns).unwrap();
        prop_assert_eq!(orders.len(), 3);
        for o in orders {
            prop_assert!((o - p).abs() < 1e-9);
        }
    }

    #[test]
    fn interface_identities_hold(
        m in 2usize..7,
        vals in prop::collection::vec(-1.0f64..1.0, 3 * 21 + 4 * 2 * 6),
    ) {
        let tri = m * (m + 1) / 2;
        let k = matrix(m, &vals[..tri], -1.0);
        let a = matrix(m, &vals[21..21 + tri], 1.0);
        let b = matrix(m, &vals[42..42 + tri], -1.0);
        let spec = FluxSpec::new(a, b).unwrap();
        let tr = |o: usize| -> Vec<f64> { vals[63 + o * 6..63 + o * 6 + m].to_vec() };
        let z = Traces::new(tr(0), tr(1), tr(2), tr(3));
        let zc = Traces::new(tr(4), tr(5), tr(6), tr(7));
        let (r1, r2) = interface_residuals(&k, &spec, &z, &zc).unwrap();
        prop_assert!(r1.abs() < 1e-13 && r2.abs() < 1e-13, "{r1:e} {r2:e}");
    }
}
