use std::sync::Arc;

use msdg::mesh_basis::{Mesh1D, MeshPattern};
use msdg::parallel::Execution;
use msdg::systems::{build_reduced_scheme, FluxScalars, ModelKind, ModelParams};
use msdg::verification::{
    interface_identity_sweep, local_energy_residual, multisymplectic_residual, random_state, tilde_a_asymmetry,
    verification_sweep, write_sweep_csv, SweepOptions, INTERFACE_TOL, SWEEP_TOL,
};
use msdg::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn interface_identities_on_random_data() {
    let r = interface_identity_sweep(2000, 77).unwrap();
    assert_eq!(r.trials, 2000);
    assert!(r.max_relative <= INTERFACE_TOL, "{:e}", r.max_relative);
}

#[test]
fn sweep_is_deterministic_and_parallel_safe() {
    let opts = SweepOptions {
        models: vec![ModelKind::Kdv, ModelKind::Ch],
        draws: 3,
        ..SweepOptions::default()
    };
    let par = verification_sweep(&SweepOptions {
        exec: Execution::Parallel,
        ..opts.clone()
    })
    .unwrap();
    let seq = verification_sweep(&SweepOptions {
        exec: Execution::Sequential,
        ..opts
    })
    .unwrap();
    assert_eq!(par.len(), seq.len());
    // KdV: 3 presets, CH: 2 presets, each on {4, 8} x {1, 2} with 3 draws
    assert_eq!(par.len(), (3 + 2) * 4 * 3);
    for (a, b) in par.iter().zip(&seq) {
        assert_eq!((a.seed, &a.flux), (b.seed, &b.flux));
        assert_eq!(a.residual_ms.to_bits(), b.residual_ms.to_bits());
        assert!(a.residual_ms <= SWEEP_TOL && a.residual_energy <= SWEEP_TOL, "{a:?}");
    }
}

#[test]
fn sweep_csv_has_expected_header() {
    let rows = verification_sweep(&SweepOptions {
        models: vec![ModelKind::Wave],
        cells: vec![4],
        degrees: vec![1],
        draws: 1,
        ..SweepOptions::default()
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    write_sweep_csv(&rows, &path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("model,flux,N,k,seed,residual_ms,residual_energy"));
    assert_eq!(lines.count(), rows.len());
}

#[test]
fn residual_reports_carry_cell_data() {
    let mesh = Arc::new(Mesh1D::build((0.0, 1.0), 6, MeshPattern::Uniform).unwrap());
    let scheme = build_reduced_scheme(&ModelKind::Nls.default_params(), mesh, 2, &FluxScalars::central()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = random_state(scheme.as_ref(), &mut rng);
    let a = random_state(scheme.as_ref(), &mut rng);
    let b = random_state(scheme.as_ref(), &mut rng);
    let ms = multisymplectic_residual(scheme.as_ref(), &s, &a, &b).unwrap();
    assert_eq!(ms.per_cell.len(), 6);
    assert_eq!(ms.flux_terms.len(), 6);
    assert!(ms.scale > 0.0 && ms.relative() < SWEEP_TOL);
    // ω is antisymmetric in the tangent pair
    let swapped = multisymplectic_residual(scheme.as_ref(), &s, &b, &a).unwrap();
    for (x, y) in ms.cell_quantities.iter().zip(&swapped.cell_quantities) {
        assert!((x + y).abs() < 1e-12 * (1.0 + x.abs()));
    }
    let en = local_energy_residual(scheme.as_ref(), &s).unwrap();
    assert!(en.relative() < SWEEP_TOL);
}

#[test]
fn forced_models_are_rejected() {
    let mesh = Arc::new(Mesh1D::build((0.0, 1.0), 4, MeshPattern::Uniform).unwrap());
    let scheme =
        build_reduced_scheme(&ModelParams::Ch { forcing: true }, mesh, 1, &FluxScalars::central()).unwrap();
    let s = vec![0.1; scheme.state_len()];
    assert!(matches!(local_energy_residual(scheme.as_ref(), &s), Err(Error::InvalidConfig(_))));
}

#[test]
fn alternating_tilde_a_is_symmetric() {
    let mesh = Arc::new(Mesh1D::build((0.0, 1.0), 4, MeshPattern::Uniform).unwrap());
    for kind in ModelKind::ALL {
        let scheme = build_reduced_scheme(&kind.default_params(), mesh.clone(), 1, &FluxScalars::central()).unwrap();
        for alpha in [0.0, 0.5, -0.3] {
            assert!(tilde_a_asymmetry(scheme.as_ref(), alpha).unwrap() < 1e-15, "{kind}");
        }
    }
}
