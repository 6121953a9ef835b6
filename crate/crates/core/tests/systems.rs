use std::sync::Arc;

use msdg::mesh_basis::{DgSpace, Mesh1D, MeshPattern};
use msdg::systems::{
    build_reduced_scheme, build_reduced_scheme_on, flux_presets, FluxScalars, ModelKind, ModelParams, Profile,
    ReducedScheme,
};
use msdg::verification::{dg_row_residuals, general_energy, jittered_mesh, random_state, reduced_form_energy, sweep_params};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn every_scheme(seed: u64) -> Vec<(String, Box<dyn ReducedScheme>, ChaCha8Rng)> {
    let mut out = Vec::new();
    for kind in ModelKind::ALL {
        for p in flux_presets(kind) {
            let grid = p.grid.clone().unwrap_or_else(|| vec![(6, 1), (6, 2), (5, 3)]);
            for (n, k) in grid {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n * 31 + k) as u64);
                let mesh = Arc::new(jittered_mesh(n, &mut rng).unwrap());
                let scheme = build_reduced_scheme(&sweep_params(kind), mesh, k, &p.scalars).unwrap();
                out.push((format!("{kind} {} N={n} k={k}", p.name), scheme, rng));
            }
        }
    }
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn reduced_schemes_solve_the_full_dg_system() {
    for (label, scheme, mut rng) in every_scheme(11) {
        let s = random_state(scheme.as_ref(), &mut rng);
        let r = dg_row_residuals(scheme.as_ref(), &s).unwrap();
        let worst = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(worst < 1e-10, "{label}: {worst:e}");
    }
}

#[test]
fn tangent_matches_central_differences() {
    for (label, scheme, mut rng) in every_scheme(12) {
        let s = random_state(scheme.as_ref(), &mut rng);
        let d = random_state(scheme.as_ref(), &mut rng);
        let eps = 1e-5;
        let plus: Vec<f64> = s.iter().zip(&d).map(|(a, b)| a + eps * b).collect();
        let minus: Vec<f64> = s.iter().zip(&d).map(|(a, b)| a - eps * b).collect();
        let (fp, fm) = (scheme.rhs(0.0, &plus).unwrap(), scheme.rhs(0.0, &minus).unwrap());
        let fd: Vec<f64> = fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
        let t = scheme.tangent_rhs(&s, &d).unwrap();
        let diff: Vec<f64> = fd.iter().zip(&t).map(|(a, b)| a - b).collect();
        assert!(norm(&diff) < 1e-6 * norm(&t).max(1.0), "{label}: {:e}", norm(&diff) / norm(&t));
    }
}

#[test]
fn energy_is_stationary_along_the_flow() {
    for (label, scheme, mut rng) in every_scheme(13) {
        let s = random_state(scheme.as_ref(), &mut rng);
        let mut f = scheme.rhs(0.0, &s).unwrap();
        let mut d = random_state(scheme.as_ref(), &mut rng);
        // unit directions keep the difference quotient in its asymptotic range
        let (nf, nd) = (norm(&f), norm(&d));
        f.iter_mut().for_each(|v| *v /= nf);
        d.iter_mut().for_each(|v| *v /= nd);
        let eps = 1e-4;
        let dir = |v: &[f64]| {
            let p: Vec<f64> = s.iter().zip(v).map(|(a, b)| a + eps * b).collect();
            let m: Vec<f64> = s.iter().zip(v).map(|(a, b)| a - eps * b).collect();
            (scheme.energy(&p).unwrap() - scheme.energy(&m).unwrap()) / (2.0 * eps)
        };
        let generic = dir(&d);
        let along = dir(&f);
        assert!(along.abs() < 1e-7 * generic.abs().max(1.0), "{label}: {along:e} vs {generic:e}");
    }
}

#[test]
fn energy_forms_agree() {
    for (label, scheme, mut rng) in every_scheme(14) {
        let s = random_state(scheme.as_ref(), &mut rng);
        let e = scheme.energy(&s).unwrap();
        let g = general_energy(scheme.as_ref(), &s).unwrap();
        let r = reduced_form_energy(scheme.as_ref(), &s).unwrap();
        let tol = 1e-11 * e.abs().max(1.0);
        assert!((e - g).abs() < tol && (e - r).abs() < tol, "{label}: {e} {g} {r}");
    }
}

#[test]
fn nls_charge_is_a_quadratic_invariant() {
    let mesh = Arc::new(Mesh1D::build((0.0, std::f64::consts::TAU), 8, MeshPattern::Uniform).unwrap());
    for p in flux_presets(ModelKind::Nls) {
        let scheme = build_reduced_scheme(&ModelKind::Nls.default_params(), mesh.clone(), 2, &p.scalars).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_state(scheme.as_ref(), &mut rng);
        let f = scheme.rhs(0.0, &s).unwrap();
        let q = scheme.charge(&s).unwrap();
        assert!((q - s.iter().map(|v| v * v).sum::<f64>()).abs() < 1e-12 * q, "{q}");
        // dQ/dt = 2 s·f for the orthonormal basis
        let rate: f64 = s.iter().zip(&f).map(|(a, b)| a * b).sum();
        assert!(rate.abs() < 1e-10 * norm(&s) * norm(&f), "{}: {rate:e}", p.name);
    }
}

#[test]
fn constant_states_are_steady() {
    // V'(c) for the wave potential is constant in space, so u_tt is the constant V'(c)
    let mesh = Arc::new(Mesh1D::build((0.0, 1.0), 6, MeshPattern::Uniform).unwrap());
    for kind in [ModelKind::Kdv, ModelKind::Bbm, ModelKind::Ch, ModelKind::BbmKdv] {
        let scheme = build_reduced_scheme(&kind.default_params(), mesh.clone(), 2, &FluxScalars::central()).unwrap();
        let s: Vec<f64> = scheme.space().project_fn(|_| 0.7);
        let f = scheme.rhs(0.0, &s).unwrap();
        assert!(norm(&f) < 1e-10, "{kind}: {:e}", norm(&f));
    }
    let params = sweep_params(ModelKind::Wave);
    let scheme = build_reduced_scheme(&params, mesh, 2, &FluxScalars::central()).unwrap();
    let sp = scheme.space().clone();
    let mut s = sp.project_fn(|_| 0.4);
    s.extend(vec![0.0; sp.ndof()]);
    let f = scheme.rhs(0.0, &s).unwrap();
    let ModelParams::Wave { potential } = &params else { unreachable!() };
    let want = sp.project_fn(|_| potential.d1(0.4));
    let got = &f[sp.ndof()..];
    assert!(got.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn schemes_reject_foreign_flux_scalars() {
    let mesh = Arc::new(Mesh1D::build((0.0, 1.0), 5, MeshPattern::Uniform).unwrap());
    let bad = FluxScalars {
        alpha11: 1.0,
        ..FluxScalars::default()
    };
    for kind in [ModelKind::Kdv, ModelKind::Bbm, ModelKind::Ch, ModelKind::Nls, ModelKind::BbmKdv] {
        assert!(build_reduced_scheme(&kind.default_params(), mesh.clone(), 2, &bad).is_err(), "{kind}");
    }
}

#[test]
fn projected_exact_solution_has_small_residual() {
    // for the forced CH solution the semi-discrete rhs approximates u_t = cos(x + t)
    let mut prev = f64::INFINITY;
    for n in [20, 40, 80] {
        let mesh = Arc::new(Mesh1D::build((0.0, std::f64::consts::TAU), n, MeshPattern::Uniform).unwrap());
        let space = Arc::new(DgSpace::with_product_degree(mesh, 2, 3).unwrap());
        let scheme =
            build_reduced_scheme_on(&ModelParams::Ch { forcing: true }, space.clone(), &FluxScalars::central()).unwrap();
        let prof = Profile::Sine {
            amplitude: 1.0,
            wavenumber: 1.0,
            speed: 1.0,
        };
        let s = scheme.initial_state(&prof, 0.3);
        let f = scheme.rhs(0.3, &s).unwrap();
        let err = space.l2_error(&f, |x| prof.dt(x, 0.3));
        assert!(err < prev / 3.0, "N={n}: {err:e}");
        prev = err;
    }
}

#[test]
fn random_states_are_reproducible() {
    let mesh = Arc::new(Mesh1D::build((0.0, 1.0), 4, MeshPattern::Uniform).unwrap());
    let scheme = build_reduced_scheme(&ModelKind::Bbm.default_params(), mesh, 1, &FluxScalars::central()).unwrap();
    let a = random_state(scheme.as_ref(), &mut ChaCha8Rng::seed_from_u64(9));
    let b = random_state(scheme.as_ref(), &mut ChaCha8Rng::seed_from_u64(9));
    assert_eq!(a, b);
}
