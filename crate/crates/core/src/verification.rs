//! Pointwise-in-time checks of the structure-preservation identities.
//!
//! Everything here works on a single state (and tangent pair) of a [`ReducedScheme`]:
//! time derivatives of the full DG fields come from the reduced right-hand side and
//! its linearization, so no time integration is involved.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

use crate::flux::{
    alternating_a, b_jump_rate, eval_flux, interface_form_f, interface_residuals, FluxSpec, Traces,
};
use crate::mesh_basis::{DgSpace, Mesh1D};
use crate::parallel::{self, Execution};
use crate::systems::{
    build_reduced_scheme_on, flux_presets, FluxScalars, ModelKind, ModelParams, Potential, ReducedScheme,
};
use crate::{Error, Result};

/// Default tolerance of the conservation sweeps.
pub const SWEEP_TOL: f64 = 1e-10;
/// Default tolerance of the interface identities.
pub const INTERFACE_TOL: f64 = 1e-13;

/// Per-cell residual of a local conservation law.
#[derive(Clone, Debug, Default)]
pub struct ConservationReport {
    pub per_cell: Vec<f64>,
    pub max_abs: f64,
    /// Largest magnitude among the terms that enter the residual.
    pub scale: f64,
    /// `F` at the right face of each cell.
    pub flux_terms: Vec<f64>,
    /// `ω_{h,j}` or `E_{h,j}`.
    pub cell_quantities: Vec<f64>,
}

impl ConservationReport {
    fn finish(per_cell: Vec<f64>, scale: f64, flux_terms: Vec<f64>, cell_quantities: Vec<f64>) -> Self {
        let max_abs = per_cell.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        ConservationReport {
            per_cell,
            max_abs,
            scale,
            flux_terms,
            cell_quantities,
        }
    }

    /// `max |residual| / max(1, scale)`.
    pub fn relative(&self) -> f64 {
        self.max_abs / self.scale.max(1.0)
    }
}

fn check_source_free(scheme: &dyn ReducedScheme) -> Result<()> {
    if let ModelParams::Ch { forcing: true } = scheme.system().params {
        return Err(Error::InvalidConfig(
            "structure checks need the unforced Camassa-Holm equation".into(),
        ));
    }
    Ok(())
}

/// Components that enter `M` or `B`.
fn mass_support(scheme: &dyn ReducedScheme) -> Vec<bool> {
    let sys = scheme.system();
    let b = &scheme.flux().b;
    (0..sys.m)
        .map(|l| (0..sys.m).any(|i| sys.mm[(i, l)] != 0.0 || b[(i, l)] != 0.0))
        .collect()
}

fn masked(mut fields: Vec<Vec<f64>>, mask: &[bool]) -> Vec<Vec<f64>> {
    for (f, &keep) in fields.iter_mut().zip(mask) {
        if !keep {
            f.iter_mut().for_each(|v| *v = 0.0);
        }
    }
    fields
}

/// `(z^-, z^+)` over all components at the right face of cell `j`.
fn face_values(space: &DgSpace, fields: &[Vec<f64>], j: usize) -> (Vec<f64>, Vec<f64>) {
    fields.iter().map(|f| space.edge_traces(f, j)).unzip()
}

fn face_traces(space: &DgSpace, z: &[Vec<f64>], z_t: &[Vec<f64>], j: usize) -> Traces {
    let (m, p) = face_values(space, z, j);
    let (mt, pt) = face_values(space, z_t, j);
    Traces::new(m, p, mt, pt)
}

/// `∫_{I_j} (M a)·b` for every cell.
fn cell_mass_form(space: &DgSpace, mm: &DMatrix<f64>, a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<f64> {
    let s = space.block();
    let mut out = vec![0.0; space.n_cells()];
    for i in 0..mm.nrows() {
        for l in 0..mm.ncols() {
            let c = mm[(i, l)];
            if c == 0.0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let r = j * s..(j + 1) * s;
                *o += c * a[l][r.clone()].iter().zip(&b[i][r]).map(|(x, y)| x * y).sum::<f64>();
            }
        }
    }
    out
}

/// Multi-symplectic conservation at `state` for the tangent pair `(dz, dž)`:
/// `d/dt ω_{h,j} - F(dz, dž)_{j+1/2} + F(dz, dž)_{j-1/2}` per cell.
pub fn multisymplectic_residual(
    scheme: &dyn ReducedScheme,
    state: &[f64],
    dz: &[f64],
    dzc: &[f64],
) -> Result<ConservationReport> {
    check_source_free(scheme)?;
    let sys = scheme.system();
    let sp = scheme.space().as_ref();
    let spec = scheme.flux();
    let n = sp.n_cells();
    let mask = mass_support(scheme);
    let s_t = scheme.rhs(0.0, state)?;
    let zeros = vec![0.0; state.len()];

    let variation = |d: &[f64]| -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let d_t = scheme.tangent_rhs(state, d)?;
        let u = scheme.reconstruct_linearized(state, &s_t, d, &d_t)?;
        let u_t = masked(scheme.reconstruct_linearized(state, &s_t, &d_t, &zeros)?, &mask);
        Ok((u, u_t))
    };
    let (u, u_t) = variation(dz)?;
    let (v, v_t) = variation(dzc)?;

    let omega = cell_mass_form(sp, &sys.mm, &u, &v);
    let a1 = cell_mass_form(sp, &sys.mm, &u_t, &v);
    let a2 = cell_mass_form(sp, &sys.mm, &u, &v_t);

    let mut f = Vec::with_capacity(n);
    let mut bj = Vec::with_capacity(n);
    let mut bj_t = Vec::with_capacity(n);
    for j in 0..n {
        let tu = face_traces(sp, &u, &u_t, j);
        let tv = face_traces(sp, &v, &v_t, j);
        f.push(interface_form_f(&sys.k, spec, &tu, &tv)?);
        bj.push((&spec.b * tv.jump()).dot(&tu.jump()));
        bj_t.push(b_jump_rate(spec, &tu, &tv));
    }

    let mut scale = 0.0f64;
    let mut res = Vec::with_capacity(n);
    let mut quantities = Vec::with_capacity(n);
    for j in 0..n {
        let jl = (j + n - 1) % n;
        let d_omega = a1[j] + a2[j] + 0.5 * (bj_t[j] + bj_t[jl]);
        quantities.push(omega[j] + 0.5 * (bj[j] + bj[jl]));
        for t in [a1[j], a2[j], 0.5 * bj_t[j], 0.5 * bj_t[jl], f[j], f[jl]] {
            scale = scale.max(t.abs());
        }
        res.push(d_omega - f[j] + f[jl]);
    }
    Ok(ConservationReport::finish(res, scale, f, quantities))
}

/// Time derivatives of the full DG solution: `(z, z_t, z_tt)` with `z_tt` only on the
/// components entering `M` and `B`.
fn motion(scheme: &dyn ReducedScheme, state: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let mask = mass_support(scheme);
    let s_t = scheme.rhs(0.0, state)?;
    let s_tt = scheme.tangent_rhs(state, &s_t)?;
    let z = scheme.reconstruct(state, &s_t)?;
    let z_t = scheme.reconstruct_linearized(state, &s_t, &s_t, &s_tt)?;
    let zeros = vec![0.0; state.len()];
    let z_tt = masked(scheme.reconstruct_linearized(state, &s_t, &s_tt, &zeros)?, &mask);
    Ok((z, z_t, z_tt))
}

/// Quadrature values and elementwise derivatives of every component.
fn quad_fields(space: &DgSpace, z: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    (
        z.iter().map(|f| space.quad_values(f)).collect(),
        z.iter().map(|f| space.quad_derivative_values(f)).collect(),
    )
}

fn k_form(k: &DMatrix<f64>, a: &[Vec<f64>], b: &[Vec<f64>], p: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..k.nrows() {
        for l in 0..k.ncols() {
            let c = k[(i, l)];
            if c != 0.0 {
                acc += c * a[l][p] * b[i][p];
            }
        }
    }
    acc
}

/// `∫_{I_j} E(z_h)` with `E(z) = S(z) - ½ K z_x·z`, per cell.
fn cell_energy_density(scheme: &dyn ReducedScheme, z: &[Vec<f64>]) -> Vec<f64> {
    let sys = scheme.system();
    let sp = scheme.space();
    let (q, qx) = quad_fields(sp, z);
    let m = sys.m;
    let mut zp = vec![0.0; m];
    let vals: Vec<f64> = (0..q[0].len())
        .map(|p| {
            for (c, v) in zp.iter_mut().zip(&q) {
                *c = v[p];
            }
            sys.s(&zp) - 0.5 * k_form(&sys.k, &qx, &q, p)
        })
        .collect();
    sp.cell_integrals_of_values(&vals)
}

/// Local energy law at `state`:
/// `d/dt E_{h,j} + ½ F(z, z_t)_{j+1/2} - ½ F(z, z_t)_{j-1/2}` per cell.
pub fn local_energy_residual(scheme: &dyn ReducedScheme, state: &[f64]) -> Result<ConservationReport> {
    check_source_free(scheme)?;
    let sys = scheme.system();
    let sp = scheme.space().as_ref();
    let spec = scheme.flux();
    let kk = &sys.k;
    let n = sp.n_cells();
    let m = sys.m;
    let (z, z_t, z_tt) = motion(scheme, state)?;

    // d/dt ∫ S(z) = ∫ ∇S(z)·z_t at the quadrature nodes
    let (q, qx) = quad_fields(sp, &z);
    let (qt, qtx) = quad_fields(sp, &z_t);
    let mut zp = vec![0.0; m];
    let mut s_rate = Vec::with_capacity(q[0].len());
    let mut k_rate = Vec::with_capacity(q[0].len());
    for p in 0..q[0].len() {
        for (c, v) in zp.iter_mut().zip(&q) {
            *c = v[p];
        }
        let g = sys.grad(&zp);
        s_rate.push(g.iter().zip(&qt).map(|(a, b)| a * b[p]).sum::<f64>());
        k_rate.push(-0.5 * (k_form(kk, &qtx, &q, p) + k_form(kk, &qx, &qt, p)));
    }
    let s_rate = sp.cell_integrals_of_values(&s_rate);
    let k_rate = sp.cell_integrals_of_values(&k_rate);
    let density = cell_energy_density(scheme, &z);

    // per face: value and rate of K̂z·z^∓ and B[z]_t·[z], and F(z, z_t)
    struct Face {
        kz_m: f64,
        kz_p: f64,
        kz_m_t: f64,
        kz_p_t: f64,
        bz: f64,
        bz_t: f64,
        f: f64,
    }
    let mut faces = Vec::with_capacity(n);
    for j in 0..n {
        let tz = face_traces(sp, &z, &z_t, j);
        let tzt = face_traces(sp, &z_t, &z_tt, j);
        let kz = eval_flux(kk, spec, &tz)?;
        let kzt = eval_flux(kk, spec, &tzt)?;
        let zm = DVector::from_column_slice(&tz.minus);
        let zp = DVector::from_column_slice(&tz.plus);
        let ztm = DVector::from_column_slice(&tzt.minus);
        let ztp = DVector::from_column_slice(&tzt.plus);
        let jz = tz.jump();
        let jzt = tzt.jump();
        let jztt = tzt.jump_dt();
        faces.push(Face {
            kz_m: kz.dot(&zm),
            kz_p: kz.dot(&zp),
            kz_m_t: kzt.dot(&zm) + kz.dot(&ztm),
            kz_p_t: kzt.dot(&zp) + kz.dot(&ztp),
            bz: (&spec.b * &jzt).dot(&jz),
            bz_t: (&spec.b * &jztt).dot(&jz) + (&spec.b * &jzt).dot(&jzt),
            f: interface_form_f(kk, spec, &tz, &tzt)?,
        });
    }

    let mut res = Vec::with_capacity(n);
    let mut quantities = Vec::with_capacity(n);
    let mut scale = 0.0f64;
    for j in 0..n {
        let r = &faces[j];
        let l = &faces[(j + n - 1) % n];
        quantities.push(density[j] - (0.5 * r.kz_m + 0.25 * r.bz) + (0.5 * l.kz_p - 0.25 * l.bz));
        let terms = [
            s_rate[j],
            k_rate[j],
            -0.5 * r.kz_m_t,
            -0.25 * r.bz_t,
            0.5 * l.kz_p_t,
            -0.25 * l.bz_t,
            0.5 * r.f,
            -0.5 * l.f,
        ];
        for t in terms {
            scale = scale.max(t.abs());
        }
        res.push(terms.iter().sum());
    }
    let flux_terms = faces.iter().map(|f| f.f).collect();
    Ok(ConservationReport::finish(res, scale, flux_terms, quantities))
}

/// The total energy in its general form `∫E(z_h) + ½ Σ (K{z} + A[z])·[z]`.
pub fn general_energy(scheme: &dyn ReducedScheme, state: &[f64]) -> Result<f64> {
    check_source_free(scheme)?;
    let sys = scheme.system();
    let sp = scheme.space().as_ref();
    let spec = scheme.flux();
    let s_t = scheme.rhs(0.0, state)?;
    let z = scheme.reconstruct(state, &s_t)?;
    let mut e: f64 = cell_energy_density(scheme, &z).iter().sum();
    for j in 0..sp.n_cells() {
        let (m, p) = face_values(sp, &z, j);
        let t = Traces::steady(m, p);
        let jump = t.jump();
        e += 0.5 * (&sys.k * t.avg() + &spec.a * &jump).dot(&jump);
    }
    Ok(e)
}

/// The simplified total energy `∫ S(z_h) - ∇_v S(z_h)·v_h + ½ Σ Ã[z]·[z]`, with `v_h` the
/// second-half components of the model's natural decomposition of `K`.
pub fn reduced_form_energy(scheme: &dyn ReducedScheme, state: &[f64]) -> Result<f64> {
    check_source_free(scheme)?;
    let sys = scheme.system();
    let sp = scheme.space().as_ref();
    let spec = scheme.flux();
    let dec = sys.natural_decomposition();
    let m = sys.m;
    let r = m / 2;
    // component index and sign of each second-half row of Q
    let second: Vec<(usize, f64)> = (m - r..m)
        .map(|row| {
            let c = (0..m).find(|&c| dec.q[(row, c)] != 0.0).expect("Q is a signed permutation");
            (c, dec.q[(row, c)])
        })
        .collect();
    let s_t = scheme.rhs(0.0, state)?;
    let z = scheme.reconstruct(state, &s_t)?;
    let refs: Vec<&[f64]> = z.iter().map(|f| f.as_slice()).collect();
    let mut e = sp.integrate_pointwise(&refs, |zp| {
        let g = sys.grad(zp);
        sys.s(zp) - second.iter().map(|&(c, _)| g[c] * zp[c]).sum::<f64>()
    });
    let at = dec.tilde_a(&spec.a);
    for j in 0..sp.n_cells() {
        let (mn, pl) = face_values(sp, &z, j);
        let jump = Traces::steady(mn, pl).jump();
        e += 0.5 * (&at * &jump).dot(&jump);
    }
    Ok(e)
}

/// `max |Ã + Ã^T|` for the alternating-type `A` at parameter `alpha`.
pub fn tilde_a_asymmetry(scheme: &dyn ReducedScheme, alpha: f64) -> Result<f64> {
    let dec = scheme.system().natural_decomposition();
    let a = alternating_a(&dec, alpha)?;
    let at = dec.tilde_a(&a);
    Ok((&at + at.transpose()).amax())
}

/// Uniform random coefficients in `[-1, 1]`, constrained to the scheme's consistent set.
pub fn random_state(scheme: &dyn ReducedScheme, rng: &mut impl Rng) -> Vec<f64> {
    let mut s: Vec<f64> = (0..scheme.state_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    scheme.constrain_state(&mut s);
    s
}

fn random_matrix(m: usize, rng: &mut impl Rng, sign: f64) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v: f64 = rng.gen_range(-1.0..1.0);
            if i == j {
                a[(i, i)] = if sign > 0.0 { v } else { 0.0 };
            } else {
                a[(i, j)] = v;
                a[(j, i)] = sign * v;
            }
        }
    }
    a
}

/// Outcome of the interface-identity sweep.
#[derive(Clone, Debug, Default)]
pub struct InterfaceSweep {
    pub trials: usize,
    pub max_residual: f64,
    pub max_relative: f64,
}

/// Checks both interface identities on random antisymmetric `K`, `B`, symmetric `A`
/// and random traces with `m ∈ {2, ..., 6}`.
pub fn interface_identity_sweep(trials: usize, seed: u64) -> Result<InterfaceSweep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = InterfaceSweep {
        trials,
        ..Default::default()
    };
    for _ in 0..trials {
        let m = rng.gen_range(2..=6);
        let k = random_matrix(m, &mut rng, -1.0);
        let a = random_matrix(m, &mut rng, 1.0);
        let b = random_matrix(m, &mut rng, -1.0);
        let spec = FluxSpec::new(a, b)?;
        let vec = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect() };
        let z = Traces::new(vec(&mut rng), vec(&mut rng), vec(&mut rng), vec(&mut rng));
        let zc = Traces::new(vec(&mut rng), vec(&mut rng), vec(&mut rng), vec(&mut rng));
        let (rm, rp) = interface_residuals(&k, &spec, &z, &zc)?;
        let kz = eval_flux(&k, &spec, &z)?;
        let kzc = eval_flux(&k, &spec, &zc)?;
        let scale = [
            interface_form_f(&k, &spec, &z, &zc)?,
            b_jump_rate(&spec, &z, &zc),
            kz.amax() * zc.minus.iter().chain(&zc.plus).fold(0.0f64, |a, v| a.max(v.abs())),
            kzc.amax() * z.minus.iter().chain(&z.plus).fold(0.0f64, |a, v| a.max(v.abs())),
        ]
        .iter()
        .fold(1.0f64, |a, v| a.max(v.abs()));
        let r = rm.abs().max(rp.abs());
        out.max_residual = out.max_residual.max(r);
        out.max_relative = out.max_relative.max(r / scale);
    }
    Ok(out)
}

/// One line of the verification CSV.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub model: String,
    pub flux: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub residual_ms: f64,
    pub residual_energy: f64,
}

/// Sweep configuration.
#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub models: Vec<ModelKind>,
    pub cells: Vec<usize>,
    pub degrees: Vec<usize>,
    pub draws: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            models: ModelKind::ALL.to_vec(),
            cells: vec![4, 8],
            degrees: vec![1, 2],
            draws: 20,
            seed: 2024,
            exec: Execution::default(),
        }
    }
}

/// Parameters used by the sweep: nonlinear wherever the model allows it.
pub fn sweep_params(kind: ModelKind) -> ModelParams {
    match kind {
        ModelKind::Wave => ModelParams::Wave {
            potential: Potential::polynomial(vec![0.0, 0.4, -0.5, 0.3, 0.2]),
        },
        other => other.default_params(),
    }
}

/// A periodic mesh of `(0, 2π)` with edges jittered by up to 30% of the cell width.
pub fn jittered_mesh(n: usize, rng: &mut impl Rng) -> Result<Mesh1D> {
    let h = std::f64::consts::TAU / n as f64;
    let mut edges: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    for e in edges.iter_mut().take(n).skip(1) {
        *e += rng.gen_range(-0.3..0.3) * h;
    }
    Mesh1D::from_edges(edges)
}

struct SweepPoint {
    kind: ModelKind,
    scalars: FluxScalars,
    label: String,
    n: usize,
    k: usize,
}

/// Runs both conservation checks over models, flux presets, meshes and random draws.
///
/// Presets that carry their own `(N, k)` grid use it instead of `cells × degrees`.
pub fn verification_sweep(opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    let mut points = Vec::new();
    for &kind in &opts.models {
        for preset in flux_presets(kind) {
            let grid: Vec<(usize, usize)> = match &preset.grid {
                Some(g) => g.clone(),
                None => opts
                    .cells
                    .iter()
                    .flat_map(|&n| opts.degrees.iter().map(move |&k| (n, k)))
                    .collect(),
            };
            for (n, k) in grid {
                points.push(SweepPoint {
                    kind,
                    scalars: preset.scalars,
                    label: preset.name.clone(),
                    n,
                    k,
                });
            }
        }
    }
    let rows = parallel::map(opts.exec, &points, |p| -> Result<Vec<SweepRow>> {
        let params = sweep_params(p.kind);
        let mut out = Vec::with_capacity(opts.draws);
        for d in 0..opts.draws {
            let seed = opts.seed.wrapping_add((d as u64) << 32 | (p.n * 16 + p.k) as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mesh = Arc::new(jittered_mesh(p.n, &mut rng)?);
            let space = Arc::new(
                DgSpace::with_product_degree(mesh, p.k, 4)?.with_execution(Execution::Sequential),
            );
            let scheme = build_reduced_scheme_on(&params, space, &p.scalars)?;
            let s = random_state(scheme.as_ref(), &mut rng);
            let a = random_state(scheme.as_ref(), &mut rng);
            let b = random_state(scheme.as_ref(), &mut rng);
            let ms = multisymplectic_residual(scheme.as_ref(), &s, &a, &b)?;
            let en = local_energy_residual(scheme.as_ref(), &s)?;
            out.push(SweepRow {
                model: p.kind.name().to_string(),
                flux: p.label.clone(),
                n: p.n,
                k: p.k,
                seed,
                residual_ms: ms.relative(),
                residual_energy: en.relative(),
            });
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for r in rows {
        all.extend(r?);
    }
    Ok(all)
}

/// Writes sweep rows as CSV.
pub fn write_sweep_csv(rows: &[SweepRow], path: &std::path::Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Residuals of every row of the DG system `M z_t + K D_0 z + A L z + B L z_t = Π∇S(z)`
/// at the reconstructed fields, each relative to the largest term of its row.
pub fn dg_row_residuals(scheme: &dyn ReducedScheme, state: &[f64]) -> Result<Vec<f64>> {
    let sys = scheme.system();
    let sp = scheme.space().clone();
    let spec = scheme.flux();
    let m = sys.m;
    let exec = sp.execution();
    let (z, z_t, _) = motion(scheme, state)?;
    let d0 = crate::operators::assemble_d(&sp, 0.0);
    let l = crate::operators::assemble_l(&sp);
    let apply = |op: &crate::operators::BlockOperator, x: &[f64]| {
        let mut y = vec![0.0; x.len()];
        op.apply_into(exec, x, &mut y);
        y
    };
    let dz: Vec<Vec<f64>> = z.iter().map(|f| apply(&d0, f)).collect();
    let lz: Vec<Vec<f64>> = z.iter().map(|f| apply(&l, f)).collect();
    let lzt: Vec<Vec<f64>> = z_t.iter().map(|f| apply(&l, f)).collect();
    let refs: Vec<&[f64]> = z.iter().map(|f| f.as_slice()).collect();
    let nd = sp.ndof();
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let rhs = sp.project_pointwise(&refs, |zp| sys.grad(zp)[i]);
        let mut row = vec![0.0; nd];
        let mut scale = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for l_ in 0..m {
            for (c, f) in [
                (sys.mm[(i, l_)], &z_t[l_]),
                (sys.k[(i, l_)], &dz[l_]),
                (spec.a[(i, l_)], &lz[l_]),
                (spec.b[(i, l_)], &lzt[l_]),
            ] {
                if c != 0.0 {
                    for (r, v) in row.iter_mut().zip(f) {
                        *r += c * v;
                        scale = scale.max((c * v).abs());
                    }
                }
            }
        }
        let err = row.iter().zip(&rhs).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        out.push(err / scale.max(1.0));
    }
    Ok(out)
}
