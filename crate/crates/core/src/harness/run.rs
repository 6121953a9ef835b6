use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::config::ExperimentConfig;
use crate::mesh_basis::DgSpace;
use crate::parallel::{self, Execution};
use crate::systems::{build_reduced_scheme_on, product_degree, AuxKind, ModelKind, Profile, ReducedScheme};
use crate::time_integration::integrate;
use crate::verification::{verification_sweep, write_sweep_csv, SweepOptions, SweepRow, SWEEP_TOL};
use crate::{Error, Result};

/// `log(e_{i-1}/e_i) / log(N_i/N_{i-1})` for consecutive entries.
pub fn compute_order(errors: &[f64], ns: &[usize]) -> Result<Vec<f64>> {
    if errors.len() != ns.len() {
        return Err(Error::DimensionMismatch(format!("{} errors for {} meshes", errors.len(), ns.len())));
    }
    if errors.len() < 2 {
        return Err(Error::InvalidConfig("need at least two errors to compute an order".into()));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidConfig(format!("errors must be positive and finite, got {e}")));
    }
    let mut out = Vec::with_capacity(errors.len() - 1);
    for i in 1..errors.len() {
        if ns[i] == ns[i - 1] {
            return Err(Error::InvalidConfig(format!("repeated mesh size {}", ns[i])));
        }
        let r = (errors[i - 1] / errors[i]).ln();
        out.push(if r == 0.0 { 0.0 } else { r / (ns[i] as f64 / ns[i - 1] as f64).ln() });
    }
    Ok(out)
}

/// Builds the scheme of `cfg` on `n` cells.
pub fn build_scheme(cfg: &ExperimentConfig, n: usize, exec: Execution) -> Result<Box<dyn ReducedScheme>> {
    let mesh = cfg.mesh_for(n)?;
    let space = DgSpace::with_product_degree(mesh, cfg.k, product_degree(&cfg.model))?.with_execution(exec);
    build_reduced_scheme_on(&cfg.model, Arc::new(space), &cfg.flux)
}

fn aux_exact(kind: AuxKind, profile: &Profile) -> impl Fn(f64, f64) -> f64 + '_ {
    move |x, t| match kind {
        AuxKind::Derivative => profile.dx(x, t),
        AuxKind::Imaginary => profile.imag(x, t),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub err_u: f64,
    pub order_u: Option<f64>,
    pub err_aux: f64,
    pub order_aux: Option<f64>,
    /// Reason the run did not reach the final time.
    pub diverged: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub name: String,
    pub rows: Vec<ConvergenceRow>,
    pub warnings: Vec<String>,
}

impl ConvergenceTable {
    pub fn any_diverged(&self) -> bool {
        self.rows.iter().any(|r| r.diverged.is_some())
    }

    pub fn last_order_u(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.order_u)
    }

    pub fn last_order_aux(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.order_aux)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["N", "err_u", "order_u", "err_aux", "order_aux"])?;
        let opt = |o: Option<f64>| o.map(|v| format!("{v:.6}")).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                format!("{:e}", r.err_u),
                opt(r.order_u),
                format!("{:e}", r.err_aux),
                opt(r.order_aux),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn convergence_errors(cfg: &ExperimentConfig, n: usize, exec: Execution) -> Result<(f64, f64)> {
    let scheme = build_scheme(cfg, n, exec)?;
    let sp = scheme.space().clone();
    let method = cfg.time.method.build(cfg.k)?;
    let dt = cfg.time.dt.dt(sp.mesh())?;
    let t_end = cfg.time.t_end;
    let y0 = scheme.initial_state(&cfg.initial, 0.0);
    let mut f = |t: f64, y: &[f64]| scheme.rhs(t, y);
    let y = integrate(&mut f, &method, y0, 0.0, t_end, dt, usize::MAX, |_, _, _| Ok(()))?;
    let err_u = sp.l2_error(scheme.primary(&y), |x| cfg.initial.value(x, t_end));
    let aux = scheme.auxiliary(&y)?;
    let exact = aux_exact(scheme.aux_kind(), &cfg.initial);
    let err_aux = sp.l2_error(&aux, |x| exact(x, t_end));
    Ok((err_u, err_aux))
}

/// Runs every mesh of the refinement list and records errors of `u_h` and of the
/// auxiliary field at the final time. Rows run concurrently; a blow-up marks its row.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceTable> {
    cfg.validate()?;
    let cells = cfg.cells();
    if cells.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("convergence cell counts must increase".into()));
    }
    let outer = cfg.execution;
    let inner = if outer.is_parallel() && cells.len() > 1 {
        Execution::Sequential
    } else {
        outer
    };
    let warnings = build_scheme(cfg, cells[0], inner)?.warnings().to_vec();
    let results = parallel::map(outer, &cells, |&n| convergence_errors(cfg, n, inner));
    let mut rows = Vec::with_capacity(cells.len());
    for (&n, r) in cells.iter().zip(results) {
        let row = match r {
            Ok((eu, ea)) if eu.is_finite() && ea.is_finite() => ConvergenceRow {
                n,
                err_u: eu,
                order_u: None,
                err_aux: ea,
                order_aux: None,
                diverged: None,
            },
            Ok(_) => diverged_row(n, "non-finite error".into()),
            Err(e @ Error::BlowUp { .. }) => diverged_row(n, e.to_string()),
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    for i in 1..rows.len() {
        if rows[i].diverged.is_some() || rows[i - 1].diverged.is_some() {
            continue;
        }
        let ns = [rows[i - 1].n, rows[i].n];
        let ou = compute_order(&[rows[i - 1].err_u, rows[i].err_u], &ns).ok();
        let oa = compute_order(&[rows[i - 1].err_aux, rows[i].err_aux], &ns).ok();
        rows[i].order_u = ou.map(|o| o[0]);
        rows[i].order_aux = oa.map(|o| o[0]);
    }
    let table = ConvergenceTable {
        name: cfg.name.clone(),
        rows,
        warnings,
    };
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir)?;
        table.write_csv(&dir.join("convergence.csv"))?;
    }
    Ok(table)
}

fn diverged_row(n: usize, why: String) -> ConvergenceRow {
    ConvergenceRow {
        n,
        err_u: f64::NAN,
        order_u: None,
        err_aux: f64::NAN,
        order_aux: None,
        diverged: Some(why),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergySample {
    pub t: f64,
    pub energy: f64,
    pub delta: f64,
    pub charge: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub aux: Vec<f64>,
    pub exact: Option<Vec<f64>>,
}

impl Snapshot {
    /// Largest sampled value of `u` and its location.
    pub fn max_u(&self) -> (f64, f64) {
        self.x
            .iter()
            .zip(&self.u)
            .fold((f64::NAN, f64::NEG_INFINITY), |acc, (&x, &u)| if u > acc.1 { (x, u) } else { acc })
    }
}

#[derive(Clone, Debug)]
pub struct SimulationReport {
    pub name: String,
    pub energy: Vec<EnergySample>,
    /// `(t, ‖u - u_h‖)` when the initial profile is an exact solution.
    pub errors: Vec<(f64, f64)>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: Vec<f64>,
    pub final_time: f64,
    pub steps: usize,
    pub blow_up: Option<(usize, f64)>,
    pub warnings: Vec<String>,
}

impl SimulationReport {
    pub fn max_energy_drift(&self) -> f64 {
        self.energy.iter().fold(0.0f64, |a, s| a.max(s.delta.abs()))
    }

    pub fn max_charge_drift(&self) -> Option<f64> {
        let c0 = self.energy.first()?.charge?;
        Some(self.energy.iter().filter_map(|s| s.charge).fold(0.0f64, |a, c| a.max((c - c0).abs())))
    }

    /// Writes `energy.csv`, `error.csv` (when available), `snapshots.csv` (index of
    /// snapshot times) and one `snapshot_NNN.csv` per snapshot.
    pub fn write_csv(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let path = dir.join("energy.csv");
        let mut w = BufWriter::new(File::create(&path)?);
        let with_charge = self.energy.first().is_some_and(|s| s.charge.is_some());
        writeln!(w, "t,E_h,delta_E_h{}", if with_charge { ",charge" } else { "" })?;
        for s in &self.energy {
            write!(w, "{:e},{:e},{:e}", s.t, s.energy, s.delta)?;
            if let Some(c) = s.charge.filter(|_| with_charge) {
                write!(w, ",{c:e}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        written.push(path);
        if !self.errors.is_empty() {
            let path = dir.join("error.csv");
            let mut w = BufWriter::new(File::create(&path)?);
            writeln!(w, "t,l2_error")?;
            for (t, e) in &self.errors {
                writeln!(w, "{t:e},{e:e}")?;
            }
            w.flush()?;
            written.push(path);
        }
        if !self.snapshots.is_empty() {
            let path = dir.join("snapshots.csv");
            let mut w = BufWriter::new(File::create(&path)?);
            writeln!(w, "index,t,file")?;
            for (i, s) in self.snapshots.iter().enumerate() {
                writeln!(w, "{i},{:e},snapshot_{i:03}.csv", s.t)?;
            }
            w.flush()?;
            written.push(path);
        }
        for (i, s) in self.snapshots.iter().enumerate() {
            let path = dir.join(format!("snapshot_{i:03}.csv"));
            let mut w = BufWriter::new(File::create(&path)?);
            writeln!(w, "x,u,aux{}", if s.exact.is_some() { ",u_exact" } else { "" })?;
            for p in 0..s.x.len() {
                write!(w, "{:e},{:e},{:e}", s.x[p], s.u[p], s.aux[p])?;
                if let Some(ex) = &s.exact {
                    write!(w, ",{:e}", ex[p])?;
                }
                writeln!(w)?;
            }
            w.flush()?;
            written.push(path);
        }
        Ok(written)
    }
}

fn snapshot(scheme: &dyn ReducedScheme, profile: &Profile, t: f64, y: &[f64], per_cell: usize) -> Result<Snapshot> {
    let sp = scheme.space();
    let (x, u): (Vec<f64>, Vec<f64>) = sp.sample(scheme.primary(y), per_cell).into_iter().unzip();
    let aux = sp.sample(&scheme.auxiliary(y)?, per_cell).into_iter().map(|p| p.1).collect();
    let exact = profile.is_exact().then(|| x.iter().map(|&x| profile.value(x, t)).collect());
    Ok(Snapshot { t, x, u, aux, exact })
}

/// Marches one configuration to its final time with energy, error and snapshot observers.
///
/// A blow-up stops the run and is reported in [`SimulationReport::blow_up`]; whatever was
/// recorded up to then is kept (and written when `output_dir` is set).
pub fn run_simulation(cfg: &ExperimentConfig) -> Result<SimulationReport> {
    cfg.validate()?;
    let cells = cfg.cells();
    if cells.len() != 1 {
        return Err(Error::InvalidConfig(format!(
            "simulate needs a single cell count, got {} entries",
            cells.len()
        )));
    }
    let scheme = build_scheme(cfg, cells[0], cfg.execution)?;
    let scheme = scheme.as_ref();
    let sp = scheme.space().clone();
    let method = cfg.time.method.build(cfg.k)?;
    let dt = cfg.time.dt.dt(sp.mesh())?;
    let profile = &cfg.initial;
    let exact = profile.is_exact();
    let per_cell = cfg.observe.points_per_cell;

    let mut stops: Vec<f64> = cfg.observe.snapshots.clone();
    stops.push(cfg.time.t_end);
    stops.sort_by(f64::total_cmp);
    stops.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));

    let mut report = SimulationReport {
        name: cfg.name.clone(),
        energy: Vec::new(),
        errors: Vec::new(),
        snapshots: Vec::new(),
        final_state: Vec::new(),
        final_time: 0.0,
        steps: 0,
        blow_up: None,
        warnings: scheme.warnings().to_vec(),
    };
    let mut y = scheme.initial_state(profile, 0.0);
    let e0 = scheme.energy(&y)?;
    let mut t = 0.0;
    let record = |report: &mut SimulationReport, t: f64, y: &[f64]| -> Result<()> {
        let e = scheme.energy(y)?;
        report.energy.push(EnergySample {
            t,
            energy: e,
            delta: e - e0,
            charge: scheme.charge(y),
        });
        if exact {
            report.errors.push((t, sp.l2_error(scheme.primary(y), |x| profile.value(x, t))));
        }
        Ok(())
    };
    record(&mut report, 0.0, &y)?;
    if stops.first().is_some_and(|s| *s <= 0.0) {
        report.snapshots.push(snapshot(scheme, profile, 0.0, &y, per_cell)?);
    }
    let mut f = |t: f64, y: &[f64]| scheme.rhs(t, y);
    for &stop in stops.iter().filter(|s| **s > 0.0) {
        let offset = report.steps;
        let mut last = 0;
        let res = integrate(&mut f, &method, y.clone(), t, stop, dt, cfg.observe.stride, |step, ts, ys| {
            last = step;
            if step > 0 {
                record(&mut report, ts, ys)?;
            }
            Ok(())
        });
        match res {
            Ok(next) => {
                y = next;
                t = stop;
                report.steps = offset + last;
                report.snapshots.push(snapshot(scheme, profile, t, &y, per_cell)?);
            }
            Err(Error::BlowUp { step, time }) => {
                report.blow_up = Some((offset + step, time));
                report.steps = offset + step;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    report.final_state = y;
    report.final_time = t;
    if let Some(dir) = &cfg.output_dir {
        report.write_csv(dir)?;
    }
    Ok(report)
}

/// Sweep selection for [`run_verification`].
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub models: Vec<ModelKind>,
    pub tol: f64,
    pub draws: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub exec: Execution,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        let s = SweepOptions::default();
        VerifyOptions {
            models: s.models,
            tol: SWEEP_TOL,
            draws: s.draws,
            seed: s.seed,
            output: None,
            exec: s.exec,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub rows: Vec<SweepRow>,
    pub tol: f64,
    pub max_ms: f64,
    pub max_energy: f64,
    /// Rows with a residual above the tolerance.
    pub failures: Vec<SweepRow>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn run_verification(opts: &VerifyOptions) -> Result<VerificationReport> {
    if !(opts.tol >= 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be non-negative, got {}", opts.tol)));
    }
    let sweep = SweepOptions {
        models: opts.models.clone(),
        draws: opts.draws,
        seed: opts.seed,
        exec: opts.exec,
        ..SweepOptions::default()
    };
    let rows = verification_sweep(&sweep)?;
    let max_ms = rows.iter().fold(0.0f64, |a, r| a.max(r.residual_ms));
    let max_energy = rows.iter().fold(0.0f64, |a, r| a.max(r.residual_energy));
    let failures = rows
        .iter()
        .filter(|r| !(r.residual_ms <= opts.tol && r.residual_energy <= opts.tol))
        .cloned()
        .collect();
    if let Some(path) = &opts.output {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        write_sweep_csv(&rows, path)?;
    }
    Ok(VerificationReport {
        rows,
        tol: opts.tol,
        max_ms,
        max_energy,
        failures,
    })
}
