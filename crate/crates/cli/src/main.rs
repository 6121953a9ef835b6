use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use msdg::harness::{self, ExperimentConfig, VerifyOptions};
use msdg::parallel::Execution;
use msdg::systems::ModelKind;
use msdg::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(name = "msdg", version, about = "DG solvers for multi-symplectic Hamiltonian PDEs")]
struct Cli {
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Refinement study; writes convergence.csv.
    Convergence {
        /// JSON config file or preset name.
        config: String,
        /// Output directory (overrides the config).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Single run with energy, error and snapshot output.
    Simulate {
        config: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Final time (overrides the config).
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Pointwise conservation-law sweep.
    Verify {
        /// Restrict to one model (repeatable).
        #[arg(long = "model")]
        models: Vec<String>,
        #[arg(long, default_value_t = msdg::verification::SWEEP_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 20)]
        draws: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// CSV report path.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// List shipped presets, or print one as JSON.
    ListPresets {
        #[arg(long)]
        show: Option<String>,
    },
}

fn load(spec: &str) -> msdg::Result<ExperimentConfig> {
    let path = Path::new(spec);
    if path.exists() {
        ExperimentConfig::from_path(path)
    } else {
        harness::preset(spec)
    }
}

fn exec(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::InvalidConfig(_) | Error::Json(_) => ExitCode::from(EXIT_CONFIG),
        Error::BlowUp { .. } => ExitCode::from(EXIT_DIVERGED),
        _ => ExitCode::FAILURE,
    }
}

fn fmt_opt(o: Option<f64>) -> String {
    o.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into())
}

fn run(cli: Cli) -> msdg::Result<ExitCode> {
    let exec = exec(cli.sequential);
    match cli.cmd {
        Cmd::Convergence { config, out } => {
            let mut cfg = load(&config)?;
            cfg.execution = exec;
            if out.is_some() {
                cfg.output_dir = out;
            }
            let table = harness::run_convergence(&cfg)?;
            for w in &table.warnings {
                eprintln!("warning: {w}");
            }
            println!("{:>6}  {:>12}  {:>6}  {:>12}  {:>6}", "N", "err_u", "order", "err_aux", "order");
            for r in &table.rows {
                match &r.diverged {
                    Some(why) => println!("{:>6}  diverged: {why}", r.n),
                    None => println!(
                        "{:>6}  {:>12.4e}  {:>6}  {:>12.4e}  {:>6}",
                        r.n,
                        r.err_u,
                        fmt_opt(r.order_u),
                        r.err_aux,
                        fmt_opt(r.order_aux)
                    ),
                }
            }
            Ok(if table.any_diverged() {
                ExitCode::from(EXIT_DIVERGED)
            } else {
                ExitCode::SUCCESS
            })
        }
        Cmd::Simulate { config, out, t_end } => {
            let mut cfg = load(&config)?;
            cfg.execution = exec;
            if out.is_some() {
                cfg.output_dir = out;
            }
            if let Some(t) = t_end {
                cfg.time.t_end = t;
                cfg.observe.snapshots.retain(|s| *s <= t);
            }
            let report = harness::run_simulation(&cfg)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{}: {} steps to t = {}, max |dE| = {:.3e}",
                if cfg.name.is_empty() { "run" } else { &cfg.name },
                report.steps,
                report.final_time,
                report.max_energy_drift()
            );
            if let Some(c) = report.max_charge_drift() {
                println!("max |dQ| = {c:.3e}");
            }
            if let Some((t, e)) = report.errors.last() {
                println!("L2 error at t = {t}: {e:.4e}");
            }
            if let Some((step, t)) = report.blow_up {
                eprintln!("error: blow-up at step {step} (t = {t})");
                return Ok(ExitCode::from(EXIT_DIVERGED));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify {
            models,
            tol,
            draws,
            seed,
            out,
        } => {
            let mut opts = VerifyOptions {
                tol,
                draws,
                seed,
                output: out,
                exec,
                ..VerifyOptions::default()
            };
            if !models.is_empty() {
                opts.models = models.iter().map(|m| ModelKind::parse(m)).collect::<msdg::Result<_>>()?;
            }
            let report = harness::run_verification(&opts)?;
            println!(
                "{} rows, max residual: multi-symplectic {:.3e}, energy {:.3e} (tol {:.1e})",
                report.rows.len(),
                report.max_ms,
                report.max_energy,
                report.tol
            );
            for r in report.failures.iter().take(20) {
                println!(
                    "FAIL {} {} N={} k={} seed={} ms={:.3e} energy={:.3e}",
                    r.model, r.flux, r.n, r.k, r.seed, r.residual_ms, r.residual_energy
                );
            }
            if report.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                println!("{} of {} rows above tolerance", report.failures.len(), report.rows.len());
                Ok(ExitCode::from(EXIT_VERIFY))
            }
        }
        Cmd::ListPresets { show } => {
            if let Some(name) = show {
                println!("{}", harness::preset(&name)?.to_json()?);
                return Ok(ExitCode::SUCCESS);
            }
            for p in harness::presets() {
                let kind = match p.kind {
                    harness::PresetKind::Convergence => "convergence",
                    harness::PresetKind::Simulation => "simulate",
                };
                println!("{:<28} {:<12} {}", p.name, kind, p.description);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}
