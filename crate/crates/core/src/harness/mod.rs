//! Config-driven experiments: convergence studies, long-time simulations with energy,
//! error and snapshot observers, and verification sweeps. All output is CSV.

mod config;
mod presets;
mod run;

pub use config::{Cells, DtRule, ExperimentConfig, MeshSpec, MethodSpec, ObserverSpec, TimeSpec};
pub use presets::{preset, preset_names, presets, Preset, PresetKind, PEAKON_FILTER};
pub use run::{
    build_scheme, compute_order, run_convergence, run_simulation, run_verification, ConvergenceRow,
    ConvergenceTable, EnergySample, SimulationReport, Snapshot, VerificationReport, VerifyOptions,
};
