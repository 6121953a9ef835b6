use std::f64::consts::{PI, TAU};

use serde::Serialize;

use super::config::{Cells, DtRule, ExperimentConfig, MeshSpec, MethodSpec, ObserverSpec, TimeSpec};
use crate::mesh_basis::MeshPattern;
use crate::parallel::Execution;
use crate::systems::{cnoidal_period, FluxScalars, ModelParams, Potential, Profile, Wave};
use crate::time_integration::Filter;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetKind {
    Convergence,
    Simulation,
}

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub kind: PresetKind,
    pub description: &'static str,
    pub config: ExperimentConfig,
}

/// Filter used by the peakon presets.
pub const PEAKON_FILTER: Filter = Filter::DEFAULT;

const CNOIDAL_M: f64 = 0.9;
const CNOIDAL_SIGMA: f64 = 1e-2;

fn cnoidal() -> Profile {
    Profile::Cnoidal {
        m: CNOIDAL_M,
        c: (2.0 * CNOIDAL_M - 1.0) / (3.0 * CNOIDAL_M),
        x0: 0.0,
        sigma: CNOIDAL_SIGMA,
    }
}

fn cnoidal_domain() -> (f64, f64) {
    (0.0, cnoidal_period(CNOIDAL_M, CNOIDAL_SIGMA).expect("valid cnoidal parameters"))
}

#[allow(clippy::too_many_arguments)]
fn base(
    name: &str,
    model: ModelParams,
    domain: (f64, f64),
    cells: Cells,
    pattern: MeshPattern,
    k: usize,
    flux: FluxScalars,
    method: MethodSpec,
    dt: DtRule,
    t_end: f64,
    initial: Profile,
) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        model,
        mesh: MeshSpec {
            domain,
            cells,
            pattern,
            jitter: 0.0,
        },
        k,
        flux,
        time: TimeSpec { method, dt, t_end },
        initial,
        observe: ObserverSpec::default(),
        output_dir: None,
        seed: 0,
        execution: Execution::default(),
    }
}

fn rk_auto() -> MethodSpec {
    MethodSpec::Rk { order: None }
}

fn wave_accuracy(name: &str, k: usize, cells: Vec<usize>, pattern: MeshPattern, flux: FluxScalars) -> ExperimentConfig {
    base(
        name,
        ModelParams::Wave {
            potential: Potential::zero(),
        },
        (0.0, TAU),
        Cells::List(cells),
        pattern,
        k,
        flux,
        rk_auto(),
        DtRule::Ratio(0.01),
        1.0,
        Profile::ExpSine,
    )
}

fn bbm_accuracy(name: &str, k: usize, cells: Vec<usize>, pattern: MeshPattern, flux: FluxScalars) -> ExperimentConfig {
    base(
        name,
        ModelParams::Bbm {
            sigma: CNOIDAL_SIGMA,
            v_cubic: 1.0 / 6.0,
        },
        cnoidal_domain(),
        Cells::List(cells),
        pattern,
        k,
        flux,
        rk_auto(),
        DtRule::Ratio(0.5),
        1.0,
        cnoidal(),
    )
}

fn ch_accuracy(name: &str, k: usize, cells: Vec<usize>, alpha0: f64) -> ExperimentConfig {
    base(
        name,
        ModelParams::Ch { forcing: true },
        (0.0, TAU),
        Cells::List(cells),
        MeshPattern::Uniform,
        k,
        FluxScalars {
            alpha0,
            ..FluxScalars::default()
        },
        rk_auto(),
        DtRule::Ratio(0.01),
        1.0,
        Profile::Sine {
            amplitude: 1.0,
            wavenumber: 1.0,
            speed: 1.0,
        },
    )
}

fn bbm_solitons(name: &str, domain: (f64, f64), waves: Vec<Wave>, t_end: f64) -> ExperimentConfig {
    let sigma = 0.11 * 0.11;
    // Δx = 0.05
    let n = ((domain.1 - domain.0) / 0.05).round() as usize;
    let mut cfg = base(
        name,
        ModelParams::Bbm {
            sigma,
            v_cubic: 1.0 / 6.0,
        },
        domain,
        Cells::One(n),
        MeshPattern::Uniform,
        4,
        FluxScalars::central(),
        MethodSpec::Rk { order: Some(5) },
        DtRule::Ratio(0.05),
        t_end,
        Profile::BbmSolitons { sigma, waves },
    );
    cfg.observe = ObserverSpec {
        stride: 100,
        snapshots: (1..=4).map(|i| t_end * i as f64 / 4.0).collect(),
        points_per_cell: 10,
    };
    cfg
}

fn peakons(name: &str, waves: Vec<Wave>, t_end: f64) -> ExperimentConfig {
    let mut cfg = base(
        name,
        ModelParams::Ch { forcing: false },
        (0.0, 30.0),
        Cells::One(400),
        MeshPattern::Uniform,
        4,
        FluxScalars::central(),
        MethodSpec::FilteredSsprk3 { filter: PEAKON_FILTER },
        DtRule::Ratio(0.01),
        t_end,
        Profile::Peakons { period: 30.0, waves },
    );
    cfg.observe = ObserverSpec {
        stride: 500,
        snapshots: (1..=4).map(|i| t_end * i as f64 / 4.0).collect(),
        points_per_cell: 10,
    };
    cfg
}

fn w(c: f64, x0: f64) -> Wave {
    Wave { c, x0 }
}

/// The shipped presets, in listing order.
pub fn presets() -> Vec<Preset> {
    use MeshPattern::{TwoOneAlternating as NonUniform, Uniform};
    use PresetKind::{Convergence, Simulation};
    let central = FluxScalars::central();
    let coarse = || vec![40, 80, 160];
    let fine = || vec![40, 80, 160, 320];
    let mut out = Vec::new();
    let mut push = |name: &'static str, kind, description, config: ExperimentConfig| {
        let mut config = config;
        config.name = name.to_string();
        out.push(Preset {
            name,
            kind,
            description,
            config,
        });
    };

    for (name, k) in [("wave_central_k1", 1), ("wave_central_k2", 2), ("wave_central_k3", 3)] {
        push(
            name,
            Convergence,
            "wave, central flux, uniform mesh, u = exp(sin(x+t))",
            wave_accuracy(name, k, coarse(), Uniform, central),
        );
    }
    push(
        "wave_central_k2_nonuniform",
        Convergence,
        "wave, central flux, 2h/h mesh, u = exp(sin(x+t))",
        wave_accuracy("", 2, coarse(), NonUniform, central),
    );
    push(
        "wave_flux_1_0_m1_0_k1",
        Convergence,
        "wave, flux (1,0,-1,0), k = 1, uniform mesh",
        wave_accuracy("", 1, fine(), Uniform, FluxScalars::wave(1.0, 0.0, -1.0, 0.0)),
    );
    push(
        "wave_flux_0_eighth_0_0_k1",
        Convergence,
        "wave, flux (0,1/8,0,0), k = 1, uniform mesh",
        wave_accuracy("", 1, fine(), Uniform, FluxScalars::wave(0.0, 0.125, 0.0, 0.0)),
    );

    let a0 = FluxScalars {
        alpha0: 0.25,
        ..FluxScalars::default()
    };
    let a1 = FluxScalars {
        alpha1: 0.5,
        ..FluxScalars::default()
    };
    push(
        "bbm_central_k2",
        Convergence,
        "BBM cnoidal wave, central flux, k = 2, uniform mesh",
        bbm_accuracy("", 2, fine(), Uniform, central),
    );
    push(
        "bbm_central_k2_nonuniform",
        Convergence,
        "BBM cnoidal wave, central flux, k = 2, 2h/h mesh",
        bbm_accuracy("", 2, fine(), NonUniform, central),
    );
    push(
        "bbm_alpha1_half_k2",
        Convergence,
        "BBM cnoidal wave, (alpha0, alpha1) = (0, 1/2), k = 2, odd N",
        bbm_accuracy("", 2, vec![41, 81, 161, 321], Uniform, a1),
    );
    push(
        "bbm_alpha0_quarter_k1",
        Convergence,
        "BBM cnoidal wave, (alpha0, alpha1) = (1/4, 0), k = 1, uniform mesh",
        bbm_accuracy("", 1, vec![40, 80, 160, 320, 640], Uniform, a0),
    );
    push(
        "bbm_alpha0_quarter_k2",
        Convergence,
        "BBM cnoidal wave, (alpha0, alpha1) = (1/4, 0), k = 2, uniform mesh",
        bbm_accuracy("", 2, vec![40, 80, 160, 320, 640], Uniform, a0),
    );
    push(
        "ch_alpha0_0_k2",
        Convergence,
        "CH with source, u = sin(x+t), alpha0 = 0, k = 2",
        ch_accuracy("", 2, fine(), 0.0),
    );
    push(
        "ch_alpha0_3_k1",
        Convergence,
        "CH with source, u = sin(x+t), alpha0 = 3, k = 1",
        ch_accuracy("", 1, fine(), 3.0),
    );

    push(
        "bbm_single_soliton",
        Simulation,
        "BBM soliton c = 1/5 from x = -2 on (-5, 5), T = 20",
        bbm_solitons("", (-5.0, 5.0), vec![w(0.2, -2.0)], 20.0),
    );
    push(
        "bbm_two_solitons",
        Simulation,
        "BBM solitons c = 3/4 at -12 and c = 1/4 at -6 on (-15, 15), T = 30",
        bbm_solitons("", (-15.0, 15.0), vec![w(0.75, -12.0), w(0.25, -6.0)], 30.0),
    );
    push(
        "bbm_four_solitons",
        Simulation,
        "BBM four-soliton interaction on (-15, 15), T = 20",
        bbm_solitons(
            "",
            (-15.0, 15.0),
            vec![w(0.25, -1.0), w(0.5, -3.0), w(0.75, -5.0), w(1.25, -13.0)],
            20.0,
        ),
    );
    push(
        "ch_single_peakon",
        Simulation,
        "CH peakon c = 1, x0 = -10, period 30, T = 20",
        peakons("", vec![w(1.0, -10.0)], 20.0),
    );
    push(
        "ch_two_peakons",
        Simulation,
        "CH peakons c = 2 at -5 and c = 1 at 5, T = 18",
        peakons("", vec![w(2.0, -5.0), w(1.0, 5.0)], 18.0),
    );
    push(
        "ch_three_peakons",
        Simulation,
        "CH peakons c = 2, 1, 0.8 at -5, -3, -1, T = 6",
        peakons("", vec![w(2.0, -5.0), w(1.0, -3.0), w(0.8, -1.0)], 6.0),
    );
    push(
        "ch_peakon_antipeakon",
        Simulation,
        "CH peakon c = 1 at -2 and antipeakon c = -1 at 2, T = 10",
        peakons("", vec![w(1.0, -2.0), w(-1.0, 2.0)], 10.0),
    );

    let mut long = base(
        "",
        ModelParams::Wave {
            potential: Potential::zero(),
        },
        (0.0, TAU),
        Cells::One(100),
        Uniform,
        3,
        central,
        MethodSpec::Rk { order: Some(5) },
        DtRule::Ratio(0.01),
        200.0 * PI,
        Profile::SinCos,
    );
    long.observe.stride = 1000;
    push(
        "wave_long_time",
        Simulation,
        "wave, u0 = sin(cos x), P3, N = 100, RK5, T = 200 pi",
        long,
    );

    let mut e3 = bbm_accuracy("", 2, vec![10], Uniform, central);
    e3.mesh.cells = Cells::One(10);
    e3.time = TimeSpec {
        method: MethodSpec::Rk { order: Some(5) },
        dt: DtRule::Ratio(0.01),
        t_end: 5000.0,
    };
    e3.observe = ObserverSpec {
        stride: 10_000,
        snapshots: vec![200.0, 1000.0, 3000.0],
        points_per_cell: 10,
    };
    push(
        "bbm_energy_long_time",
        Simulation,
        "BBM cnoidal wave, P2, N = 10, RK5, T = 5000, cubic energy audit",
        e3,
    );

    let mut nls = base(
        "",
        ModelParams::Nls { alpha: 1.0 },
        (0.0, TAU),
        Cells::One(32),
        Uniform,
        2,
        central,
        MethodSpec::Rk { order: Some(4) },
        DtRule::Ratio(0.001),
        1.0,
        Profile::PlaneWave {
            amplitude: 1.0,
            wavenumber: 1.0,
            alpha: 1.0,
        },
    );
    nls.observe.stride = 100;
    push(
        "nls_plane_wave",
        Simulation,
        "NLS plane wave, central flux, P2, N = 32, charge audit",
        nls,
    );
    out
}

pub fn preset_names() -> Vec<&'static str> {
    presets().into_iter().map(|p| p.name).collect()
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .map(|p| p.config)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown preset '{name}'")))
}
