//! Model descriptors `(M, K, S)` and their parameters.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::flux::{FluxSpec, KDecomposition};
use crate::{Error, Result};

/// Polynomial potential `V(u) = Σ_i c_i u^i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialSpec", into = "PotentialSpec")]
pub struct Potential {
    coeffs: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum PotentialSpec {
    Named(String),
    Coeffs(Vec<f64>),
}

impl TryFrom<PotentialSpec> for Potential {
    type Error = String;

    fn try_from(p: PotentialSpec) -> std::result::Result<Self, String> {
        match p {
            PotentialSpec::Named(n) => match n.as_str() {
                "zero" => Ok(Potential::zero()),
                "cubic" => Ok(Potential::cubic(1.0 / 6.0)),
                other => Err(format!("unknown potential '{other}' (zero, cubic or a coefficient list)")),
            },
            PotentialSpec::Coeffs(c) => Ok(Potential::polynomial(c)),
        }
    }
}

impl From<Potential> for PotentialSpec {
    fn from(p: Potential) -> Self {
        PotentialSpec::Coeffs(p.coeffs)
    }
}

impl Default for Potential {
    fn default() -> Self {
        Potential::zero()
    }
}

impl Potential {
    pub fn zero() -> Self {
        Potential { coeffs: vec![] }
    }

    /// `V(u) = a u³`.
    pub fn cubic(a: f64) -> Self {
        Potential {
            coeffs: vec![0.0, 0.0, 0.0, a],
        }
    }

    pub fn polynomial(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Potential { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn eval_derivative(&self, u: f64, order: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(order)
            .map(|(i, c)| {
                let f: f64 = (i + 1 - order..=i).map(|v| v as f64).product();
                c * f * u.powi((i - order) as i32)
            })
            .sum()
    }

    pub fn value(&self, u: f64) -> f64 {
        self.eval_derivative(u, 0)
    }

    pub fn d1(&self, u: f64) -> f64 {
        self.eval_derivative(u, 1)
    }

    pub fn d2(&self, u: f64) -> f64 {
        self.eval_derivative(u, 2)
    }
}

/// Model identifiers together with their physical parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelParams {
    /// `u_tt = u_xx + V'(u)`.
    Wave {
        #[serde(rename = "V", alias = "potential", default)]
        potential: Potential,
    },
    /// `u_t + η u u_x + ε² u_xxx = 0`.
    Kdv {
        #[serde(default = "one")]
        eta: f64,
        #[serde(default = "one")]
        eps: f64,
    },
    /// `u_t - σ u_xxt + (V'(u))_x = 0` with `V = a u³`.
    Bbm {
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(rename = "Vcubic", alias = "v_cubic", default = "sixth")]
        v_cubic: f64,
    },
    /// Camassa–Holm, optionally with the source that makes `sin(x + t)` exact.
    Ch {
        #[serde(default)]
        forcing: bool,
    },
    /// `i ψ_t + ψ_xx + α |ψ|² ψ = 0` with `ψ = p + iq`.
    Nls {
        #[serde(default = "one")]
        alpha: f64,
    },
    /// `u_t - σ u_xxt = ν u_xxx + (V'(u))_x` with `V = a u³`.
    BbmKdv {
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default = "one")]
        nu: f64,
        #[serde(rename = "Vcubic", alias = "v_cubic", default = "minus_sixth")]
        v_cubic: f64,
    },
}

fn one() -> f64 {
    1.0
}
fn sixth() -> f64 {
    1.0 / 6.0
}
fn minus_sixth() -> f64 {
    -1.0 / 6.0
}
fn default_sigma() -> f64 {
    1e-2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Wave,
    Kdv,
    Bbm,
    Ch,
    Nls,
    BbmKdv,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Wave,
        ModelKind::Kdv,
        ModelKind::Bbm,
        ModelKind::Ch,
        ModelKind::Nls,
        ModelKind::BbmKdv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Wave => "wave",
            ModelKind::Kdv => "kdv",
            ModelKind::Bbm => "bbm",
            ModelKind::Ch => "ch",
            ModelKind::Nls => "nls",
            ModelKind::BbmKdv => "bbm_kdv",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown model '{s}'")))
    }

    /// Default parameters.
    pub fn default_params(self) -> ModelParams {
        match self {
            ModelKind::Wave => ModelParams::Wave {
                potential: Potential::zero(),
            },
            ModelKind::Kdv => ModelParams::Kdv { eta: 1.0, eps: 1.0 },
            ModelKind::Bbm => ModelParams::Bbm {
                sigma: 1e-2,
                v_cubic: sixth(),
            },
            ModelKind::Ch => ModelParams::Ch { forcing: false },
            ModelKind::Nls => ModelParams::Nls { alpha: 1.0 },
            ModelKind::BbmKdv => ModelParams::BbmKdv {
                sigma: 1e-2,
                nu: 1.0,
                v_cubic: minus_sixth(),
            },
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Wave { .. } => ModelKind::Wave,
            ModelParams::Kdv { .. } => ModelKind::Kdv,
            ModelParams::Bbm { .. } => ModelKind::Bbm,
            ModelParams::Ch { .. } => ModelKind::Ch,
            ModelParams::Nls { .. } => ModelKind::Nls,
            ModelParams::BbmKdv { .. } => ModelKind::BbmKdv,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        match self {
            ModelParams::Kdv { eta, eps } => {
                if *eps == 0.0 || !eps.is_finite() || !eta.is_finite() {
                    return bad("kdv needs finite η and ε ≠ 0");
                }
            }
            ModelParams::Bbm { sigma, v_cubic } => {
                if *sigma <= 0.0 || !v_cubic.is_finite() {
                    return bad("bbm needs σ > 0");
                }
            }
            ModelParams::BbmKdv { sigma, nu, v_cubic } => {
                if *sigma < 0.0 || !nu.is_finite() || !v_cubic.is_finite() {
                    return bad("bbm_kdv needs σ ≥ 0 and finite ν");
                }
            }
            ModelParams::Nls { alpha } => {
                if !alpha.is_finite() {
                    return bad("nls needs finite α");
                }
            }
            ModelParams::Wave { potential } => {
                if potential.coeffs().iter().any(|c| !c.is_finite()) {
                    return bad("potential coefficients must be finite");
                }
            }
            ModelParams::Ch { .. } => {}
        }
        Ok(())
    }
}

/// Flux scalars; each model reads the ones it defines and rejects the others.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluxScalars {
    /// Alternating parameter (NLS).
    pub alpha: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha11: f64,
    pub alpha13: f64,
    pub alpha33: f64,
    pub beta: f64,
}

/// Upper bound on the magnitude of any flux scalar.
pub const FLUX_SCALAR_CAP: f64 = 10.0;

impl FluxScalars {
    pub fn central() -> Self {
        Self::default()
    }

    pub fn wave(alpha11: f64, alpha13: f64, alpha33: f64, beta: f64) -> Self {
        FluxScalars {
            alpha11,
            alpha13,
            alpha33,
            beta,
            ..Self::default()
        }
    }

    fn entries(&self) -> [(&'static str, f64); 8] {
        [
            ("alpha", self.alpha),
            ("alpha0", self.alpha0),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("alpha11", self.alpha11),
            ("alpha13", self.alpha13),
            ("alpha33", self.alpha33),
            ("beta", self.beta),
        ]
    }

    /// Checks that only `allowed` scalars are nonzero and all are within the cap.
    pub fn check(&self, model: ModelKind, allowed: &[&str]) -> Result<()> {
        for (name, v) in self.entries() {
            if !v.is_finite() || v.abs() > FLUX_SCALAR_CAP {
                return Err(Error::InvalidConfig(format!(
                    "flux scalar {name} = {v} outside [-{FLUX_SCALAR_CAP}, {FLUX_SCALAR_CAP}]"
                )));
            }
            if v != 0.0 && !allowed.contains(&name) {
                return Err(Error::InvalidConfig(format!(
                    "flux scalar {name} is not used by the {model} scheme (allowed: {})",
                    if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") }
                )));
            }
        }
        Ok(())
    }

    /// Compact label, e.g. `(1,0,-1,0)` for wave fluxes.
    pub fn label(&self, model: ModelKind) -> String {
        let f = |v: f64| {
            let s = format!("{v}");
            if s == "-0" {
                "0".to_string()
            } else {
                s
            }
        };
        match model {
            ModelKind::Wave => format!(
                "({},{},{},{})",
                f(self.alpha11),
                f(self.alpha13),
                f(self.alpha33),
                f(self.beta)
            ),
            ModelKind::Kdv => format!("({},{})", f(self.alpha1), f(self.alpha2)),
            ModelKind::Bbm => format!("({},{},{})", f(self.alpha0), f(self.alpha1), f(self.alpha2)),
            ModelKind::Ch => format!("({})", f(self.alpha0)),
            ModelKind::Nls => format!("({})", f(self.alpha)),
            ModelKind::BbmKdv => "central".to_string(),
        }
    }
}

/// A named flux choice, optionally restricted to particular meshes and degrees.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxPreset {
    pub name: String,
    pub scalars: FluxScalars,
    /// `(N, k)` pairs for sweeps when the default grid is not admissible.
    pub grid: Option<Vec<(usize, usize)>>,
}

/// The shipped flux presets of each model.
pub fn flux_presets(model: ModelKind) -> Vec<FluxPreset> {
    let plain = |s: FluxScalars| FluxPreset {
        name: s.label(model),
        scalars: s,
        grid: None,
    };
    match model {
        ModelKind::Wave => [
            (0.0, 0.0, 0.0, 0.0),
            (1.0, 0.0, 0.0, 0.0),
            (0.0, 0.0, -1.0, 0.0),
            (1.0, 0.0, -1.0, 0.0),
            (0.0, 0.125, 0.0, 0.0),
            (0.0, 0.0, 0.0, 1.0),
            (0.0, 0.0, 0.0, -1.0),
            (0.0, 0.5, 0.0, 0.0),
        ]
        .into_iter()
        .map(|(a, b, c, d)| plain(FluxScalars::wave(a, b, c, d)))
        .collect(),
        ModelKind::Kdv => [0.0, 0.5, -0.5]
            .into_iter()
            .map(|a| {
                plain(FluxScalars {
                    alpha2: a,
                    ..FluxScalars::default()
                })
            })
            .collect(),
        ModelKind::Bbm => vec![
            plain(FluxScalars::central()),
            FluxPreset {
                grid: Some(vec![(5, 2), (9, 2)]),
                ..plain(FluxScalars {
                    alpha1: 0.5,
                    ..FluxScalars::default()
                })
            },
            plain(FluxScalars {
                alpha0: 0.25,
                ..FluxScalars::default()
            }),
        ],
        ModelKind::Ch => [0.0, 3.0]
            .into_iter()
            .map(|a| {
                plain(FluxScalars {
                    alpha0: a,
                    ..FluxScalars::default()
                })
            })
            .collect(),
        ModelKind::Nls => [0.0, 0.5, -0.5]
            .into_iter()
            .map(|a| {
                plain(FluxScalars {
                    alpha: a,
                    ..FluxScalars::default()
                })
            })
            .collect(),
        ModelKind::BbmKdv => vec![plain(FluxScalars::central())],
    }
}

/// `(m, M, K, S, ∇S, ∇²S)` together with component names.
#[derive(Clone, Debug)]
pub struct MultiSymplecticSystem {
    pub params: ModelParams,
    pub m: usize,
    pub mm: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub names: Vec<&'static str>,
}

fn sparse(m: usize, entries: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(m, m);
    for &(i, j, v) in entries {
        a[(i, j)] = v;
    }
    a
}

/// Builds the descriptor of a model.
pub fn make_system(params: &ModelParams) -> Result<MultiSymplecticSystem> {
    params.validate()?;
    let (m, mm, k, names) = match params {
        ModelParams::Wave { .. } => (
            3,
            sparse(3, &[(0, 1, -1.0), (1, 0, 1.0)]),
            sparse(3, &[(0, 2, 1.0), (2, 0, -1.0)]),
            vec!["u", "v", "w"],
        ),
        ModelParams::Kdv { eps, .. } => (
            4,
            sparse(4, &[(0, 1, 0.5), (1, 0, -0.5)]),
            sparse(4, &[(0, 3, 1.0), (1, 2, -eps), (2, 1, *eps), (3, 0, -1.0)]),
            vec!["phi", "u", "v", "w"],
        ),
        ModelParams::Bbm { sigma, .. } => (
            5,
            sparse(5, &[(0, 1, -0.5), (1, 0, 0.5), (1, 2, -0.5 * sigma), (2, 1, 0.5 * sigma)]),
            sparse(5, &[(0, 4, -1.0), (4, 0, 1.0), (1, 3, -0.5 * sigma), (3, 1, 0.5 * sigma)]),
            vec!["phi", "u", "v", "w", "p"],
        ),
        ModelParams::Ch { .. } => (
            5,
            sparse(5, &[(0, 1, 0.5), (0, 2, -0.5), (1, 0, -0.5), (2, 0, 0.5)]),
            sparse(5, &[(0, 3, -1.0), (3, 0, 1.0), (1, 4, 1.0), (4, 1, -1.0)]),
            vec!["u", "phi", "rho", "v", "w"],
        ),
        ModelParams::Nls { .. } => (
            4,
            sparse(4, &[(0, 1, 1.0), (1, 0, -1.0)]),
            sparse(4, &[(0, 2, -1.0), (1, 3, -1.0), (2, 0, 1.0), (3, 1, 1.0)]),
            vec!["p", "q", "v", "w"],
        ),
        ModelParams::BbmKdv { sigma, nu, .. } => (
            6,
            sparse(6, &[(0, 1, 0.5 * sigma), (0, 2, -0.5), (1, 0, -0.5 * sigma), (2, 0, 0.5)]),
            sparse(
                6,
                &[
                    (0, 4, 0.5 * sigma),
                    (0, 5, *nu),
                    (2, 3, -1.0),
                    (3, 2, 1.0),
                    (4, 0, -0.5 * sigma),
                    (5, 0, -nu),
                ],
            ),
            vec!["u", "theta", "phi", "w", "rho", "v"],
        ),
    };
    Ok(MultiSymplecticSystem {
        params: params.clone(),
        m,
        mm,
        k,
        names,
    })
}

impl MultiSymplecticSystem {
    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }

    /// `S(z)`.
    pub fn s(&self, z: &[f64]) -> f64 {
        match &self.params {
            ModelParams::Wave { potential } => 0.5 * (z[1] * z[1] - z[2] * z[2]) - potential.value(z[0]),
            ModelParams::Kdv { eta, .. } => 0.5 * z[2] * z[2] - z[1] * z[3] + eta / 6.0 * z[1].powi(3),
            ModelParams::Bbm { sigma, v_cubic } => {
                z[1] * z[4] - v_cubic * z[1].powi(3) + 0.5 * sigma * z[2] * z[3]
            }
            ModelParams::Ch { .. } => {
                let (u, rho, v, w) = (z[0], z[2], z[3], z[4]);
                -w * u - 0.5 * u.powi(3) - 0.5 * u * rho * rho + rho * v
            }
            ModelParams::Nls { alpha } => {
                let r = z[0] * z[0] + z[1] * z[1];
                0.5 * (z[2] * z[2] + z[3] * z[3] + 0.5 * alpha * r * r)
            }
            ModelParams::BbmKdv { sigma, nu, v_cubic } => {
                z[0] * z[3] - v_cubic * z[0].powi(3) - 0.5 * nu * z[5] * z[5] - 0.5 * sigma * z[1] * z[4]
            }
        }
    }

    /// `∇S(z)`.
    pub fn grad(&self, z: &[f64]) -> Vec<f64> {
        match &self.params {
            ModelParams::Wave { potential } => vec![-potential.d1(z[0]), z[1], -z[2]],
            ModelParams::Kdv { eta, .. } => vec![0.0, -z[3] + 0.5 * eta * z[1] * z[1], z[2], -z[1]],
            ModelParams::Bbm { sigma, v_cubic } => vec![
                0.0,
                z[4] - 3.0 * v_cubic * z[1] * z[1],
                0.5 * sigma * z[3],
                0.5 * sigma * z[2],
                z[1],
            ],
            ModelParams::Ch { .. } => {
                let (u, rho, v, w) = (z[0], z[2], z[3], z[4]);
                vec![-w - 1.5 * u * u - 0.5 * rho * rho, 0.0, -u * rho + v, rho, -u]
            }
            ModelParams::Nls { alpha } => {
                let r = z[0] * z[0] + z[1] * z[1];
                vec![alpha * r * z[0], alpha * r * z[1], z[2], z[3]]
            }
            ModelParams::BbmKdv { sigma, nu, v_cubic } => vec![
                z[3] - 3.0 * v_cubic * z[0] * z[0],
                -0.5 * sigma * z[4],
                0.0,
                z[0],
                -0.5 * sigma * z[1],
                -nu * z[5],
            ],
        }
    }

    /// `∇²S(z)`.
    pub fn hess(&self, z: &[f64]) -> DMatrix<f64> {
        let m = self.m;
        match &self.params {
            ModelParams::Wave { potential } => sparse(m, &[(0, 0, -potential.d2(z[0])), (1, 1, 1.0), (2, 2, -1.0)]),
            ModelParams::Kdv { eta, .. } => {
                sparse(m, &[(1, 1, eta * z[1]), (1, 3, -1.0), (3, 1, -1.0), (2, 2, 1.0)])
            }
            ModelParams::Bbm { sigma, v_cubic } => sparse(
                m,
                &[
                    (1, 1, -6.0 * v_cubic * z[1]),
                    (1, 4, 1.0),
                    (4, 1, 1.0),
                    (2, 3, 0.5 * sigma),
                    (3, 2, 0.5 * sigma),
                ],
            ),
            ModelParams::Ch { .. } => {
                let (u, rho) = (z[0], z[2]);
                sparse(
                    m,
                    &[
                        (0, 0, -3.0 * u),
                        (0, 2, -rho),
                        (2, 0, -rho),
                        (0, 4, -1.0),
                        (4, 0, -1.0),
                        (2, 2, -u),
                        (2, 3, 1.0),
                        (3, 2, 1.0),
                    ],
                )
            }
            ModelParams::Nls { alpha } => {
                let (p, q) = (z[0], z[1]);
                let r = p * p + q * q;
                sparse(
                    m,
                    &[
                        (0, 0, alpha * (r + 2.0 * p * p)),
                        (1, 1, alpha * (r + 2.0 * q * q)),
                        (0, 1, 2.0 * alpha * p * q),
                        (1, 0, 2.0 * alpha * p * q),
                        (2, 2, 1.0),
                        (3, 3, 1.0),
                    ],
                )
            }
            ModelParams::BbmKdv { sigma, nu, v_cubic } => sparse(
                m,
                &[
                    (0, 0, -6.0 * v_cubic * z[0]),
                    (0, 3, 1.0),
                    (3, 0, 1.0),
                    (1, 4, -0.5 * sigma),
                    (4, 1, -0.5 * sigma),
                    (5, 5, -nu),
                ],
            ),
        }
    }

    /// The per-model block decomposition of `K` with `Q` a signed permutation.
    ///
    /// Rows of `Q` list the first-half components, then the kernel components (odd
    /// `m`), then the partners, so that `K = Q^T [[0,0,-Λ^T],[0,0,0],[Λ,0,0]] Q`.
    pub fn natural_decomposition(&self) -> KDecomposition {
        let m = self.m;
        let r = m / 2;
        let (first, middle, second): (Vec<usize>, Vec<usize>, Vec<usize>) = match self.kind() {
            ModelKind::Wave => (vec![0], vec![1], vec![2]),
            ModelKind::Kdv => (vec![0, 1], vec![], vec![3, 2]),
            ModelKind::Bbm => (vec![0, 1], vec![2], vec![4, 3]),
            ModelKind::Ch => (vec![0, 1], vec![2], vec![3, 4]),
            ModelKind::Nls => (vec![0, 1], vec![], vec![2, 3]),
            ModelKind::BbmKdv => (vec![0, 2, 1], vec![], vec![5, 3, 4]),
        };
        let mut q = DMatrix::zeros(m, m);
        for (row, &c) in first.iter().chain(&middle).chain(&second).enumerate() {
            q[(row, c)] = 1.0;
        }
        // Λ_ij = (Q K Q^T)_{r+odd+i, j}
        let blk = &q * &self.k * q.transpose();
        let off = m - r;
        let mut lambda = DMatrix::zeros(r, r);
        for i in 0..r {
            for j in 0..r {
                lambda[(i, j)] = blk[(off + i, j)];
            }
        }
        KDecomposition { q, lambda }
    }
}

/// The flux matrices of a model for the given scalars.
pub fn flux_spec(system: &MultiSymplecticSystem, f: &FluxScalars) -> Result<FluxSpec> {
    let kind = system.kind();
    let m = system.m;
    let (a, b) = match &system.params {
        ModelParams::Wave { .. } => {
            f.check(kind, &["alpha11", "alpha13", "alpha33", "beta"])?;
            (
                sparse(
                    m,
                    &[(0, 0, f.alpha11), (0, 2, f.alpha13), (2, 0, f.alpha13), (2, 2, f.alpha33)],
                ),
                &system.mm * f.beta,
            )
        }
        ModelParams::Kdv { eps, .. } => {
            f.check(kind, &["alpha1", "alpha2"])?;
            (
                sparse(
                    m,
                    &[(0, 3, f.alpha1), (3, 0, f.alpha1), (1, 2, eps * f.alpha2), (2, 1, eps * f.alpha2)],
                ),
                DMatrix::zeros(m, m),
            )
        }
        ModelParams::Bbm { sigma, .. } => {
            f.check(kind, &["alpha0", "alpha1", "alpha2"])?;
            let s2 = 0.5 * sigma * f.alpha2;
            (
                sparse(
                    m,
                    &[
                        (0, 1, f.alpha0),
                        (1, 0, f.alpha0),
                        (0, 4, f.alpha1),
                        (4, 0, f.alpha1),
                        (1, 3, s2),
                        (3, 1, s2),
                    ],
                ),
                DMatrix::zeros(m, m),
            )
        }
        ModelParams::Ch { .. } => {
            f.check(kind, &["alpha0"])?;
            (sparse(m, &[(0, 1, f.alpha0), (1, 0, f.alpha0)]), DMatrix::zeros(m, m))
        }
        ModelParams::Nls { .. } => {
            f.check(kind, &["alpha"])?;
            (
                sparse(m, &[(0, 2, f.alpha), (2, 0, f.alpha), (1, 3, f.alpha), (3, 1, f.alpha)]),
                DMatrix::zeros(m, m),
            )
        }
        ModelParams::BbmKdv { .. } => {
            f.check(kind, &[])?;
            (DMatrix::zeros(m, m), DMatrix::zeros(m, m))
        }
    };
    FluxSpec::new(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_params() -> Vec<ModelParams> {
        vec![
            ModelParams::Wave {
                potential: Potential::polynomial(vec![0.0, 0.3, -0.2, 0.5, 0.1]),
            },
            ModelParams::Kdv { eta: 1.3, eps: 0.7 },
            ModelParams::Bbm {
                sigma: 0.2,
                v_cubic: 1.0 / 6.0,
            },
            ModelParams::Ch { forcing: false },
            ModelParams::Nls { alpha: 2.0 },
            ModelParams::BbmKdv {
                sigma: 0.3,
                nu: 0.8,
                v_cubic: -1.0 / 6.0,
            },
        ]
    }

    #[test]
    fn structure_matrices_are_antisymmetric() {
        for p in all_params() {
            let s = make_system(&p).unwrap();
            assert_eq!((&s.mm + s.mm.transpose()).amax(), 0.0);
            assert_eq!((&s.k + s.k.transpose()).amax(), 0.0);
            assert_eq!(s.names.len(), s.m);
            let d = s.natural_decomposition();
            assert!((d.reconstruct() - &s.k).amax() < 1e-15, "{p:?}");
        }
    }

    #[test]
    fn gradients_match_differences() {
        let z0 = [0.3, -0.7, 0.4, 1.1, -0.2, 0.6];
        for p in all_params() {
            let s = make_system(&p).unwrap();
            let z = &z0[..s.m];
            let g = s.grad(z);
            let h = s.hess(z);
            assert!((&h - h.transpose()).amax() == 0.0);
            let e = 1e-6;
            for i in 0..s.m {
                let mut zp = z.to_vec();
                let mut zm = z.to_vec();
                zp[i] += e;
                zm[i] -= e;
                let fd = (s.s(&zp) - s.s(&zm)) / (2.0 * e);
                assert!((fd - g[i]).abs() < 1e-8, "{p:?} {i}");
                let (gp, gm) = (s.grad(&zp), s.grad(&zm));
                for j in 0..s.m {
                    let fd = (gp[j] - gm[j]) / (2.0 * e);
                    assert!((fd - h[(j, i)]).abs() < 1e-7, "{p:?} {i} {j}");
                }
            }
        }
    }

    #[test]
    fn wave_descriptor_entries() {
        let s = make_system(&ModelParams::Wave {
            potential: Potential::zero(),
        })
        .unwrap();
        assert_eq!(s.mm[(0, 1)], -1.0);
        assert_eq!(s.k[(0, 2)], 1.0);
        let d = s.natural_decomposition();
        assert_eq!(d.lambda[(0, 0)], -1.0);
    }

    #[test]
    fn potentials() {
        let p = Potential::polynomial(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(p.value(2.0), 1.0 + 4.0 + 12.0 + 32.0);
        assert_eq!(p.d1(2.0), 2.0 + 12.0 + 48.0);
        assert_eq!(p.d2(2.0), 6.0 + 48.0);
        assert_eq!(p.degree(), 3);
        let named: Potential = serde_json::from_str("\"cubic\"").unwrap();
        assert_eq!(named, Potential::cubic(1.0 / 6.0));
        assert!(serde_json::from_str::<Potential>("\"quartic\"").is_err());
    }

    #[test]
    fn flux_specs_are_valid_and_checked() {
        for p in all_params() {
            let s = make_system(&p).unwrap();
            for preset in flux_presets(s.kind()) {
                let spec = flux_spec(&s, &preset.scalars).unwrap();
                assert!(spec.validate().ok());
            }
        }
        let s = make_system(&ModelParams::Ch { forcing: false }).unwrap();
        let bad = FluxScalars {
            beta: 1.0,
            ..FluxScalars::default()
        };
        assert!(flux_spec(&s, &bad).is_err());
        let big = FluxScalars {
            alpha0: 11.0,
            ..FluxScalars::default()
        };
        assert!(flux_spec(&s, &big).is_err());
    }

    #[test]
    fn params_roundtrip() {
        let json = r#"{"model":"bbm","sigma":0.0121,"Vcubic":0.16}"#;
        let p: ModelParams = serde_json::from_str(json).unwrap();
        assert_eq!(
            p,
            ModelParams::Bbm {
                sigma: 0.0121,
                v_cubic: 0.16
            }
        );
        let back: ModelParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(p, back);
        let w: ModelParams = serde_json::from_str(r#"{"model":"wave","V":"zero"}"#).unwrap();
        assert_eq!(w.kind(), ModelKind::Wave);
    }
}
