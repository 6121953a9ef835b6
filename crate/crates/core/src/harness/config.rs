use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mesh_basis::{Mesh1D, MeshPattern};
use crate::parallel::Execution;
use crate::systems::{FluxScalars, ModelParams, Profile};
use crate::time_integration::{Filter, Method, Tableau};
use crate::{Error, Result};

/// One cell count or a refinement list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cells {
    One(usize),
    List(Vec<usize>),
}

impl Cells {
    pub fn to_vec(&self) -> Vec<usize> {
        match self {
            Cells::One(n) => vec![*n],
            Cells::List(v) => v.clone(),
        }
    }
}

fn uniform() -> MeshPattern {
    MeshPattern::Uniform
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub domain: (f64, f64),
    pub cells: Cells,
    #[serde(default = "uniform")]
    pub pattern: MeshPattern,
    /// Random interior-edge displacement as a fraction of the cell width (uses the seed).
    #[serde(default)]
    pub jitter: f64,
}

impl MeshSpec {
    pub fn build(&self, n: usize, seed: u64) -> Result<Mesh1D> {
        if !(0.0..0.5).contains(&self.jitter) {
            return Err(Error::InvalidConfig(format!("mesh jitter must lie in [0, 0.5), got {}", self.jitter)));
        }
        let mesh = Mesh1D::build(self.domain, n, self.pattern)?;
        if self.jitter == 0.0 {
            return Ok(mesh);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
        let mut edges = mesh.edges().to_vec();
        for j in 1..n {
            let h = mesh.width(j - 1).min(mesh.width(j));
            edges[j] += rng.gen_range(-self.jitter..self.jitter) * h;
        }
        Mesh1D::from_edges(edges)
    }
}

/// Time step rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtRule {
    /// `Δt = ratio · Δx_min`.
    Ratio(f64),
    Absolute(f64),
}

impl DtRule {
    pub fn dt(&self, mesh: &Mesh1D) -> Result<f64> {
        let dt = match *self {
            DtRule::Ratio(r) => r * mesh.h_min(),
            DtRule::Absolute(dt) => dt,
        };
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("time step must be positive, got {dt}")));
        }
        Ok(dt)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    /// Explicit RK of the given order; `k + 1` when omitted.
    Rk {
        #[serde(default)]
        order: Option<usize>,
    },
    /// SSPRK3 with the modal filter after each stage.
    FilteredSsprk3 {
        #[serde(default)]
        filter: Filter,
    },
}

impl MethodSpec {
    pub fn build(&self, k: usize) -> Result<Method> {
        match self {
            MethodSpec::Rk { order } => Ok(Method::Rk(Tableau::of_order(order.unwrap_or(k + 1))?)),
            MethodSpec::FilteredSsprk3 { filter } => {
                filter.validate()?;
                Ok(Method::FilteredSsprk3 { filter: *filter, k })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub method: MethodSpec,
    pub dt: DtRule,
    pub t_end: f64,
}

fn one() -> usize {
    1
}

fn ten() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSpec {
    /// Record energy (and error) every `stride` steps.
    #[serde(default = "one")]
    pub stride: usize,
    /// Extra snapshot times; the final state is always written.
    #[serde(default)]
    pub snapshots: Vec<f64>,
    #[serde(default = "ten")]
    pub points_per_cell: usize,
}

impl Default for ObserverSpec {
    fn default() -> Self {
        ObserverSpec {
            stride: 1,
            snapshots: Vec::new(),
            points_per_cell: 10,
        }
    }
}

/// A complete experiment description, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub model: ModelParams,
    pub mesh: MeshSpec,
    pub k: usize,
    #[serde(default)]
    pub flux: FluxScalars,
    pub time: TimeSpec,
    pub initial: Profile,
    #[serde(default)]
    pub observe: ObserverSpec,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub execution: Execution,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(s).map_err(|e| Error::InvalidConfig(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn cells(&self) -> Vec<usize> {
        self.mesh.cells.to_vec()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        self.model.validate()?;
        self.initial.validate()?;
        let cells = self.cells();
        if cells.is_empty() {
            return bad("mesh.cells is empty".into());
        }
        if self.mesh.pattern == MeshPattern::Explicit {
            return bad("explicit mesh pattern is not available in configs".into());
        }
        for &n in &cells {
            Mesh1D::build(self.mesh.domain, n, self.mesh.pattern)?;
        }
        if self.k > 8 {
            return bad(format!("degree k = {} above 8", self.k));
        }
        if !(self.time.t_end >= 0.0 && self.time.t_end.is_finite()) {
            return bad(format!("t_end must be finite and non-negative, got {}", self.time.t_end));
        }
        match self.time.dt {
            DtRule::Ratio(r) | DtRule::Absolute(r) if !(r > 0.0 && r.is_finite()) => {
                return bad(format!("dt rule needs a positive value, got {r}"));
            }
            _ => {}
        }
        self.time.method.build(self.k)?;
        if self.observe.points_per_cell < 10 {
            return bad("observe.points_per_cell must be at least 10".into());
        }
        if self.observe.snapshots.iter().any(|t| !(*t >= 0.0 && *t <= self.time.t_end)) {
            return bad("snapshot times must lie in [0, t_end]".into());
        }
        Ok(())
    }

    pub(crate) fn mesh_for(&self, n: usize) -> Result<Arc<Mesh1D>> {
        Ok(Arc::new(self.mesh.build(n, self.seed)?))
    }
}
