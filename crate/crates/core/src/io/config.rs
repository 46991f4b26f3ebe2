//! TOML run configuration.
//!
//! ```toml
//! model = "full_laplacian"
//! k = 1
//! nu = 0.01
//! seed = 7
//! monitors = ["phi_ode", "lyapunov"]
//!
//! [profile]
//! name = "sine_perturbed"
//! params = { amplitude = 0.5 }
//!
//! [grid]
//! L = 12.0
//! N = 1536
//!
//! [time]
//! dt = 0.001
//! T = 5.0
//! sample_every = 100
//!
//! [init]
//! kind = "gaussian_bump"
//! center = 0.0
//! width = 1.0
//! amplitude = [1.0, 0.0]
//! ```
//!
//! Optional `[sweep]` and `[oracle]` tables feed the `sweep` and `oracle`
//! commands.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::couette::EtaGrid;
use crate::discretization::{Grid, InitialData, InitialKind, ModeState, Model, ShearField};
use crate::error::{Error, Result};
use crate::evolve::EvolveConfig;
use crate::experiments::{MonitorKind, SweepSpec};
use crate::scalar::{Cplx, Real};
use crate::shear::Shear;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub sample_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub kind: InitialKind,
    pub center: f64,
    pub width: f64,
    #[serde(default = "unit_amplitude")]
    pub amplitude: [f64; 2],
}

fn unit_amplitude() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub nus: Vec<f64>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Fixed grid size for every viscosity; otherwise sized by the Nyquist rule.
    #[serde(default, rename = "N")]
    pub points: Option<usize>,
    #[serde(default = "default_safety")]
    pub nyquist_safety: f64,
    #[serde(default = "default_horizon_factor")]
    pub horizon_factor: f64,
}

fn default_threshold() -> f64 {
    0.01
}
fn default_safety() -> f64 {
    2.0
}
fn default_horizon_factor() -> f64 {
    1.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "default_eta_max")]
    pub eta_max: f64,
    #[serde(default = "default_eta_points")]
    pub eta_points: usize,
    /// Evaluation times; defaults to the solver sample times of `[time]`.
    #[serde(default)]
    pub times: Vec<f64>,
}

fn default_eta_max() -> f64 {
    64.0
}
fn default_eta_points() -> usize {
    1 << 14
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            eta_max: default_eta_max(),
            eta_points: default_eta_points(),
            times: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: ProfileSection,
    pub model: Model,
    pub k: u32,
    pub nu: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub monitors: Vec<String>,
    pub grid: GridSection,
    pub time: TimeSection,
    pub init: InitSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
}

impl RunConfig {
    /// Parses and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config { message, .. } => Error::Config {
                path: path.into(),
                message,
            },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config {
            path: "<inline>".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Invalid(e.to_string()))
    }

    /// Checks every precondition the run will meet: profile, grid, support of
    /// the initial data, step size, resolution, monitor names.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Invalid("k must be >= 1".into()));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::Invalid(format!("nu must be finite and >= 0, got {}", self.nu)));
        }
        if self.time.sample_every == 0 {
            return Err(Error::Invalid("sample_every must be >= 1".into()));
        }
        if !(self.time.dt > 0.0 && self.time.horizon > 0.0) {
            return Err(Error::Invalid("dt and T must be positive".into()));
        }
        self.monitor_kinds()?;
        let field = self.field::<f64>()?;
        self.initial::<f64>().validate(field.grid())?;
        self.evolve::<f64>().validate(&field, self.k, self.nu)?;
        if let Some(sw) = &self.sweep {
            if !(sw.threshold > 0.0 && sw.threshold < 1.0) {
                return Err(Error::Invalid(format!(
                    "sweep threshold must lie in (0, 1), got {}",
                    sw.threshold
                )));
            }
            if sw.nus.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(Error::Invalid("sweep viscosities must be positive".into()));
            }
        }
        if let Some(o) = &self.oracle {
            if !(o.eta_max > 0.0) || o.eta_points < 2 {
                return Err(Error::Invalid("oracle eta grid needs eta_max > 0 and >= 2 points".into()));
            }
        }
        Ok(())
    }

    pub fn shear<T: Real>(&self) -> Result<Shear<T>> {
        Shear::from_name(&self.profile.name, &self.profile.params)
    }

    pub fn grid<T: Real>(&self) -> Result<Grid<T>> {
        Grid::new(T::of(self.grid.half_width), self.grid.points)
    }

    pub fn field<T: Real>(&self) -> Result<Arc<ShearField<T>>> {
        Ok(ShearField::new(self.grid()?, self.shear()?))
    }

    pub fn initial<T: Real>(&self) -> InitialData<T> {
        let i = &self.init;
        let amp = Cplx::new(T::of(i.amplitude[0]), T::of(i.amplitude[1]));
        match i.kind {
            InitialKind::GaussianBump => InitialData::gaussian(T::of(i.center), T::of(i.width), amp),
            InitialKind::HermiteBump => InitialData::hermite(T::of(i.center), T::of(i.width), amp),
        }
    }

    pub fn evolve<T: Real>(&self) -> EvolveConfig<T> {
        EvolveConfig::new(T::of(self.time.dt), T::of(self.time.horizon), self.time.sample_every)
    }

    pub fn nu_t<T: Real>(&self) -> T {
        T::of(self.nu)
    }

    /// Initial state on the configured grid.
    pub fn state<T: Real>(&self) -> Result<ModeState<T>> {
        ModeState::from_initial(self.field()?, self.k, self.model, &self.initial())
    }

    pub fn monitor_kinds(&self) -> Result<Vec<MonitorKind>> {
        self.monitors.iter().map(|m| MonitorKind::from_name(m)).collect()
    }

    pub fn eta_grid<T: Real>(&self) -> EtaGrid<T> {
        let o = self.oracle.clone().unwrap_or_default();
        EtaGrid {
            max: T::of(o.eta_max),
            points: o.eta_points,
        }
    }

    pub fn sweep_spec<T: Real>(&self) -> Result<SweepSpec<T>> {
        let sw = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::Invalid("config has no [sweep] table".into()))?;
        let mut spec = SweepSpec::new(
            self.shear()?,
            sw.nus.iter().map(|&v| T::of(v)).collect(),
            self.initial(),
            T::of(self.grid.half_width),
        );
        spec.k = self.k;
        spec.model = self.model;
        spec.threshold = T::of(sw.threshold);
        spec.points = sw.points;
        spec.dt = T::of(self.time.dt);
        spec.sample_every = self.time.sample_every;
        spec.nyquist_safety = T::of(sw.nyquist_safety);
        spec.horizon_factor = T::of(sw.horizon_factor);
        Ok(spec)
    }
}
