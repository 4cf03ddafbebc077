//! Scenario configuration (TOML).
//!
//! A scenario bundles the vessel, current, path, gains, surge reference,
//! initial state and integration settings. Unknown keys are rejected.
//! [`ScenarioConfig::normalize`] resolves the vessel file and fills every
//! optional value so that the normalised form round-trips exactly.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::ControlGains;
use crate::error::{Error, Result};
use crate::guidance::GuidanceGains;
use crate::model::{Environment, VesselParams, VesselState};
use crate::observer::ObserverGains;
use crate::path::{PathGeometry, PathSpec};

pub const DEFAULT_C_MIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Skip the feasibility admission check.
    #[serde(default)]
    pub force: bool,
    pub vessel: VesselSource,
    pub environment: EnvironmentConfig,
    pub path: PathSpec,
    pub guidance: GuidanceGains,
    #[serde(default)]
    pub control: ControlGains,
    #[serde(default)]
    pub observer: ObserverConfig,
    pub reference: ReferenceProfile,
    pub initial: InitialState,
    pub sim: SimSettings,
    #[serde(default)]
    pub monitor: MonitorSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VesselSource {
    File(VesselFile),
    Inline(VesselParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VesselFile {
    pub file: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub vx: f64,
    pub vy: f64,
    /// Assumed bound on the current speed; defaults to `|V_c|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vmax: Option<f64>,
}

impl EnvironmentConfig {
    pub fn environment(&self) -> Environment {
        let mut e = Environment::new(self.vx, self.vy);
        if let Some(v) = self.vmax {
            e.vmax = v;
        }
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverConfig {
    pub kx1: f64,
    pub ky1: f64,
    pub kx2: f64,
    pub ky2: f64,
    #[serde(default)]
    pub allow_unequal_k2: bool,
    /// Standard deviation of additive position-measurement noise (m).
    /// Noise is outside the stability analysis; it is sampled once per step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for ObserverConfig {
    fn default() -> Self {
        let g = ObserverGains::default();
        Self {
            kx1: g.kx1,
            ky1: g.ky1,
            kx2: g.kx2,
            ky2: g.ky2,
            allow_unequal_k2: false,
            noise_std: None,
            seed: None,
        }
    }
}

impl ObserverConfig {
    pub fn gains(&self) -> ObserverGains {
        ObserverGains {
            kx1: self.kx1,
            ky1: self.ky1,
            kx2: self.kx2,
            ky2: self.ky2,
        }
    }
}

/// Desired relative surge speed `u_rd(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ReferenceProfile {
    Constant {
        u_rd: f64,
    },
    /// Piecewise-linear through `[t, u_rd]` points, held constant outside.
    Table {
        points: Vec<[f64; 2]>,
    },
}

impl ReferenceProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant { u_rd } if u_rd.is_finite() && *u_rd > 0.0 => Ok(()),
            Self::Constant { u_rd } => {
                Err(Error::Config(format!("u_rd = {u_rd} must be positive")))
            }
            Self::Table { points } => {
                if points.is_empty() {
                    return Err(Error::Config("reference table is empty".into()));
                }
                if points
                    .iter()
                    .any(|p| !(p[0].is_finite() && p[1].is_finite() && p[1] > 0.0))
                {
                    return Err(Error::Config(
                        "reference table entries must be finite with positive speed".into(),
                    ));
                }
                if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(Error::Config(
                        "reference table times must be strictly increasing".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// `(u_rd, u̇_rd, ü_rd)` at time `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        match self {
            Self::Constant { u_rd } => (*u_rd, 0.0, 0.0),
            Self::Table { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if t <= first[0] {
                    return (first[1], 0.0, 0.0);
                }
                if t >= last[0] {
                    return (last[1], 0.0, 0.0);
                }
                let i = points.partition_point(|p| p[0] <= t) - 1;
                let (a, b) = (points[i], points[i + 1]);
                let slope = (b[1] - a[1]) / (b[0] - a[0]);
                (a[1] + slope * (t - a[0]), slope, 0.0)
            }
        }
    }

    pub fn range(&self) -> (f64, f64) {
        match self {
            Self::Constant { u_rd } => (*u_rd, *u_rd),
            Self::Table { points } => points
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    (lo.min(p[1]), hi.max(p[1]))
                }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub u_r: f64,
    pub v_r: f64,
    pub r: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

impl InitialState {
    pub fn vessel_state(&self) -> VesselState {
        VesselState {
            x: self.x,
            y: self.y,
            psi: self.psi,
            u_r: self.u_r,
            v_r: self.v_r,
            r: self.r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    /// Classical Runge–Kutta.
    Rk4,
    /// Exponential Runge–Kutta (Cox–Matthews) with the yaw-rate damping
    /// `−k₁ r` treated exactly; reduces to RK4 on every other state.
    #[default]
    Etdrk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "one")]
    pub log_every: usize,
    #[serde(default)]
    pub integrator: Integrator,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorSettings {
    /// Abort when `1 − κ y_bp` drops below this; defaults to the tuned σ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_floor: Option<f64>,
    #[serde(default = "default_c_min")]
    pub c_min: f64,
}

fn default_c_min() -> f64 {
    DEFAULT_C_MIN
}

impl Default for MonitorSettings {
    fn default() -> Self {
        Self {
            sigma_floor: None,
            c_min: DEFAULT_C_MIN,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(src: &str, origin: &Path) -> Result<Self> {
        toml::from_str(src).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("serialisation failed: {e}")))
    }

    /// Reads, parses, normalises and validates a scenario file. Relative
    /// vessel paths are resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg = Self::from_toml_str(&src, path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let cfg = cfg.normalize(base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Inlines the vessel and makes every defaulted value explicit.
    pub fn normalize(mut self, base_dir: &Path) -> Result<Self> {
        if let VesselSource::File(VesselFile { file }) = &self.vessel {
            let full = if file.is_absolute() {
                file.clone()
            } else {
                base_dir.join(file)
            };
            self.vessel = VesselSource::Inline(VesselParams::load(&full)?);
        }
        if self.environment.vmax.is_none() {
            self.environment.vmax = Some(self.environment.vx.hypot(self.environment.vy));
        }
        Ok(self)
    }

    /// Vessel parameters; fails if the configuration was not normalised.
    pub fn vessel_params(&self) -> Result<VesselParams> {
        match &self.vessel {
            VesselSource::Inline(p) => Ok(*p),
            VesselSource::File(VesselFile { file }) => Err(Error::Config(format!(
                "vessel file {} not resolved; normalise the configuration first",
                file.display()
            ))),
        }
    }

    pub fn geometry(&self) -> Result<PathGeometry> {
        PathGeometry::from_spec(&self.path)
    }

    pub fn validate(&self) -> Result<()> {
        self.vessel_params()?.validate()?;
        let env = self.environment.environment();
        if !(env.vx.is_finite() && env.vy.is_finite() && env.vmax.is_finite() && env.vmax >= 0.0) {
            return Err(Error::Config(
                "current components and vmax must be finite".into(),
            ));
        }
        self.geometry()?;
        self.guidance.validate()?;
        self.control.validate()?;
        self.observer
            .gains()
            .validate(self.observer.allow_unequal_k2)?;
        if let Some(s) = self.observer.noise_std {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::Config("noise_std must be non-negative".into()));
            }
        }
        self.reference.validate()?;
        let init = self.initial.vessel_state();
        if !init.is_finite() {
            return Err(Error::Config("initial state must be finite".into()));
        }
        let s = &self.sim;
        if !(s.dt > 0.0 && s.dt.is_finite()) {
            return Err(Error::Config(format!("dt = {} must be positive", s.dt)));
        }
        if !(s.t_end >= 0.0 && s.t_end.is_finite()) {
            return Err(Error::Config(format!(
                "t_end = {} must be non-negative",
                s.t_end
            )));
        }
        if s.log_every == 0 {
            return Err(Error::Config("log_every must be at least 1".into()));
        }
        let m = &self.monitor;
        if !(m.c_min > 0.0 && m.c_min.is_finite()) {
            return Err(Error::Config("c_min must be positive".into()));
        }
        if let Some(f) = m.sigma_floor {
            if !(f.is_finite() && f < 1.0) {
                return Err(Error::Config(
                    "sigma_floor must be finite and below 1".into(),
                ));
            }
        }
        Ok(())
    }
}
