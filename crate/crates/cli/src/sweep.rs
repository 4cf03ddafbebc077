//! Parameter sweeps over one or two scenario axes.
//!
//! Cells run concurrently on a rayon pool, each as an isolated
//! single-threaded simulation writing into its own `cell_NNNN/`
//! directory. Results are collected in cell order, so `summary.csv` does
//! not depend on scheduling or thread count.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::Context;
use helm_core::scenario::{ReferenceProfile, ScenarioConfig};
use helm_core::sim::{run_scenario, MonitorReport};
use rayon::prelude::*;
use serde::Deserialize;

use crate::UsageError;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "HELM_SIM_THREADS";

pub const MAX_AXES: usize = 2;

pub const KEYS: &[&str] = &[
    "guidance.delta",
    "guidance.k_delta",
    "control.k_u",
    "control.k1",
    "control.k2",
    "observer.kx1",
    "observer.ky1",
    "observer.kx2",
    "observer.ky2",
    "environment.vx",
    "environment.vy",
    "environment.angle",
    "reference.u_rd",
    "initial.x",
    "initial.y",
    "initial.psi",
    "sim.dt",
];

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub axis: Vec<Axis>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub key: String,
    pub values: Vec<f64>,
    /// Current speed for `environment.angle`; defaults to the scenario's.
    #[serde(default)]
    pub magnitude: Option<f64>,
}

impl SweepSpec {
    pub fn from_toml_str(src: &str) -> Result<Self, UsageError> {
        let spec: Self = toml::from_str(src).map_err(|e| UsageError(format!("sweep spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let src = fs::read_to_string(path)
            .map_err(|e| UsageError(format!("reading {}: {e}", path.display())))?;
        Self::from_toml_str(&src)
            .map_err(|e| UsageError(format!("{}: {}", path.display(), e.0)))
            .map_err(Into::into)
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        if self.axis.len() > MAX_AXES {
            return Err(UsageError(format!(
                "sweep spec has {} axes, at most {MAX_AXES} are supported",
                self.axis.len()
            )));
        }
        for a in &self.axis {
            if !KEYS.contains(&a.key.as_str()) {
                return Err(UsageError(format!(
                    "unknown sweep key {:?}; expected one of {}",
                    a.key,
                    KEYS.join(", ")
                )));
            }
            if a.values.is_empty() || a.values.iter().any(|v| !v.is_finite()) {
                return Err(UsageError(format!("axis {:?} needs finite values", a.key)));
            }
            if a.magnitude.is_some() && a.key != "environment.angle" {
                return Err(UsageError(format!(
                    "`magnitude` only applies to environment.angle, not {:?}",
                    a.key
                )));
            }
        }
        Ok(())
    }

    /// Grid points in row-major order (last axis fastest). No axes gives a
    /// single empty cell.
    pub fn cells(&self) -> Vec<Vec<f64>> {
        let mut cells = vec![Vec::new()];
        for a in &self.axis {
            cells = cells
                .into_iter()
                .flat_map(|c| {
                    a.values.iter().map(move |&v| {
                        let mut n = c.clone();
                        n.push(v);
                        n
                    })
                })
                .collect();
        }
        cells
    }
}

/// Sets one sweep parameter. Changing the current widens `vmax` if the new
/// speed exceeds it, so the configured bound never goes stale.
pub fn apply(cfg: &mut ScenarioConfig, axis: &Axis, v: f64) -> Result<(), UsageError> {
    let mut current_changed = false;
    match axis.key.as_str() {
        "guidance.delta" => cfg.guidance.delta = v,
        "guidance.k_delta" => cfg.guidance.k_delta = v,
        "control.k_u" => cfg.control.k_u = v,
        "control.k1" => cfg.control.k1 = v,
        "control.k2" => cfg.control.k2 = v,
        "observer.kx1" => cfg.observer.kx1 = v,
        "observer.ky1" => cfg.observer.ky1 = v,
        "observer.kx2" => cfg.observer.kx2 = v,
        "observer.ky2" => cfg.observer.ky2 = v,
        "environment.vx" => {
            cfg.environment.vx = v;
            current_changed = true;
        }
        "environment.vy" => {
            cfg.environment.vy = v;
            current_changed = true;
        }
        "environment.angle" => {
            let m = axis
                .magnitude
                .unwrap_or_else(|| cfg.environment.vx.hypot(cfg.environment.vy));
            let (s, c) = v.sin_cos();
            cfg.environment.vx = m * c;
            cfg.environment.vy = m * s;
            current_changed = true;
        }
        "reference.u_rd" => cfg.reference = ReferenceProfile::Constant { u_rd: v },
        "initial.x" => cfg.initial.x = v,
        "initial.y" => cfg.initial.y = v,
        "initial.psi" => cfg.initial.psi = v,
        "sim.dt" => cfg.sim.dt = v,
        other => return Err(UsageError(format!("unknown sweep key {other:?}"))),
    }
    if current_changed {
        let speed = cfg.environment.vx.hypot(cfg.environment.vy);
        cfg.environment.vmax = Some(cfg.environment.vmax.map_or(speed, |b| b.max(speed)));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Clean,
    /// Ran, but the monitors recorded a fault.
    Faulted,
    /// Refused by the feasibility check.
    Refused,
    /// Invalid cell configuration or an output error.
    Error,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Clean => "clean",
            Self::Faulted => "faulted",
            Self::Refused => "refused",
            Self::Error => "error",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub index: usize,
    pub params: Vec<f64>,
    pub status: CellStatus,
    pub report: Option<MonitorReport>,
    pub tube_radius: Option<f64>,
    pub message: String,
}

pub fn threads_from_env() -> Result<Option<usize>, UsageError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(UsageError(format!(
                "{THREADS_ENV} must be a positive integer, got {s:?}"
            ))),
        },
    }
}

fn run_cell(
    base: &ScenarioConfig,
    spec: &SweepSpec,
    index: usize,
    params: Vec<f64>,
    out: &Path,
) -> CellResult {
    let mut res = CellResult {
        index,
        params,
        status: CellStatus::Error,
        report: None,
        tube_radius: None,
        message: String::new(),
    };
    let mut cfg = base.clone();
    for (a, &v) in spec.axis.iter().zip(&res.params) {
        if let Err(e) = apply(&mut cfg, a, v) {
            res.message = e.0;
            return res;
        }
    }
    if let Err(e) = cfg.validate() {
        res.message = e.to_string();
        return res;
    }
    match run_scenario(&cfg) {
        Err(helm_core::Error::Infeasible { reasons }) => {
            res.status = CellStatus::Refused;
            res.message = reasons.join("; ");
        }
        Err(e) => res.message = e.to_string(),
        Ok(run) => {
            let dir = out.join(format!("cell_{index:04}"));
            if let Err(e) = crate::write_run_outputs(&dir, &cfg, &run, false) {
                res.message = format!("{e:#}");
                return res;
            }
            res.tube_radius = run.assessment.feasibility.tube_radius_sigma;
            res.status = if run.report.clean {
                CellStatus::Clean
            } else {
                CellStatus::Faulted
            };
            res.message = run
                .report
                .faults
                .first()
                .map(|f| format!("{:?} at t = {}", f.kind, f.t))
                .unwrap_or_default();
            res.report = Some(run.report);
        }
    }
    res
}

/// Runs every cell and writes `summary.csv`. Cell failures are recorded in
/// the results; only output-directory errors fail the sweep.
pub fn run_sweep(
    base: &ScenarioConfig,
    spec: &SweepSpec,
    out: &Path,
    threads: Option<usize>,
) -> anyhow::Result<Vec<CellResult>> {
    spec.validate()?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .context("building the worker pool")?;
    let cells = spec.cells();
    let results: Vec<CellResult> = pool.install(|| {
        cells
            .into_par_iter()
            .enumerate()
            .map(|(i, p)| run_cell(base, spec, i, p, out))
            .collect()
    });
    write_summary(&out.join("summary.csv"), spec, &results)?;
    Ok(results)
}

pub fn write_summary(path: &Path, spec: &SweepSpec, cells: &[CellResult]) -> anyhow::Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    let mut header = vec!["index".to_string()];
    header.extend(spec.axis.iter().map(|a| a.key.clone()));
    header.extend(
        [
            "status",
            "clean",
            "settling_time",
            "v_r_max",
            "cr_min",
            "tube_radius",
            "t_final",
            "message",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    let num = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
    for c in cells {
        let r = c.report.as_ref();
        let mut row = vec![c.index.to_string()];
        row.extend(c.params.iter().map(|v| format!("{v:?}")));
        row.push(c.status.as_str().to_string());
        row.push((c.status == CellStatus::Clean).to_string());
        row.push(num(r.and_then(|r| r.settling_time)));
        row.push(num(r.map(|r| r.v_r_max)));
        row.push(num(r.map(|r| r.cr_min)));
        row.push(num(c.tube_radius));
        row.push(num(r.map(|r| r.t_final)));
        row.push(c.message.clone());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn render_table(spec: &SweepSpec, cells: &[CellResult]) -> String {
    let mut s = String::new();
    let mut head = format!("{:>5}", "cell");
    for a in &spec.axis {
        let _ = write!(head, " {:>18}", a.key);
    }
    let _ = writeln!(
        s,
        "{head} {:>8} {:>10} {:>9} {:>8}",
        "status", "settle[s]", "v_r_max", "cr_min"
    );
    for c in cells {
        let mut line = format!("{:>5}", c.index);
        for v in &c.params {
            let _ = write!(line, " {v:>18.6}");
        }
        let r = c.report.as_ref();
        let settle = r
            .and_then(|r| r.settling_time)
            .map_or("-".into(), |t| format!("{t:.2}"));
        let vr = r.map_or("-".into(), |r| format!("{:.4}", r.v_r_max));
        let crm = r.map_or("-".into(), |r| format!("{:.4}", r.cr_min));
        let _ = writeln!(
            s,
            "{line} {:>8} {settle:>10} {vr:>9} {crm:>8}",
            c.status.as_str()
        );
    }
    s
}
