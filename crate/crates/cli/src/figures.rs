//! The five run plots.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use helm_core::path::PathSpec;
use helm_core::scenario::ScenarioConfig;
use helm_core::sim::{Record, RunOutput};

use crate::plot::{Figure, Panel, Series, PALETTE};

const GREY: &str = "#888888";

fn series(out: &RunOutput, label: &str, color: &'static str, f: impl Fn(&Record) -> f64) -> Series {
    Series::new(
        label,
        out.series.records.iter().map(|r| (r.t, f(r))).collect(),
        color,
    )
}

fn constant(out: &RunOutput, label: &str, v: f64) -> Series {
    let (t0, t1) = match (out.series.records.first(), out.series.records.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => (0.0, 0.0),
    };
    Series::new(label, vec![(t0, v), (t1, v)], GREY).dashed()
}

/// Path polyline over the part of the path relevant to the run.
fn path_polyline(cfg: &ScenarioConfig, out: &RunOutput) -> Vec<(f64, f64)> {
    let Ok(geom) = cfg.geometry() else {
        return Vec::new();
    };
    let (lo, hi) = match &cfg.path {
        PathSpec::Circle { radius, .. } => (0.0, 2.0 * PI * radius),
        PathSpec::Sine { length, .. } => (0.0, *length),
        PathSpec::Line { .. } => {
            let th = out.series.records.iter().map(|r| r.theta);
            let lo = th.clone().fold(f64::INFINITY, f64::min);
            let hi = th.fold(f64::NEG_INFINITY, f64::max);
            if lo > hi {
                (0.0, 1.0)
            } else {
                let pad = 0.05 * (hi - lo) + 10.0;
                (lo - pad, hi + pad)
            }
        }
    };
    let n = 1000;
    (0..=n)
        .map(|k| {
            let p = geom.position(lo + (hi - lo) * k as f64 / n as f64);
            (p[0], p[1])
        })
        .collect()
}

pub fn trajectory(cfg: &ScenarioConfig, out: &RunOutput) -> Figure {
    let track: Vec<_> = out.series.records.iter().map(|r| (r.x, r.y)).collect();
    let mut panel = Panel::new("Path and vessel track", "x [m]", "y [m]")
        .with(Series::new("path", path_polyline(cfg, out), GREY).dashed())
        .with(Series::new("vessel", track, PALETTE[0]));
    if let Some(first) = out.series.records.first() {
        let d = 5.0;
        panel = panel.with(Series::new(
            "start",
            vec![
                (first.x - d, first.y - d),
                (first.x + d, first.y + d),
                (f64::NAN, f64::NAN),
                (first.x - d, first.y + d),
                (first.x + d, first.y - d),
            ],
            PALETTE[1],
        ));
    }
    panel.equal_aspect = true;
    Figure::square(panel)
}

pub fn errors(out: &RunOutput) -> Figure {
    Figure::new(vec![
        Panel::new("Position error in the path frame", "t [s]", "[m]")
            .with(series(out, "y_bp", PALETTE[0], |r| r.y_bp))
            .with(series(out, "x_bp", PALETTE[1], |r| r.x_bp)),
        Panel::new("Heading error", "t [s]", "[rad]").with(series(
            out,
            "psi_tilde",
            PALETTE[2],
            |r| r.psi_tilde,
        )),
        Panel::new("Yaw-rate error", "t [s]", "[rad/s]").with(series(
            out,
            "r_tilde",
            PALETTE[3],
            |r| r.r_tilde,
        )),
    ])
}

pub fn estimates(cfg: &ScenarioConfig, out: &RunOutput) -> Figure {
    let env = cfg.environment;
    Figure::new(vec![
        Panel::new("Current estimate, inertial frame", "t [s]", "[m/s]")
            .with(series(out, "Vx_hat", PALETTE[0], |r| r.vx_hat))
            .with(series(out, "Vy_hat", PALETTE[1], |r| r.vy_hat))
            .with(constant(out, "true Vx, Vy", env.vx))
            .with(constant(out, "", env.vy)),
        Panel::new("Current estimate, path frame", "t [s]", "[m/s]")
            .with(series(out, "VT_hat", PALETTE[2], |r| r.vt_hat))
            .with(series(out, "VN_hat", PALETTE[3], |r| r.vn_hat)),
    ])
}

pub fn velocities(out: &RunOutput) -> Figure {
    Figure::new(vec![
        Panel::new("Surge and sway", "t [s]", "[m/s]")
            .with(series(out, "u_r", PALETTE[0], |r| r.u_r))
            .with(series(out, "u_rd", GREY, |r| r.u_rd).dashed())
            .with(series(out, "v_r", PALETTE[1], |r| r.v_r)),
        Panel::new("Yaw rate", "t [s]", "[rad/s]")
            .with(series(out, "r", PALETTE[2], |r| r.r))
            .with(series(out, "r_d", GREY, |r| r.r_d).dashed()),
    ])
}

pub fn cr(cfg: &ScenarioConfig, out: &RunOutput) -> Figure {
    Figure::new(vec![Panel::new(
        "Heading-error coefficient C_r",
        "t [s]",
        "C_r [-]",
    )
    .with(series(out, "C_r", PALETTE[4], |r| r.c_r))
    .with(constant(out, "c_min", cfg.monitor.c_min))])
}

pub fn write_all(
    dir: &Path,
    cfg: &ScenarioConfig,
    out: &RunOutput,
) -> anyhow::Result<Vec<PathBuf>> {
    let figs = [
        ("trajectory.svg", trajectory(cfg, out)),
        ("errors.svg", errors(out)),
        ("estimates.svg", estimates(cfg, out)),
        ("velocities.svg", velocities(out)),
        ("cr.svg", cr(cfg, out)),
    ];
    let mut written = Vec::with_capacity(figs.len());
    for (name, fig) in figs {
        let p = dir.join(name);
        crate::write(&p, fig.to_svg())?;
        written.push(p);
    }
    Ok(written)
}
