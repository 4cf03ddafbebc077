//! Fixed-step simulation of the closed loop with runtime monitors.

mod closed_loop;
mod monitor;
mod stepper;
mod timeseries;

pub use closed_loop::{pack, unpack, ClosedLoop, Signals, State, R_INDEX, STATE_LEN, THETA_INDEX};
pub use monitor::{Fault, FaultKind, Monitor, MonitorReport, SETTLING_BAND};
pub use stepper::{etdrk4_step, etdrk4_step_from, phi123, rk4_step, rk4_step_from};
pub use timeseries::{Record, TimeSeries, COLUMNS};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::feasibility::{tune, FeasibilityReport};
use crate::observer::ObserverState;
use crate::scenario::{Integrator, ScenarioConfig};

/// Feasibility report plus the initial-condition admission decision.
#[derive(Debug, Clone, Serialize)]
pub struct Assessment {
    pub feasibility: FeasibilityReport,
    /// Initial path variable (nearest point), if one exists.
    pub theta0: Option<f64>,
    pub y_bp0: Option<f64>,
    pub admitted: bool,
    pub reasons: Vec<String>,
}

/// Runs the tuning procedure and checks that the initial position lies in
/// the conservative tube.
pub fn assess(cfg: &ScenarioConfig) -> Result<Assessment> {
    let path = cfg.geometry()?;
    let vessel = cfg.vessel_params()?;
    let env = cfg.environment.environment();
    let (lo, hi) = cfg.reference.range();
    let feasibility = tune(&path, &vessel, &env, lo, hi, cfg.guidance.delta);

    let mut reasons = Vec::new();
    let a = &feasibility.assumptions;
    for (name, v) in [
        ("current bound", &a.current_bounded),
        ("sway damping", &a.sway_damped),
        ("speed dominates current", &a.speed_dominates),
        ("curvature bound", &feasibility.lemma2),
        ("look-ahead/tube", &feasibility.lemma3),
    ] {
        if !v.pass {
            reasons.push(format!("{name}: {}", v.detail));
        }
    }

    let pos = [cfg.initial.x, cfg.initial.y];
    let (theta0, y_bp0) = match path.nearest_theta(pos) {
        Ok(th) => (Some(th), Some(path.frame_error(th, pos).y_bp)),
        Err(e) => {
            reasons.push(format!("initial position: {e}"));
            (None, None)
        }
    };
    if let Some(y) = y_bp0 {
        let tube = feasibility.tube();
        if !(y.abs() < tube) {
            reasons.push(format!(
                "initial position: |y_bp| = {:.3} m is not inside the tube of {:.3} m",
                y.abs(),
                tube
            ));
        }
    }
    Ok(Assessment {
        admitted: reasons.is_empty(),
        feasibility,
        theta0,
        y_bp0,
        reasons,
    })
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: TimeSeries,
    pub report: MonitorReport,
    pub assessment: Assessment,
}

fn classify(e: &Error) -> FaultKind {
    match e {
        Error::Singularity { .. } => FaultKind::Condition1,
        Error::CurrentExceedsSpeed { .. } => FaultKind::Guidance,
        _ => FaultKind::NonFinite,
    }
}

fn record(t: f64, x: &State, sig: &Signals, cl: &ClosedLoop) -> Record {
    let (s, o, theta) = unpack(x);
    let (rhs_psi_tilde, rhs_r_tilde) = cl.error_dynamics(sig, &o);
    Record {
        t,
        x: s.x,
        y: s.y,
        psi: s.psi,
        u_r: s.u_r,
        v_r: s.v_r,
        r: s.r,
        theta,
        x_bp: sig.x_bp,
        y_bp: sig.y_bp,
        psi_d: sig.psi_d,
        psi_tilde: sig.psi_tilde,
        r_d: sig.r_d,
        r_tilde: sig.r_tilde,
        c_r: sig.c_r,
        g: sig.g,
        g1: sig.g1,
        x_hat: o.x_hat,
        y_hat: o.y_hat,
        vx_hat: o.vx_hat,
        vy_hat: o.vy_hat,
        vt_hat: sig.vt_hat,
        vn_hat: sig.vn_hat,
        tau_u: sig.tau_u,
        tau_r: sig.tau_r,
        u_rd: sig.u_rd,
        u_td: sig.u_td,
        rhs_psi_tilde,
        rhs_r_tilde,
        margin: sig.margin,
    }
}

/// Simulates a scenario. Fails with [`Error::Infeasible`] if the
/// admission check fails and `force` is not set. Runtime faults do not
/// fail the call: the partial series is returned and the report records
/// the fault.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let assessment = assess(cfg)?;
    if !assessment.admitted && !cfg.force {
        return Err(Error::Infeasible {
            reasons: assessment.reasons.clone(),
        });
    }
    let sigma = assessment.feasibility.sigma_or_zero();
    let cl = build_closed_loop(cfg, sigma)?;
    let theta0 = match assessment.theta0 {
        Some(t) => t,
        None => cl.path.nearest_theta([cfg.initial.x, cfg.initial.y])?,
    };
    let tube = assessment.feasibility.tube();
    let (series, report) = simulate(&cl, cfg, theta0, sigma, tube)?;
    Ok(RunOutput {
        series,
        report,
        assessment,
    })
}

/// Assembles the closed loop of a scenario. `sigma` is the tuned margin,
/// used as the condition-1 floor unless the config overrides it.
pub fn build_closed_loop(cfg: &ScenarioConfig, sigma: f64) -> Result<ClosedLoop> {
    let vessel = cfg.vessel_params()?;
    Ok(ClosedLoop {
        vessel,
        hydro: vessel.hydro(),
        env: cfg.environment.environment(),
        path: cfg.geometry()?,
        guidance: cfg.guidance,
        control: cfg.control,
        observer: cfg.observer.gains(),
        reference: cfg.reference.clone(),
        c_min: cfg.monitor.c_min,
        sigma_floor: cfg.monitor.sigma_floor.unwrap_or(sigma),
    })
}

/// Integrates `cl` from the configured initial state starting at `theta0`.
pub fn simulate(
    cl: &ClosedLoop,
    cfg: &ScenarioConfig,
    theta0: f64,
    sigma: f64,
    tube: f64,
) -> Result<(TimeSeries, MonitorReport)> {
    let dt = cfg.sim.dt;
    let n_steps = (cfg.sim.t_end / dt).round() as usize;
    let log_every = cfg.sim.log_every;
    let lin = cl.stiff_diagonal();

    let noise_std = cfg.observer.noise_std.unwrap_or(0.0);
    let mut noise_src = if noise_std > 0.0 {
        let dist = Normal::new(0.0, noise_std)
            .map_err(|e| Error::Config(format!("noise distribution: {e}")))?;
        Some((
            ChaCha8Rng::seed_from_u64(cfg.observer.seed.unwrap_or(0)),
            dist,
        ))
    } else {
        None
    };
    let mut draw = move || match noise_src.as_mut() {
        Some((rng, dist)) => [dist.sample(rng), dist.sample(rng)],
        None => [0.0, 0.0],
    };

    let s0 = cfg.initial.vessel_state();
    let noise0 = draw();
    let o0 = ObserverState::initial([s0.x + noise0[0], s0.y + noise0[1]]);
    let mut x = pack(&s0, &o0, theta0);

    let mut series = TimeSeries::default();
    let mut mon = Monitor::new(sigma, cl.c_min, tube);
    let mut held_tau_r = 0.0;
    let mut noise = noise0;
    let mut t;
    let mut k = 0;
    loop {
        t = k as f64 * dt;
        let sig = match cl.evaluate(t, &x, noise, held_tau_r) {
            Ok(s) => s,
            Err(Error::OutOfDomain { .. }) => {
                mon.end_of_path(t);
                break;
            }
            Err(e) => {
                mon.abort(t, classify(&e), format!("{e}; state = {x:?}"));
                break;
            }
        };
        mon.observe(t, x[4], &sig);
        if !sig.c_r_guarded {
            held_tau_r = sig.tau_r;
        }
        if k % log_every == 0 || k == n_steps {
            series.records.push(record(t, &x, &sig, cl));
        }
        if k == n_steps {
            break;
        }

        let held = held_tau_r;
        let stage_noise = noise;
        let f = |tt: f64, xx: &State| cl.evaluate(tt, xx, stage_noise, held).map(|s| s.deriv);
        let next = match cfg.sim.integrator {
            Integrator::Rk4 => rk4_step_from(f, t, &x, dt, sig.deriv),
            Integrator::Etdrk4 => etdrk4_step_from(f, t, &x, dt, &lin, sig.deriv),
        };
        match next {
            Ok(nx) => x = nx,
            Err(Error::OutOfDomain { .. }) => {
                mon.end_of_path(t);
                break;
            }
            Err(e) => {
                mon.abort(t, classify(&e), format!("{e}; state = {x:?}"));
                break;
            }
        }
        noise = draw();
        k += 1;
    }
    mon.set_steps(k);
    Ok((series, mon.finish(t, dt)))
}
