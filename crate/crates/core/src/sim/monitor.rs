//! Runtime monitors for the tube condition, the `C_r` guard and
//! boundedness of the sway subsystem.

use serde::Serialize;

use super::closed_loop::Signals;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    /// `1 − κ y_bp` fell below the floor; the run is aborted.
    Condition1,
    /// `|C_r| < c_min`; the last valid `τ_r` is held.
    CrGuard,
    /// Guidance became infeasible (`|V̂_N| ≥ u_td`); aborted.
    Guidance,
    /// Non-finite state or derivative; aborted.
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fault {
    pub t: f64,
    pub kind: FaultKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorReport {
    pub clean: bool,
    pub aborted: bool,
    pub degraded: bool,
    /// The path variable reached the end of a finite path.
    pub end_of_path: bool,
    pub t_final: f64,
    pub steps: usize,
    pub sigma: f64,
    pub c_min: f64,
    /// `min (1 − κ y_bp)` over the run.
    pub condition1_margin_min: f64,
    /// `min |C_r|` over the run.
    pub cr_min: f64,
    /// True if `|y_bp|` ever reached the conservative tube radius.
    pub tube_excursion: bool,
    pub y_bp_abs_max: f64,
    pub v_r_max: f64,
    /// `max ½ v_r²`
    pub v3_max: f64,
    pub tau_u_max: f64,
    pub tau_r_max: f64,
    /// Number of evaluations where `√(b² − ac)` hit its floor.
    pub g_degenerate_count: usize,
    /// First time after which `|y_bp| < 1 m` for the rest of the run.
    pub settling_time: Option<f64>,
    pub faults: Vec<Fault>,
}

/// Accumulates a [`MonitorReport`] step by step.
#[derive(Debug, Clone)]
pub struct Monitor {
    report: MonitorReport,
    tube: f64,
    in_guard: bool,
    last_unsettled: Option<f64>,
    settled_seen: bool,
}

pub const SETTLING_BAND: f64 = 1.0;

impl Monitor {
    pub fn new(sigma: f64, c_min: f64, tube: f64) -> Self {
        Self {
            report: MonitorReport {
                clean: true,
                aborted: false,
                degraded: false,
                end_of_path: false,
                t_final: 0.0,
                steps: 0,
                sigma,
                c_min,
                condition1_margin_min: f64::INFINITY,
                cr_min: f64::INFINITY,
                tube_excursion: false,
                y_bp_abs_max: 0.0,
                v_r_max: 0.0,
                v3_max: 0.0,
                tau_u_max: 0.0,
                tau_r_max: 0.0,
                g_degenerate_count: 0,
                settling_time: None,
                faults: Vec::new(),
            },
            tube,
            in_guard: false,
            last_unsettled: None,
            settled_seen: false,
        }
    }

    /// Records the first-stage signals of a step at time `t`.
    pub fn observe(&mut self, t: f64, v_r: f64, sig: &Signals) {
        let r = &mut self.report;
        r.t_final = t;
        r.condition1_margin_min = r.condition1_margin_min.min(sig.margin);
        r.cr_min = r.cr_min.min(sig.c_r.abs());
        let ay = sig.y_bp.abs();
        r.y_bp_abs_max = r.y_bp_abs_max.max(ay);
        if ay >= self.tube {
            r.tube_excursion = true;
        }
        r.v_r_max = r.v_r_max.max(v_r.abs());
        r.v3_max = r.v3_max.max(0.5 * v_r * v_r);
        r.tau_u_max = r.tau_u_max.max(sig.tau_u.abs());
        r.tau_r_max = r.tau_r_max.max(sig.tau_r.abs());
        if sig.g_degenerate {
            r.g_degenerate_count += 1;
        }
        if ay >= SETTLING_BAND {
            self.last_unsettled = Some(t);
        } else {
            self.settled_seen = true;
        }
        if sig.c_r_guarded && !self.in_guard {
            r.degraded = true;
            r.faults.push(Fault {
                t,
                kind: FaultKind::CrGuard,
                message: format!("|C_r| = {:.4} below c_min = {}", sig.c_r.abs(), r.c_min),
            });
        }
        self.in_guard = sig.c_r_guarded;
    }

    pub fn abort(&mut self, t: f64, kind: FaultKind, message: String) {
        self.report.aborted = true;
        self.report.t_final = t;
        self.report.faults.push(Fault { t, kind, message });
    }

    pub fn end_of_path(&mut self, t: f64) {
        self.report.end_of_path = true;
        self.report.t_final = t;
    }

    pub fn set_steps(&mut self, n: usize) {
        self.report.steps = n;
    }

    pub fn finish(mut self, t_final: f64, dt: f64) -> MonitorReport {
        let r = &mut self.report;
        r.t_final = r.t_final.max(t_final);
        r.settling_time = match self.last_unsettled {
            None if self.settled_seen => Some(0.0),
            None => None,
            Some(t) if t < r.t_final => Some(t + dt),
            Some(_) => None,
        };
        r.clean = r.faults.is_empty()
            && !r.aborted
            && r.condition1_margin_min >= r.sigma
            && r.cr_min >= r.c_min;
        self.report
    }
}
