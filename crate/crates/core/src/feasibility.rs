//! Feasibility checks and tube sizing.
//!
//! Tuning runs in three steps: the curvature bound `Y_min / X_max`, the
//! margin σ from the look-ahead condition taken at equality, and the
//! conservative tube `(1 − σ) / κ_max`.

use serde::Serialize;

use crate::model::{Environment, VesselParams};
use crate::path::PathGeometry;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    /// Positive when satisfied; distance to the boundary in natural units.
    pub margin: f64,
    pub detail: String,
}

impl Verdict {
    fn new(pass: bool, margin: f64, detail: String) -> Self {
        Self {
            pass,
            margin,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionVerdicts {
    /// `‖V_c‖ ≤ V_max`
    pub current_bounded: Verdict,
    /// `Y(u_r) < 0` on `[−V_max, u_rd]`
    pub sway_damped: Verdict,
    /// `2 V_max < u_rd(t)` for all t
    pub speed_dominates: Verdict,
}

impl AssumptionVerdicts {
    pub fn all_pass(&self) -> bool {
        self.current_bounded.pass && self.sway_damped.pass && self.speed_dominates.pass
    }
}

/// `op` when the relation holds, `not op` otherwise.
fn rel(holds: bool, op: &str) -> String {
    if holds {
        op.to_string()
    } else {
        format!("not {op}")
    }
}

/// `u_rd_min`/`u_rd_max` are the extremes of the surge reference profile.
pub fn check_assumptions(
    env: &Environment,
    u_rd_min: f64,
    u_rd_max: f64,
    vessel: &VesselParams,
) -> AssumptionVerdicts {
    let speed = env.speed();
    let current_bounded = Verdict::new(
        speed <= env.vmax,
        env.vmax - speed,
        format!(
            "|V_c| = {speed:.4} {} V_max = {:.4}",
            rel(speed <= env.vmax, "<="),
            env.vmax
        ),
    );
    let h = vessel.hydro();
    let (ylo, yhi) = (h.y(-env.vmax), h.y(u_rd_max));
    let worst = ylo.max(yhi);
    let sway_damped = Verdict::new(
        worst < 0.0,
        -worst,
        format!(
            "Y(-V_max) = {ylo:.5}, Y(u_rd_max) = {yhi:.5} on [{:.4}, {u_rd_max:.4}]",
            -env.vmax
        ),
    );
    let dominates = 2.0 * env.vmax < u_rd_min;
    let speed_dominates = Verdict::new(
        dominates,
        u_rd_min - 2.0 * env.vmax,
        format!(
            "2 V_max = {:.4} {} min u_rd = {u_rd_min:.4}",
            2.0 * env.vmax,
            rel(dominates, "<")
        ),
    );
    AssumptionVerdicts {
        current_bounded,
        sway_damped,
        speed_dominates,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub v_max: f64,
    pub u_rd_min: f64,
    pub u_rd_max: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub kappa_max: f64,
    /// `Y_min / X_max`; the path curvature must stay below it.
    pub lemma2_bound: f64,
    pub delta: f64,
    /// Smallest admissible σ for this Δ; `None` when Δ is too small.
    pub sigma: Option<f64>,
    /// `4 X_max / (Y_min − X_max κ_max / σ)` at the reported σ (equals Δ).
    pub delta_bound: Option<f64>,
    /// `4 X_max / (Y_min − X_max κ_max)`: no Δ at or below this admits a tube.
    pub delta_min: Option<f64>,
    /// `1/κ_max`; `None` means unbounded.
    pub tube_radius_param: Option<f64>,
    /// `(1 − σ)/κ_max`; `None` for a straight path (unbounded) or when no
    /// tube exists (see `lemma3`).
    pub tube_radius_sigma: Option<f64>,
    pub assumptions: AssumptionVerdicts,
    pub lemma2: Verdict,
    pub lemma3: Verdict,
}

impl FeasibilityReport {
    pub fn all_pass(&self) -> bool {
        self.assumptions.all_pass() && self.lemma2.pass && self.lemma3.pass
    }

    /// Conservative tube radius, `+∞` when unbounded or unavailable.
    pub fn tube(&self) -> f64 {
        self.tube_radius_sigma.unwrap_or(f64::INFINITY)
    }

    /// σ used as the Condition 1 floor; zero for straight paths.
    pub fn sigma_or_zero(&self) -> f64 {
        self.sigma.unwrap_or(0.0)
    }
}

/// Runs the tuning procedure for a path, vessel, current bound, surge
/// reference range and look-ahead distance.
pub fn tune(
    path: &PathGeometry,
    vessel: &VesselParams,
    env: &Environment,
    u_rd_min: f64,
    u_rd_max: f64,
    delta: f64,
) -> FeasibilityReport {
    let h = vessel.hydro();
    let (lo, hi) = (-env.vmax, u_rd_max);
    let x_max = h.x_max(lo, hi);
    let y_min = h.y_min(lo, hi);
    let kappa_max = path.kappa_max();
    let lemma2_bound = if x_max > 0.0 {
        y_min / x_max
    } else {
        f64::INFINITY
    };
    let assumptions = check_assumptions(env, u_rd_min, u_rd_max, vessel);

    let lemma2 = Verdict::new(
        kappa_max < lemma2_bound,
        lemma2_bound - kappa_max,
        format!(
            "kappa_max = {kappa_max:.6} {} Y_min/X_max = {lemma2_bound:.6}",
            rel(kappa_max < lemma2_bound, "<")
        ),
    );

    let look_ahead_slack = y_min - 4.0 * x_max / delta;
    let delta_min = {
        let d = y_min - x_max * kappa_max;
        (d > 0.0).then(|| 4.0 * x_max / d)
    };

    let (sigma, delta_bound, tube_radius_sigma, lemma3) = if kappa_max == 0.0 {
        let pass = look_ahead_slack > 0.0 || x_max == 0.0;
        (
            Some(0.0),
            None,
            None,
            Verdict::new(
                pass,
                look_ahead_slack,
                format!("straight path: Y_min - 4 X_max / Delta = {look_ahead_slack:.6}"),
            ),
        )
    } else if look_ahead_slack <= 0.0 {
        (
            None,
            None,
            None,
            Verdict::new(
                false,
                look_ahead_slack,
                format!("Delta too small: Y_min - 4 X_max / Delta = {look_ahead_slack:.6} <= 0"),
            ),
        )
    } else {
        let sigma = x_max * kappa_max / look_ahead_slack;
        let bound = 4.0 * x_max / (y_min - x_max * kappa_max / sigma);
        let tube = (1.0 - sigma) / kappa_max;
        // σ is the infimum of admissible margins; any σ' ∈ (σ, 1) satisfies
        // the strict look-ahead inequality and κ_max < σ' Y_min / X_max.
        let pass = sigma < 1.0 && kappa_max < sigma * lemma2_bound * (1.0 + 1e-12);
        let detail = if sigma < 1.0 {
            format!("sigma = {sigma:.6}, tube = {tube:.3} m")
        } else {
            format!("sigma = {sigma:.6} not < 1: no admissible tube")
        };
        (
            Some(sigma),
            Some(bound),
            (sigma < 1.0).then_some(tube),
            Verdict::new(pass, 1.0 - sigma, detail),
        )
    };

    FeasibilityReport {
        v_max: env.vmax,
        u_rd_min,
        u_rd_max,
        x_max,
        y_min,
        kappa_max,
        lemma2_bound,
        delta,
        sigma,
        delta_bound,
        delta_min,
        tube_radius_param: (kappa_max > 0.0).then(|| 1.0 / kappa_max),
        tube_radius_sigma,
        assumptions,
        lemma2,
        lemma3,
    }
}
