//! Right-hand side of the closed loop: plant, observer and path variable,
//! with both controllers re-evaluated at every call.

use crate::control::{
    rd_partials, surge_control, yaw_control, ControlGains, HDot, RdPartials, YawLawInputs,
};
use crate::error::{Error, Result};
use crate::guidance::{desired_heading, solve_g, GuidanceGains, RdContext, RdInputs};
use crate::model::{dynamics, Environment, HydroCoeffs, VesselParams, VesselState};
use crate::observer::{observer_derivatives, ObserverGains, ObserverState};
use crate::path::{wrap_pi, PathGeometry};
use crate::scenario::ReferenceProfile;

/// Number of integrated scalars: vessel (6), observer (4), path variable.
pub const STATE_LEN: usize = 11;
/// Index of the yaw rate in the integrated state.
pub const R_INDEX: usize = 5;
pub const THETA_INDEX: usize = 10;

pub type State = [f64; STATE_LEN];

pub fn pack(s: &VesselState, o: &ObserverState, theta: f64) -> State {
    let mut x = [0.0; STATE_LEN];
    x[..6].copy_from_slice(&s.to_array());
    x[6..10].copy_from_slice(&o.to_array());
    x[THETA_INDEX] = theta;
    x
}

pub fn unpack(x: &State) -> (VesselState, ObserverState, f64) {
    (
        VesselState::from_slice(&x[..6]),
        ObserverState::from_slice(&x[6..10]),
        x[THETA_INDEX],
    )
}

/// Fixed data of one closed-loop simulation.
#[derive(Debug, Clone)]
pub struct ClosedLoop {
    pub vessel: VesselParams,
    pub hydro: HydroCoeffs,
    pub env: Environment,
    pub path: PathGeometry,
    pub guidance: GuidanceGains,
    pub control: ControlGains,
    pub observer: ObserverGains,
    pub reference: ReferenceProfile,
    pub c_min: f64,
    /// Abort threshold on `1 − κ y_bp`.
    pub sigma_floor: f64,
}

/// Everything computed during one evaluation of the closed loop.
#[derive(Debug, Clone, Copy)]
pub struct Signals {
    pub deriv: State,
    pub x_bp: f64,
    pub y_bp: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub psi_d: f64,
    pub psi_tilde: f64,
    pub r_d: f64,
    pub r_tilde: f64,
    pub c_r: f64,
    pub c_r_guarded: bool,
    pub g: f64,
    pub g_degenerate: bool,
    pub g1: f64,
    pub u_rd: f64,
    pub u_td: f64,
    pub vt_hat: f64,
    pub vn_hat: f64,
    pub x_tilde: f64,
    pub y_tilde: f64,
    pub theta_dot: f64,
    pub normal_gain: f64,
    pub tau_u: f64,
    pub tau_r: f64,
    /// `1 − κ y_bp`
    pub margin: f64,
    pub partials: RdPartials,
}

impl ClosedLoop {
    /// The stiff linear part `−k₁ r` of the yaw-rate equation.
    pub fn stiff_diagonal(&self) -> State {
        let mut l = [0.0; STATE_LEN];
        l[R_INDEX] = -self.control.k1;
        l
    }

    fn rd_context(&self) -> RdContext<'_> {
        RdContext {
            path: &self.path,
            hydro: self.hydro,
            guidance: self.guidance,
            observer: self.observer,
            c_min: self.c_min,
        }
    }

    /// Evaluates the closed loop at `(t, x)`. `noise` is the position
    /// measurement error; `held_tau_r` is applied if `C_r` violates its
    /// guard.
    pub fn evaluate(&self, t: f64, x: &State, noise: [f64; 2], held_tau_r: f64) -> Result<Signals> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "closed-loop state",
            });
        }
        let (s, o, theta) = unpack(x);
        if !self.path.contains(theta) {
            let (start, end) = self.path.domain();
            return Err(Error::OutOfDomain { theta, start, end });
        }
        let meas = [s.x + noise[0], s.y + noise[1]];
        let (x_tilde, y_tilde) = o.innovation(meas);
        let pt = self.path.point(theta);
        let fe = crate::path::frame_error_at(&pt, theta, meas);
        let margin = 1.0 - pt.kappa * fe.y_bp;
        if !(margin >= self.sigma_floor) {
            return Err(Error::Singularity {
                margin,
                floor: self.sigma_floor,
            });
        }

        let (u_rd, du_rd, ddu_rd) = self.reference.eval(t);
        let (sg, cg) = pt.gamma.sin_cos();
        let vt_hat = o.vx_hat * cg + o.vy_hat * sg;
        let vn_hat = -o.vx_hat * sg + o.vy_hat * cg;

        let u_td = u_rd.hypot(s.v_r);
        let goff = solve_g(u_td, vn_hat, fe.y_bp, self.guidance.delta)?;
        let psi_d = desired_heading(pt.gamma, s.v_r, u_rd, fe.y_bp, goff.g, self.guidance.delta);
        let psi_tilde = wrap_pi(s.psi - psi_d);

        let inp = RdInputs {
            theta,
            v_r: s.v_r,
            u_r: s.u_r,
            u_rd,
            du_rd,
            vt_hat,
            vn_hat,
            y_bp: fe.y_bp,
            x_bp: fe.x_bp,
            psi_tilde,
            x_tilde,
            y_tilde,
        };
        let (partials, terms) = rd_partials(&inp, &self.rd_context())?;
        let r_tilde = s.r - terms.r_d;

        let tau_u = surge_control(&self.vessel, &s, u_rd, du_rd, self.control.k_u);
        let f_r = self.vessel.f_r(s.u_r, s.v_r, s.r);
        let tau_r = if terms.c_r_guarded {
            held_tau_r
        } else {
            let gdot = terms.gamma_dot;
            let hdot = HDot {
                theta: terms.theta_dot,
                v_r: self.hydro.x(s.u_r) * s.r + self.hydro.y(s.u_r) * s.v_r,
                u_r: self.vessel.f_u(s.v_r, s.r) - self.vessel.surge_damping() * s.u_r + tau_u,
                u_rd: du_rd,
                du_rd: ddu_rd,
                vt_hat: self.observer.kx2 * x_tilde * cg
                    + self.observer.ky2 * y_tilde * sg
                    + vn_hat * gdot,
                vn_hat: terms.dvn_hat,
            };
            let q = YawLawInputs {
                f_r,
                r_tilde,
                psi_tilde,
                x_bp: fe.x_bp,
                x_tilde,
                y_tilde,
                c_r: terms.c_r,
                y_dot_known: terms.y_dot_known,
                k_delta: self.guidance.k_delta,
                kx1: self.observer.kx1,
                ky1: self.observer.ky1,
            };
            yaw_control(&q, &partials, &hdot, &self.control)
        };

        let ds = dynamics(&self.vessel, &self.env, &s, tau_u, tau_r)?;
        let dobs = observer_derivatives(&o, &self.observer, &s, meas);
        let deriv = pack(&ds, &dobs, terms.theta_dot);

        Ok(Signals {
            deriv,
            x_bp: fe.x_bp,
            y_bp: fe.y_bp,
            gamma: pt.gamma,
            kappa: pt.kappa,
            psi_d,
            psi_tilde,
            r_d: terms.r_d,
            r_tilde,
            c_r: terms.c_r,
            c_r_guarded: terms.c_r_guarded,
            g: goff.g,
            g_degenerate: goff.degenerate,
            g1: terms.g1,
            u_rd,
            u_td,
            vt_hat,
            vn_hat,
            x_tilde,
            y_tilde,
            theta_dot: terms.theta_dot,
            normal_gain: terms.normal_gain,
            tau_u,
            tau_r,
            margin,
            partials,
        })
    }

    /// Predicted `(ψ̃̇, r̃̇)` from the closed-loop error dynamics, using the
    /// true current to form the estimation errors:
    ///
    /// ```text
    /// ψ̃̇ = C_r r̃ + M Ṽ_N
    /// r̃̇ = −k₁ r̃ − k₂ C_r ψ̃ − ∂r_d/∂y_bp Ṽ_N − ∂r_d/∂x_bp Ṽ_T
    ///      − ∂r_d/∂ψ̃ M Ṽ_N − ∂r_d/∂x̃ Ṽ_x − ∂r_d/∂ỹ Ṽ_y
    /// ```
    ///
    /// Valid without measurement noise and while `C_r` is unguarded.
    pub fn error_dynamics(&self, sig: &Signals, o: &ObserverState) -> (f64, f64) {
        let vxt = self.env.vx - o.vx_hat;
        let vyt = self.env.vy - o.vy_hat;
        let (sg, cg) = sig.gamma.sin_cos();
        let vtt = vxt * cg + vyt * sg;
        let vnt = -vxt * sg + vyt * cg;
        let p = &sig.partials;
        let psi_rate = sig.c_r * sig.r_tilde + sig.normal_gain * vnt;
        let r_rate = -self.control.k1 * sig.r_tilde
            - self.control.k2 * sig.c_r * sig.psi_tilde
            - p.dy_bp * vnt
            - p.dx_bp * vtt
            - p.dpsi_tilde * sig.normal_gain * vnt
            - p.dx_tilde * vxt
            - p.dy_tilde * vyt;
        (psi_rate, r_rate)
    }
}
