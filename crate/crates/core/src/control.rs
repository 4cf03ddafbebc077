//! Surge and yaw controllers.
//!
//! The yaw law needs `∂r_d/∂(·)` for every argument of the desired yaw
//! rate. They are obtained by forward-mode differentiation of
//! [`desired_yaw_rate`], one dual pass per argument.

use serde::{Deserialize, Serialize};

pub use crate::dual::{Dual, Scalar};
pub use crate::guidance::RdInputs;

use crate::error::{Error, Result};
use crate::guidance::{desired_yaw_rate, RdContext, YawRateTerms};
use crate::model::{VesselParams, VesselState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlGains {
    pub k_u: f64,
    pub k1: f64,
    pub k2: f64,
}

impl Default for ControlGains {
    fn default() -> Self {
        Self {
            k_u: 0.1,
            k1: 1000.0,
            k2: 400.0,
        }
    }
}

impl ControlGains {
    pub fn validate(&self) -> Result<()> {
        if [self.k_u, self.k1, self.k2]
            .iter()
            .any(|k| !(*k > 0.0 && k.is_finite()))
        {
            return Err(Error::Config("control gains must be positive".into()));
        }
        Ok(())
    }
}

/// Feedback-linearising surge law
/// `τ_u = −F_u(v_r, r) + u̇_rd + (d11/m11) u_r − k_u (u_r − u_rd)`;
/// the damping is cancelled at the measured speed, so the closed loop is
/// exactly `ũ̇_r = −k_u ũ_r`.
pub fn surge_control(p: &VesselParams, s: &VesselState, u_rd: f64, du_rd: f64, k_u: f64) -> f64 {
    -p.f_u(s.v_r, s.r) + du_rd + p.surge_damping() * s.u_r - k_u * (s.u_r - u_rd)
}

/// Partial derivatives of `r_d` with respect to each of its arguments.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RdPartials {
    /// `∂r_d/∂h` for `h = (θ, v_r, u_r, u_rd, u̇_rd, V̂_T, V̂_N)`.
    pub dh: [f64; 7],
    pub dy_bp: f64,
    pub dx_bp: f64,
    pub dpsi_tilde: f64,
    pub dx_tilde: f64,
    pub dy_tilde: f64,
}

impl RdPartials {
    pub fn to_array(&self) -> [f64; 12] {
        let mut a = [0.0; 12];
        a[..7].copy_from_slice(&self.dh);
        a[7] = self.dy_bp;
        a[8] = self.dx_bp;
        a[9] = self.dpsi_tilde;
        a[10] = self.dx_tilde;
        a[11] = self.dy_tilde;
        a
    }

    fn from_array(a: [f64; 12]) -> Self {
        let mut dh = [0.0; 7];
        dh.copy_from_slice(&a[..7]);
        Self {
            dh,
            dy_bp: a[7],
            dx_bp: a[8],
            dpsi_tilde: a[9],
            dx_tilde: a[10],
            dy_tilde: a[11],
        }
    }
}

/// Evaluates `r_d` and all twelve partials.
pub fn rd_partials(
    inp: &RdInputs<f64>,
    ctx: &RdContext<'_>,
) -> Result<(RdPartials, YawRateTerms<f64>)> {
    let terms = desired_yaw_rate(inp, ctx)?;
    let base = inp.to_array();
    let mut out = [0.0; 12];
    for (k, slot) in out.iter_mut().enumerate() {
        let seeded = RdInputs::from_array(std::array::from_fn(|i| {
            Dual::new(base[i], if i == k { 1.0 } else { 0.0 })
        }));
        *slot = desired_yaw_rate(&seeded, ctx)?.r_d.eps;
    }
    let partials = RdPartials::from_array(out);
    if partials.to_array().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "partials of r_d",
        });
    }
    Ok((partials, terms))
}

/// Time derivative of `h = (θ, v_r, u_r, u_rd, u̇_rd, V̂_T, V̂_N)`; every
/// component is a known signal.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HDot {
    pub theta: f64,
    pub v_r: f64,
    pub u_r: f64,
    pub u_rd: f64,
    pub du_rd: f64,
    pub vt_hat: f64,
    pub vn_hat: f64,
}

impl HDot {
    pub fn to_array(&self) -> [f64; 7] {
        [
            self.theta,
            self.v_r,
            self.u_r,
            self.u_rd,
            self.du_rd,
            self.vt_hat,
            self.vn_hat,
        ]
    }
}

/// Signals entering the yaw law besides the partials.
#[derive(Debug, Clone, Copy)]
pub struct YawLawInputs {
    pub f_r: f64,
    pub r_tilde: f64,
    pub psi_tilde: f64,
    pub x_bp: f64,
    pub x_tilde: f64,
    pub y_tilde: f64,
    pub c_r: f64,
    pub y_dot_known: f64,
    pub k_delta: f64,
    pub kx1: f64,
    pub ky1: f64,
}

/// Yaw-rate controller
///
/// ```text
/// τ_r = −F_r + ∂r_d/∂hᵀ ḣ + ∂r_d/∂y_bp (−u_td y_bp/√(Δ²+(y_bp+g)²) + G₁)
///       − ∂r_d/∂x_bp k_δ x_bp + ∂r_d/∂ψ̃ C_r r̃ − ∂r_d/∂x̃ k_x1 x̃ − ∂r_d/∂ỹ k_y1 ỹ
///       − k₁ r̃ − k₂ C_r ψ̃
/// ```
///
/// The proportional heading term is scaled by `C_r` so that the yaw error
/// subsystem becomes `ψ̃̇ = C_r r̃`, `r̃̇ = −k₁ r̃ − k₂ C_r ψ̃` (plus observer
/// error terms), for which `½k₂ψ̃² + ½r̃²` is a Lyapunov function.
pub fn yaw_control(
    q: &YawLawInputs,
    partials: &RdPartials,
    hdot: &HDot,
    gains: &ControlGains,
) -> f64 {
    let feedforward: f64 = partials
        .dh
        .iter()
        .zip(hdot.to_array())
        .map(|(d, h)| d * h)
        .sum();
    -q.f_r + feedforward + partials.dy_bp * q.y_dot_known - partials.dx_bp * q.k_delta * q.x_bp
        + partials.dpsi_tilde * q.c_r * q.r_tilde
        - partials.dx_tilde * q.kx1 * q.x_tilde
        - partials.dy_tilde * q.ky1 * q.y_tilde
        - gains.k1 * q.r_tilde
        - gains.k2 * q.c_r * q.psi_tilde
}
