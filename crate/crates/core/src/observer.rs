//! Kinematic ocean-current observer driven by inertial position measurements.
//!
//! ```text
//! x̂̇ = u_r cos ψ − v_r sin ψ + V̂_x + k_x1 x̃      V̂̇_x = k_x2 x̃
//! ŷ̇ = u_r sin ψ + v_r cos ψ + V̂_y + k_y1 ỹ      V̂̇_y = k_y2 ỹ
//! ```
//!
//! with `x̃ = x − x̂`, `ỹ = y − ŷ`. The error system is linear and Hurwitz
//! for positive gains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::VesselState;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObserverState {
    pub x_hat: f64,
    pub y_hat: f64,
    pub vx_hat: f64,
    pub vy_hat: f64,
}

impl ObserverState {
    /// Position estimate at the measured position, current estimate zero.
    /// This makes the initial error `(0, 0, V_x, V_y)`.
    pub fn initial(meas: [f64; 2]) -> Self {
        Self {
            x_hat: meas[0],
            y_hat: meas[1],
            vx_hat: 0.0,
            vy_hat: 0.0,
        }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x_hat, self.y_hat, self.vx_hat, self.vy_hat]
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Self {
            x_hat: s[0],
            y_hat: s[1],
            vx_hat: s[2],
            vy_hat: s[3],
        }
    }

    /// Position innovation `(x̃, ỹ)`.
    #[inline]
    pub fn innovation(&self, meas: [f64; 2]) -> (f64, f64) {
        (meas[0] - self.x_hat, meas[1] - self.y_hat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverGains {
    pub kx1: f64,
    pub ky1: f64,
    pub kx2: f64,
    pub ky2: f64,
}

impl Default for ObserverGains {
    fn default() -> Self {
        Self {
            kx1: 1.0,
            ky1: 1.0,
            kx2: 0.1,
            ky2: 0.1,
        }
    }
}

impl ObserverGains {
    /// All gains must be positive. Unless `allow_unequal` is set, the
    /// integral gains must match, which is what bounds `‖Ṽ‖ ≤ V_max`.
    pub fn validate(&self, allow_unequal: bool) -> Result<()> {
        let g = [self.kx1, self.ky1, self.kx2, self.ky2];
        if g.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
            return Err(Error::Config("observer gains must be positive".into()));
        }
        if !allow_unequal && self.kx2 != self.ky2 {
            return Err(Error::Config(
                "observer gains kx2 and ky2 must be equal (set allow_unequal_k2 to override)"
                    .into(),
            ));
        }
        Ok(())
    }
}

pub fn observer_derivatives(
    o: &ObserverState,
    g: &ObserverGains,
    s: &VesselState,
    meas: [f64; 2],
) -> ObserverState {
    let (xt, yt) = o.innovation(meas);
    let (kx, ky) = s.relative_kinematics();
    ObserverState {
        x_hat: kx + o.vx_hat + g.kx1 * xt,
        y_hat: ky + o.vy_hat + g.ky1 * yt,
        vx_hat: g.kx2 * xt,
        vy_hat: g.ky2 * yt,
    }
}

/// Current estimate expressed in the path-tangential frame, with its time
/// derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PathFrameEstimates {
    pub vt_hat: f64,
    pub vn_hat: f64,
    pub dvt_hat: f64,
    pub dvn_hat: f64,
}

pub fn path_frame_estimates(
    o: &ObserverState,
    gamma_p: f64,
    gamma_dot: f64,
    xt: f64,
    yt: f64,
    g: &ObserverGains,
) -> PathFrameEstimates {
    let (s, c) = gamma_p.sin_cos();
    let vt_hat = o.vx_hat * c + o.vy_hat * s;
    let vn_hat = -o.vx_hat * s + o.vy_hat * c;
    PathFrameEstimates {
        vt_hat,
        vn_hat,
        dvt_hat: g.kx2 * xt * c + g.ky2 * yt * s + vn_hat * gamma_dot,
        dvn_hat: -g.kx2 * xt * s + g.ky2 * yt * c - vt_hat * gamma_dot,
    }
}

/// `W = x̃² + ỹ² + Ṽ_x²/k_x2 + Ṽ_y²/k_y2`, non-increasing along the error
/// dynamics.
pub fn error_energy(xt: f64, yt: f64, vxt: f64, vyt: f64, g: &ObserverGains) -> f64 {
    xt * xt + yt * yt + vxt * vxt / g.kx2 + vyt * vyt / g.ky2
}
