//! Current-compensated line-of-sight guidance.
//!
//! Desired heading
//!
//! ```text
//! ψ_d = γ_p(θ) − atan(v_r / u_rd) − atan((y_bp + g) / Δ)
//! ```
//!
//! where `g` solves `u_td · g / √(Δ² + (y_bp + g)²) = V̂_N`, and the desired
//! yaw rate `r_d` cancels every known term of `ψ̃̇` so that
//! `ψ̃̇ = C_r r̃ + M Ṽ_N`.
//!
//! All laws are generic over [`Scalar`]; the controller differentiates
//! [`desired_yaw_rate`] with dual numbers.

use serde::{Deserialize, Serialize};

use crate::dual::Scalar;
use crate::error::{Error, Result};
use crate::model::HydroCoeffs;
use crate::observer::ObserverGains;
use crate::path::PathGeometry;

/// Floor on `√(b² − ac)`; below it the partials of g are ill-conditioned.
pub const DISC_SQRT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuidanceGains {
    /// Look-ahead distance Δ (m).
    pub delta: f64,
    /// Along-track restoring gain k_δ (1/s).
    pub k_delta: f64,
}

impl GuidanceGains {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Config("guidance delta must be positive".into()));
        }
        if !(self.k_delta > 0.0 && self.k_delta.is_finite()) {
            return Err(Error::Config("guidance k_delta must be positive".into()));
        }
        Ok(())
    }
}

/// Current-compensation offset and the data needed to differentiate it.
///
/// `g = V̂_N · z` with `z = (b + √(b² − ac)) / (−a)`,
/// `a = V̂_N² − u_td²`, `b = y_bp V̂_N`, `c = Δ² + y_bp²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GOffset<T> {
    pub g: T,
    pub a: T,
    pub b: T,
    pub c: T,
    /// `∂g/∂V̂_N` at fixed `(a, b, c)`.
    pub z: T,
    pub dg_da: T,
    pub dg_db: T,
    pub dg_dc: T,
    /// Set when `√(b² − ac)` hit [`DISC_SQRT_FLOOR`].
    pub degenerate: bool,
}

pub fn solve_g<T: Scalar>(u_td: T, vn_hat: T, y_bp: T, delta: f64) -> Result<GOffset<T>> {
    let slack = u_td.sqr() - vn_hat.sqr();
    if !(slack.value() > 0.0) {
        return Err(Error::CurrentExceedsSpeed {
            slack: slack.value(),
        });
    }
    let a = -slack;
    let b = y_bp * vn_hat;
    let c = y_bp.sqr() + delta * delta;
    let disc = b.sqr() - a * c;
    let (s, degenerate) = if disc.value() > DISC_SQRT_FLOOR * DISC_SQRT_FLOOR {
        (disc.sqrt(), false)
    } else {
        (T::cst(DISC_SQRT_FLOOR), true)
    };
    let bs = b + s;
    let z = bs / -a;
    Ok(GOffset {
        g: vn_hat * z,
        a,
        b,
        c,
        z,
        dg_da: vn_hat * c / (a * s * 2.0) + vn_hat * bs / a.sqr(),
        dg_db: -(vn_hat * bs) / (a * s),
        dg_dc: vn_hat / (s * 2.0),
        degenerate,
    })
}

/// Residual of the defining identity of g; zero up to rounding.
pub fn g_identity_residual(u_td: f64, vn_hat: f64, y_bp: f64, g: f64, delta: f64) -> f64 {
    u_td * g / (delta * delta + (y_bp + g) * (y_bp + g)).sqrt() - vn_hat
}

pub fn desired_heading<T: Scalar>(gamma_p: T, v_r: T, u_rd: T, y_bp: T, g: T, delta: f64) -> T {
    gamma_p - (v_r / u_rd).atan() - ((y_bp + g) / delta).atan()
}

/// Perturbation `G₁` of the cross-track dynamics; vanishes when
/// `(ψ̃, ũ_r, x_bp) = 0`.
#[allow(clippy::too_many_arguments)]
pub fn perturbation_g1<T: Scalar>(
    psi_tilde: T,
    u_tilde: T,
    x_bp: T,
    psi: T,
    gamma_p: T,
    y_bp: T,
    g: T,
    delta: f64,
    u_td: T,
    gamma_dot: T,
) -> T {
    let yg = y_bp + g;
    let los = (yg.sqr() + delta * delta).sqrt();
    let sin_los = yg / los;
    let cos_los = T::cst(delta) / los;
    u_td * (-psi_tilde.cos() + 1.0) * sin_los
        + u_tilde * (psi - gamma_p).sin()
        + u_td * cos_los * psi_tilde.sin()
        - x_bp * gamma_dot
}

/// Controllability coefficient of the yaw-rate term in `ψ̃̇`.
pub fn coefficient_cr<T: Scalar>(
    x_ur: T,
    u_rd: T,
    v_r: T,
    y_bp: T,
    goff: &GOffset<T>,
    delta: f64,
) -> T {
    let den = (y_bp + goff.g).sqr() + delta * delta;
    let u_td2 = u_rd.sqr() + v_r.sqr();
    x_ur * u_rd / u_td2 + 1.0 - goff.dg_da * v_r * x_ur * (2.0 * delta) / den
}

/// Gain `M` multiplying `Ṽ_N` in `ψ̃̇ = C_r r̃ + M Ṽ_N`:
/// `M = (1 + ∂g/∂c·2y_bp + ∂g/∂b·V̂_N) Δ / (Δ² + (y_bp + g)²)`.
pub fn normal_error_gain<T: Scalar>(y_bp: T, vn_hat: T, goff: &GOffset<T>, delta: f64) -> T {
    let den = (y_bp + goff.g).sqr() + delta * delta;
    (goff.dg_dc * y_bp * 2.0 + goff.dg_db * vn_hat + 1.0) * delta / den
}

/// Arguments of `r_d`: the bundle `h = (θ, v_r, u_r, u_rd, u̇_rd, V̂_T, V̂_N)`
/// whose derivatives are known, followed by `(y_bp, x_bp, ψ̃, x̃, ỹ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RdInputs<T> {
    pub theta: T,
    pub v_r: T,
    pub u_r: T,
    pub u_rd: T,
    pub du_rd: T,
    pub vt_hat: T,
    pub vn_hat: T,
    pub y_bp: T,
    pub x_bp: T,
    pub psi_tilde: T,
    pub x_tilde: T,
    pub y_tilde: T,
}

impl<T: Copy> RdInputs<T> {
    pub const LEN: usize = 12;

    pub fn to_array(&self) -> [T; 12] {
        [
            self.theta,
            self.v_r,
            self.u_r,
            self.u_rd,
            self.du_rd,
            self.vt_hat,
            self.vn_hat,
            self.y_bp,
            self.x_bp,
            self.psi_tilde,
            self.x_tilde,
            self.y_tilde,
        ]
    }

    pub fn from_array(a: [T; 12]) -> Self {
        Self {
            theta: a[0],
            v_r: a[1],
            u_r: a[2],
            u_rd: a[3],
            du_rd: a[4],
            vt_hat: a[5],
            vn_hat: a[6],
            y_bp: a[7],
            x_bp: a[8],
            psi_tilde: a[9],
            x_tilde: a[10],
            y_tilde: a[11],
        }
    }
}

/// Fixed data the yaw-rate law depends on.
#[derive(Debug, Clone, Copy)]
pub struct RdContext<'a> {
    pub path: &'a PathGeometry,
    pub hydro: HydroCoeffs,
    pub guidance: GuidanceGains,
    pub observer: ObserverGains,
    /// Lower bound used to guard the division by `C_r`.
    pub c_min: f64,
}

/// Everything computed on the way to `r_d`.
#[derive(Debug, Clone, Copy)]
pub struct YawRateTerms<T> {
    pub r_d: T,
    pub c_r: T,
    /// True when `|C_r| < c_min` and the division was guarded.
    pub c_r_guarded: bool,
    pub psi_d: T,
    pub psi: T,
    pub goff: GOffset<T>,
    pub g1: T,
    pub u_td: T,
    pub theta_dot: T,
    pub gamma: T,
    pub gamma_dot: T,
    pub dvn_hat: T,
    /// `−u_td y_bp / √(Δ² + (y_bp + g)²) + G₁`, i.e. `ẏ_bp` without `Ṽ_N`.
    pub y_dot_known: T,
    pub normal_gain: T,
}

/// Desired yaw rate from known signals only.
///
/// Differentiating `ψ_d` in time gives `ψ̇_d = K + (1 − C_r) r − M Ṽ_N`
/// with `K` built from `θ̇`, `v̇_r|_{r=0}`, `u̇_rd`, `V̂̇_N` and the known part of
/// `ẏ_bp`. Choosing `r_d = K / C_r` leaves `ψ̃̇ = C_r r̃ + M Ṽ_N`.
pub fn desired_yaw_rate<T: Scalar>(
    inp: &RdInputs<T>,
    ctx: &RdContext<'_>,
) -> Result<YawRateTerms<T>> {
    let delta = ctx.guidance.delta;
    let (gamma, kappa) = ctx.path.gamma_kappa(inp.theta);
    let (sg, cg) = (gamma.sin(), gamma.cos());
    let u_td2 = inp.u_rd.sqr() + inp.v_r.sqr();
    let u_td = u_td2.sqrt();

    let goff = solve_g(u_td, inp.vn_hat, inp.y_bp, delta)?;
    let psi_d = desired_heading(gamma, inp.v_r, inp.u_rd, inp.y_bp, goff.g, delta);
    let psi = psi_d + inp.psi_tilde;

    // u_t cos(ψ + β − γ_p) written without β so it stays smooth at u_t = 0
    let rel = psi - gamma;
    let along = inp.u_r * rel.cos() - inp.v_r * rel.sin();
    let theta_dot =
        (along + inp.vt_hat + inp.x_bp * ctx.guidance.k_delta) / (-(kappa * inp.y_bp) + 1.0);
    let gamma_dot = kappa * theta_dot;
    let dvn_hat = -(inp.x_tilde * sg * ctx.observer.kx2) + inp.y_tilde * cg * ctx.observer.ky2
        - inp.vt_hat * gamma_dot;

    let u_tilde = inp.u_r - inp.u_rd;
    let g1 = perturbation_g1(
        inp.psi_tilde,
        u_tilde,
        inp.x_bp,
        psi,
        gamma,
        inp.y_bp,
        goff.g,
        delta,
        u_td,
        gamma_dot,
    );
    let yg = inp.y_bp + goff.g;
    let los2 = yg.sqr() + delta * delta;
    let y_dot_known = -(u_td * inp.y_bp) / los2.sqrt() + g1;

    let x_ur = ctx.hydro.x(inp.u_r);
    let y_ur = ctx.hydro.y(inp.u_r);
    let vr_dot_known = y_ur * inp.v_r;
    let a_dot = (inp.vn_hat * dvn_hat - inp.u_rd * inp.du_rd - inp.v_r * vr_dot_known) * 2.0;
    let b_dot = inp.vn_hat * y_dot_known + inp.y_bp * dvn_hat;
    let c_dot = inp.y_bp * y_dot_known * 2.0;
    let g_dot = dvn_hat * goff.z + goff.dg_da * a_dot + goff.dg_db * b_dot + goff.dg_dc * c_dot;

    let c_r = coefficient_cr(x_ur, inp.u_rd, inp.v_r, inp.y_bp, &goff, delta);
    let known = kappa * theta_dot
        - (vr_dot_known * inp.u_rd - inp.du_rd * inp.v_r) / u_td2
        - (y_dot_known + g_dot) * delta / los2;

    let c_r_guarded = c_r.value().abs() < ctx.c_min;
    let divisor = if c_r_guarded {
        T::cst(if c_r.value() < 0.0 {
            -ctx.c_min
        } else {
            ctx.c_min
        })
    } else {
        c_r
    };
    let normal_gain = normal_error_gain(inp.y_bp, inp.vn_hat, &goff, delta);

    Ok(YawRateTerms {
        r_d: known / divisor,
        c_r,
        c_r_guarded,
        psi_d,
        psi,
        goff,
        g1,
        u_td,
        theta_dot,
        gamma,
        gamma_dot,
        dvn_hat,
        y_dot_known,
        normal_gain,
    })
}
