//! 3-DOF relative-velocity maneuvering model of an underactuated surface
//! vessel in a constant, irrotational current.
//!
//! ```text
//! ẋ   = u_r cos ψ − v_r sin ψ + V_x
//! ẏ   = u_r sin ψ + v_r cos ψ + V_y
//! ψ̇   = r
//! u̇_r = F_u(v_r, r) − (d11/m11) u_r + τ_u
//! v̇_r = X(u_r) r + Y(u_r) v_r
//! ṙ   = F_r(u_r, v_r, r) + τ_r
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dual::Scalar;
use crate::error::{Error, Result};

/// Inertia and damping entries of the 3-DOF model (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VesselParams {
    pub m11: f64,
    pub m22: f64,
    pub m23: f64,
    pub m33: f64,
    pub d11: f64,
    pub d22: f64,
    pub d23: f64,
    pub d32: f64,
    pub d33: f64,
}

impl VesselParams {
    /// Synthetic vessel shipped with the case study. Its sway coefficients
    /// give `Y_min / X_max ≈ 0.1333` over `u_r ∈ [−1.562, 5]` m/s.
    pub const fn synthetic() -> Self {
        Self {
            m11: 1.0,
            m22: 3.0,
            m23: -0.05,
            m33: 0.12,
            d11: 0.05,
            d22: 1.956,
            d23: 0.01,
            d32: 0.01,
            d33: 0.08,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.m11, self.m22, self.m23, self.m33, self.d11, self.d22, self.d23, self.d32,
            self.d33,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidVessel("all entries must be finite".into()));
        }
        if self.m11 <= 0.0 || self.m22 <= 0.0 || self.m33 <= 0.0 {
            return Err(Error::InvalidVessel(
                "m11, m22, m33 must be positive".into(),
            ));
        }
        if self.det() <= 0.0 {
            return Err(Error::InvalidVessel(format!(
                "m22*m33 - m23^2 = {} must be positive",
                self.det()
            )));
        }
        if self.d11 <= 0.0 {
            return Err(Error::InvalidVessel("d11 must be positive".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(src: &str, origin: &Path) -> Result<Self> {
        let p: Self = toml::from_str(src).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&src, path)
    }

    /// `m22·m33 − m23²`, the common denominator of X, Y and F_r.
    #[inline]
    pub fn det(&self) -> f64 {
        self.m22 * self.m33 - self.m23 * self.m23
    }

    pub fn hydro(&self) -> HydroCoeffs {
        let den = self.det();
        HydroCoeffs {
            a_x: (self.m23 * self.m23 - self.m11 * self.m33) / den,
            b_x: (self.d33 * self.m23 - self.d23 * self.m33) / den,
            a_y: (self.m22 - self.m11) * self.m23 / den,
            b_y: -(self.d22 * self.m33 - self.d32 * self.m23) / den,
        }
    }

    #[inline]
    pub fn surge_damping(&self) -> f64 {
        self.d11 / self.m11
    }

    /// Surge coupling `F_u(v_r, r) = (m22 v_r + m23 r) r / m11`.
    #[inline]
    pub fn f_u(&self, v_r: f64, r: f64) -> f64 {
        (self.m22 * v_r + self.m23 * r) * r / self.m11
    }

    /// Yaw coupling `F_r(u_r, v_r, r)`; linear in `(v_r, r)`.
    #[inline]
    pub fn f_r(&self, u_r: f64, v_r: f64, r: f64) -> f64 {
        let den = self.det();
        let cv = (self.m23 * self.d22 - self.m22 * (self.d32 + (self.m22 - self.m11) * u_r)) / den;
        let cr =
            (self.m23 * (self.d23 + self.m11 * u_r) - self.m22 * (self.d33 + self.m23 * u_r)) / den;
        cv * v_r + cr * r
    }
}

/// Affine shape of the sway coefficients: `X(u) = a_x u + b_x`, `Y(u) = a_y u + b_y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HydroCoeffs {
    pub a_x: f64,
    pub b_x: f64,
    pub a_y: f64,
    pub b_y: f64,
}

impl HydroCoeffs {
    #[inline]
    pub fn x<T: Scalar>(&self, u_r: T) -> T {
        u_r * self.a_x + self.b_x
    }

    #[inline]
    pub fn y<T: Scalar>(&self, u_r: T) -> T {
        u_r * self.a_y + self.b_y
    }

    /// `max |X(u)|` over `[lo, hi]`; attained at an endpoint since X is affine.
    pub fn x_max(&self, lo: f64, hi: f64) -> f64 {
        self.x(lo).abs().max(self.x(hi).abs())
    }

    /// `min |Y(u)|` over `[lo, hi]`, or zero if Y changes sign on the interval.
    pub fn y_min(&self, lo: f64, hi: f64) -> f64 {
        let (ylo, yhi) = (self.y(lo), self.y(hi));
        if ylo * yhi <= 0.0 {
            0.0
        } else {
            ylo.abs().min(yhi.abs())
        }
    }
}

/// Plant state: inertial pose and relative velocities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VesselState {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub u_r: f64,
    pub v_r: f64,
    pub r: f64,
}

impl VesselState {
    pub fn to_array(&self) -> [f64; 6] {
        [self.x, self.y, self.psi, self.u_r, self.v_r, self.r]
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Self {
            x: s[0],
            y: s[1],
            psi: s[2],
            u_r: s[3],
            v_r: s[4],
            r: s[5],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Inertial velocity due to the vessel's own motion through the water.
    #[inline]
    pub fn relative_kinematics(&self) -> (f64, f64) {
        let (s, c) = self.psi.sin_cos();
        (self.u_r * c - self.v_r * s, self.u_r * s + self.v_r * c)
    }
}

/// Constant inertial current and its assumed bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub vx: f64,
    pub vy: f64,
    pub vmax: f64,
}

impl Environment {
    /// Current with `V_max` set to its own magnitude.
    pub fn new(vx: f64, vy: f64) -> Self {
        Self {
            vx,
            vy,
            vmax: vx.hypot(vy),
        }
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }
}

/// Time derivative of the plant state.
pub fn dynamics(
    p: &VesselParams,
    env: &Environment,
    s: &VesselState,
    tau_u: f64,
    tau_r: f64,
) -> Result<VesselState> {
    if !s.is_finite() || !tau_u.is_finite() || !tau_r.is_finite() {
        return Err(Error::NonFinite {
            context: "vessel dynamics input",
        });
    }
    let h = p.hydro();
    let (kx, ky) = s.relative_kinematics();
    Ok(VesselState {
        x: kx + env.vx,
        y: ky + env.vy,
        psi: s.r,
        u_r: p.f_u(s.v_r, s.r) - p.surge_damping() * s.u_r + tau_u,
        v_r: h.x(s.u_r) * s.r + h.y(s.u_r) * s.v_r,
        r: p.f_r(s.u_r, s.v_r, s.r) + tau_r,
    })
}
