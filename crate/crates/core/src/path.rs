//! Arc-length parametrised planar paths and the path-tangential frame.
//!
//! Every path is unit-speed in its parameter θ, so the tangent angle obeys
//! `dγ_p/dθ = κ(θ)` and the frame update law needs no speed factor.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::dual::Scalar;
use crate::error::{Error, Result};

/// Wraps an angle to `(−π, π]`.
pub fn wrap_pi(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Path description as written in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PathSpec {
    Line {
        origin: [f64; 2],
        heading: f64,
    },
    Circle {
        radius: f64,
        center: [f64; 2],
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        clockwise: bool,
    },
    Sine {
        amplitude: f64,
        wavenumber: f64,
        length: f64,
    },
}

/// Geometry sampled at one value of the path variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub x: f64,
    pub y: f64,
    /// Tangent angle γ_p, continuous in θ (not wrapped).
    pub gamma: f64,
    pub kappa: f64,
    /// dκ/dθ
    pub dkappa: f64,
}

/// Along-track and cross-track error in the path-tangential frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameError {
    pub x_bp: f64,
    pub y_bp: f64,
    pub theta: f64,
}

#[derive(Debug, Clone)]
enum Shape {
    Line {
        origin: [f64; 2],
        heading: f64,
    },
    Circle {
        center: [f64; 2],
        radius: f64,
        dir: f64,
    },
    Sine(SineCurve),
}

#[derive(Debug, Clone)]
pub struct PathGeometry {
    shape: Shape,
    kappa_max: f64,
}

impl PathGeometry {
    pub fn line(origin: [f64; 2], heading: f64) -> Self {
        Self {
            shape: Shape::Line { origin, heading },
            kappa_max: 0.0,
        }
    }

    /// Circle traversed counter-clockwise (or clockwise), θ = 0 at angle 0.
    pub fn circle(center: [f64; 2], radius: f64, clockwise: bool) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidPath(format!(
                "circle radius {radius} must be positive"
            )));
        }
        Ok(Self {
            shape: Shape::Circle {
                center,
                radius,
                dir: if clockwise { -1.0 } else { 1.0 },
            },
            kappa_max: 1.0 / radius,
        })
    }

    /// `y = A sin(ω x)` for `x ∈ [0, length]`, re-parametrised by arc length.
    pub fn sine(amplitude: f64, wavenumber: f64, length: f64) -> Result<Self> {
        let c = SineCurve::new(amplitude, wavenumber, length)?;
        let kappa_max = c.kappa_max();
        Ok(Self {
            shape: Shape::Sine(c),
            kappa_max,
        })
    }

    pub fn from_spec(spec: &PathSpec) -> Result<Self> {
        match *spec {
            PathSpec::Line { origin, heading } => {
                if !heading.is_finite() || origin.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidPath(
                        "line origin/heading must be finite".into(),
                    ));
                }
                Ok(Self::line(origin, heading))
            }
            PathSpec::Circle {
                radius,
                center,
                clockwise,
            } => Self::circle(center, radius, clockwise),
            PathSpec::Sine {
                amplitude,
                wavenumber,
                length,
            } => Self::sine(amplitude, wavenumber, length),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.shape {
            Shape::Line { .. } => "line",
            Shape::Circle { .. } => "circle",
            Shape::Sine(_) => "sine",
        }
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa_max
    }

    /// Radius of the tube in which the normal projection is unique:
    /// `1/κ_max`, or `+∞` for a straight line.
    pub fn tube_radius(&self) -> f64 {
        if self.kappa_max > 0.0 {
            1.0 / self.kappa_max
        } else {
            f64::INFINITY
        }
    }

    /// Closed parameter interval; unbounded for lines and circles.
    pub fn domain(&self) -> (f64, f64) {
        match &self.shape {
            Shape::Sine(c) => (0.0, c.total_length()),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn contains(&self, theta: f64) -> bool {
        let (a, b) = self.domain();
        theta >= a && theta <= b
    }

    /// Geometry at θ. Out-of-domain values are clamped for the sine path;
    /// callers that care use [`PathGeometry::contains`].
    pub fn point(&self, theta: f64) -> PathPoint {
        match &self.shape {
            Shape::Line { origin, heading } => {
                let (s, c) = heading.sin_cos();
                PathPoint {
                    x: origin[0] + theta * c,
                    y: origin[1] + theta * s,
                    gamma: *heading,
                    kappa: 0.0,
                    dkappa: 0.0,
                }
            }
            Shape::Circle {
                center,
                radius,
                dir,
            } => {
                let a = dir * theta / radius;
                let (s, c) = a.sin_cos();
                PathPoint {
                    x: center[0] + radius * c,
                    y: center[1] + radius * s,
                    gamma: a + dir * FRAC_PI_2,
                    kappa: dir / radius,
                    dkappa: 0.0,
                }
            }
            Shape::Sine(curve) => curve.point(theta),
        }
    }

    pub fn position(&self, theta: f64) -> [f64; 2] {
        let p = self.point(theta);
        [p.x, p.y]
    }

    pub fn tangent_angle(&self, theta: f64) -> f64 {
        self.point(theta).gamma
    }

    pub fn curvature(&self, theta: f64) -> f64 {
        self.point(theta).kappa
    }

    /// `(γ_p(θ), κ(θ))` lifted to a generic scalar, so derivative channels
    /// seeded on θ propagate through the path geometry.
    pub fn gamma_kappa<T: Scalar>(&self, theta: T) -> (T, T) {
        let p = self.point(theta.value());
        (
            theta.chain(p.gamma, p.kappa),
            theta.chain(p.kappa, p.dkappa),
        )
    }

    /// Rotation of `pos − P(θ)` into the path-tangential frame.
    pub fn frame_error(&self, theta: f64, pos: [f64; 2]) -> FrameError {
        let p = self.point(theta);
        frame_error_at(&p, theta, pos)
    }

    /// θ of the nearest path point, used once to start the vessel on the
    /// normal of the path-tangential frame.
    pub fn project_initial_theta(&self, pos: [f64; 2]) -> Result<f64> {
        let limit = self.tube_radius();
        let theta = self.nearest_theta(pos)?;
        let fe = self.frame_error(theta, pos);
        if fe.y_bp.abs() >= limit {
            return Err(Error::OutsideTube {
                distance: fe.y_bp.abs(),
                limit,
            });
        }
        Ok(theta)
    }

    /// θ of the nearest path point without the tube check. Fails only where
    /// the nearest point is not unique (the centre of a circle).
    pub fn nearest_theta(&self, pos: [f64; 2]) -> Result<f64> {
        let limit = self.tube_radius();
        let theta = match &self.shape {
            Shape::Line { origin, heading } => {
                let (s, c) = heading.sin_cos();
                (pos[0] - origin[0]) * c + (pos[1] - origin[1]) * s
            }
            Shape::Circle {
                center,
                radius,
                dir,
            } => {
                let dx = pos[0] - center[0];
                let dy = pos[1] - center[1];
                let d = dx.hypot(dy);
                if d == 0.0 {
                    return Err(Error::OutsideTube {
                        distance: *radius,
                        limit,
                    });
                }
                dir * radius * dy.atan2(dx)
            }
            Shape::Sine(curve) => curve.project(pos)?,
        };
        Ok(theta)
    }
}

pub(crate) fn frame_error_at(p: &PathPoint, theta: f64, pos: [f64; 2]) -> FrameError {
    let (s, c) = p.gamma.sin_cos();
    let dx = pos[0] - p.x;
    let dy = pos[1] - p.y;
    FrameError {
        x_bp: c * dx + s * dy,
        y_bp: -s * dx + c * dy,
        theta,
    }
}

/// Path-variable update law
/// `θ̇ = (u_t cos(χ − γ_p) + V̂_T + k_δ x_bp) / (1 − κ y_bp)`.
///
/// Fails with [`Error::Singularity`] when `1 − κ y_bp < sigma_floor`.
pub fn theta_dot(
    path: &PathGeometry,
    fe: &FrameError,
    u_t: f64,
    chi: f64,
    vt_hat: f64,
    k_delta: f64,
    sigma_floor: f64,
) -> Result<f64> {
    let p = path.point(fe.theta);
    let margin = 1.0 - p.kappa * fe.y_bp;
    if !(margin >= sigma_floor) {
        return Err(Error::Singularity {
            margin,
            floor: sigma_floor,
        });
    }
    Ok((u_t * wrap_pi(chi - p.gamma).cos() + vt_hat + k_delta * fe.x_bp) / margin)
}

const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
    0.236_926_885_056_189_08,
];

/// Sine curve with a cumulative arc-length table. The inverse `x(s)` starts
/// from a cubic Hermite guess on the table and is polished by Newton steps
/// on the Gauss–Legendre arc-length integral.
#[derive(Debug, Clone)]
struct SineCurve {
    amp: f64,
    omega: f64,
    length: f64,
    xs: Vec<f64>,
    ss: Vec<f64>,
}

impl SineCurve {
    fn new(amp: f64, omega: f64, length: f64) -> Result<Self> {
        if !(amp.is_finite()
            && omega > 0.0
            && omega.is_finite()
            && length > 0.0
            && length.is_finite())
        {
            return Err(Error::InvalidPath(
                "sine path needs finite amplitude, positive wavenumber and length".into(),
            ));
        }
        // 64 segments per half wavelength, at least 256 in total
        let half_waves = (length * omega / PI).ceil().max(1.0);
        let n = ((half_waves * 64.0) as usize).max(256);
        let mut c = Self {
            amp,
            omega,
            length,
            xs: Vec::with_capacity(n + 1),
            ss: Vec::with_capacity(n + 1),
        };
        let mut s = 0.0;
        c.xs.push(0.0);
        c.ss.push(0.0);
        for i in 1..=n {
            let x0 = length * (i - 1) as f64 / n as f64;
            let x1 = length * i as f64 / n as f64;
            s += c.arc(x0, x1);
            c.xs.push(x1);
            c.ss.push(s);
        }
        Ok(c)
    }

    #[inline]
    fn speed(&self, x: f64) -> f64 {
        let d = self.amp * self.omega * (self.omega * x).cos();
        (1.0 + d * d).sqrt()
    }

    fn arc(&self, x0: f64, x1: f64) -> f64 {
        let half = 0.5 * (x1 - x0);
        let mid = 0.5 * (x1 + x0);
        GL_NODES
            .iter()
            .zip(GL_WEIGHTS.iter())
            .map(|(n, w)| w * self.speed(mid + half * n))
            .sum::<f64>()
            * half
    }

    fn total_length(&self) -> f64 {
        *self.ss.last().unwrap()
    }

    fn kappa_max(&self) -> f64 {
        let aw2 = self.amp.abs() * self.omega * self.omega;
        if self.length >= FRAC_PI_2 / self.omega {
            aw2
        } else {
            // |κ| grows monotonically on [0, π/(2ω)]
            self.kappa_at_x(self.length).abs()
        }
    }

    fn kappa_at_x(&self, x: f64) -> f64 {
        let (s, c) = (self.omega * x).sin_cos();
        let d1 = self.amp * self.omega * c;
        let d2 = -self.amp * self.omega * self.omega * s;
        d2 / (1.0 + d1 * d1).powf(1.5)
    }

    fn x_of_s(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.total_length());
        let i = match self.ss.binary_search_by(|v| v.total_cmp(&s)) {
            Ok(i) => return self.xs[i],
            Err(i) => i.clamp(1, self.ss.len() - 1) - 1,
        };
        let (s0, s1) = (self.ss[i], self.ss[i + 1]);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = s1 - s0;
        let t = (s - s0) / h;
        let m0 = h / self.speed(x0);
        let m1 = h / self.speed(x1);
        let t2 = t * t;
        let t3 = t2 * t;
        let mut x = (2.0 * t3 - 3.0 * t2 + 1.0) * x0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * x1
            + (t3 - t2) * m1;
        for _ in 0..4 {
            let f = s0 + self.arc(x0, x) - s;
            let dx = f / self.speed(x);
            x -= dx;
            if dx.abs() <= 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        x
    }

    fn point(&self, theta: f64) -> PathPoint {
        let x = self.x_of_s(theta);
        let (s, c) = (self.omega * x).sin_cos();
        let a = self.amp;
        let w = self.omega;
        let d1 = a * w * c;
        let d2 = -a * w * w * s;
        let d3 = -a * w * w * w * c;
        let q = 1.0 + d1 * d1;
        let kappa = d2 / q.powf(1.5);
        let dkappa_dx = (d3 * q - 3.0 * d1 * d2 * d2) / q.powf(2.5);
        PathPoint {
            x,
            y: a * s,
            gamma: d1.atan(),
            kappa,
            dkappa: dkappa_dx / q.sqrt(),
        }
    }

    fn project(&self, pos: [f64; 2]) -> Result<f64> {
        // coarse scan on table nodes, then Newton on x_bp(θ) = 0
        let mut best = (f64::INFINITY, 0.0);
        for (&x, &s) in self.xs.iter().zip(self.ss.iter()) {
            let d = (pos[0] - x).hypot(pos[1] - self.amp * (self.omega * x).sin());
            if d < best.0 {
                best = (d, s);
            }
        }
        let mut theta = best.1;
        let total = self.total_length();
        for _ in 0..50 {
            let p = self.point(theta);
            let fe = frame_error_at(&p, theta, pos);
            let slope = 1.0 - p.kappa * fe.y_bp;
            if slope <= 0.0 {
                return Err(Error::OutsideTube {
                    distance: fe.y_bp.abs(),
                    limit: 1.0 / self.kappa_max(),
                });
            }
            let step = fe.x_bp / slope;
            theta = (theta + step).clamp(0.0, total);
            if step.abs() < 1e-12 {
                break;
            }
        }
        Ok(theta)
    }
}
