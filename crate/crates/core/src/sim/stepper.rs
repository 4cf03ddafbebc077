//! Fixed-step one-step integrators.
//!
//! [`rk4_step`] is the classical Runge–Kutta scheme. [`etdrk4_step`] is the
//! Cox–Matthews exponential scheme for `ẋ = L x + N(x)` with diagonal `L`;
//! components with `L = 0` are advanced with exactly the RK4 weights.

use crate::error::{Error, Result};

fn check<const N: usize>(k: &[f64; N]) -> Result<()> {
    if k.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            context: "state derivative",
        })
    }
}

fn axpy<const N: usize>(x: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| x[i] + a * k[i])
}

/// One classical RK4 step of `ẋ = f(t, x)`.
pub fn rk4_step<const N: usize, F>(mut f: F, t: f64, x: &[f64; N], dt: f64) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k1 = f(t, x)?;
    rk4_step_from(f, t, x, dt, k1)
}

/// RK4 step reusing an already evaluated first stage `k1 = f(t, x)`.
pub fn rk4_step_from<const N: usize, F>(
    mut f: F,
    t: f64,
    x: &[f64; N],
    dt: f64,
    k1: [f64; N],
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    check(&k1)?;
    let h2 = 0.5 * dt;
    let k2 = f(t + h2, &axpy(x, h2, &k1))?;
    check(&k2)?;
    let k3 = f(t + h2, &axpy(x, h2, &k2))?;
    check(&k3)?;
    let k4 = f(t + dt, &axpy(x, dt, &k3))?;
    check(&k4)?;
    Ok(std::array::from_fn(|i| {
        x[i] + dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])
    }))
}

/// `φ₁, φ₂, φ₃` at `z`, where `φ_k(z) = Σ_j z^j / (j + k)!`.
///
/// Uses the Taylor series near zero, where the closed forms cancel
/// catastrophically, and the recurrence `φ_{k+1} = (φ_k − 1/k!) / z` elsewhere.
pub fn phi123(z: f64) -> (f64, f64, f64) {
    if z.abs() < 1.0 {
        let mut p = [0.0f64; 3];
        for (k, slot) in p.iter_mut().enumerate() {
            // term_j = z^j / (j + k + 1)!
            let mut term = 1.0 / factorial(k + 1);
            let mut sum = term;
            for j in 1..30 {
                term *= z / (j + k + 1) as f64;
                sum += term;
                if term.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            *slot = sum;
        }
        (p[0], p[1], p[2])
    } else {
        let e = z.exp();
        let p1 = (e - 1.0) / z;
        let p2 = (p1 - 1.0) / z;
        let p3 = (p2 - 0.5) / z;
        (p1, p2, p3)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Per-component coefficients of one ETDRK4 step.
#[derive(Debug, Clone, Copy)]
struct EtdCoeffs {
    e: f64,
    e2: f64,
    /// `(h/2) φ₁(hL/2)`
    q: f64,
    f1: f64,
    f2: f64,
    f3: f64,
}

impl EtdCoeffs {
    fn new(l: f64, h: f64) -> Self {
        let z = h * l;
        let (p1h, _, _) = phi123(0.5 * z);
        let (_, p2, p3) = phi123(z);
        let (p1, _, _) = phi123(z);
        Self {
            e: z.exp(),
            e2: (0.5 * z).exp(),
            q: 0.5 * h * p1h,
            f1: h * (p1 - 3.0 * p2 + 4.0 * p3),
            f2: h * (2.0 * p2 - 4.0 * p3),
            f3: h * (4.0 * p3 - p2),
        }
    }
}

/// One ETDRK4 step of `ẋ = f(t, x)` with the stiff diagonal part `lin`
/// (`f` returns the full right-hand side; the nonlinear remainder is
/// `f − lin ∘ x`).
pub fn etdrk4_step<const N: usize, F>(
    f: F,
    t: f64,
    x: &[f64; N],
    dt: f64,
    lin: &[f64; N],
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut f = f;
    let k1 = f(t, x)?;
    etdrk4_step_from(f, t, x, dt, lin, k1)
}

/// ETDRK4 step reusing an already evaluated `f(t, x)`.
pub fn etdrk4_step_from<const N: usize, F>(
    mut f: F,
    t: f64,
    x: &[f64; N],
    dt: f64,
    lin: &[f64; N],
    fx: [f64; N],
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let c: [EtdCoeffs; N] = std::array::from_fn(|i| EtdCoeffs::new(lin[i], dt));
    let nl =
        |fv: [f64; N], s: &[f64; N]| -> [f64; N] { std::array::from_fn(|i| fv[i] - lin[i] * s[i]) };

    check(&fx)?;
    let nu = nl(fx, x);
    let a: [f64; N] = std::array::from_fn(|i| c[i].e2 * x[i] + c[i].q * nu[i]);
    let fa = f(t + 0.5 * dt, &a)?;
    check(&fa)?;
    let na = nl(fa, &a);
    let b: [f64; N] = std::array::from_fn(|i| c[i].e2 * x[i] + c[i].q * na[i]);
    let fb = f(t + 0.5 * dt, &b)?;
    check(&fb)?;
    let nb = nl(fb, &b);
    let cc: [f64; N] = std::array::from_fn(|i| c[i].e2 * a[i] + c[i].q * (2.0 * nb[i] - nu[i]));
    let fc = f(t + dt, &cc)?;
    check(&fc)?;
    let nc = nl(fc, &cc);
    Ok(std::array::from_fn(|i| {
        c[i].e * x[i] + c[i].f1 * nu[i] + c[i].f2 * (na[i] + nb[i]) + c[i].f3 * nc[i]
    }))
}
