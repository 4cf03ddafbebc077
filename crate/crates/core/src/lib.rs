//! Curved-path following for an underactuated surface vessel in an unknown
//! constant ocean current.
//!
//! The crate is organised around the closed loop:
//!
//! * [`model`] — 3-DOF manoeuvring model in relative velocities.
//! * [`path`] — parametrised paths and the path-tangential error frame.
//! * [`observer`] — kinematic current observer.
//! * [`guidance`] — current-compensated line-of-sight guidance.
//! * [`control`] — surge and yaw controllers.
//! * [`feasibility`] — assumption checks and tube sizing.
//! * [`scenario`] — TOML configuration.
//! * [`sim`] — integrator, monitors and closed-loop runner.

// Guards are written as `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod dual;
pub mod error;
pub mod feasibility;
pub mod guidance;
pub mod model;
pub mod observer;
pub mod path;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
pub use feasibility::{FeasibilityReport, Verdict};
pub use model::{Environment, HydroCoeffs, VesselParams, VesselState};
pub use path::{PathGeometry, PathSpec};
