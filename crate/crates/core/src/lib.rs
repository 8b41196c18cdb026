//! Single-pulse radar detection probability and its first-order sensitivity
//! to aircraft pose and radar state.
//!
//! The detection chain maps an aircraft pose and a radar state through range,
//! body-frame line of sight, radar cross section and signal-to-noise ratio to
//! a probability of detection. [`linearization`] assembles analytic Jacobians
//! of that chain and propagates state covariances into a standard deviation
//! of the detection probability; [`montecarlo`] checks the linear model
//! against sampled ensembles; [`scenario`] drives the whole thing from a JSON
//! file and writes CSV/JSON results.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
pub mod error;
pub mod geometry;
pub mod linearization;
pub mod montecarlo;
pub mod rcs;
pub mod scenario;

#[cfg(test)]
mod testutil;

pub use detection::{evaluate_detection, DetectionPoint, RadarParams, RadarState};
pub use error::{Error, Result};
pub use geometry::{AircraftState, EulerAngles, RcsAngles, Vec3};
pub use linearization::{ErrorBudget, PdSensitivity, UncertaintyModel};
pub use rcs::{ConstantRcs, EllipsoidRcs, RcsModel};
