//! Scalar detection chain: SNR from the consolidated radar constant, cross
//! section and range, then North's closed-form approximation for the
//! single-pulse probability of detection.

mod erfc;

pub use erfc::erfc;

use nalgebra::SVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, AircraftState, RcsAngles, Vec3};
use crate::rcs::RcsModel;

/// Boltzmann's constant in J/K, at the rounded value the detection model is
/// calibrated against (not the CODATA value).
pub const BOLTZMANN: f64 = 1.38e-23;

/// Surveillance radar hardware parameters that fold into the consolidated
/// radar constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarParams {
    /// Average transmit power, W.
    pub avg_power: f64,
    /// Effective aperture, m².
    pub aperture: f64,
    /// Reference noise temperature, K.
    pub noise_temp: f64,
    /// Total system loss (linear).
    pub loss: f64,
    /// Receiver noise factor (linear).
    pub noise_factor: f64,
    /// Scan time, s.
    pub scan_time: f64,
    /// Search solid angle, sr.
    pub solid_angle: f64,
}

/// `P_av A / (16 T0 L F) * T_sc / Ω`, in J·m²/K.
pub fn radar_constant_surveillance(p: &RadarParams) -> Result<f64> {
    let fields = [
        ("avg_power", p.avg_power),
        ("aperture", p.aperture),
        ("noise_temp", p.noise_temp),
        ("loss", p.loss),
        ("noise_factor", p.noise_factor),
        ("scan_time", p.scan_time),
        ("solid_angle", p.solid_angle),
    ];
    for (name, v) in fields {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain(format!("radar parameter {name} must be positive, got {v}")));
        }
    }
    Ok(p.avg_power * p.aperture / (16.0 * p.noise_temp * p.loss * p.noise_factor) * p.scan_time
        / p.solid_angle)
}

/// Radar NED position (m) and consolidated radar constant (J·m²/K).
///
/// As a stacked vector the ordering is `[p_n, p_e, p_d, c_r]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarState {
    pub position: Vec3,
    pub radar_constant: f64,
}

impl RadarState {
    pub fn new(position: Vec3, radar_constant: f64) -> Self {
        Self {
            position,
            radar_constant,
        }
    }

    pub fn to_vector(&self) -> SVector<f64, 4> {
        let p = &self.position;
        SVector::<f64, 4>::from([p.x, p.y, p.z, self.radar_constant])
    }

    pub fn from_vector(x: &SVector<f64, 4>) -> Self {
        Self::new(Vec3::new(x[0], x[1], x[2]), x[3])
    }
}

/// Every intermediate of one detection evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionPoint {
    /// Radar position in the aircraft body frame, m.
    pub rho_body: Vec3,
    pub range: f64,
    pub angles: RcsAngles,
    /// Radar cross section, m².
    pub sigma: f64,
    pub snr: f64,
    pub pd: f64,
}

pub(crate) fn check_p_fa(p_fa: f64) -> Result<()> {
    if p_fa > 0.0 && p_fa < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("probability of false alarm must lie in (0, 1), got {p_fa}")))
    }
}

/// Single-pulse detection probability,
/// `0.5 erfc(sqrt(-ln P_fa) - sqrt(S + 0.5))`.
pub fn pd_from_snr(snr: f64, p_fa: f64) -> Result<f64> {
    check_p_fa(p_fa)?;
    if !(snr >= 0.0) {
        return Err(Error::domain(format!("SNR must be nonnegative, got {snr}")));
    }
    Ok(0.5 * erfc((-p_fa.ln()).sqrt() - (snr + 0.5).sqrt()))
}

/// Signal-to-noise ratio `c_r σ / (k R⁴)`.
pub fn snr(radar_constant: f64, sigma: f64, range: f64) -> Result<f64> {
    if !(range > 0.0) {
        return Err(Error::domain(format!("range must be positive, got {range}")));
    }
    Ok(radar_constant * sigma / (BOLTZMANN * range.powi(4)))
}

/// Runs the full chain from aircraft pose and radar state to `P_D`.
pub fn evaluate_detection(
    aircraft: &AircraftState,
    radar: &RadarState,
    model: &dyn RcsModel,
    p_fa: f64,
) -> Result<DetectionPoint> {
    let rho_body = geometry::relative_position_body(aircraft, &radar.position)?;
    let angles = geometry::rcs_angles(&rho_body)?;
    let range = geometry::range(&aircraft.position, &radar.position);
    let sigma = model.sigma(&angles);
    let snr = snr(radar.radar_constant, sigma, range)?;
    let pd = pd_from_snr(snr, p_fa)?;
    Ok(DetectionPoint {
        rho_body,
        range,
        angles,
        sigma,
        snr,
        pd,
    })
}
