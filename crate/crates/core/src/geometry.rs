//! Frames and kinematics: NED/body rotation, range, body-frame line of sight,
//! RCS aspect angles, and the geometric Jacobians used by the linearization.
//!
//! Frames follow the usual aerospace conventions. NED is north-east-down;
//! the body frame has x out the nose, y out the right wing and z out the
//! belly. Attitude is a ZYX (yaw, pitch, roll) Euler sequence.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix3, RowVector3, SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Row3 = RowVector3<f64>;
pub type Mat3x6 = SMatrix<f64, 3, 6>;

/// Pitch must stay this far inside (-pi/2, pi/2).
pub const GIMBAL_MARGIN: f64 = 1e-9;

/// Minimum distance (m) from the body z-axis, or between two positions,
/// below which line-of-sight derivatives are undefined.
pub const SINGULARITY_TOL: f64 = 1e-9;

/// ZYX Euler angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl EulerAngles {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self { roll, pitch, yaw }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.roll.is_finite() && self.pitch.is_finite() && self.yaw.is_finite()) {
            return Err(Error::domain("Euler angles must be finite"));
        }
        if self.pitch.abs() >= FRAC_PI_2 - GIMBAL_MARGIN {
            return Err(Error::GimbalSingularity { pitch: self.pitch });
        }
        Ok(())
    }
}

/// Aircraft pose: NED position (m) and attitude.
///
/// As a stacked vector the ordering is `[p_n, p_e, p_d, roll, pitch, yaw]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AircraftState {
    pub position: Vec3,
    pub attitude: EulerAngles,
}

impl AircraftState {
    pub fn new(position: Vec3, attitude: EulerAngles) -> Self {
        Self { position, attitude }
    }

    pub fn to_vector(&self) -> SVector<f64, 6> {
        let p = &self.position;
        let a = &self.attitude;
        SVector::<f64, 6>::from([p.x, p.y, p.z, a.roll, a.pitch, a.yaw])
    }

    pub fn from_vector(x: &SVector<f64, 6>) -> Self {
        Self {
            position: Vec3::new(x[0], x[1], x[2]),
            attitude: EulerAngles::new(x[3], x[4], x[5]),
        }
    }
}

/// Aspect of the radar as seen from the aircraft body.
///
/// `azimuth` is in (-pi, pi], `elevation` in [-pi/2, pi/2]; positive
/// elevation means the radar is below the aircraft in body axes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RcsAngles {
    pub azimuth: f64,
    pub elevation: f64,
}

impl RcsAngles {
    pub fn new(azimuth: f64, elevation: f64) -> Self {
        Self { azimuth, elevation }
    }
}

struct Trig {
    sr: f64,
    cr: f64,
    sp: f64,
    cp: f64,
    sy: f64,
    cy: f64,
}

impl Trig {
    fn of(att: &EulerAngles) -> Self {
        let (sr, cr) = att.roll.sin_cos();
        let (sp, cp) = att.pitch.sin_cos();
        let (sy, cy) = att.yaw.sin_cos();
        Self { sr, cr, sp, cp, sy, cy }
    }
}

/// NED to body rotation for a ZYX Euler sequence.
pub fn dcm_ned_to_body(att: &EulerAngles) -> Result<Mat3> {
    att.validate()?;
    let Trig { sr, cr, sp, cp, sy, cy } = Trig::of(att);
    Ok(Mat3::new(
        cp * cy,
        cp * sy,
        -sp,
        sr * sp * cy - cr * sy,
        sr * sp * sy + cr * cy,
        sr * cp,
        cr * sp * cy + sr * sy,
        cr * sp * sy - sr * cy,
        cr * cp,
    ))
}

/// Entrywise derivatives of [`dcm_ned_to_body`] with respect to roll, pitch
/// and yaw, in that order.
pub fn dcm_attitude_partials(att: &EulerAngles) -> Result<[Mat3; 3]> {
    att.validate()?;
    let Trig { sr, cr, sp, cp, sy, cy } = Trig::of(att);

    let d_roll = Mat3::new(
        0.0,
        0.0,
        0.0,
        cr * sp * cy + sr * sy,
        cr * sp * sy - sr * cy,
        cr * cp,
        -sr * sp * cy + cr * sy,
        -sr * sp * sy - cr * cy,
        -sr * cp,
    );
    let d_pitch = Mat3::new(
        -sp * cy,
        -sp * sy,
        -cp,
        sr * cp * cy,
        sr * cp * sy,
        -sr * sp,
        cr * cp * cy,
        cr * cp * sy,
        -cr * sp,
    );
    let d_yaw = Mat3::new(
        -cp * sy,
        cp * cy,
        0.0,
        -sr * sp * sy - cr * cy,
        sr * sp * cy - cr * sy,
        0.0,
        -cr * sp * sy + sr * cy,
        cr * sp * cy + sr * sy,
        0.0,
    );
    Ok([d_roll, d_pitch, d_yaw])
}

/// Radar position expressed in the aircraft body frame.
pub fn relative_position_body(aircraft: &AircraftState, radar_pos: &Vec3) -> Result<Vec3> {
    let dcm = dcm_ned_to_body(&aircraft.attitude)?;
    Ok(dcm * (radar_pos - aircraft.position))
}

/// Euclidean distance between aircraft and radar.
pub fn range(p_a: &Vec3, p_r: &Vec3) -> f64 {
    (p_r - p_a).norm()
}

/// Azimuth and elevation of the body-frame line of sight `rho`.
pub fn rcs_angles(rho: &Vec3) -> Result<RcsAngles> {
    let horiz = rho.x.hypot(rho.y);
    if !(horiz >= SINGULARITY_TOL) {
        return Err(Error::BodyAxisSingularity { offset: horiz });
    }
    Ok(RcsAngles {
        azimuth: rho.y.atan2(rho.x),
        elevation: (rho.z / horiz).atan(),
    })
}

/// Gradient of range with respect to the radar position. The gradient with
/// respect to the aircraft position is its negation.
pub fn d_range_d_radar_pos(p_a: &Vec3, p_r: &Vec3) -> Result<Row3> {
    let d = p_r - p_a;
    let r = d.norm();
    if !(r >= SINGULARITY_TOL) {
        return Err(Error::CoincidentPositions);
    }
    Ok((d / r).transpose())
}

/// Gradients of azimuth and elevation with respect to the body-frame line of
/// sight.
pub fn d_angles_d_rho(rho: &Vec3) -> Result<(Row3, Row3)> {
    let h2 = rho.x * rho.x + rho.y * rho.y;
    let horiz = h2.sqrt();
    if !(horiz >= SINGULARITY_TOL) {
        return Err(Error::BodyAxisSingularity { offset: horiz });
    }
    let d_az = Row3::new(-rho.y / h2, rho.x / h2, 0.0);
    let alpha = (h2 + rho.z * rho.z) * horiz;
    let d_el = Row3::new(-rho.x * rho.z, -rho.y * rho.z, h2) / alpha;
    Ok((d_az, d_el))
}

/// Jacobian of the body-frame line of sight with respect to the radar
/// position: the NED to body rotation itself.
pub fn d_rho_d_radar_pos(att: &EulerAngles) -> Result<Mat3> {
    dcm_ned_to_body(att)
}

/// Jacobian of the body-frame line of sight with respect to the stacked
/// aircraft state `[p_n, p_e, p_d, roll, pitch, yaw]`.
pub fn d_rho_d_aircraft_state(aircraft: &AircraftState, radar_pos: &Vec3) -> Result<Mat3x6> {
    let dcm = dcm_ned_to_body(&aircraft.attitude)?;
    let partials = dcm_attitude_partials(&aircraft.attitude)?;
    let d = radar_pos - aircraft.position;

    let mut jac = Mat3x6::zeros();
    jac.fixed_view_mut::<3, 3>(0, 0).copy_from(&(-dcm));
    for (i, dm) in partials.iter().enumerate() {
        jac.set_column(3 + i, &(dm * d));
    }
    Ok(jac)
}
