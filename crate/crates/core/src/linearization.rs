//! First-order propagation of aircraft and radar state uncertainty into the
//! probability of detection.
//!
//! `δP_D ≈ A_Pa δx_a + A_Pr δx_r`, so with independent aircraft and radar
//! errors `σ_pd² = A_Pa C_aa A_Paᵀ + A_Pr C_rr A_Prᵀ`. Both Jacobians are
//! chained through the same three scalar partials (`∂P_D/∂S`, `∂S/∂R`,
//! `∂S/∂σ`) and differ only in how range and cross section depend on the
//! state being perturbed.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::detection::{self, check_p_fa, DetectionPoint, RadarState, BOLTZMANN};
use crate::error::{Error, Result};
use crate::geometry::{self, AircraftState, Row3};
use crate::rcs::RcsModel;

pub type Row4 = SMatrix<f64, 1, 4>;
pub type Row6 = SMatrix<f64, 1, 6>;
pub type Cov4 = SMatrix<f64, 4, 4>;
pub type Cov6 = SMatrix<f64, 6, 6>;

/// Standard deviations that define a diagonal uncertainty level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StdDevs {
    /// Aircraft position, m (each NED axis).
    pub aircraft_position: f64,
    /// Aircraft Euler angles, rad (each angle).
    pub aircraft_attitude: f64,
    /// Radar position, m (each NED axis).
    pub radar_position: f64,
    /// Radar constant, J·m²/K.
    pub radar_constant: f64,
}

impl StdDevs {
    pub const LOW: StdDevs = StdDevs {
        aircraft_position: 10.0,
        aircraft_attitude: PI / 180.0,
        radar_position: 10.0,
        radar_constant: 1.0,
    };
    pub const MEDIUM: StdDevs = StdDevs {
        aircraft_position: 10.0,
        aircraft_attitude: PI / 180.0,
        radar_position: 100.0,
        radar_constant: 5.0,
    };
    pub const HIGH: StdDevs = StdDevs {
        aircraft_position: 10.0,
        aircraft_attitude: PI / 180.0,
        radar_position: 1000.0,
        radar_constant: 10.0,
    };
}

/// Aircraft (6×6) and radar (4×4) state covariances, in the stacked-state
/// orderings `[p_n, p_e, p_d, roll, pitch, yaw]` and `[p_n, p_e, p_d, c_r]`.
///
/// Both matrices are checked symmetric positive semidefinite on
/// construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyModel {
    c_aa: Cov6,
    c_rr: Cov4,
}

fn check_psd<const N: usize>(m: &SMatrix<f64, N, N>, name: &str) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(format!("{name} has non-finite entries")));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    if (m - m.transpose()).amax() > 1e-12 * scale {
        return Err(Error::domain(format!("{name} is not symmetric")));
    }
    let dense = DMatrix::from_column_slice(N, N, m.as_slice());
    let min_eig = SymmetricEigen::new(dense).eigenvalues.min();
    if min_eig < -1e-12 * scale {
        return Err(Error::domain(format!(
            "{name} is not positive semidefinite (eigenvalue {min_eig:e})"
        )));
    }
    Ok(())
}

impl UncertaintyModel {
    pub fn new(c_aa: Cov6, c_rr: Cov4) -> Result<Self> {
        check_psd(&c_aa, "aircraft covariance")?;
        check_psd(&c_rr, "radar covariance")?;
        Ok(Self { c_aa, c_rr })
    }

    /// Diagonal covariances whose entries are the squared standard deviations.
    pub fn from_std_devs(s: &StdDevs) -> Result<Self> {
        for v in [s.aircraft_position, s.aircraft_attitude, s.radar_position, s.radar_constant] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(format!("standard deviation must be nonnegative, got {v}")));
            }
        }
        let pa = s.aircraft_position.powi(2);
        let ang = s.aircraft_attitude.powi(2);
        let pr = s.radar_position.powi(2);
        let cr = s.radar_constant.powi(2);
        Self::new(
            Cov6::from_diagonal(&[pa, pa, pa, ang, ang, ang].into()),
            Cov4::from_diagonal(&[pr, pr, pr, cr].into()),
        )
    }

    pub fn zero() -> Self {
        Self {
            c_aa: Cov6::zeros(),
            c_rr: Cov4::zeros(),
        }
    }

    pub fn low() -> Self {
        Self::from_std_devs(&StdDevs::LOW).expect("preset is valid")
    }

    pub fn medium() -> Self {
        Self::from_std_devs(&StdDevs::MEDIUM).expect("preset is valid")
    }

    pub fn high() -> Self {
        Self::from_std_devs(&StdDevs::HIGH).expect("preset is valid")
    }

    pub fn aircraft(&self) -> &Cov6 {
        &self.c_aa
    }

    pub fn radar(&self) -> &Cov4 {
        &self.c_rr
    }

    /// Both covariances scaled by `s²`.
    pub fn scaled(&self, s: f64) -> Self {
        let s2 = s * s;
        Self {
            c_aa: self.c_aa * s2,
            c_rr: self.c_rr * s2,
        }
    }

    /// True when there is no correlation between the position and attitude
    /// blocks of `C_aa`, nor between radar position and radar constant.
    pub fn is_block_diagonal(&self) -> bool {
        let aa_cross = self.c_aa.fixed_view::<3, 3>(0, 3);
        let rr_cross = self.c_rr.fixed_view::<3, 1>(0, 3);
        aa_cross.iter().all(|&v| v == 0.0) && rr_cross.iter().all(|&v| v == 0.0)
    }

    fn only(&self, source: Source) -> Self {
        let mut out = Self::zero();
        match source {
            Source::AircraftPosition => out
                .c_aa
                .fixed_view_mut::<3, 3>(0, 0)
                .copy_from(&self.c_aa.fixed_view::<3, 3>(0, 0)),
            Source::AircraftAttitude => out
                .c_aa
                .fixed_view_mut::<3, 3>(3, 3)
                .copy_from(&self.c_aa.fixed_view::<3, 3>(3, 3)),
            Source::RadarPosition => out
                .c_rr
                .fixed_view_mut::<3, 3>(0, 0)
                .copy_from(&self.c_rr.fixed_view::<3, 3>(0, 0)),
            Source::RadarConstant => out.c_rr[(3, 3)] = self.c_rr[(3, 3)],
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
enum Source {
    AircraftPosition,
    AircraftAttitude,
    RadarPosition,
    RadarConstant,
}

/// Linearized detection model at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdSensitivity {
    pub point: DetectionPoint,
    pub a_pa: Row6,
    pub a_pr: Row4,
    pub sigma_pd: f64,
}

/// Per-source 3σ contributions to the detection probability, each computed
/// with only that source active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub aircraft_position: f64,
    pub aircraft_attitude: f64,
    pub radar_position: f64,
    pub radar_constant: f64,
    pub total: f64,
}

impl ErrorBudget {
    pub fn sources(&self) -> [f64; 4] {
        [
            self.aircraft_position,
            self.aircraft_attitude,
            self.radar_position,
            self.radar_constant,
        ]
    }
}

/// `dP_D/dS`.
pub fn d_pd_d_snr(snr: f64, p_fa: f64) -> Result<f64> {
    check_p_fa(p_fa)?;
    if !(snr >= 0.0) {
        return Err(Error::domain(format!("SNR must be nonnegative, got {snr}")));
    }
    let u = (snr + 0.5).sqrt();
    let gap = (-p_fa.ln()).sqrt() - u;
    Ok((-gap * gap).exp() / (2.0 * PI.sqrt() * u))
}

/// Both Jacobians plus the nominal evaluation, sharing one pass through the
/// chain.
pub fn jacobians(
    aircraft: &AircraftState,
    radar: &RadarState,
    model: &dyn RcsModel,
    p_fa: f64,
) -> Result<(DetectionPoint, Row6, Row4)> {
    let point = detection::evaluate_detection(aircraft, radar, model, p_fa)?;
    let dpd_ds = d_pd_d_snr(point.snr, p_fa)?;
    let r4 = point.range.powi(4);
    let ds_drange = -4.0 * radar.radar_constant * point.sigma / (BOLTZMANN * r4 * point.range);
    let ds_dsigma = radar.radar_constant / (BOLTZMANN * r4);
    let ds_dcr = point.sigma / (BOLTZMANN * r4);

    let drange_dpr = geometry::d_range_d_radar_pos(&aircraft.position, &radar.position)?;
    let (daz_drho, del_drho) = geometry::d_angles_d_rho(&point.rho_body)?;
    let (dsig_daz, dsig_del) = model.grad(&point.angles);
    let dsig_drho: Row3 = daz_drho * dsig_daz + del_drho * dsig_del;

    // radar state
    let dsig_dpr = dsig_drho * geometry::d_rho_d_radar_pos(&aircraft.attitude)?;
    let pos_r = (drange_dpr * ds_drange + dsig_dpr * ds_dsigma) * dpd_ds;
    let a_pr = Row4::new(pos_r[0], pos_r[1], pos_r[2], dpd_ds * ds_dcr);

    // aircraft state
    let dsig_dxa = dsig_drho * geometry::d_rho_d_aircraft_state(aircraft, &radar.position)?;
    let mut drange_dxa = Row6::zeros();
    drange_dxa.fixed_view_mut::<1, 3>(0, 0).copy_from(&(-drange_dpr));
    let a_pa = (drange_dxa * ds_drange + dsig_dxa * ds_dsigma) * dpd_ds;

    Ok((point, a_pa, a_pr))
}

/// `A_Pr = ∂P_D/∂x_r`, ordered `[p_n, p_e, p_d, c_r]`.
pub fn jacobian_radar(
    aircraft: &AircraftState,
    radar: &RadarState,
    model: &dyn RcsModel,
    p_fa: f64,
) -> Result<Row4> {
    jacobians(aircraft, radar, model, p_fa).map(|(_, _, a_pr)| a_pr)
}

/// `A_Pa = ∂P_D/∂x_a`, ordered `[p_n, p_e, p_d, roll, pitch, yaw]`.
pub fn jacobian_aircraft(
    aircraft: &AircraftState,
    radar: &RadarState,
    model: &dyn RcsModel,
    p_fa: f64,
) -> Result<Row6> {
    jacobians(aircraft, radar, model, p_fa).map(|(_, a_pa, _)| a_pa)
}

/// Standard deviation of `P_D` under the linearized model.
pub fn sigma_pd(a_pa: &Row6, a_pr: &Row4, u: &UncertaintyModel) -> f64 {
    let var = (a_pa * u.c_aa * a_pa.transpose())[(0, 0)] + (a_pr * u.c_rr * a_pr.transpose())[(0, 0)];
    // PSD inputs; clamp rounding below zero
    var.max(0.0).sqrt()
}

/// Linearizes at one operating point and propagates `u`.
pub fn sensitivity(
    aircraft: &AircraftState,
    radar: &RadarState,
    model: &dyn RcsModel,
    p_fa: f64,
    u: &UncertaintyModel,
) -> Result<PdSensitivity> {
    let (point, a_pa, a_pr) = jacobians(aircraft, radar, model, p_fa)?;
    Ok(PdSensitivity {
        point,
        a_pa,
        a_pr,
        sigma_pd: sigma_pd(&a_pa, &a_pr, u),
    })
}

/// Splits `3σ_pd` into the four independent sources. Requires `u` to have no
/// correlation across source blocks.
pub fn error_budget(a_pa: &Row6, a_pr: &Row4, u: &UncertaintyModel) -> Result<ErrorBudget> {
    if !u.is_block_diagonal() {
        return Err(Error::domain(
            "error budget needs uncorrelated aircraft position/attitude and radar position/constant blocks",
        ));
    }
    let three_sigma = |m: &UncertaintyModel| 3.0 * sigma_pd(a_pa, a_pr, m);
    Ok(ErrorBudget {
        aircraft_position: three_sigma(&u.only(Source::AircraftPosition)),
        aircraft_attitude: three_sigma(&u.only(Source::AircraftAttitude)),
        radar_position: three_sigma(&u.only(Source::RadarPosition)),
        radar_constant: three_sigma(&u.only(Source::RadarConstant)),
        total: three_sigma(u),
    })
}
