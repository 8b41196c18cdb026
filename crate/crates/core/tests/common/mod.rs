//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use radar_uq::detection::evaluate_detection;
use radar_uq::linearization::{Row4, Row6};
use radar_uq::rcs::RcsModel;
use radar_uq::{AircraftState, EulerAngles, RadarState, Vec3};

pub const P_FA: f64 = 1.7e-4;
pub const C_R: f64 = 167.0;
pub const AXES: (f64, f64, f64) = (0.15, 0.13, 0.21);

/// Central-difference step used throughout: `max(1e-6, 1e-6 |x|)`.
pub fn fd_step(x: f64) -> f64 {
    (1e-6 * x.abs()).max(1e-6)
}

/// `|approx - analytic| / max(1, |analytic|)`.
pub fn rel_err(approx: f64, analytic: f64) -> f64 {
    (approx - analytic).abs() / analytic.abs().max(1.0)
}

/// Finite-difference Jacobians of the full nonlinear P_D pipeline.
pub fn fd_jacobians(
    aircraft: &AircraftState,
    radar: &RadarState,
    model: &dyn RcsModel,
    p_fa: f64,
) -> (Row6, Row4) {
    let pd = |a: &AircraftState, r: &RadarState| evaluate_detection(a, r, model, p_fa).unwrap().pd;
    let xa = aircraft.to_vector();
    let xr = radar.to_vector();
    let mut ja = Row6::zeros();
    for j in 0..6 {
        let h = fd_step(xa[j]);
        let (mut up, mut dn) = (xa, xa);
        up[j] += h;
        dn[j] -= h;
        ja[j] = (pd(&AircraftState::from_vector(&up), radar)
            - pd(&AircraftState::from_vector(&dn), radar))
            / (2.0 * h);
    }
    let mut jr = Row4::zeros();
    for j in 0..4 {
        let h = fd_step(xr[j]);
        let (mut up, mut dn) = (xr, xr);
        up[j] += h;
        dn[j] -= h;
        jr[j] = (pd(aircraft, &RadarState::from_vector(&up))
            - pd(aircraft, &RadarState::from_vector(&dn)))
            / (2.0 * h);
    }
    (ja, jr)
}

/// Random non-singular state: range 10-1000 km, roll/pitch within ±60°,
/// any yaw, c_r in [50, 500], radar kept away from the body z-axis.
pub fn random_state(rng: &mut ChaCha8Rng) -> (AircraftState, RadarState) {
    loop {
        let radar_pos = Vec3::new(
            rng.random_range(-1e4..1e4),
            rng.random_range(-1e4..1e4),
            rng.random_range(-500.0..500.0),
        );
        let range = rng.random_range(1e4..1e6);
        let az = rng.random_range(-PI..PI);
        let el = rng.random_range(-1.2..1.2f64);
        let dir = Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin());
        let att = EulerAngles::new(
            rng.random_range(-60f64..60.0).to_radians(),
            rng.random_range(-60f64..60.0).to_radians(),
            rng.random_range(-PI..PI),
        );
        let a = AircraftState::new(radar_pos + dir * range, att);
        let r = RadarState::new(radar_pos, rng.random_range(50.0..500.0));
        let rho = radar_uq::geometry::relative_position_body(&a, &r.position).unwrap();
        if rho.x.hypot(rho.y) > 1e-2 * range {
            return (a, r);
        }
    }
}

/// Gauss-Legendre nodes/weights on [-1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// erfc by panelled quadrature of its defining integral.
pub fn erfc_quadrature(z: f64) -> f64 {
    let rule = gauss_legendre(20);
    let panels = ((z.abs() / 0.25).ceil() as usize).max(1);
    let h = z / panels as f64;
    let mut integral = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        let s: f64 = rule
            .iter()
            .map(|&(x, w)| {
                let t = mid + 0.5 * h * x;
                w * (-t * t).exp()
            })
            .sum();
        integral += 0.5 * h * s;
    }
    1.0 - 2.0 / PI.sqrt() * integral
}

/// Hand computation of the nominal P_D for the reference circular sweep
/// (radar at origin, wings level, yaw 90°). With that attitude the body axes
/// are east, south and down, so body coordinates are read straight off the
/// NED offset without a rotation matrix.
pub fn hand_nominal_pd(theta_deg: f64) -> f64 {
    let (a, b, c) = AXES;
    let radius = 500e3;
    let down = -3000.0;
    let t = theta_deg.to_radians();
    let (north, east) = (radius * t.sin(), radius * t.cos());
    // radar minus aircraft, in NED
    let (dn, de, dd) = (-north, -east, -down);
    // yaw 90°: body x = east, body y = -north
    let (x, y, z) = (de, -dn, dd);
    let lam = y.atan2(x);
    let phi = (z / (x * x + y * y).sqrt()).atan();
    let den = (a * lam.sin() * phi.cos()).powi(2)
        + (b * lam.sin() * phi.sin()).powi(2)
        + (c * lam.cos()).powi(2);
    let sigma = PI * (a * b * c).powi(2) / (den * den);
    let range = (dn * dn + de * de + dd * dd).sqrt();
    let snr = C_R * sigma / (1.38e-23 * range.powi(4));
    0.5 * erfc_quadrature((-P_FA.ln()).sqrt() - (snr + 0.5).sqrt())
}
