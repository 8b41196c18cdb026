mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{fd_jacobians, random_state, rel_err, AXES, P_FA};
use radar_uq::linearization::jacobians;
use radar_uq::rcs::{ConstantRcs, EllipsoidRcs, Rcs};

fn check_model(model: &Rcs, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut worst_scaled = 0.0f64;
    for _ in 0..1000 {
        let (a, r) = random_state(&mut rng);
        let (_, a_pa, a_pr) = jacobians(&a, &r, model, P_FA).unwrap();
        let (fd_pa, fd_pr) = fd_jacobians(&a, &r, model, P_FA);
        for j in 0..6 {
            worst = worst.max(rel_err(fd_pa[j], a_pa[j]));
        }
        for j in 0..4 {
            worst = worst.max(rel_err(fd_pr[j], a_pr[j]));
        }
        // Stricter, scale-aware check: error against the largest entry of
        // each block, with a floor above the central-difference roundoff.
        let blocks: [(&[f64], &[f64]); 4] = [
            (&fd_pa.as_slice()[0..3], &a_pa.as_slice()[0..3]),
            (&fd_pa.as_slice()[3..6], &a_pa.as_slice()[3..6]),
            (&fd_pr.as_slice()[0..3], &a_pr.as_slice()[0..3]),
            (&fd_pr.as_slice()[3..4], &a_pr.as_slice()[3..4]),
        ];
        for (fd, an) in blocks {
            let scale = an.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (f, x) in fd.iter().zip(an) {
                worst_scaled = worst_scaled.max((f - x).abs() / (1e-4 * scale + 1e-9));
            }
        }
    }
    assert!(worst <= 1e-6, "{model:?}: worst {worst:e}");
    assert!(worst_scaled <= 1.0, "{model:?}: worst scaled {worst_scaled:e}");
}

#[test]
fn ellipsoid_jacobians_match_finite_differences() {
    let (a, b, c) = AXES;
    check_model(&Rcs::Ellipsoid(EllipsoidRcs::new(a, b, c).unwrap()), 1);
}

#[test]
fn elongated_ellipsoid_jacobians_match_finite_differences() {
    check_model(&Rcs::Ellipsoid(EllipsoidRcs::new(2.0, 0.3, 0.8).unwrap()), 2);
}

#[test]
fn constant_rcs_jacobians_match_finite_differences() {
    check_model(&Rcs::Constant(ConstantRcs::new(0.1).unwrap()), 3);
}

#[test]
fn constant_rcs_aircraft_position_mirrors_radar_position() {
    let model = Rcs::Constant(ConstantRcs::new(0.1).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let (a, r) = random_state(&mut rng);
        let (_, a_pa, a_pr) = jacobians(&a, &r, &model, P_FA).unwrap();
        for i in 0..3 {
            assert!((a_pa[i] + a_pr[i]).abs() <= 1e-15 * a_pr[i].abs().max(1e-300));
            assert_eq!(a_pa[3 + i], 0.0);
        }
    }
}

/// Residual of the first-order model shrinks quadratically with the
/// perturbation size.
#[test]
fn linearization_residual_is_second_order() {
    use nalgebra::SVector;
    use radar_uq::detection::evaluate_detection;
    use radar_uq::{AircraftState, RadarState};
    use rand::Rng;

    let (ea, eb, ec) = AXES;
    let model = Rcs::Ellipsoid(EllipsoidRcs::new(ea, eb, ec).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // natural units: the medium one-sigma level of each state
    let deg = 1f64.to_radians();
    let units_a = SVector::<f64, 6>::from([10.0, 10.0, 10.0, deg, deg, deg]);
    let units_r = SVector::<f64, 4>::from([100.0, 100.0, 100.0, 5.0]);
    let mut checked = 0;
    while checked < 50 {
        let (a, r) = random_state(&mut rng);
        let base = evaluate_detection(&a, &r, &model, P_FA).unwrap().pd;
        if !(0.05..0.95).contains(&base) {
            continue;
        }
        let (_, a_pa, a_pr) = jacobians(&a, &r, &model, P_FA).unwrap();
        let wa = SVector::<f64, 6>::from_fn(|i, _| rng.random_range(-1.0..1.0) * units_a[i]);
        let wr = SVector::<f64, 4>::from_fn(|i, _| rng.random_range(-1.0..1.0) * units_r[i]);
        let residual = |eps: f64| {
            let pa = AircraftState::from_vector(&(a.to_vector() + wa * eps));
            let pr = RadarState::from_vector(&(r.to_vector() + wr * eps));
            let pd = evaluate_detection(&pa, &pr, &model, P_FA).unwrap().pd;
            let lin = (a_pa * wa)[(0, 0)] * eps + (a_pr * wr)[(0, 0)] * eps;
            (pd - base - lin).abs()
        };
        let mut eps = 1e-2;
        while eps >= 2e-4 {
            let (big, small) = (residual(eps), residual(eps / 2.0));
            // stay well clear of the ~1e-16 rounding floor
            if small > 1e-13 {
                assert!(big / small >= 3.5, "eps={eps}: {big:e} -> {small:e}");
            }
            eps /= 2.0;
        }
        checked += 1;
    }
}
