//! Nominal sweep construction, Gaussian perturbation sampling and the
//! Monte Carlo ensemble used to check the linearized model.
//!
//! The aircraft circles the radar at a fixed horizontal radius. Each run
//! perturbs the radar state once and then perturbs the aircraft state
//! independently at every sweep angle. Run `i` draws from its own ChaCha
//! stream keyed on `(seed, i)`, so results do not depend on how runs are
//! scheduled across threads.

use nalgebra::{DMatrix, SMatrix, SVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{evaluate_detection, RadarState};
use crate::error::{Error, Result};
use crate::geometry::{AircraftState, EulerAngles, Vec3};
use crate::linearization::{self, ErrorBudget, UncertaintyModel};
use crate::rcs::RcsModel;

/// Circular sweep of aircraft positions around the radar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub theta_start_deg: f64,
    pub theta_end_deg: f64,
    pub theta_step_deg: f64,
    /// Horizontal distance from the radar, m.
    pub radius: f64,
    /// Aircraft NED down coordinate, m (negative is above the radar).
    pub nominal_down: f64,
    /// Aircraft yaw, rad.
    pub nominal_yaw: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            theta_start_deg: 0.0,
            theta_end_deg: 180.0,
            theta_step_deg: 0.5,
            radius: 500e3,
            nominal_down: -3000.0,
            nominal_yaw: std::f64::consts::FRAC_PI_2,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.theta_start_deg,
            self.theta_end_deg,
            self.theta_step_deg,
            self.radius,
            self.nominal_down,
            self.nominal_yaw,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::domain("sweep values must be finite"));
        }
        if !(self.theta_step_deg > 0.0) {
            return Err(Error::domain("sweep step must be positive"));
        }
        if self.theta_start_deg > self.theta_end_deg {
            return Err(Error::domain("sweep start must not exceed sweep end"));
        }
        if !(self.radius > 0.0) {
            return Err(Error::domain("sweep radius must be positive"));
        }
        Ok(())
    }

    /// Grid angles in degrees, both endpoints included when the span is a
    /// whole number of steps.
    pub fn angles_deg(&self) -> Vec<f64> {
        let span = (self.theta_end_deg - self.theta_start_deg) / self.theta_step_deg;
        let n = (span + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|k| self.theta_start_deg + k as f64 * self.theta_step_deg)
            .collect()
    }
}

/// One grid point of the nominal sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NominalPoint {
    pub theta_deg: f64,
    pub aircraft: AircraftState,
    pub radar: RadarState,
}

/// Aircraft at `radar + (R sin θ, R cos θ, down)`, wings level with the
/// sweep yaw; the radar state is shared by every point.
pub fn nominal_states(spec: &SweepSpec, radar: &RadarState) -> Vec<NominalPoint> {
    spec.angles_deg()
        .into_iter()
        .map(|theta_deg| {
            let (s, c) = theta_deg.to_radians().sin_cos();
            let offset = Vec3::new(spec.radius * s, spec.radius * c, spec.nominal_down);
            NominalPoint {
                theta_deg,
                aircraft: AircraftState::new(
                    radar.position + offset,
                    EulerAngles::new(0.0, 0.0, spec.nominal_yaw),
                ),
                radar: *radar,
            }
        })
        .collect()
}

/// Square-root factor `L` with `L Lᵀ = C`.
#[derive(Debug, Clone)]
enum Factor<const N: usize> {
    Diagonal(SVector<f64, N>),
    Full(SMatrix<f64, N, N>),
}

impl<const N: usize> Factor<N> {
    fn of(cov: &SMatrix<f64, N, N>) -> Self {
        let off_diagonal_zero = (0..N).all(|i| (0..N).all(|j| i == j || cov[(i, j)] == 0.0));
        if off_diagonal_zero {
            return Factor::Diagonal(cov.diagonal().map(|v| v.max(0.0).sqrt()));
        }
        // eigen factor handles singular PSD matrices where Cholesky fails
        let eig = SymmetricEigen::new(DMatrix::from_column_slice(N, N, cov.as_slice()));
        let scaled = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
        Factor::Full(SMatrix::<f64, N, N>::from_column_slice(scaled.as_slice()))
    }

    fn draw(&self, rng: &mut impl Rng) -> SVector<f64, N> {
        let z = SVector::<f64, N>::from_fn(|_, _| rng.sample(StandardNormal));
        match self {
            Factor::Diagonal(d) => d.component_mul(&z),
            Factor::Full(l) => l * z,
        }
    }
}

/// Zero-mean Gaussian perturbations of aircraft and radar states.
#[derive(Debug, Clone)]
pub struct PerturbationSampler {
    aircraft: Factor<6>,
    radar: Factor<4>,
}

impl PerturbationSampler {
    pub fn new(u: &UncertaintyModel) -> Self {
        Self {
            aircraft: Factor::of(u.aircraft()),
            radar: Factor::of(u.radar()),
        }
    }

    pub fn perturb_aircraft(&self, nominal: &AircraftState, rng: &mut impl Rng) -> AircraftState {
        AircraftState::from_vector(&(nominal.to_vector() + self.aircraft.draw(rng)))
    }

    pub fn perturb_radar(&self, nominal: &RadarState, rng: &mut impl Rng) -> RadarState {
        RadarState::from_vector(&(nominal.to_vector() + self.radar.draw(rng)))
    }
}

/// One joint draw of perturbed aircraft and radar states (radar first).
pub fn sample_perturbed(
    nominal: &NominalPoint,
    u: &UncertaintyModel,
    rng: &mut impl Rng,
) -> (AircraftState, RadarState) {
    let sampler = PerturbationSampler::new(u);
    let radar = sampler.perturb_radar(&nominal.radar, rng);
    let aircraft = sampler.perturb_aircraft(&nominal.aircraft, rng);
    (aircraft, radar)
}

/// Random stream for run `run` of an ensemble seeded with `seed`.
pub fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// Everything a sweep needs besides the uncertainty level.
#[derive(Clone, Copy)]
pub struct Experiment<'a> {
    pub sweep: &'a SweepSpec,
    pub radar: &'a RadarState,
    pub model: &'a dyn RcsModel,
    pub p_fa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub runs: usize,
    pub seed: u64,
    /// Spread runs over the rayon pool. Output is identical either way.
    pub parallel: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            runs: 500,
            seed: 0,
            parallel: true,
        }
    }
}

/// Monte Carlo ensemble over a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct McEnsemble {
    pub theta_deg: Vec<f64>,
    pub pd_nominal: Vec<f64>,
    /// Linearized σ_pd at each nominal state.
    pub sigma_pd: Vec<f64>,
    /// `samples[run][k]`.
    pub samples: Vec<Vec<f64>>,
    pub sample_mean: Vec<f64>,
    /// Per-angle sample standard deviation (n - 1 normalization; 0 for a
    /// single run).
    pub sample_std: Vec<f64>,
    /// Fraction of all run×angle samples with `|P̄_D - P_D| <= 3 σ_pd`.
    pub coverage: f64,
}

impl McEnsemble {
    pub fn runs(&self) -> usize {
        self.samples.len()
    }

    /// `P̄_D[k] - P_D,i[k]`.
    pub fn error(&self, run: usize, k: usize) -> f64 {
        self.pd_nominal[k] - self.samples[run][k]
    }
}

fn simulate_run(
    exp: &Experiment<'_>,
    nominals: &[NominalPoint],
    sampler: &PerturbationSampler,
    seed: u64,
    run: usize,
) -> Result<Vec<f64>> {
    let mut rng = run_rng(seed, run as u64);
    let radar = sampler.perturb_radar(exp.radar, &mut rng);
    nominals
        .iter()
        .map(|n| {
            let aircraft = sampler.perturb_aircraft(&n.aircraft, &mut rng);
            Ok(evaluate_detection(&aircraft, &radar, exp.model, exp.p_fa)?.pd)
        })
        .collect()
}

pub fn run_monte_carlo(
    exp: &Experiment<'_>,
    u: &UncertaintyModel,
    cfg: &McConfig,
) -> Result<McEnsemble> {
    exp.sweep.validate()?;
    if cfg.runs == 0 {
        return Err(Error::domain("Monte Carlo needs at least one run"));
    }
    let nominals = nominal_states(exp.sweep, exp.radar);
    let mut pd_nominal = Vec::with_capacity(nominals.len());
    let mut sigma_pd = Vec::with_capacity(nominals.len());
    for n in &nominals {
        let s = linearization::sensitivity(&n.aircraft, &n.radar, exp.model, exp.p_fa, u)?;
        pd_nominal.push(s.point.pd);
        sigma_pd.push(s.sigma_pd);
    }

    let sampler = PerturbationSampler::new(u);
    let samples: Vec<Vec<f64>> = if cfg.parallel {
        (0..cfg.runs)
            .into_par_iter()
            .map(|i| simulate_run(exp, &nominals, &sampler, cfg.seed, i))
            .collect::<Result<_>>()?
    } else {
        (0..cfg.runs)
            .map(|i| simulate_run(exp, &nominals, &sampler, cfg.seed, i))
            .collect::<Result<_>>()?
    };

    let n_angles = nominals.len();
    let runs = cfg.runs as f64;
    let mut sample_mean = vec![0.0; n_angles];
    let mut sample_std = vec![0.0; n_angles];
    let mut inside = 0usize;
    for k in 0..n_angles {
        let mean = samples.iter().map(|r| r[k]).sum::<f64>() / runs;
        let ss: f64 = samples.iter().map(|r| (r[k] - mean).powi(2)).sum();
        sample_mean[k] = mean;
        sample_std[k] = if cfg.runs > 1 { (ss / (runs - 1.0)).sqrt() } else { 0.0 };
        inside += samples
            .iter()
            .filter(|r| (pd_nominal[k] - r[k]).abs() <= 3.0 * sigma_pd[k])
            .count();
    }

    Ok(McEnsemble {
        theta_deg: nominals.iter().map(|n| n.theta_deg).collect(),
        pd_nominal,
        sigma_pd,
        samples,
        sample_mean,
        sample_std,
        coverage: inside as f64 / (runs * n_angles as f64),
    })
}

/// `3 σ_pd` at every sweep angle for each uncertainty level, from the
/// linearized model only. Result is indexed `[level][angle]`.
pub fn sensitivity_sweep(exp: &Experiment<'_>, levels: &[UncertaintyModel]) -> Result<Vec<Vec<f64>>> {
    exp.sweep.validate()?;
    let mut out = vec![Vec::new(); levels.len()];
    for n in nominal_states(exp.sweep, exp.radar) {
        let (_, a_pa, a_pr) = linearization::jacobians(&n.aircraft, &n.radar, exp.model, exp.p_fa)?;
        for (curve, u) in out.iter_mut().zip(levels) {
            curve.push(3.0 * linearization::sigma_pd(&a_pa, &a_pr, u));
        }
    }
    Ok(out)
}

/// Per-angle error budget.
pub fn budget_sweep(exp: &Experiment<'_>, u: &UncertaintyModel) -> Result<Vec<(f64, ErrorBudget)>> {
    exp.sweep.validate()?;
    nominal_states(exp.sweep, exp.radar)
        .into_iter()
        .map(|n| {
            let (_, a_pa, a_pr) = linearization::jacobians(&n.aircraft, &n.radar, exp.model, exp.p_fa)?;
            Ok((n.theta_deg, linearization::error_budget(&a_pa, &a_pr, u)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearization::{Cov4, Cov6, StdDevs};
    use crate::rcs::EllipsoidRcs;

    fn radar() -> RadarState {
        RadarState::new(Vec3::zeros(), 167.0)
    }

    #[test]
    fn table_grid() {
        let spec = SweepSpec::default();
        let pts = nominal_states(&spec, &radar());
        assert_eq!(pts.len(), 361);
        assert_eq!(pts[0].theta_deg, 0.0);
        assert_eq!(pts[360].theta_deg, 180.0);
        assert_eq!(pts[0].aircraft.position, Vec3::new(0.0, 500e3, -3000.0));
        let p90 = pts[180].aircraft.position;
        assert!((p90 - Vec3::new(500e3, 0.0, -3000.0)).amax() < 1e-9);
        for p in &pts {
            assert_eq!(p.aircraft.attitude, EulerAngles::new(0.0, 0.0, spec.nominal_yaw));
            assert_eq!(p.radar, radar());
        }
    }

    #[test]
    fn grid_excludes_overshoot() {
        let spec = SweepSpec {
            theta_start_deg: 10.0,
            theta_end_deg: 11.0,
            theta_step_deg: 0.3,
            ..SweepSpec::default()
        };
        assert_eq!(spec.angles_deg().len(), 4);
    }

    #[test]
    fn sweep_validation() {
        let bad_step = SweepSpec { theta_step_deg: 0.0, ..SweepSpec::default() };
        assert!(bad_step.validate().is_err());
        let reversed = SweepSpec { theta_start_deg: 10.0, theta_end_deg: 5.0, ..SweepSpec::default() };
        assert!(reversed.validate().is_err());
    }

    #[test]
    fn zero_covariance_leaves_nominal_unchanged() {
        let n = nominal_states(&SweepSpec::default(), &radar())[17];
        let mut rng = run_rng(9, 0);
        let (a, r) = sample_perturbed(&n, &UncertaintyModel::zero(), &mut rng);
        assert_eq!(a, n.aircraft);
        assert_eq!(r, n.radar);
    }

    #[test]
    fn sample_moments() {
        let sd = StdDevs {
            aircraft_position: 10.0,
            aircraft_attitude: 0.02,
            radar_position: 100.0,
            radar_constant: 5.0,
        };
        let u = UncertaintyModel::from_std_devs(&sd).unwrap();
        let sampler = PerturbationSampler::new(&u);
        let mut rng = run_rng(42, 0);
        let nom_a = AircraftState::from_vector(&SVector::zeros());
        let nom_r = RadarState::from_vector(&SVector::zeros());
        let n = 100_000;
        let mut sum_a = SVector::<f64, 6>::zeros();
        let mut sq_a = SVector::<f64, 6>::zeros();
        let mut sum_r = SVector::<f64, 4>::zeros();
        let mut sq_r = SVector::<f64, 4>::zeros();
        for _ in 0..n {
            let a = sampler.perturb_aircraft(&nom_a, &mut rng).to_vector();
            let r = sampler.perturb_radar(&nom_r, &mut rng).to_vector();
            sum_a += a;
            sq_a += a.component_mul(&a);
            sum_r += r;
            sq_r += r.component_mul(&r);
        }
        let nf = n as f64;
        let sig_a = [10.0, 10.0, 10.0, 0.02, 0.02, 0.02];
        let sig_r = [100.0, 100.0, 100.0, 5.0];
        for i in 0..6 {
            assert!((sum_a[i] / nf).abs() < 4.0 * sig_a[i] / nf.sqrt());
            let var = sq_a[i] / nf;
            assert!((var / sig_a[i].powi(2) - 1.0).abs() < 0.05);
        }
        for i in 0..4 {
            assert!((sum_r[i] / nf).abs() < 4.0 * sig_r[i] / nf.sqrt());
            let var = sq_r[i] / nf;
            assert!((var / sig_r[i].powi(2) - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn correlated_covariance_is_reproduced() {
        let mut c_rr = Cov4::zeros();
        c_rr[(0, 0)] = 4.0;
        c_rr[(1, 1)] = 9.0;
        c_rr[(0, 1)] = 3.0;
        c_rr[(1, 0)] = 3.0;
        let u = UncertaintyModel::new(Cov6::zeros(), c_rr).unwrap();
        let sampler = PerturbationSampler::new(&u);
        let mut rng = run_rng(3, 1);
        let nom = RadarState::from_vector(&SVector::zeros());
        let n = 100_000;
        let mut acc = Cov4::zeros();
        for _ in 0..n {
            let x = sampler.perturb_radar(&nom, &mut rng).to_vector();
            acc += x * x.transpose();
        }
        acc /= n as f64;
        assert!((acc[(0, 1)] - 3.0).abs() < 0.15);
        assert!((acc[(1, 1)] - 9.0).abs() < 0.45);
        assert!(acc[(3, 3)].abs() < 1e-12);
    }

    #[test]
    fn single_run_without_noise_equals_nominal() {
        let model = EllipsoidRcs::new(0.15, 0.13, 0.21).unwrap();
        let sweep = SweepSpec { theta_step_deg: 5.0, ..SweepSpec::default() };
        let exp = Experiment { sweep: &sweep, radar: &radar(), model: &model, p_fa: 1.7e-4 };
        let cfg = McConfig { runs: 1, seed: 5, parallel: false };
        let ens = run_monte_carlo(&exp, &UncertaintyModel::zero(), &cfg).unwrap();
        assert_eq!(ens.samples[0], ens.pd_nominal);
        assert_eq!(ens.coverage, 1.0);
        assert!(ens.sample_std.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn parallel_and_serial_agree() {
        let model = EllipsoidRcs::new(0.15, 0.13, 0.21).unwrap();
        let sweep = SweepSpec { theta_step_deg: 10.0, ..SweepSpec::default() };
        let exp = Experiment { sweep: &sweep, radar: &radar(), model: &model, p_fa: 1.7e-4 };
        let u = UncertaintyModel::medium();
        let serial = run_monte_carlo(&exp, &u, &McConfig { runs: 40, seed: 11, parallel: false }).unwrap();
        let parallel = run_monte_carlo(&exp, &u, &McConfig { runs: 40, seed: 11, parallel: true }).unwrap();
        assert_eq!(serial, parallel);
        let other = run_monte_carlo(&exp, &u, &McConfig { runs: 40, seed: 12, parallel: true }).unwrap();
        assert_ne!(serial.samples, other.samples);
    }

    #[test]
    fn nested_levels_are_ordered() {
        let model = EllipsoidRcs::new(0.15, 0.13, 0.21).unwrap();
        let sweep = SweepSpec { theta_step_deg: 2.5, ..SweepSpec::default() };
        let exp = Experiment { sweep: &sweep, radar: &radar(), model: &model, p_fa: 1.7e-4 };
        let curves = sensitivity_sweep(
            &exp,
            &[UncertaintyModel::low(), UncertaintyModel::medium(), UncertaintyModel::high()],
        )
        .unwrap();
        for ((lo, med), hi) in curves[0].iter().zip(&curves[1]).zip(&curves[2]) {
            assert!(lo <= med && med <= hi);
        }
    }
}
