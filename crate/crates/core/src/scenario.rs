//! Scenario files and the experiment commands that turn them into CSV/JSON.
//!
//! A scenario is one JSON document. Every section is optional; anything left
//! out takes the reference values below (ellipsoid target, 500 km circular
//! sweep, c_r = 167, P_fa = 1.7e-4, Medium uncertainty). Angles in files are
//! in degrees, everything else SI.
//!
//! ```json
//! {
//!   "radar": { "position_m": [0, 0, 0], "radar_constant": 167, "p_fa": 1.7e-4 },
//!   "rcs": { "type": "ellipsoid", "a": 0.15, "b": 0.13, "c": 0.21 },
//!   "sweep": { "theta_start_deg": 0, "theta_end_deg": 180, "theta_step_deg": 0.5,
//!              "radius_m": 500000, "nominal_down_m": -3000, "nominal_yaw_deg": 90 },
//!   "uncertainty": "medium",
//!   "montecarlo": { "runs": 500, "seed": 0, "parallel": true }
//! }
//! ```
//!
//! `radar` takes either `radar_constant` or `params` (surveillance radar
//! hardware parameters), never both. An uncertainty entry is a preset name
//! (`"low"`, `"medium"`, `"high"`), an object of standard deviations
//! (`sigma_pa_m`, `sigma_ang_deg`, `sigma_pr_m`, `sigma_cr`; missing entries
//! default to Medium), or explicit `c_aa` (6×6) and `c_rr` (4×4) covariance
//! matrices with attitude entries in degrees. `levels` overrides the three
//! sensitivity levels the same way.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::detection::{self, check_p_fa, radar_constant_surveillance, RadarParams, RadarState};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::linearization::{Cov4, Cov6, StdDevs, UncertaintyModel};
use crate::montecarlo::{self, Experiment, McConfig, McEnsemble, SweepSpec};
use crate::rcs::{EllipsoidRcs, Rcs};

pub const DEFAULT_RADAR_CONSTANT: f64 = 167.0;
pub const DEFAULT_P_FA: f64 = 1.7e-4;
pub const DEFAULT_ELLIPSOID: EllipsoidRcs = EllipsoidRcs {
    a: 0.15,
    b: 0.13,
    c: 0.21,
};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    radar: Option<RawRadar>,
    rcs: Option<Rcs>,
    sweep: Option<RawSweep>,
    uncertainty: Option<Value>,
    levels: Option<RawLevels>,
    montecarlo: Option<RawMc>,
    output: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRadar {
    position_m: Option<[f64; 3]>,
    radar_constant: Option<f64>,
    params: Option<RadarParams>,
    p_fa: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    theta_start_deg: Option<f64>,
    theta_end_deg: Option<f64>,
    theta_step_deg: Option<f64>,
    radius_m: Option<f64>,
    nominal_down_m: Option<f64>,
    nominal_yaw_deg: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevels {
    low: Option<Value>,
    medium: Option<Value>,
    high: Option<Value>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMc {
    runs: Option<usize>,
    seed: Option<u64>,
    parallel: Option<bool>,
}

/// A validated experiment description.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub radar: RadarState,
    pub p_fa: f64,
    pub rcs: Rcs,
    pub sweep: SweepSpec,
    /// Uncertainty used by the Monte Carlo and budget commands.
    pub uncertainty: UncertaintyModel,
    /// Low, Medium and High levels for the sensitivity command.
    pub levels: [UncertaintyModel; 3],
    pub montecarlo: McConfig,
    pub output: Option<PathBuf>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self::from_json_str("{}").expect("defaults are valid")
    }
}

fn finite(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::validation(field, format!("must be finite, got {v}")))
    }
}

fn parse_matrix<const N: usize>(field: &str, v: &Value) -> Result<nalgebra::SMatrix<f64, N, N>> {
    let rows: Vec<Vec<f64>> = serde_json::from_value(v.clone())
        .map_err(|e| Error::validation(field, format!("expected a {N}x{N} number array: {e}")))?;
    if rows.len() != N || rows.iter().any(|r| r.len() != N) {
        return Err(Error::validation(field, format!("expected a {N}x{N} matrix")));
    }
    Ok(nalgebra::SMatrix::<f64, N, N>::from_fn(|i, j| rows[i][j]))
}

fn preset(name: &str) -> Option<StdDevs> {
    match name.to_ascii_lowercase().as_str() {
        "low" => Some(StdDevs::LOW),
        "medium" => Some(StdDevs::MEDIUM),
        "high" => Some(StdDevs::HIGH),
        _ => None,
    }
}

fn parse_uncertainty(field: &str, v: &Value) -> Result<UncertaintyModel> {
    let invalid = |e: Error| Error::validation(field, e.to_string());
    match v {
        Value::String(name) => {
            let sd = preset(name).ok_or_else(|| {
                Error::validation(field, format!("unknown preset `{name}` (expected low, medium or high)"))
            })?;
            UncertaintyModel::from_std_devs(&sd).map_err(invalid)
        }
        Value::Object(map) if map.contains_key("c_aa") || map.contains_key("c_rr") => {
            if let Some(k) = map.keys().find(|k| *k != "c_aa" && *k != "c_rr") {
                return Err(Error::validation(format!("{field}.{k}"), "unknown field"));
            }
            let c_aa_field = format!("{field}.c_aa");
            let c_rr_field = format!("{field}.c_rr");
            let c_aa: Cov6 = parse_matrix(
                &c_aa_field,
                map.get("c_aa").ok_or_else(|| Error::validation(&c_aa_field, "missing"))?,
            )?;
            let c_rr: Cov4 = parse_matrix(
                &c_rr_field,
                map.get("c_rr").ok_or_else(|| Error::validation(&c_rr_field, "missing"))?,
            )?;
            // attitude rows/columns are in degrees in files
            let scale = Cov6::from_diagonal(
                &[1.0, 1.0, 1.0, PI / 180.0, PI / 180.0, PI / 180.0].into(),
            );
            UncertaintyModel::new(scale * c_aa * scale, c_rr).map_err(invalid)
        }
        Value::Object(map) => {
            let mut sd = StdDevs::MEDIUM;
            for (k, val) in map {
                let key = format!("{field}.{k}");
                let x = val
                    .as_f64()
                    .ok_or_else(|| Error::validation(&key, "expected a number"))?;
                if !(x.is_finite() && x >= 0.0) {
                    return Err(Error::validation(&key, format!("must be nonnegative, got {x}")));
                }
                match k.as_str() {
                    "sigma_pa_m" => sd.aircraft_position = x,
                    "sigma_ang_deg" => sd.aircraft_attitude = x.to_radians(),
                    "sigma_pr_m" => sd.radar_position = x,
                    "sigma_cr" => sd.radar_constant = x,
                    _ => return Err(Error::validation(&key, "unknown field")),
                }
            }
            UncertaintyModel::from_std_devs(&sd).map_err(invalid)
        }
        _ => Err(Error::validation(
            field,
            "expected a preset name or an object of standard deviations or covariances",
        )),
    }
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawScenario = serde_json::from_str(text)?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawScenario) -> Result<Self> {
        let r = raw.radar.unwrap_or_default();
        let position = r.position_m.unwrap_or([0.0; 3]);
        for (i, v) in position.iter().enumerate() {
            finite(&format!("radar.position_m[{i}]"), *v)?;
        }
        let radar_constant = match (r.radar_constant, r.params) {
            (Some(_), Some(_)) => {
                return Err(Error::validation(
                    "radar",
                    "give either `radar_constant` or `params`, not both",
                ))
            }
            (Some(c), None) => {
                if !(c.is_finite() && c > 0.0) {
                    return Err(Error::validation("radar.radar_constant", format!("must be positive, got {c}")));
                }
                c
            }
            (None, Some(p)) => radar_constant_surveillance(&p)
                .map_err(|e| Error::validation("radar.params", e.to_string()))?,
            (None, None) => DEFAULT_RADAR_CONSTANT,
        };
        let p_fa = r.p_fa.unwrap_or(DEFAULT_P_FA);
        check_p_fa(p_fa).map_err(|e| Error::validation("radar.p_fa", e.to_string()))?;

        let rcs = raw.rcs.unwrap_or(Rcs::Ellipsoid(DEFAULT_ELLIPSOID));
        rcs.validate().map_err(|e| Error::validation("rcs", e.to_string()))?;

        let s = raw.sweep.unwrap_or_default();
        let d = SweepSpec::default();
        let sweep = SweepSpec {
            theta_start_deg: finite("sweep.theta_start_deg", s.theta_start_deg.unwrap_or(d.theta_start_deg))?,
            theta_end_deg: finite("sweep.theta_end_deg", s.theta_end_deg.unwrap_or(d.theta_end_deg))?,
            theta_step_deg: finite("sweep.theta_step_deg", s.theta_step_deg.unwrap_or(d.theta_step_deg))?,
            radius: finite("sweep.radius_m", s.radius_m.unwrap_or(d.radius))?,
            nominal_down: finite("sweep.nominal_down_m", s.nominal_down_m.unwrap_or(d.nominal_down))?,
            nominal_yaw: finite(
                "sweep.nominal_yaw_deg",
                s.nominal_yaw_deg.map(f64::to_radians).unwrap_or(d.nominal_yaw),
            )?,
        };
        if !(sweep.theta_step_deg > 0.0) {
            return Err(Error::validation("sweep.theta_step_deg", "must be positive"));
        }
        if sweep.theta_start_deg > sweep.theta_end_deg {
            return Err(Error::validation("sweep.theta_end_deg", "must not be less than theta_start_deg"));
        }
        if !(sweep.radius > 0.0) {
            return Err(Error::validation("sweep.radius_m", "must be positive"));
        }

        let uncertainty = match &raw.uncertainty {
            Some(v) => parse_uncertainty("uncertainty", v)?,
            None => UncertaintyModel::medium(),
        };
        let lv = raw.levels.unwrap_or_default();
        let level = |field: &str, v: &Option<Value>, fallback: UncertaintyModel| match v {
            Some(v) => parse_uncertainty(field, v),
            None => Ok(fallback),
        };
        let levels = [
            level("levels.low", &lv.low, UncertaintyModel::low())?,
            level("levels.medium", &lv.medium, UncertaintyModel::medium())?,
            level("levels.high", &lv.high, UncertaintyModel::high())?,
        ];

        let m = raw.montecarlo.unwrap_or_default();
        let dm = McConfig::default();
        let montecarlo = McConfig {
            runs: m.runs.unwrap_or(dm.runs),
            seed: m.seed.unwrap_or(dm.seed),
            parallel: m.parallel.unwrap_or(dm.parallel),
        };
        if montecarlo.runs == 0 {
            return Err(Error::validation("montecarlo.runs", "must be at least 1"));
        }

        Ok(Scenario {
            radar: RadarState::new(Vec3::from(position), radar_constant),
            p_fa,
            rcs,
            sweep,
            uncertainty,
            levels,
            montecarlo,
            output: raw.output,
        })
    }

    pub fn experiment(&self) -> Experiment<'_> {
        Experiment {
            sweep: &self.sweep,
            radar: &self.radar,
            model: &self.rcs,
            p_fa: self.p_fa,
        }
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = fs::read_to_string(path)?;
    Scenario::from_json_str(&text)
}

/// Fixed 17-significant-digit rendering used in every CSV cell.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out)
}

/// Nominal detection curve: `theta_deg, pd_nominal, snr, sigma_r, lambda, phi`
/// (aspect angles in radians).
pub fn cmd_nominal<W: Write>(scenario: &Scenario, out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["theta_deg", "pd_nominal", "snr", "sigma_r", "lambda", "phi"])?;
    for n in montecarlo::nominal_states(&scenario.sweep, &scenario.radar) {
        let pt = detection::evaluate_detection(&n.aircraft, &n.radar, &scenario.rcs, scenario.p_fa)?;
        w.write_record([
            fmt_f64(n.theta_deg),
            fmt_f64(pt.pd),
            fmt_f64(pt.snr),
            fmt_f64(pt.sigma),
            fmt_f64(pt.angles.azimuth),
            fmt_f64(pt.angles.elevation),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSummary {
    pub theta_deg: f64,
    pub pd_nominal: f64,
    pub sigma_pd: f64,
    pub three_sigma_pd: f64,
    pub sample_mean: f64,
    pub sample_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub runs: usize,
    pub seed: u64,
    pub angles: usize,
    /// Fraction of samples inside the ±3σ_pd band.
    pub coverage: f64,
    pub max_three_sigma_pd: f64,
    pub per_angle: Vec<AngleSummary>,
}

impl McSummary {
    pub fn from_ensemble(ens: &McEnsemble, seed: u64) -> Self {
        let per_angle: Vec<AngleSummary> = (0..ens.theta_deg.len())
            .map(|k| AngleSummary {
                theta_deg: ens.theta_deg[k],
                pd_nominal: ens.pd_nominal[k],
                sigma_pd: ens.sigma_pd[k],
                three_sigma_pd: 3.0 * ens.sigma_pd[k],
                sample_mean: ens.sample_mean[k],
                sample_std: ens.sample_std[k],
            })
            .collect();
        McSummary {
            runs: ens.runs(),
            seed,
            angles: per_angle.len(),
            coverage: ens.coverage,
            max_three_sigma_pd: per_angle.iter().map(|a| a.three_sigma_pd).fold(0.0, f64::max),
            per_angle,
        }
    }
}

/// Monte Carlo ensemble in long form (`theta_deg, run, pd_sample, pd_error`,
/// run-major) plus a JSON summary.
pub fn cmd_montecarlo<W: Write, S: Write>(scenario: &Scenario, csv_out: W, summary_out: S) -> Result<McSummary> {
    let ens = montecarlo::run_monte_carlo(&scenario.experiment(), &scenario.uncertainty, &scenario.montecarlo)?;
    let mut w = csv_writer(csv_out);
    w.write_record(["theta_deg", "run", "pd_sample", "pd_error"])?;
    for (run, curve) in ens.samples.iter().enumerate() {
        for (k, &pd) in curve.iter().enumerate() {
            w.write_record([
                fmt_f64(ens.theta_deg[k]),
                run.to_string(),
                fmt_f64(pd),
                fmt_f64(ens.error(run, k)),
            ])?;
        }
    }
    w.flush()?;

    let summary = McSummary::from_ensemble(&ens, scenario.montecarlo.seed);
    let mut summary_out = summary_out;
    serde_json::to_writer_pretty(&mut summary_out, &summary)?;
    summary_out.write_all(b"\n")?;
    Ok(summary)
}

/// Linearized `3σ_pd` for the Low, Medium and High levels.
pub fn cmd_sensitivity<W: Write>(scenario: &Scenario, out: W) -> Result<()> {
    let curves = montecarlo::sensitivity_sweep(&scenario.experiment(), &scenario.levels)?;
    let mut w = csv_writer(out);
    w.write_record(["theta_deg", "three_sigma_low", "three_sigma_medium", "three_sigma_high"])?;
    for (k, theta) in scenario.sweep.angles_deg().into_iter().enumerate() {
        w.write_record([
            fmt_f64(theta),
            fmt_f64(curves[0][k]),
            fmt_f64(curves[1][k]),
            fmt_f64(curves[2][k]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-source `3σ` error budget for the scenario uncertainty.
pub fn cmd_budget<W: Write>(scenario: &Scenario, out: W) -> Result<()> {
    let rows = montecarlo::budget_sweep(&scenario.experiment(), &scenario.uncertainty)?;
    let mut w = csv_writer(out);
    w.write_record([
        "theta_deg",
        "aircraft_position",
        "aircraft_attitude",
        "radar_position",
        "radar_constant",
        "total",
    ])?;
    for (theta, b) in rows {
        w.write_record([
            fmt_f64(theta),
            fmt_f64(b.aircraft_position),
            fmt_f64(b.aircraft_attitude),
            fmt_f64(b.radar_position),
            fmt_f64(b.radar_constant),
            fmt_f64(b.total),
        ])?;
    }
    w.flush()?;
    Ok(())
}
