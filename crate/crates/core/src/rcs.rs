//! Radar cross section models, as functions of the aspect angles the radar
//! sees on the aircraft.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RcsAngles;

/// Angle-only radar cross section with an analytic gradient.
pub trait RcsModel: Send + Sync {
    /// Cross section in m².
    fn sigma(&self, angles: &RcsAngles) -> f64;

    /// `(dσ/dazimuth, dσ/delevation)` in m²/rad.
    fn grad(&self, angles: &RcsAngles) -> (f64, f64);
}

/// Triaxial ellipsoid with half-axes `a` (forward), `b` (down) and `c`
/// (right wing), in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipsoidRcs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl EllipsoidRcs {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let model = Self { a, b, c };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!(
                    "ellipsoid axis {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    fn numerator(&self) -> f64 {
        let abc = self.a * self.b * self.c;
        PI * abc * abc
    }

    fn denominator(&self, angles: &RcsAngles) -> f64 {
        let (sl, cl) = angles.azimuth.sin_cos();
        let (sp, cp) = angles.elevation.sin_cos();
        let x = self.a * sl * cp;
        let y = self.b * sl * sp;
        let z = self.c * cl;
        x * x + y * y + z * z
    }
}

impl RcsModel for EllipsoidRcs {
    fn sigma(&self, angles: &RcsAngles) -> f64 {
        let d = self.denominator(angles);
        self.numerator() / (d * d)
    }

    fn grad(&self, angles: &RcsAngles) -> (f64, f64) {
        let d = self.denominator(angles);
        let scale = -2.0 * self.numerator() / (d * d * d);
        let (a2, b2, c2) = (self.a * self.a, self.b * self.b, self.c * self.c);
        let (sp, cp) = angles.elevation.sin_cos();
        let sl = angles.azimuth.sin();

        // dD/dλ = sin 2λ (a² cos²φ + b² sin²φ - c²)
        let dd_daz = (2.0 * angles.azimuth).sin() * (a2 * cp * cp + b2 * sp * sp - c2);
        // dD/dφ = sin²λ sin 2φ (b² - a²)
        let dd_del = sl * sl * (2.0 * angles.elevation).sin() * (b2 - a2);
        (scale * dd_daz, scale * dd_del)
    }
}

/// Aspect-independent cross section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantRcs {
    pub sigma0: f64,
}

impl ConstantRcs {
    pub fn new(sigma0: f64) -> Result<Self> {
        let model = Self { sigma0 };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma0.is_finite() && self.sigma0 > 0.0) {
            return Err(Error::domain(format!(
                "constant RCS must be positive, got {}",
                self.sigma0
            )));
        }
        Ok(())
    }
}

impl RcsModel for ConstantRcs {
    fn sigma(&self, _angles: &RcsAngles) -> f64 {
        self.sigma0
    }

    fn grad(&self, _angles: &RcsAngles) -> (f64, f64) {
        (0.0, 0.0)
    }
}

/// Model selection as it appears in scenario files, e.g.
/// `{"type": "ellipsoid", "a": 0.15, "b": 0.13, "c": 0.21}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Rcs {
    Ellipsoid(EllipsoidRcs),
    Constant(ConstantRcs),
}

impl Rcs {
    pub fn validate(&self) -> Result<()> {
        match self {
            Rcs::Ellipsoid(m) => m.validate(),
            Rcs::Constant(m) => m.validate(),
        }
    }
}

impl RcsModel for Rcs {
    fn sigma(&self, angles: &RcsAngles) -> f64 {
        match self {
            Rcs::Ellipsoid(m) => m.sigma(angles),
            Rcs::Constant(m) => m.sigma(angles),
        }
    }

    fn grad(&self, angles: &RcsAngles) -> (f64, f64) {
        match self {
            Rcs::Ellipsoid(m) => m.grad(angles),
            Rcs::Constant(m) => m.grad(angles),
        }
    }
}
