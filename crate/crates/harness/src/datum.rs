//! Analytic initial data on the unit periodic domain.

use std::f64::consts::TAU;

use serde::Deserialize;

use crate::error::{HarnessError, Result};

/// Initial datum, selected by `kind` in a preset.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Datum {
    /// `offset + amplitude sin(2 pi x)` in every component slot of a scalar law.
    Sine {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Shallow water at rest: `h = depth + amplitude sin(2 pi x)`, `hu = 0`.
    SurfaceWave {
        #[serde(default = "half")]
        depth: f64,
        #[serde(default = "fifth")]
        amplitude: f64,
    },
    /// `exp(-width |x - (1/2, 1/2)|^2)` on the unit square.
    Gaussian {
        #[serde(default = "hundred")]
        width: f64,
    },
    /// Shallow water at rest with `h = left` on `x < 1/2` and `h = right` elsewhere.
    DamBreak { left: f64, right: f64 },
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn fifth() -> f64 {
    0.2
}
fn hundred() -> f64 {
    100.0
}

impl Datum {
    /// Number of conserved components the datum fills.
    pub fn components(&self) -> usize {
        match self {
            Datum::Sine { .. } | Datum::Gaussian { .. } => 1,
            Datum::SurfaceWave { .. } | Datum::DamBreak { .. } => 2,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Datum::Gaussian { .. } => 2,
            _ => 1,
        }
    }

    /// Conserved values at `x`.
    pub fn eval(&self, x: [f64; 2], out: &mut [f64]) {
        match *self {
            Datum::Sine { amplitude, offset } => out[0] = offset + amplitude * (TAU * x[0]).sin(),
            Datum::SurfaceWave { depth, amplitude } => {
                out[0] = depth + amplitude * (TAU * x[0]).sin();
                out[1] = 0.0;
            }
            Datum::Gaussian { width } => {
                let r2 = (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2);
                out[0] = (-width * r2).exp();
            }
            Datum::DamBreak { left, right } => {
                out[0] = if x[0] < 0.5 { left } else { right };
                out[1] = 0.0;
            }
        }
    }

    /// The scalar profile `u0` with its derivative, for data that have one.
    pub fn profile(&self) -> Result<SineProfile> {
        match *self {
            Datum::Sine { amplitude, offset } => Ok(SineProfile { amplitude, offset }),
            _ => Err(HarnessError::Exact(format!("{self:?} has no scalar analytic profile"))),
        }
    }
}

/// A smooth periodic scalar profile.
pub trait Profile {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
    /// First time a characteristic crossing can occur under `u_t + u u_x = 0`.
    fn shock_time(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineProfile {
    pub amplitude: f64,
    pub offset: f64,
}

impl Profile for SineProfile {
    fn value(&self, x: f64) -> f64 {
        self.offset + self.amplitude * (TAU * x).sin()
    }

    fn derivative(&self, x: f64) -> f64 {
        TAU * self.amplitude * (TAU * x).cos()
    }

    fn shock_time(&self) -> f64 {
        if self.amplitude == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (TAU * self.amplitude.abs())
        }
    }
}

/// Constant profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantProfile(pub f64);

impl Profile for ConstantProfile {
    fn value(&self, _: f64) -> f64 {
        self.0
    }

    fn derivative(&self, _: f64) -> f64 {
        0.0
    }

    fn shock_time(&self) -> f64 {
        f64::INFINITY
    }
}
