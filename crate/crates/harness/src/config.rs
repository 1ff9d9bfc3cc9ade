//! Experiment configuration: models, initialization, relaxation and presets.

use std::path::Path;

use lbm4::entropy::{FallbackPolicy, OmegaMethod, OmegaSolverConfig};
use lbm4::models::KineticModel;
use lbm4::operators::Variant;
use lbm4::{Burgers1D, Burgers2D, ConservedField, LinearAdvection1D, RelaxationMode, ShallowWater1D};
use serde::Deserialize;

use crate::datum::{Datum, Profile};
use crate::error::{HarnessError, Result};
use crate::exact::exact_burgers;

/// Conservation law and kinetic speed `V`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum ModelSpec {
    #[serde(rename = "burgers1d")]
    Burgers1d { v: f64 },
    /// Fluxes `u^2/2` and `3u^2/10`.
    #[serde(rename = "burgers2d")]
    Burgers2d { v: f64 },
    /// Advection speed `a`, or `a_over_v * v` when `a` is absent.
    #[serde(rename = "linear1d")]
    Linear1d { v: f64, a: Option<f64>, a_over_v: Option<f64> },
    #[serde(rename = "shallow-water1d")]
    ShallowWater1d {
        v: f64,
        #[serde(default = "unit_gravity")]
        g: f64,
    },
}

fn unit_gravity() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn speed(&self) -> f64 {
        match *self {
            ModelSpec::Burgers1d { v }
            | ModelSpec::Burgers2d { v }
            | ModelSpec::Linear1d { v, .. }
            | ModelSpec::ShallowWater1d { v, .. } => v,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::Burgers2d { .. } => 2,
            _ => 1,
        }
    }

    pub fn components(&self) -> usize {
        match self {
            ModelSpec::ShallowWater1d { .. } => 2,
            _ => 1,
        }
    }

    fn advection_speed(&self) -> Result<f64> {
        match *self {
            ModelSpec::Linear1d { a: Some(a), a_over_v: None, .. } => Ok(a),
            ModelSpec::Linear1d { a: None, a_over_v: Some(r), v } => Ok(r * v),
            ModelSpec::Linear1d { .. } => Err(HarnessError::Config("linear1d needs exactly one of a, a_over_v".into())),
            _ => Err(HarnessError::Config("not a linear model".into())),
        }
    }

    pub fn build(&self) -> Result<Box<dyn KineticModel<f64>>> {
        let v = self.speed();
        if !(v > 0.0 && v.is_finite()) {
            return Err(HarnessError::Config(format!("kinetic speed V = {v} must be positive")));
        }
        Ok(match *self {
            ModelSpec::Burgers1d { .. } => Box::new(Burgers1D::new(v)),
            ModelSpec::Burgers2d { .. } => Box::new(Burgers2D::new(v)),
            ModelSpec::Linear1d { .. } => Box::new(LinearAdvection1D::new(self.advection_speed()?, v)),
            ModelSpec::ShallowWater1d { g, .. } => {
                if !(g > 0.0) {
                    return Err(HarnessError::Config(format!("gravity g = {g} must be positive")));
                }
                Box::new(ShallowWater1D::new(g, v))
            }
        })
    }

    /// Names of the tracked observables.
    pub fn observable_names(&self) -> Vec<String> {
        match self {
            ModelSpec::ShallowWater1d { .. } => vec!["h".into(), "u".into()],
            _ => vec!["u".into()],
        }
    }

    /// Tracked observables of a conserved field; shallow water reports the
    /// velocity `hu / h` rather than the momentum.
    pub fn observables(&self, u: &ConservedField) -> ConservedField {
        match self {
            ModelSpec::ShallowWater1d { .. } => u.map_sites(2, |s, out| {
                out[0] = s[0];
                out[1] = s[1] / s[0];
            }),
            _ => u.clone(),
        }
    }

    /// Observables of the exact solution at `(x, t)`, where one is known.
    pub fn exact(&self, datum: &Datum, t: f64, x: [f64; 2]) -> Result<Vec<f64>> {
        match self {
            ModelSpec::Burgers1d { .. } => Ok(vec![exact_burgers(&datum.profile()?, t, x[0])?]),
            ModelSpec::Linear1d { .. } => {
                let a = self.advection_speed()?;
                Ok(vec![datum.profile()?.value(x[0] - a * t)])
            }
            _ => Err(HarnessError::Exact(format!("no exact solution for {self:?}"))),
        }
    }
}

/// Distribution at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Initialization {
    #[default]
    Equilibrium,
    /// D1Q2 only: `(f_+, f_-) = (theta, 1 - theta) u`.
    Weighted {
        #[serde(default = "quarter")]
        theta: f64,
    },
}

fn quarter() -> f64 {
    0.25
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// L2 distance to the exact solution at the realized final time.
    #[default]
    Exact,
    /// L2 distance to the run on the grid refined by two.
    SelfConvergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodCfg {
    #[default]
    Bisection,
    Secant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FallbackCfg {
    #[default]
    Omega2,
    Fail,
}

/// Solver settings of the entropy-adaptive reflection; absent keys keep the
/// solver defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveCfg {
    #[serde(default)]
    pub method: MethodCfg,
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub fallback: FallbackCfg,
}

impl AdaptiveCfg {
    pub fn solver(&self) -> OmegaSolverConfig {
        let mut cfg = OmegaSolverConfig {
            method: match self.method {
                MethodCfg::Bisection => OmegaMethod::Bisection,
                MethodCfg::Secant => OmegaMethod::Secant,
            },
            fallback: match self.fallback {
                FallbackCfg::Omega2 => FallbackPolicy::Omega2,
                FallbackCfg::Fail => FallbackPolicy::Fail,
            },
            ..OmegaSolverConfig::default()
        };
        if let Some(t) = self.tolerance {
            cfg.tolerance = t;
        }
        if let Some(n) = self.max_iterations {
            cfg.max_iterations = n;
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RelaxationCfg {
    Fixed {
        #[serde(default = "two")]
        omega: f64,
    },
    Adaptive {
        #[serde(default)]
        method: MethodCfg,
        tolerance: Option<f64>,
        max_iterations: Option<usize>,
        #[serde(default)]
        fallback: FallbackCfg,
    },
}

fn two() -> f64 {
    2.0
}

impl Default for RelaxationCfg {
    fn default() -> Self {
        RelaxationCfg::Fixed { omega: 2.0 }
    }
}

impl RelaxationCfg {
    pub fn mode(&self) -> RelaxationMode {
        match *self {
            RelaxationCfg::Fixed { omega } => RelaxationMode::Fixed(omega),
            RelaxationCfg::Adaptive { method, tolerance, max_iterations, fallback } => {
                RelaxationMode::Adaptive(AdaptiveCfg { method, tolerance, max_iterations, fallback }.solver())
            }
        }
    }
}

/// Grids `N_0 = start`, `N_{k+1} = floor(ratio N_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ladder {
    pub start: usize,
    pub ratio: f64,
    pub levels: usize,
}

impl Ladder {
    pub fn resolutions(&self) -> Result<Vec<usize>> {
        if self.start < 2 || !(self.ratio > 1.0) || self.levels == 0 {
            return Err(HarnessError::Config(format!("degenerate ladder {self:?}")));
        }
        let mut out = vec![self.start];
        for _ in 1..self.levels {
            let next = (*out.last().unwrap() as f64 * self.ratio).floor() as usize;
            if next <= *out.last().unwrap() {
                return Err(HarnessError::Config(format!("ladder {self:?} does not refine")));
            }
            out.push(next);
        }
        Ok(out)
    }
}

fn default_threshold() -> f64 {
    1e-3
}

fn one_kappa() -> i64 {
    1
}

/// A convergence study: one table per scheme.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergencePreset {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub t_final: f64,
    pub schemes: Vec<String>,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default = "one_kappa")]
    pub kappa: i64,
    #[serde(default)]
    pub diagnostics_every: usize,
    #[serde(default = "default_threshold")]
    pub solver_failure_threshold: f64,
    pub model: ModelSpec,
    pub datum: Datum,
    #[serde(default)]
    pub init: Initialization,
    #[serde(default)]
    pub relaxation: RelaxationCfg,
    pub ladder: Ladder,
}

/// Paired fixed / entropy-adaptive runs of one datum.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyDemoPreset {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub t_final: f64,
    pub n: usize,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "two")]
    pub fixed_omega: f64,
    #[serde(default = "one_step")]
    pub record_every: usize,
    #[serde(default = "default_threshold")]
    pub solver_failure_threshold: f64,
    pub model: ModelSpec,
    pub datum: Datum,
    #[serde(default)]
    pub adaptive: AdaptiveCfg,
}

fn default_scheme() -> String {
    "I".into()
}

fn one_step() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Preset {
    Convergence(ConvergencePreset),
    EntropyDemo(EntropyDemoPreset),
}

impl Preset {
    pub fn name(&self) -> &str {
        match self {
            Preset::Convergence(p) => &p.name,
            Preset::EntropyDemo(p) => &p.name,
        }
    }
}

/// Presets shipped with the harness, by name.
pub const PRESETS: &[(&str, &str)] = &[
    ("burgers1d-table1", include_str!("../presets/burgers1d-table1.toml")),
    ("burgers1d-table4-adaptive", include_str!("../presets/burgers1d-table4-adaptive.toml")),
    ("burgers1d-table5-equilibrium", include_str!("../presets/burgers1d-table5-equilibrium.toml")),
    ("burgers1d-table5-weighted", include_str!("../presets/burgers1d-table5-weighted.toml")),
    ("shallow-water-table2", include_str!("../presets/shallow-water-table2.toml")),
    ("burgers2d-table3", include_str!("../presets/burgers2d-table3.toml")),
    ("linear-table6", include_str!("../presets/linear-table6.toml")),
    ("entropy-burgers", include_str!("../presets/entropy-burgers.toml")),
    ("entropy-shallow-water", include_str!("../presets/entropy-shallow-water.toml")),
];

pub fn parse_preset(text: &str) -> Result<Preset> {
    Ok(toml::from_str(text)?)
}

/// A shipped preset by name, or a preset file by path.
pub fn load_preset(name_or_path: &str) -> Result<Preset> {
    if let Some((_, text)) = PRESETS.iter().find(|(n, _)| *n == name_or_path) {
        return parse_preset(text);
    }
    let path = Path::new(name_or_path);
    if path.is_file() {
        return parse_preset(&std::fs::read_to_string(path)?);
    }
    let known: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
    Err(HarnessError::Config(format!("unknown preset '{name_or_path}'; known: {}", known.join(", "))))
}

pub fn parse_variant(s: &str) -> Result<Variant> {
    s.parse::<Variant>().map_err(HarnessError::from)
}
