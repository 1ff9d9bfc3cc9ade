//! Two-dimensional Riemann problems for the compressible Euler equations.

use std::path::Path;

use lbm4::operators::{equilibrium_field, Stepper, Variant};
use lbm4::{ConservedField, Euler2D, Lattice, RelaxationMode, SchemeSpec};
use serde::Deserialize;

use crate::error::{HarnessError, Result};
use crate::experiment::relative_mass_drift;

/// Primitive state of one quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimitiveState {
    pub rho: f64,
    pub vx: f64,
    pub vy: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadrants {
    pub ne: PrimitiveState,
    pub nw: PrimitiveState,
    pub sw: PrimitiveState,
    pub se: PrimitiveState,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiemannConfig {
    pub name: String,
    pub gamma: f64,
    pub t_final: f64,
    /// Quadrant boundaries `(x, y)`.
    pub split: [f64; 2],
    pub quadrants: Quadrants,
}

pub const CONFIG4: &str = include_str!("../data/lax_liu_config4.toml");

impl RiemannConfig {
    pub fn config4() -> Result<Self> {
        Self::parse(CONFIG4)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        let q = &cfg.quadrants;
        for s in [q.ne, q.nw, q.sw, q.se] {
            if !(s.rho > 0.0 && s.p > 0.0) {
                return Err(HarnessError::Config(format!("{}: non-physical state {s:?}", cfg.name)));
            }
        }
        if !(cfg.gamma > 1.0 && cfg.t_final > 0.0) {
            return Err(HarnessError::Config(format!("{}: needs gamma > 1 and T > 0", cfg.name)));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn state_at(&self, x: [f64; 2]) -> PrimitiveState {
        let q = &self.quadrants;
        match (x[0] >= self.split[0], x[1] >= self.split[1]) {
            (true, true) => q.ne,
            (false, true) => q.nw,
            (false, false) => q.sw,
            (true, false) => q.se,
        }
    }
}

/// `A`: baseline one-cell scheme with `omega = 1.93`; `B`: baseline with a
/// final projection; `C`: variant III with `omega = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EulerScheme {
    A,
    B,
    C,
}

impl EulerScheme {
    pub fn spec(self, v: f64) -> SchemeSpec {
        match self {
            EulerScheme::A => SchemeSpec::new(Variant::BaselineA, v).with_relaxation(RelaxationMode::Fixed(1.93)),
            EulerScheme::B => SchemeSpec::new(Variant::BaselineB, v),
            EulerScheme::C => SchemeSpec::new(Variant::III, v),
        }
    }
}

impl std::str::FromStr for EulerScheme {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(EulerScheme::A),
            "B" => Ok(EulerScheme::B),
            "C" => Ok(EulerScheme::C),
            other => Err(HarnessError::Config(format!("unknown Euler scheme '{other}' (A, B or C)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EulerReport {
    pub config: String,
    pub n: usize,
    pub spec: SchemeSpec,
    pub steps: usize,
    pub t_realized: f64,
    /// One-based macro-step at which the NaN guard fired.
    pub instability: Option<usize>,
    /// Relative drift of `rho, rho u, rho v, E`; NaN after an instability.
    pub mass_drift: Vec<f64>,
    pub min_density: f64,
    /// `rho, rho u, rho v, E` at the realized time; absent after an instability.
    pub field: Option<ConservedField>,
}

impl EulerReport {
    pub fn finite(&self) -> bool {
        self.instability.is_none()
    }
}

pub fn initial_state(cfg: &RiemannConfig, model: &Euler2D, n: usize) -> Result<ConservedField> {
    let lattice = Lattice::unit(2, n)?;
    Ok(ConservedField::from_fn(lattice, 4, |x, out| {
        let s = cfg.state_at(x);
        out.copy_from_slice(&model.conserved(s.rho, s.vx, s.vy, s.p));
    }))
}

/// Runs `round(T / dt)` macro-steps of `scheme` from equilibrium on an `n x n` grid.
pub fn run_euler_riemann(cfg: &RiemannConfig, n: usize, scheme: EulerScheme, v: f64) -> Result<EulerReport> {
    let model = Euler2D::new(cfg.gamma, v);
    let spec = scheme.spec(v);
    let u0 = initial_state(cfg, &model, n)?;
    let mut f = equilibrium_field(&u0, &model)?;
    let dt = spec.dt(u0.lattice().dx());
    let steps = (cfg.t_final / dt).round() as usize;
    let mut stepper = Stepper::new(&model, spec)?;
    let instability = match stepper.advance(&mut f, steps, 0, &mut |_| {}) {
        Ok(()) => None,
        Err(lbm4::Error::Instability { step }) => Some(step),
        Err(e) => return Err(e.into()),
    };
    let field = instability.is_none().then(|| f.moments());
    let (mass_drift, min_density) = match &field {
        Some(u) => (relative_mass_drift(&u0, u), u.component(0).iter().copied().fold(f64::INFINITY, f64::min)),
        None => (vec![f64::NAN; 4], f64::NAN),
    };
    Ok(EulerReport {
        config: cfg.name.clone(),
        n,
        spec,
        steps,
        t_realized: steps as f64 * dt,
        instability,
        mass_drift,
        min_density,
        field,
    })
}
