//! Fixed against entropy-adaptive reflections on the same datum.

use lbm4::entropy::AdaptiveStats;
use lbm4::operators::{equilibrium_field, StepDiagnostics, Stepper};
use lbm4::{Lattice, RelaxationMode, SchemeSpec};

use crate::config::{parse_variant, EntropyDemoPreset};
use crate::error::{HarnessError, Result};
use crate::experiment::{initial_field, SeriesPoint, SIGMA_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branches {
    Fixed,
    Adaptive,
    Both,
}

#[derive(Debug, Clone)]
pub struct DemoRun {
    pub label: &'static str,
    pub relaxation: RelaxationMode,
    pub planned_steps: usize,
    pub dt: f64,
    /// `(step, t)` at which the NaN guard fired.
    pub aborted: Option<(usize, f64)>,
    pub series: Vec<SeriesPoint>,
    /// `max |Sigma(t) - Sigma(0)|` over the recorded times, without the floor.
    pub max_entropy_drift: f64,
    pub stats: AdaptiveStats,
}

impl DemoRun {
    pub fn t_reached(&self) -> f64 {
        self.series.last().map_or(0.0, |p| p.t)
    }
}

#[derive(Debug, Clone)]
pub struct EntropyDemoReport {
    pub name: String,
    pub n: usize,
    pub t_final: f64,
    pub runs: Vec<DemoRun>,
}

impl EntropyDemoReport {
    pub fn run(&self, label: &str) -> Option<&DemoRun> {
        self.runs.iter().find(|r| r.label == label)
    }

    /// Fails when an adaptive branch fell back on too many sites.
    pub fn check_solver(&self, threshold: f64) -> Result<()> {
        for r in &self.runs {
            let rate = r.stats.fallback_rate();
            if matches!(r.relaxation, RelaxationMode::Adaptive(_)) && rate > threshold {
                return Err(HarnessError::SolverFailureRate { rate, threshold });
            }
        }
        Ok(())
    }
}

/// Runs the requested branches for `round(T / dt)` macro-steps each,
/// recording `|u|` (first component) and the microscopic entropy drift.
pub fn run_entropy_demo(preset: &EntropyDemoPreset, branches: Branches) -> Result<EntropyDemoReport> {
    let model = preset.model.build()?;
    if model.entropy().is_none() {
        return Err(HarnessError::Config(format!("model {} has no kinetic entropy", model.name())));
    }
    if preset.datum.dim() != model.dim() || preset.datum.components() != model.components() {
        return Err(HarnessError::Config(format!("datum {:?} does not fit {}", preset.datum, model.name())));
    }
    if !(preset.t_final > 0.0) || preset.record_every == 0 {
        return Err(HarnessError::Config("entropy demo needs T > 0 and record_every >= 1".into()));
    }
    let lattice = Lattice::unit(model.dim(), preset.n)?;
    let u0 = initial_field(&preset.datum, lattice, model.components());
    let f0 = equilibrium_field(&u0, model.as_ref())?;
    let variant = parse_variant(&preset.scheme)?;
    let mut modes = Vec::new();
    if branches != Branches::Adaptive {
        modes.push(("fixed", RelaxationMode::Fixed(preset.fixed_omega)));
    }
    if branches != Branches::Fixed {
        let cfg = preset.adaptive.solver();
        cfg.validate()?;
        modes.push(("adaptive", RelaxationMode::Adaptive(cfg)));
    }
    let mut runs = Vec::new();
    for (label, relaxation) in modes {
        let spec = SchemeSpec::new(variant, preset.model.speed()).with_relaxation(relaxation);
        let dt = spec.dt(lattice.dx());
        let planned_steps = (preset.t_final / dt).round() as usize;
        let mut f = f0.clone();
        let mut stepper = Stepper::new(model.as_ref(), spec)?;
        let mut series = Vec::new();
        let mut sigma0 = None;
        let mut max_entropy_drift: f64 = 0.0;
        let result = stepper.advance(&mut f, planned_steps, preset.record_every, &mut |d: &StepDiagnostics<f64>| {
            let sigma = d.micro_entropy.unwrap_or(f64::NAN);
            let drift = (sigma - *sigma0.get_or_insert(sigma)).abs();
            max_entropy_drift = max_entropy_drift.max(drift);
            series.push(SeriesPoint { t: d.time, norm_u: d.norms[0], delta_sigma: drift + SIGMA_FLOOR });
        });
        let aborted = match result {
            Ok(()) => None,
            Err(lbm4::Error::Instability { step }) => Some((step, step as f64 * dt)),
            Err(e) => return Err(e.into()),
        };
        log::info!(
            "{} {label}: {} steps, aborted {:?}, max drift {max_entropy_drift:e}",
            preset.name,
            planned_steps,
            aborted
        );
        runs.push(DemoRun {
            label,
            relaxation,
            planned_steps,
            dt,
            aborted,
            series,
            max_entropy_drift,
            stats: *stepper.stats(),
        });
    }
    Ok(EntropyDemoReport { name: preset.name.clone(), n: preset.n, t_final: preset.t_final, runs })
}
