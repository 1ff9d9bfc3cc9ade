//! Convergence studies: whole-step runs over a resolution ladder and their
//! order tables.

use std::collections::BTreeMap;

use lbm4::entropy::AdaptiveStats;
use lbm4::lattice::{l2_error, self_convergence_error};
use lbm4::models::KineticModel;
use lbm4::operators::{equilibrium_field, StepDiagnostics, Stepper, Variant};
use lbm4::{ConservedField, DistributionField, Lattice, RelaxationMode, SchemeSpec};
use log::{info, warn};
use rayon::prelude::*;

use crate::config::{ConvergencePreset, Initialization, Metric, ModelSpec};
use crate::datum::Datum;
use crate::error::{HarnessError, Result};

/// Floor added to `|Sigma(t) - Sigma(0)|` in recorded series, so that the
/// column stays plottable on a log axis.
pub const SIGMA_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub model: ModelSpec,
    pub datum: Datum,
    pub init: Initialization,
    pub variant: Variant,
    pub relaxation: RelaxationMode,
    pub kappa: i64,
    pub t_final: f64,
    /// Grids per axis, coarse to fine; one table row each.
    pub resolutions: Vec<usize>,
    pub metric: Metric,
    /// Record `t, |u|, Sigma(t) - Sigma(0)` every this many macro-steps; 0 disables.
    pub diagnostics_every: usize,
    /// Largest tolerated share of adaptive sites that fell back to `omega = 2`.
    pub solver_failure_threshold: f64,
}

impl ExperimentSpec {
    /// One experiment per scheme of a preset; `levels` overrides the ladder length.
    pub fn from_preset(preset: &ConvergencePreset, levels: Option<usize>) -> Result<Vec<Self>> {
        let mut ladder = preset.ladder;
        if let Some(k) = levels {
            ladder.levels = k;
        }
        let resolutions = ladder.resolutions()?;
        preset
            .schemes
            .iter()
            .map(|s| {
                let spec = Self {
                    name: preset.name.clone(),
                    model: preset.model,
                    datum: preset.datum.clone(),
                    init: preset.init,
                    variant: crate::config::parse_variant(s)?,
                    relaxation: preset.relaxation.mode(),
                    kappa: preset.kappa,
                    t_final: preset.t_final,
                    resolutions: resolutions.clone(),
                    metric: preset.metric,
                    diagnostics_every: preset.diagnostics_every,
                    solver_failure_threshold: preset.solver_failure_threshold,
                };
                spec.validate()?;
                Ok(spec)
            })
            .collect()
    }

    pub fn scheme(&self) -> SchemeSpec {
        SchemeSpec::new(self.variant, self.model.speed()).with_relaxation(self.relaxation).with_kappa(self.kappa)
    }

    pub fn lattice(&self, n: usize) -> Result<Lattice> {
        Ok(Lattice::unit(self.model.dim(), n)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolutions.is_empty() {
            return Err(HarnessError::Config("no resolutions".into()));
        }
        if self.resolutions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HarnessError::Config(format!(
                "resolutions {:?} must refine strictly (decreasing dx)",
                self.resolutions
            )));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(HarnessError::Config(format!("final time {} must be positive", self.t_final)));
        }
        if self.datum.dim() != self.model.dim() || self.datum.components() != self.model.components() {
            return Err(HarnessError::Config(format!("datum {:?} does not fit model {:?}", self.datum, self.model)));
        }
        let model = self.model.build()?;
        if let Initialization::Weighted { theta } = self.init {
            if model.velocities() != 2 || !theta.is_finite() {
                return Err(HarnessError::Config("weighted initialization needs a D1Q2 model and finite theta".into()));
            }
        }
        self.scheme().validate(model.as_ref())?;
        let u0 = initial_field(&self.datum, self.lattice(self.resolutions[0])?, self.model.components());
        let v = self.model.speed();
        let mut site = vec![0.0; u0.components()];
        let mut fastest: f64 = 0.0;
        for s in 0..u0.lattice().n_sites() {
            u0.site(s, &mut site);
            fastest = fastest.max(model.max_wave_speed(&site)?);
        }
        if fastest >= v {
            warn!("{}: V = {v} does not exceed the initial wave speed {fastest}", self.name);
        }
        Ok(())
    }
}

/// Point values of `datum` at the nodes of `lattice`.
pub fn initial_field(datum: &Datum, lattice: Lattice, components: usize) -> ConservedField {
    ConservedField::from_fn(lattice, components, |x, out| datum.eval(x, out))
}

/// Distribution at `t = 0` under `init`.
pub fn initialize(
    u0: &ConservedField,
    model: &dyn KineticModel<f64>,
    init: Initialization,
) -> Result<DistributionField> {
    match init {
        Initialization::Equilibrium => Ok(equilibrium_field(u0, model)?),
        Initialization::Weighted { theta } => {
            let m = u0.components();
            let mut f = DistributionField::zeros(*u0.lattice(), 2, m);
            let (mut u, mut fs) = (vec![0.0; m], vec![0.0; 2 * m]);
            for s in 0..u0.lattice().n_sites() {
                u0.site(s, &mut u);
                for c in 0..m {
                    fs[c] = theta * u[c];
                    fs[m + c] = (1.0 - theta) * u[c];
                }
                f.set_site(s, &fs);
            }
            Ok(f)
        }
    }
}

/// Whole macro-steps that fit in `t_final`: `floor(t_final / dt)`.
pub fn whole_steps(t_final: f64, dt: f64) -> usize {
    (t_final / dt).floor() as usize
}

/// One sample of a time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub t: f64,
    pub norm_u: f64,
    /// `|Sigma(t) - Sigma(0)| + SIGMA_FLOOR`; NaN when no entropy is defined.
    pub delta_sigma: f64,
}

/// Sink turning step diagnostics into a series.
pub(crate) fn series_sink(
    points: &mut Vec<SeriesPoint>,
    component: Option<usize>,
) -> impl FnMut(&StepDiagnostics<f64>) + '_ {
    let mut sigma0 = None;
    move |d| {
        let sigma = d.micro_entropy.unwrap_or(f64::NAN);
        let s0 = *sigma0.get_or_insert(sigma);
        let norm_u = component.map_or(d.norm_u, |c| d.norms[c]);
        points.push(SeriesPoint { t: d.time, norm_u, delta_sigma: (sigma - s0).abs() + SIGMA_FLOOR });
    }
}

/// Result of one resolution.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub n: usize,
    pub dx: f64,
    /// Macro-steps of the plan; for `fair-2nd` the count of whole 24-sub-step groups.
    pub steps: usize,
    /// Baseline sub-steps after the whole groups (`fair-2nd` only).
    pub extra_substeps: usize,
    pub t_realized: f64,
    /// Conserved field at the realized time; absent after an instability.
    pub field: Option<ConservedField>,
    /// One-based macro-step at which the NaN guard fired.
    pub instability: Option<usize>,
    /// Relative drift of `sum_sites u_c` per component.
    pub mass_drift: Vec<f64>,
    pub stats: AdaptiveStats,
    pub series: Vec<SeriesPoint>,
}

/// `|sum u_c(T) - sum u_c(0)| / sum |u_c(0)|` per component; a component
/// that starts identically zero is measured against the largest scale.
pub fn relative_mass_drift(before: &ConservedField, after: &ConservedField) -> Vec<f64> {
    let scales: Vec<f64> =
        (0..before.components()).map(|c| before.component(c).iter().map(|v| v.abs()).sum()).collect();
    let largest = scales.iter().copied().fold(f64::MIN_POSITIVE, f64::max);
    (0..before.components())
        .map(|c| {
            let scale = if scales[c] > 0.0 { scales[c] } else { largest };
            (after.total(c) - before.total(c)).abs() / scale
        })
        .collect()
}

/// Advances `spec` on an `n`-point grid to the last whole step before `t_final`.
///
/// The cost-matched second-order scheme runs `floor(t_final / (dt / 24))`
/// baseline sub-steps: whole groups of 24 followed by the remainder.
pub fn run_resolution(spec: &ExperimentSpec, n: usize) -> Result<RunOutcome> {
    let model = spec.model.build()?;
    let lattice = spec.lattice(n)?;
    let dx = lattice.dx();
    let u0 = initial_field(&spec.datum, lattice, spec.model.components());
    let mut f = initialize(&u0, model.as_ref(), spec.init)?;
    let scheme = spec.scheme();
    let (steps, extra, t_realized) = if spec.variant == Variant::Fair2nd {
        let sub = SchemeSpec { variant: Variant::BaselineA, ..scheme };
        let sub_dt = sub.dt(dx);
        let total = whole_steps(spec.t_final, sub_dt);
        let per_group = Variant::Fair2nd.travel_per_step() as usize;
        (total / per_group, total % per_group, total as f64 * sub_dt)
    } else {
        let dt = scheme.dt(dx);
        let steps = whole_steps(spec.t_final, dt);
        (steps, 0, steps as f64 * dt)
    };
    let component = (spec.model.components() > 1).then_some(0);
    let mut series = Vec::new();
    let mut stepper = Stepper::new(model.as_ref(), scheme)?;
    let outcome = {
        let mut sink = series_sink(&mut series, component);
        let mut noop = |_: &StepDiagnostics<f64>| {};
        let sink: &mut dyn FnMut(&StepDiagnostics<f64>) =
            if spec.diagnostics_every > 0 { &mut sink } else { &mut noop };
        stepper.advance(&mut f, steps, spec.diagnostics_every, sink)
    };
    let mut stats = *stepper.stats();
    let instability = match outcome {
        Ok(()) => None,
        Err(lbm4::Error::Instability { step }) => Some(step),
        Err(e) => return Err(e.into()),
    };
    if instability.is_none() && extra > 0 {
        let sub = SchemeSpec { variant: Variant::BaselineA, ..scheme };
        let mut tail = Stepper::new(model.as_ref(), sub)?;
        for _ in 0..extra {
            tail.macro_step(&mut f)?;
        }
        stats.merge(tail.stats());
    }
    let instability = instability.or_else(|| (!f.all_finite()).then_some(steps + 1));
    let field = instability.is_none().then(|| f.moments());
    let mass_drift = field.as_ref().map_or_else(|| vec![f64::NAN; u0.components()], |u| relative_mass_drift(&u0, u));
    if let Some(step) = instability {
        warn!("{} {} N = {n}: non-finite field after macro-step {step}", spec.name, spec.variant.name());
    }
    Ok(RunOutcome { n, dx, steps, extra_substeps: extra, t_realized, field, instability, mass_drift, stats, series })
}

/// One row of an order table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub dx: f64,
    pub n: usize,
    /// `None` when the run at this resolution was not finite.
    pub errors: Vec<Option<f64>>,
    /// `ln(e_{r-1}/e_r) / ln(dx_{r-1}/dx_r)`; `None` on the first row and
    /// next to zero or missing errors.
    pub orders: Vec<Option<f64>>,
}

/// Run metadata attached to a table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportMeta {
    pub experiment: String,
    pub scheme: Variant,
    pub model: ModelSpec,
    pub t_final: f64,
    pub v: f64,
    pub kappa: i64,
    pub metric: Metric,
    /// Realized final time per row.
    pub t_realized: Vec<f64>,
    /// `(N, step)` of every run stopped by the NaN guard.
    pub instabilities: Vec<(usize, usize)>,
    /// Largest relative mass drift over the finite runs, per component.
    pub max_mass_drift: Vec<f64>,
    pub stats: AdaptiveStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub components: Vec<String>,
    pub rows: Vec<ConvergenceRow>,
    pub meta: Option<ReportMeta>,
}

/// Order table from per-row errors (one entry per component; non-finite
/// entries mark missing runs) and grid spacings.
pub fn compute_order_table(errors: &[Vec<f64>], spacings: &[f64]) -> Result<ConvergenceReport> {
    if errors.len() < 2 || errors.len() != spacings.len() {
        return Err(HarnessError::Config(format!(
            "order table needs at least two rows with one spacing each ({} errors, {} spacings)",
            errors.len(),
            spacings.len()
        )));
    }
    let m = errors[0].len();
    if m == 0 || errors.iter().any(|e| e.len() != m) {
        return Err(HarnessError::Config("ragged error rows".into()));
    }
    if spacings.iter().any(|&h| !(h > 0.0)) || spacings.windows(2).any(|w| w[0] == w[1]) {
        return Err(HarnessError::Config(format!("spacings {spacings:?} must be positive and distinct")));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(errors.len());
    for (e, &dx) in errors.iter().zip(spacings) {
        let errors: Vec<Option<f64>> = e.iter().map(|&v| v.is_finite().then_some(v)).collect();
        let orders = match rows.last() {
            None => vec![None; m],
            Some(prev) => (0..m)
                .map(|c| match (prev.errors[c], errors[c]) {
                    (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).ln() / (prev.dx / dx).ln()),
                    _ => None,
                })
                .collect(),
        };
        rows.push(ConvergenceRow { dx, n: (1.0 / dx).round() as usize, errors, orders });
    }
    Ok(ConvergenceReport { components: (0..m).map(|c| format!("comp{c}")).collect(), rows, meta: None })
}

impl ConvergenceReport {
    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c == name)
    }

    pub fn errors(&self, component: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.errors[component]).collect()
    }

    pub fn orders(&self, component: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.orders[component]).collect()
    }

    /// Mean of the defined orders of `component` over `rows`.
    pub fn mean_order(&self, component: usize, rows: std::ops::Range<usize>) -> Option<f64> {
        let v: Vec<f64> = self.rows.get(rows)?.iter().filter_map(|r| r.orders[component]).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Least-squares slope of `ln e` against `ln dx` over `rows`.
    pub fn fitted_order(&self, component: usize, rows: std::ops::Range<usize>) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .get(rows)?
            .iter()
            .filter_map(|r| r.errors[component].filter(|&e| e > 0.0).map(|e| (r.dx.ln(), e.ln())))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }
}

/// Runs every resolution of `spec` in parallel and tabulates the errors.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<(ConvergenceReport, Vec<RunOutcome>)> {
    spec.validate()?;
    let mut grids: Vec<usize> = spec.resolutions.clone();
    if spec.metric == Metric::SelfConvergence {
        grids.extend(spec.resolutions.iter().map(|&n| 2 * n));
        grids.sort_unstable();
        grids.dedup();
    }
    info!("{} {}: grids {:?}", spec.name, spec.variant.name(), grids);
    let outcomes: Vec<RunOutcome> = grids.par_iter().map(|&n| run_resolution(spec, n)).collect::<Result<_>>()?;
    let by_n: BTreeMap<usize, &RunOutcome> = outcomes.iter().map(|o| (o.n, o)).collect();

    let names = spec.model.observable_names();
    let mut errors = Vec::with_capacity(spec.resolutions.len());
    let mut spacings = Vec::with_capacity(spec.resolutions.len());
    let mut t_realized = Vec::with_capacity(spec.resolutions.len());
    for &n in &spec.resolutions {
        let run = by_n[&n];
        spacings.push(run.dx);
        t_realized.push(run.t_realized);
        errors.push(match spec.metric {
            Metric::Exact => exact_errors(spec, run)?,
            Metric::SelfConvergence => self_errors(spec, run, by_n[&(2 * n)])?,
        });
    }
    let mut report = if errors.len() >= 2 {
        compute_order_table(&errors, &spacings)?
    } else {
        let row = ConvergenceRow {
            dx: spacings[0],
            n: spec.resolutions[0],
            errors: errors[0].iter().map(|&e| e.is_finite().then_some(e)).collect(),
            orders: vec![None; names.len()],
        };
        ConvergenceReport { components: Vec::new(), rows: vec![row], meta: None }
    };
    for (row, &n) in report.rows.iter_mut().zip(&spec.resolutions) {
        row.n = n;
    }
    report.components = names;

    let mut stats = AdaptiveStats::default();
    let mut max_mass_drift = vec![0.0f64; spec.model.components()];
    for o in &outcomes {
        stats.merge(&o.stats);
        if o.instability.is_none() {
            for (m, d) in max_mass_drift.iter_mut().zip(&o.mass_drift) {
                *m = m.max(*d);
            }
        }
    }
    report.meta = Some(ReportMeta {
        experiment: spec.name.clone(),
        scheme: spec.variant,
        model: spec.model,
        t_final: spec.t_final,
        v: spec.model.speed(),
        kappa: spec.kappa,
        metric: spec.metric,
        t_realized,
        instabilities: outcomes.iter().filter_map(|o| o.instability.map(|s| (o.n, s))).collect(),
        max_mass_drift,
        stats,
    });
    if matches!(spec.relaxation, RelaxationMode::Adaptive(_)) && stats.fallback_rate() > spec.solver_failure_threshold {
        return Err(HarnessError::SolverFailureRate {
            rate: stats.fallback_rate(),
            threshold: spec.solver_failure_threshold,
        });
    }
    Ok((report, outcomes))
}

fn exact_errors(spec: &ExperimentSpec, run: &RunOutcome) -> Result<Vec<f64>> {
    let m = spec.model.observable_names().len();
    let Some(field) = &run.field else { return Ok(vec![f64::NAN; m]) };
    let obs = spec.model.observables(field);
    let lattice = *obs.lattice();
    let mut exact = vec![Vec::with_capacity(lattice.n_sites()); m];
    for s in 0..lattice.n_sites() {
        let values = spec.model.exact(&spec.datum, run.t_realized, lattice.coordinates(s))?;
        for (col, v) in exact.iter_mut().zip(values) {
            col.push(v);
        }
    }
    exact.iter().enumerate().map(|(c, e)| Ok(l2_error(&obs, e, c)?)).collect()
}

fn self_errors(spec: &ExperimentSpec, coarse: &RunOutcome, fine: &RunOutcome) -> Result<Vec<f64>> {
    let m = spec.model.observable_names().len();
    let (Some(c), Some(f)) = (&coarse.field, &fine.field) else { return Ok(vec![f64::NAN; m]) };
    if (coarse.t_realized - fine.t_realized).abs() > 1e-12 * spec.t_final {
        warn!(
            "{}: N = {} stops at t = {} but N = {} at t = {}",
            spec.name, coarse.n, coarse.t_realized, fine.n, fine.t_realized
        );
    }
    let (oc, of) = (spec.model.observables(c), spec.model.observables(f));
    (0..m).map(|k| Ok(self_convergence_error(&oc, &of, k)?)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RelaxationCfg;

    #[test]
    fn power_law_order() {
        let r = compute_order_table(&[vec![1e-2], vec![2.5e-3]], &[0.1, 0.05]).unwrap();
        assert_eq!(r.rows[0].orders[0], None);
        assert!((r.rows[1].orders[0].unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn second_order_row_at_ratio_one_point_six() {
        let r = compute_order_table(&[vec![8.592e-5], vec![3.358e-5]], &[2.0e-3, 1.25e-3]).unwrap();
        assert!((r.rows[1].orders[0].unwrap() - 2.00).abs() < 5e-3);
    }

    #[test]
    fn equal_errors_give_order_zero_and_zero_errors_give_blank() {
        let r = compute_order_table(&[vec![1e-3, 0.0], vec![1e-3, 0.0], vec![f64::NAN, 1e-4]], &[0.1, 0.05, 0.025])
            .unwrap();
        assert_eq!(r.rows[1].orders[0], Some(0.0));
        assert_eq!(r.rows[1].orders[1], None);
        assert_eq!(r.rows[2].orders[0], None);
        assert_eq!(r.rows[2].errors[0], None);
        assert!(compute_order_table(&[vec![1.0]], &[0.1]).is_err());
    }

    #[test]
    fn whole_steps_never_overshoot() {
        assert_eq!(whole_steps(1.0, 0.25), 4);
        assert_eq!(whole_steps(1.0, 0.3), 3);
        // T / dt evaluates to 9.999999999999998 on the 20-point grid.
        assert_eq!(whole_steps(10.0, 24.0 * (1.0 / 20.0) / 1.2), 9);
    }

    fn table1(variant: Variant, resolutions: Vec<usize>) -> ExperimentSpec {
        ExperimentSpec {
            name: "test".into(),
            model: ModelSpec::Burgers1d { v: 1.2 },
            datum: Datum::Sine { amplitude: 1.0, offset: 0.0 },
            init: Initialization::Equilibrium,
            variant,
            relaxation: RelaxationCfg::default().mode(),
            kappa: 1,
            t_final: 0.1,
            resolutions,
            metric: Metric::Exact,
            diagnostics_every: 0,
            solver_failure_threshold: 1e-3,
        }
    }

    #[test]
    fn fair_second_order_splits_into_groups_and_remainder() {
        let run = run_resolution(&table1(Variant::Fair2nd, vec![500]), 500).unwrap();
        assert_eq!(24 * run.steps + run.extra_substeps, 60);
        assert!((run.t_realized - 0.1).abs() < 1e-12);
    }

    #[test]
    fn frozen_coarse_errors() {
        let (r, _) = run_experiment(&table1(Variant::I, vec![500, 800])).unwrap();
        let e = r.errors(0);
        assert!((e[0].unwrap() / 3.3704e-6 - 1.0).abs() < 1e-4, "{e:?}");
        assert!((e[1].unwrap() / 1.5518e-6 - 1.0).abs() < 1e-4, "{e:?}");
        let (r, _) = run_experiment(&table1(Variant::Fair2nd, vec![500, 800])).unwrap();
        let e = r.errors(0);
        assert!((e[0].unwrap() / 8.5921e-5 - 1.0).abs() < 1e-4, "{e:?}");
        assert!((e[1].unwrap() / 3.3583e-5 - 1.0).abs() < 1e-4, "{e:?}");
    }

    #[test]
    fn reports_are_bit_reproducible() {
        let spec = table1(Variant::I, vec![64, 102]);
        assert_eq!(run_experiment(&spec).unwrap().0, run_experiment(&spec).unwrap().0);
    }

    #[test]
    fn weighted_initialization_splits_mass() {
        let lattice = Lattice::unit(1, 8).unwrap();
        let u0 = initial_field(&Datum::Sine { amplitude: 1.0, offset: 1.0 }, lattice, 1);
        let model = ModelSpec::Burgers1d { v: 1.2 }.build().unwrap();
        let f = initialize(&u0, model.as_ref(), Initialization::Weighted { theta: 0.25 }).unwrap();
        let back = f.moments();
        for s in 0..8 {
            assert!((back.component(0)[s] - u0.component(0)[s]).abs() < 1e-15);
            assert!((f.plane(0, 0)[s] - 0.25 * u0.component(0)[s]).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_coarsening_ladders() {
        let mut spec = table1(Variant::I, vec![100, 80]);
        assert!(spec.validate().is_err());
        spec.resolutions = vec![100, 160];
        spec.datum = Datum::Gaussian { width: 1.0 };
        assert!(spec.validate().is_err());
    }
}
