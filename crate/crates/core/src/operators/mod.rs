//! Transport, relaxation, the time-symmetric brick and its compositions.
//!
//! Formulas read right-to-left; plans store actions in application order.
//! Every transport is an integer cell shift, so `dt` never enters the loop.

mod plan;

pub use plan::{Action, Composition, RelaxSlot, StepPlan, Variant};

use crate::entropy::{relax_adaptive, total_micro_entropy, AdaptiveStats, OmegaSolverConfig};
use crate::error::{Error, Result};
use crate::lattice::DistributionField;
use crate::models::{site_moments, KineticModel, MAX_SITE_VALUES};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelaxationMode<T> {
    /// `R_omega` in every reflection slot.
    Fixed(T),
    /// Entropy-conserving `omega(f)` in every reflection slot.
    Adaptive(OmegaSolverConfig),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeSpec<T> {
    pub variant: Variant,
    pub relaxation: RelaxationMode<T>,
    pub kappa: i64,
    pub v: T,
}

impl<T: Real> SchemeSpec<T> {
    pub fn new(variant: Variant, v: T) -> Self {
        Self { variant, relaxation: RelaxationMode::Fixed(T::lit(2.0)), kappa: 1, v }
    }

    pub fn with_relaxation(mut self, mode: RelaxationMode<T>) -> Self {
        self.relaxation = mode;
        self
    }

    pub fn with_kappa(mut self, kappa: i64) -> Self {
        self.kappa = kappa;
        self
    }

    /// Macro time step on a lattice of spacing `dx`.
    pub fn dt(&self, dx: T) -> T {
        T::count((self.variant.travel_per_step() * self.kappa) as usize) * dx / self.v
    }

    pub fn plan(&self) -> Result<StepPlan> {
        StepPlan::new(self.variant, self.kappa)
    }

    pub fn validate(&self, model: &dyn KineticModel<T>) -> Result<()> {
        if !(self.v > T::zero()) {
            return Err(Error::Config(format!("kinetic speed must be positive, got {}", self.v)));
        }
        if (self.v - model.speed()).abs() > T::epsilon() * T::lit(16.0) * self.v {
            return Err(Error::Config(format!("scheme speed {} differs from model speed {}", self.v, model.speed())));
        }
        match self.relaxation {
            RelaxationMode::Fixed(w) => {
                if !(w > T::zero() && w <= T::lit(2.0)) {
                    return Err(Error::Config(format!("fixed omega must lie in (0, 2], got {w}")));
                }
            }
            RelaxationMode::Adaptive(cfg) => {
                cfg.validate()?;
                if model.entropy().is_none() {
                    return Err(Error::Config(format!(
                        "entropy-adaptive relaxation needs kinetic entropies; {} has none",
                        model.name()
                    )));
                }
            }
        }
        self.plan().map(|_| ())
    }
}

/// Shift velocity block `k` by `cells * e_k` for every `k`.
pub fn transport<T: Real>(field: &mut DistributionField<T>, model: &dyn KineticModel<T>, cells: i64) -> Result<()> {
    if cells == 0 {
        return Ok(());
    }
    for (k, e) in model.velocity_set().directions().iter().enumerate() {
        field.shift(k, [cells * e[0], cells * e[1]])?;
    }
    Ok(())
}

/// `f <- (1 - omega) f + omega f^eq(u)` at every site.
pub fn relax<T: Real>(field: &mut DistributionField<T>, model: &dyn KineticModel<T>, omega: T) {
    let (q, m) = (model.velocities(), model.components());
    let width = q * m;
    let mut f = [T::zero(); MAX_SITE_VALUES];
    let mut feq = [T::zero(); MAX_SITE_VALUES];
    let mut u = [T::zero(); MAX_SITE_VALUES];
    let keep = T::one() - omega;
    for site in 0..field.lattice().n_sites() {
        field.site(site, &mut f[..width]);
        site_moments(q, m, &f[..width], &mut u);
        model.equilibrium(&u[..m], &mut feq[..width]);
        for i in 0..width {
            f[i] = keep * f[i] + omega * feq[i];
        }
        field.set_site(site, &f[..width]);
    }
}

/// Field initialized at `f^eq(u)` from a site-wise conserved state.
pub fn equilibrium_field<T: Real>(
    u: &crate::lattice::ConservedField<T>,
    model: &dyn KineticModel<T>,
) -> Result<DistributionField<T>> {
    let (q, m) = (model.velocities(), model.components());
    if u.components() != m || u.lattice().dim() != model.dim() {
        return Err(Error::Config(format!(
            "state with {} components on a {}D lattice does not fit model {}",
            u.components(),
            u.lattice().dim(),
            model.name()
        )));
    }
    let mut field = DistributionField::zeros(*u.lattice(), q, m);
    let mut us = [T::zero(); MAX_SITE_VALUES];
    let mut feq = [T::zero(); MAX_SITE_VALUES];
    for site in 0..u.lattice().n_sites() {
        u.site(site, &mut us[..m]);
        model.equilibrium(&us[..m], &mut feq[..q * m]);
        field.set_site(site, &feq[..q * m]);
    }
    Ok(field)
}

/// Per-step observables handed to a diagnostics sink.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics<T> {
    pub step: usize,
    pub time: T,
    /// `sum_sites u_c` per component.
    pub mass: Vec<T>,
    /// `sqrt(dx^d sum_sites |u|^2)`.
    pub norm_u: T,
    /// `sqrt(dx^d sum_sites u_c^2)` per component.
    pub norms: Vec<T>,
    /// Total microscopic entropy, when defined.
    pub micro_entropy: Option<T>,
}

impl<T: Real> StepDiagnostics<T> {
    pub fn observe(field: &DistributionField<T>, model: &dyn KineticModel<T>, step: usize, time: T) -> Self {
        let u = field.moments();
        let mass = (0..u.components()).map(|c| u.total(c)).collect();
        let vol = u.lattice().cell_volume();
        let squares: Vec<T> = (0..u.components()).map(|c| u.component(c).iter().map(|&v| v * v).sum()).collect();
        let norm_u = (squares.iter().copied().sum::<T>() * vol).sqrt();
        let norms = squares.into_iter().map(|s| (s * vol).sqrt()).collect();
        let micro_entropy = if model.entropy().is_some() { total_micro_entropy(field, model).ok() } else { None };
        Self { step, time, mass, norm_u, norms, micro_entropy }
    }
}

/// Executes the plan of a [`SchemeSpec`] on a model.
pub struct Stepper<'a, T: Real> {
    model: &'a dyn KineticModel<T>,
    spec: SchemeSpec<T>,
    plan: StepPlan,
    stats: AdaptiveStats,
}

impl<'a, T: Real> Stepper<'a, T> {
    pub fn new(model: &'a dyn KineticModel<T>, spec: SchemeSpec<T>) -> Result<Self> {
        spec.validate(model)?;
        let plan = spec.plan()?;
        Ok(Self { model, spec, plan, stats: AdaptiveStats::default() })
    }

    pub fn plan(&self) -> &StepPlan {
        &self.plan
    }

    pub fn spec(&self) -> &SchemeSpec<T> {
        &self.spec
    }

    /// Solver counters of the adaptive reflections so far.
    pub fn stats(&self) -> &AdaptiveStats {
        &self.stats
    }

    fn check_extent(&self, field: &DistributionField<T>, max_shift: i64) -> Result<()> {
        let lattice = field.lattice();
        if field.velocities() != self.model.velocities() || field.components() != self.model.components() {
            return Err(Error::Config(format!(
                "field with q = {}, M = {} does not fit model {}",
                field.velocities(),
                field.components(),
                self.model.name()
            )));
        }
        for (axis, &n) in lattice.extent().iter().enumerate() {
            if max_shift >= n as i64 {
                return Err(Error::ShiftTooLarge { axis, offset: max_shift, extent: n });
            }
        }
        Ok(())
    }

    fn reflect(&mut self, field: &mut DistributionField<T>) -> Result<()> {
        match self.spec.relaxation {
            RelaxationMode::Fixed(w) => {
                relax(field, self.model, w);
                Ok(())
            }
            RelaxationMode::Adaptive(cfg) => relax_adaptive(field, self.model, &cfg, &mut self.stats),
        }
    }

    pub fn apply(&mut self, field: &mut DistributionField<T>, actions: &[Action]) -> Result<()> {
        for action in actions {
            match *action {
                Action::Transport(c) => transport(field, self.model, c)?,
                Action::Relax(RelaxSlot::Reflection) => self.reflect(field)?,
                Action::Relax(RelaxSlot::Projection) => relax(field, self.model, T::one()),
            }
        }
        Ok(())
    }

    /// `T(s kappa) R T(2 s kappa) R T(s kappa)` with the scheme's reflection.
    pub fn brick_psi(&mut self, field: &mut DistributionField<T>, s: i64) -> Result<()> {
        let brick = StepPlan::brick(s * self.spec.kappa);
        self.check_extent(field, brick.max_shift())?;
        self.apply(field, &brick.actions)
    }

    pub fn macro_step(&mut self, field: &mut DistributionField<T>) -> Result<()> {
        self.check_extent(field, self.plan.max_shift())?;
        let plan = std::mem::take(&mut self.plan.actions);
        let out = self.apply(field, &plan);
        self.plan.actions = plan;
        out
    }

    /// `n_steps` macro-steps. Every `every` steps (and after the last one)
    /// the sink receives diagnostics; `every = 0` disables them apart from
    /// the initial and final records. Non-finite values abort with the
    /// one-based index of the offending step.
    pub fn advance(
        &mut self,
        field: &mut DistributionField<T>,
        n_steps: usize,
        every: usize,
        sink: &mut dyn FnMut(&StepDiagnostics<T>),
    ) -> Result<()> {
        let dt = self.spec.dt(field.lattice().dx());
        sink(&StepDiagnostics::observe(field, self.model, 0, T::zero()));
        for step in 1..=n_steps {
            self.macro_step(field)?;
            if !field.all_finite() {
                return Err(Error::Instability { step });
            }
            if (every > 0 && step % every == 0) || step == n_steps {
                sink(&StepDiagnostics::observe(field, self.model, step, dt * T::count(step)));
            }
        }
        Ok(())
    }
}

/// One macro-step of `spec`.
pub fn macro_step<T: Real>(
    field: &mut DistributionField<T>,
    model: &dyn KineticModel<T>,
    spec: &SchemeSpec<T>,
) -> Result<()> {
    Stepper::new(model, *spec)?.macro_step(field)
}

/// One brick `psi` with quarter shift `s * kappa`.
pub fn brick_psi<T: Real>(
    field: &mut DistributionField<T>,
    model: &dyn KineticModel<T>,
    s: i64,
    spec: &SchemeSpec<T>,
) -> Result<()> {
    Stepper::new(model, *spec)?.brick_psi(field, s)
}

/// `n_steps` macro-steps without diagnostics; returns the solver counters.
pub fn advance<T: Real>(
    field: &mut DistributionField<T>,
    model: &dyn KineticModel<T>,
    spec: &SchemeSpec<T>,
    n_steps: usize,
) -> Result<AdaptiveStats> {
    let mut stepper = Stepper::new(model, *spec)?;
    stepper.advance(field, n_steps, 0, &mut |_| {})?;
    Ok(*stepper.stats())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ConservedField, Lattice};
    use crate::models::{Burgers1D, Euler2D, LinearAdvection1D};

    fn sine_field(n: usize, model: &dyn KineticModel<f64>) -> DistributionField<f64> {
        let lat = Lattice::<f64>::new_1d(n, 1.0 / n as f64).unwrap();
        let u = ConservedField::from_fn(lat, 1, |x, out| out[0] = (2.0 * std::f64::consts::PI * x[0]).sin());
        equilibrium_field(&u, model).unwrap()
    }

    #[test]
    fn transport_moves_blocks_in_opposite_directions() {
        let m = LinearAdvection1D::<f64>::new(0.5, 1.0);
        let lat = Lattice::<f64>::new_1d(8, 0.125).unwrap();
        let mut f = DistributionField::zeros(lat, 2, 1);
        f.plane_mut(0, 0)[0] = 1.0;
        f.plane_mut(1, 0)[0] = 2.0;
        transport(&mut f, &m, 3).unwrap();
        assert_eq!(f.plane(0, 0)[3], 1.0);
        assert_eq!(f.plane(1, 0)[5], 2.0);
        transport(&mut f, &m, -3).unwrap();
        assert_eq!(f.plane(0, 0)[0], 1.0);
        assert_eq!(f.plane(1, 0)[0], 2.0);
    }

    #[test]
    fn projection_is_idempotent_and_reflection_an_involution() {
        let m = Burgers1D::<f64>::new(1.2);
        let mut f = sine_field(16, &m);
        transport(&mut f, &m, 1).unwrap();
        let orig = f.clone();
        relax(&mut f, &m, 2.0);
        relax(&mut f, &m, 2.0);
        for (a, b) in f.as_slice().iter().zip(orig.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
        relax(&mut f, &m, 1.0);
        let once = f.clone();
        relax(&mut f, &m, 1.0);
        assert_eq!(f, once);
    }

    #[test]
    fn brick_time_symmetry() {
        let m = Burgers1D::<f64>::new(1.2);
        let spec = SchemeSpec::new(Variant::I, 1.2);
        let mut f = sine_field(32, &m);
        let orig = f.clone();
        let mut st = Stepper::new(&m, spec).unwrap();
        st.brick_psi(&mut f, 1).unwrap();
        st.brick_psi(&mut f, -1).unwrap();
        for (a, b) in f.as_slice().iter().zip(orig.as_slice()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn dt_rules() {
        let dx = 0.01;
        assert!((SchemeSpec::<f64>::new(Variant::I, 1.2).dt(dx) - 0.2).abs() < 1e-15);
        assert!((SchemeSpec::<f64>::new(Variant::BaselineA, 1.2).dt(dx) - dx / 1.2).abs() < 1e-15);
        assert!((SchemeSpec::<f64>::new(Variant::BaselineB, 1.2).dt(dx) - 4.0 * dx / 1.2).abs() < 1e-15);
    }

    #[test]
    fn adaptive_on_euler_is_rejected() {
        let m = Euler2D::<f64>::new(1.4, 6.21);
        let spec = SchemeSpec::new(Variant::III, 6.21).with_relaxation(RelaxationMode::Adaptive(Default::default()));
        assert!(matches!(Stepper::new(&m, spec), Err(Error::Config(_))));
        let bad = SchemeSpec::new(Variant::III, 6.21).with_relaxation(RelaxationMode::Fixed(2.5));
        assert!(Stepper::new(&m, bad).is_err());
    }

    #[test]
    fn shifts_larger_than_lattice_are_rejected() {
        let m = Burgers1D::<f64>::new(1.2);
        let mut f = sine_field(4, &m);
        let spec = SchemeSpec::new(Variant::I, 1.2);
        assert!(matches!(macro_step(&mut f, &m, &spec), Err(Error::ShiftTooLarge { .. })));
    }

    #[test]
    fn advance_zero_steps_is_identity() {
        let m = Burgers1D::<f64>::new(1.2);
        let mut f = sine_field(16, &m);
        let orig = f.clone();
        advance(&mut f, &m, &SchemeSpec::new(Variant::I, 1.2), 0).unwrap();
        assert_eq!(f, orig);
    }
}
