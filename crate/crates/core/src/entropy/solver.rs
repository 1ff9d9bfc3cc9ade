use log::warn;

use super::{pack_of, stable_imbalance, EntropyPack, SiteState};
use crate::error::{Error, Result};
use crate::lattice::DistributionField;
use crate::models::{KineticModel, MAX_SITE_VALUES};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaMethod {
    Bisection,
    /// Secant iterates from `omega = 2`, safeguarded by the bracket.
    Secant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FallbackPolicy {
    /// Relax with `omega = 2` and count the site.
    Omega2,
    /// Propagate the failure.
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaSolverConfig {
    pub method: OmegaMethod,
    /// Tolerance on the scaled residual `Delta Sigma / delta^2`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub bracket: (f64, f64),
    pub fallback: FallbackPolicy,
    /// Relative equilibrium distance below which `omega = 2` is returned.
    pub near_equilibrium: f64,
}

impl Default for OmegaSolverConfig {
    fn default() -> Self {
        Self {
            method: OmegaMethod::Bisection,
            tolerance: 1e-13,
            max_iterations: 100,
            bracket: (1.0, 2.5),
            fallback: FallbackPolicy::Omega2,
            near_equilibrium: 1e-12,
        }
    }
}

impl OmegaSolverConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bracket;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!("empty omega bracket [{lo}, {hi}]")));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("omega tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("omega solver needs at least one iteration".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaStatus {
    Converged,
    NearEquilibrium,
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaOutcome<T> {
    pub omega: T,
    pub iterations: usize,
    pub status: OmegaStatus,
}

/// Counters accumulated over adaptive relaxation sweeps.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AdaptiveStats {
    pub sites: u64,
    pub near_equilibrium: u64,
    pub fallbacks: u64,
    pub iterations: u64,
    pub omega_min: f64,
    pub omega_max: f64,
}

impl AdaptiveStats {
    pub fn fallback_rate(&self) -> f64 {
        if self.sites == 0 {
            0.0
        } else {
            self.fallbacks as f64 / self.sites as f64
        }
    }

    fn record<T: Real>(&mut self, outcome: &OmegaOutcome<T>) {
        if self.sites == 0 {
            self.omega_min = f64::INFINITY;
            self.omega_max = f64::NEG_INFINITY;
        }
        self.sites += 1;
        self.iterations += outcome.iterations as u64;
        match outcome.status {
            OmegaStatus::NearEquilibrium => self.near_equilibrium += 1,
            OmegaStatus::Fallback => self.fallbacks += 1,
            OmegaStatus::Converged => {
                let w = outcome.omega.as_f64();
                self.omega_min = self.omega_min.min(w);
                self.omega_max = self.omega_max.max(w);
            }
        }
    }

    pub fn merge(&mut self, other: &AdaptiveStats) {
        if other.sites == 0 {
            return;
        }
        if self.sites == 0 {
            *self = *other;
            return;
        }
        self.sites += other.sites;
        self.near_equilibrium += other.near_equilibrium;
        self.fallbacks += other.fallbacks;
        self.iterations += other.iterations;
        self.omega_min = self.omega_min.min(other.omega_min);
        self.omega_max = self.omega_max.max(other.omega_max);
    }
}

const ADMISSIBILITY_EVALS: usize = 64;

struct Residual<'a, T: Real> {
    pack: &'a dyn EntropyPack<T>,
    model: &'a dyn KineticModel<T>,
    site: &'a SiteState<T>,
    inv_delta2: T,
}

impl<T: Real> Residual<'_, T> {
    fn eval(&self, omega: T) -> Result<T> {
        Ok(stable_imbalance(self.pack, self.model, self.site, omega)? * self.inv_delta2)
    }
}

fn fallback<T: Real>(config: &OmegaSolverConfig, iterations: usize, err: Error) -> Result<OmegaOutcome<T>> {
    match config.fallback {
        FallbackPolicy::Omega2 => {
            warn!("omega solve failed ({err}); relaxing with omega = 2");
            Ok(OmegaOutcome { omega: T::lit(2.0), iterations, status: OmegaStatus::Fallback })
        }
        FallbackPolicy::Fail => Err(err),
    }
}

/// Entropy-conserving relaxation parameter of one site: the root `omega > 1`
/// of `Sigma(R_omega f) = Sigma(f)`.
///
/// The residual is negative at `omega = 1` and increasing beyond it, so the
/// root is unique once bracketed. Upper bracket ends outside the convexity
/// region are pulled towards the lower end.
pub fn solve_omega<T: Real>(
    model: &dyn KineticModel<T>,
    f: &[T],
    config: &OmegaSolverConfig,
) -> Result<OmegaOutcome<T>> {
    let pack = pack_of(model)?;
    let site = SiteState::new(model, f);
    let scale = f.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    if site.max_distance() <= T::lit(config.near_equilibrium) * (T::one() + scale) {
        return Ok(OmegaOutcome { omega: T::lit(2.0), iterations: 0, status: OmegaStatus::NearEquilibrium });
    }
    let delta = site.distance_factor();
    let res = Residual { pack, model, site: &site, inv_delta2: T::one() / (delta * delta) };
    let tol = T::lit(config.tolerance);

    let mut lo = T::lit(config.bracket.0);
    let mut hi = T::lit(config.bracket.1);
    let mut g_lo = match res.eval(lo) {
        Ok(g) => g,
        Err(e) => return fallback(config, 0, e),
    };
    let mut evals = 1usize;
    let mut g_hi = match res.eval(hi) {
        Ok(g) => g,
        Err(_) => {
            // Largest admissible upper end, by bisection on admissibility.
            let mut good = lo;
            let mut bad = hi;
            let mut g_good = g_lo;
            while bad - good > T::epsilon() * T::lit(4.0) * bad && evals < ADMISSIBILITY_EVALS {
                let mid = (good + bad) / T::lit(2.0);
                evals += 1;
                match res.eval(mid) {
                    Ok(g) => {
                        good = mid;
                        g_good = g;
                        if g > T::zero() {
                            break;
                        }
                    }
                    Err(_) => bad = mid,
                }
            }
            hi = good;
            g_good
        }
    };
    evals += 1;
    if g_lo.abs() <= tol {
        return Ok(OmegaOutcome { omega: lo, iterations: evals, status: OmegaStatus::Converged });
    }
    if g_hi.abs() <= tol {
        return Ok(OmegaOutcome { omega: hi, iterations: evals, status: OmegaStatus::Converged });
    }
    if !(g_lo < T::zero() && g_hi > T::zero()) {
        let err = Error::RootFinding(format!("no sign change on [{lo}, {hi}]: {g_lo}, {g_hi}"));
        return fallback(config, evals, err);
    }

    let two = T::lit(2.0);
    // Last two iterates, newest first.
    let mut hist: [Option<(T, T)>; 2] = [None, None];
    for it in 0..config.max_iterations {
        let mid = (lo + hi) / two;
        let x = match (config.method, hist) {
            (OmegaMethod::Bisection, _) => mid,
            (OmegaMethod::Secant, [None, _]) if lo < two && two < hi => two,
            (OmegaMethod::Secant, [Some((x1, g1)), older]) => {
                let (x0, g0) = older.unwrap_or(if g1 < T::zero() { (hi, g_hi) } else { (lo, g_lo) });
                let s = x1 - g1 * (x1 - x0) / (g1 - g0);
                if s > lo && s < hi && s.is_finite() {
                    s
                } else {
                    mid
                }
            }
            (OmegaMethod::Secant, _) => mid,
        };
        let gx = res.eval(x);
        let gx = match gx {
            Ok(g) => g,
            Err(e) => return fallback(config, evals + it + 1, e),
        };
        if gx.abs() <= tol || hi - lo <= T::epsilon() * two * hi {
            return Ok(OmegaOutcome { omega: x, iterations: evals + it + 1, status: OmegaStatus::Converged });
        }
        if gx < T::zero() {
            lo = x;
            g_lo = gx;
        } else {
            hi = x;
            g_hi = gx;
        }
        hist = [Some((x, gx)), hist[0]];
    }
    let err = Error::RootFinding(format!("no convergence after {} iterations", config.max_iterations));
    fallback(config, evals + config.max_iterations, err)
}

/// Site-wise `f <- (1 - omega(f)) f + omega(f) f^eq` with the
/// entropy-conserving `omega(f)`.
pub fn relax_adaptive<T: Real>(
    field: &mut DistributionField<T>,
    model: &dyn KineticModel<T>,
    config: &OmegaSolverConfig,
    stats: &mut AdaptiveStats,
) -> Result<()> {
    pack_of(model)?;
    let width = model.velocities() * model.components();
    let mut f = [T::zero(); MAX_SITE_VALUES];
    let mut feq = [T::zero(); MAX_SITE_VALUES];
    let mut u = [T::zero(); MAX_SITE_VALUES];
    let (q, m) = (model.velocities(), model.components());
    for site in 0..field.lattice().n_sites() {
        field.site(site, &mut f[..width]);
        let outcome = solve_omega(model, &f[..width], config)?;
        stats.record(&outcome);
        crate::models::site_moments(q, m, &f[..width], &mut u);
        model.equilibrium(&u[..m], &mut feq[..width]);
        let w = outcome.omega;
        for i in 0..width {
            f[i] = (T::one() - w) * f[i] + w * feq[i];
        }
        field.set_site(site, &f[..width]);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::imbalance;
    use crate::models::{Burgers1D, LinearAdvection1D, ShallowWater1D};

    #[test]
    fn linear_pack_gives_two() {
        let m = LinearAdvection1D::<f64>::new(0.4, 1.0);
        let out = solve_omega(&m, &[0.3, -0.2], &OmegaSolverConfig::default()).unwrap();
        assert_eq!(out.status, OmegaStatus::Converged);
        assert!((out.omega - 2.0).abs() < 1e-12);
    }

    #[test]
    fn near_equilibrium_shortcut() {
        let m = Burgers1D::<f64>::new(1.2);
        let mut f = [0.0; 2];
        m.equilibrium(&[0.5], &mut f);
        f[0] += 1e-14;
        f[1] -= 1e-14;
        let out = solve_omega(&m, &f, &OmegaSolverConfig::default()).unwrap();
        assert_eq!(out.status, OmegaStatus::NearEquilibrium);
        assert_eq!(out.omega, 2.0);
    }

    #[test]
    fn burgers_root_conserves_entropy_and_is_an_involution() {
        let m = Burgers1D::<f64>::new(1.2);
        for method in [OmegaMethod::Bisection, OmegaMethod::Secant] {
            let cfg = OmegaSolverConfig { method, ..Default::default() };
            let f = [0.35, 0.02];
            let out = solve_omega(&m, &f, &cfg).unwrap();
            assert_eq!(out.status, OmegaStatus::Converged);
            assert!(imbalance(&m, &f, out.omega).unwrap().abs() < 1e-14);
            let mut feq = [0.0; 2];
            m.equilibrium(&[0.37], &mut feq);
            let g: Vec<f64> = (0..2).map(|i| (1.0 - out.omega) * f[i] + out.omega * feq[i]).collect();
            let back = solve_omega(&m, &g, &cfg).unwrap();
            assert!((back.omega - out.omega / (out.omega - 1.0)).abs() < 1e-9);
            for i in 0..2 {
                let h = (1.0 - back.omega) * g[i] + back.omega * feq[i];
                assert!((h - f[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn secant_on_shallow_water() {
        let m = ShallowWater1D::<f64>::new(1.0, 6.0);
        let mut f = [0.0; 4];
        m.equilibrium(&[1.5, 0.2], &mut f);
        f[0] += 0.1;
        f[2] -= 0.1;
        let cfg = OmegaSolverConfig { method: OmegaMethod::Secant, ..Default::default() };
        let out = solve_omega(&m, &f, &cfg).unwrap();
        assert_eq!(out.status, OmegaStatus::Converged);
        assert!(imbalance(&m, &f, out.omega).unwrap().abs() < 1e-12);
    }

    #[test]
    fn invalid_configs() {
        let bad = OmegaSolverConfig { bracket: (2.0, 1.0), ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = OmegaSolverConfig { tolerance: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(OmegaSolverConfig::default().validate().is_ok());
    }
}
