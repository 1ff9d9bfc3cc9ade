//! Kinetic entropies, the microscopic entropy `Sigma = sum_k s_k(f_k)` and
//! the per-site choice of an entropy-conserving relaxation parameter.

mod solver;

pub use solver::{
    relax_adaptive, solve_omega, AdaptiveStats, FallbackPolicy, OmegaMethod, OmegaOutcome, OmegaSolverConfig,
    OmegaStatus,
};

use crate::error::{Error, Result};
use crate::lattice::{ConservedField, DistributionField};
use crate::models::{site_moments, KineticModel, MAX_SITE_VALUES};
use crate::scalar::Real;

/// Per-velocity kinetic entropies `s_k` with their Legendre duals `s*_k`,
/// and the macroscopic pair `(S, G^j)`.
///
/// `u` arguments carry the conserved moments of the site; packs whose
/// conjugate map has several branches use them to select one.
pub trait EntropyPack<T: Real>: Send + Sync {
    /// `s_k(f_k)`; errors outside the convexity region.
    fn kinetic_entropy(&self, k: usize, f_k: &[T], u: &[T]) -> Result<T>;

    /// `grad s_k(f_k)`, the conjugate variables `p_k`.
    fn kinetic_gradient(&self, k: usize, f_k: &[T], u: &[T], out: &mut [T]) -> Result<()>;

    fn dual_entropy(&self, k: usize, p: &[T]) -> T;

    fn dual_gradient(&self, k: usize, p: &[T], out: &mut [T]);

    /// `S(u)`.
    fn macro_entropy(&self, u: &[T]) -> T;

    /// `G^axis(u)`.
    fn macro_entropy_flux(&self, axis: usize, u: &[T]) -> T;

    /// Entropy variables `p = grad S(u)`, shared by every velocity at equilibrium.
    fn conjugate(&self, u: &[T], out: &mut [T]);

    fn is_convex_at(&self, k: usize, f_k: &[T], u: &[T]) -> bool;

    /// `s_k(base + delta) - s_k(base) - p(u) . delta` without cancellation,
    /// where `base = f_k^eq(u)`.
    fn bregman(&self, k: usize, u: &[T], base: &[T], delta: &[T]) -> Result<T>;
}

pub(crate) fn pack_of<T: Real>(model: &dyn KineticModel<T>) -> Result<&dyn EntropyPack<T>> {
    model.entropy().ok_or_else(|| Error::Config(format!("model {} carries no kinetic entropies", model.name())))
}

/// `sum_k s_k(f_k)` of one site laid out as `[k * M + c]`.
pub fn micro_entropy_site<T: Real>(model: &dyn KineticModel<T>, f: &[T]) -> Result<T> {
    let pack = pack_of(model)?;
    let (q, m) = (model.velocities(), model.components());
    let mut u = [T::zero(); MAX_SITE_VALUES];
    site_moments(q, m, f, &mut u);
    let mut total = T::zero();
    for k in 0..q {
        total += pack.kinetic_entropy(k, &f[k * m..(k + 1) * m], &u[..m])?;
    }
    Ok(total)
}

/// Total microscopic entropy over all sites.
///
/// The per-velocity terms are sorted before a compensated summation, so the
/// result is bit-identical under any permutation of the sites of a block;
/// in particular transport leaves it unchanged.
pub fn total_micro_entropy<T: Real>(field: &DistributionField<T>, model: &dyn KineticModel<T>) -> Result<T> {
    let pack = pack_of(model)?;
    let (q, m) = (model.velocities(), model.components());
    let width = q * m;
    let mut f = [T::zero(); MAX_SITE_VALUES];
    let mut u = [T::zero(); MAX_SITE_VALUES];
    let mut terms = Vec::with_capacity(field.lattice().n_sites() * q);
    for site in 0..field.lattice().n_sites() {
        field.site(site, &mut f[..width]);
        site_moments(q, m, &f[..width], &mut u);
        for k in 0..q {
            terms.push(pack.kinetic_entropy(k, &f[k * m..(k + 1) * m], &u[..m])?);
        }
    }
    terms.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(neumaier_sum(&terms))
}

fn neumaier_sum<T: Real>(terms: &[T]) -> T {
    let mut sum = T::zero();
    let mut carry = T::zero();
    for &x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// `sum_sites S(u)`.
pub fn total_macro_entropy<T: Real>(u: &ConservedField<T>, model: &dyn KineticModel<T>) -> Result<T> {
    let pack = pack_of(model)?;
    let m = u.components();
    let mut buf = [T::zero(); MAX_SITE_VALUES];
    let mut total = T::zero();
    for site in 0..u.lattice().n_sites() {
        u.site(site, &mut buf[..m]);
        total += pack.macro_entropy(&buf[..m]);
    }
    Ok(total)
}

/// Equilibrium data of one site: moments, `f^eq` and `d = f^eq - f`.
pub(crate) struct SiteState<T> {
    pub u: [T; MAX_SITE_VALUES],
    pub feq: [T; MAX_SITE_VALUES],
    pub d: [T; MAX_SITE_VALUES],
    pub width: usize,
}

impl<T: Real> SiteState<T> {
    pub fn new(model: &dyn KineticModel<T>, f: &[T]) -> Self {
        let (q, m) = (model.velocities(), model.components());
        let width = q * m;
        let mut s = Self {
            u: [T::zero(); MAX_SITE_VALUES],
            feq: [T::zero(); MAX_SITE_VALUES],
            d: [T::zero(); MAX_SITE_VALUES],
            width,
        };
        site_moments(q, m, f, &mut s.u);
        model.equilibrium(&s.u[..m], &mut s.feq[..width]);
        for i in 0..width {
            s.d[i] = s.feq[i] - f[i];
        }
        s
    }

    /// Signed entry of `f - f^eq` of largest magnitude (first one on ties).
    pub fn distance_factor(&self) -> T {
        let mut best = T::zero();
        for &d in &self.d[..self.width] {
            if d.abs() > best.abs() {
                best = -d;
            }
        }
        best
    }

    pub fn max_distance(&self) -> T {
        self.d[..self.width].iter().fold(T::zero(), |acc, d| acc.max(d.abs()))
    }
}

/// `Sigma(R_omega f) - Sigma(f)` as a sum of divergences about `f^eq`.
///
/// The linear terms cancel because `sum_k d_k = 0` and every velocity shares
/// the entropy variables `p(u)` at equilibrium.
pub(crate) fn stable_imbalance<T: Real>(
    pack: &dyn EntropyPack<T>,
    model: &dyn KineticModel<T>,
    site: &SiteState<T>,
    omega: T,
) -> Result<T> {
    let (q, m) = (model.velocities(), model.components());
    let u = &site.u[..m];
    let mut after = [T::zero(); MAX_SITE_VALUES];
    let mut before = [T::zero(); MAX_SITE_VALUES];
    let mut total = T::zero();
    for k in 0..q {
        let r = k * m..(k + 1) * m;
        for (i, j) in r.clone().enumerate() {
            after[i] = (omega - T::one()) * site.d[j];
            before[i] = -site.d[j];
        }
        let base = &site.feq[r];
        total += pack.bregman(k, u, base, &after[..m])? - pack.bregman(k, u, base, &before[..m])?;
    }
    Ok(total)
}

fn relaxed<T: Real>(f: &[T], site: &SiteState<T>, omega: T, out: &mut [T]) {
    for i in 0..site.width {
        out[i] = (T::one() - omega) * f[i] + omega * site.feq[i];
    }
}

/// `Delta Sigma(omega) = Sigma(R_omega f) - Sigma(f)` by direct evaluation.
pub fn imbalance<T: Real>(model: &dyn KineticModel<T>, f: &[T], omega: T) -> Result<T> {
    let site = SiteState::new(model, f);
    let mut g = [T::zero(); MAX_SITE_VALUES];
    relaxed(f, &site, omega, &mut g);
    Ok(micro_entropy_site(model, &g[..site.width])? - micro_entropy_site(model, f)?)
}

/// `Delta Sigma(omega) / delta` where `delta` is the signed entry of
/// `f - f^eq` of largest magnitude; for scalar D1Q2 this is `f_+ - f_+^eq`.
///
/// Returns zero at equilibrium.
pub fn factorized_imbalance<T: Real>(model: &dyn KineticModel<T>, f: &[T], omega: T) -> Result<T> {
    let pack = pack_of(model)?;
    let site = SiteState::new(model, f);
    let delta = site.distance_factor();
    if delta == T::zero() {
        return Ok(T::zero());
    }
    Ok(stable_imbalance(pack, model, &site, omega)? / delta)
}

/// `Delta Sigma(omega) / delta^2`: bounded as `f -> f^eq`, same sign as the
/// imbalance; this is the residual driven to zero by [`solve_omega`].
pub fn scaled_imbalance<T: Real>(model: &dyn KineticModel<T>, f: &[T], omega: T) -> Result<T> {
    let pack = pack_of(model)?;
    let site = SiteState::new(model, f);
    let delta = site.distance_factor();
    if delta == T::zero() {
        return Ok(T::zero());
    }
    Ok(stable_imbalance(pack, model, &site, omega)? / (delta * delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Burgers1D, LinearAdvection1D, ShallowWater1D};

    #[test]
    fn linear_entropy_by_hand() {
        let (a, v) = (0.3, 1.0);
        let m = LinearAdvection1D::<f64>::new(a, v);
        let f = [0.4, -0.1];
        let expected = v / (v + a) * 0.16 + v / (v - a) * 0.01;
        assert!((micro_entropy_site(&m, &f).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_entropy_is_macroscopic() {
        let m = Burgers1D::<f64>::new(1.2);
        let mut f = [0.0; 2];
        m.equilibrium(&[0.7], &mut f);
        assert!((micro_entropy_site(&m, &f).unwrap() - 0.245).abs() < 1e-14);
    }

    #[test]
    fn imbalance_trivial_cases() {
        let m = Burgers1D::<f64>::new(1.2);
        let f = [0.5, -0.1];
        assert_eq!(imbalance(&m, &f, 0.0).unwrap(), 0.0);
        let mut feq = [0.0; 2];
        m.equilibrium(&[0.4], &mut feq);
        assert!(imbalance(&m, &feq, 1.7).unwrap().abs() < 1e-15);
        let lin = LinearAdvection1D::<f64>::new(0.5, 1.2);
        assert!(imbalance(&lin, &f, 2.0).unwrap().abs() < 1e-15);
        assert!(factorized_imbalance(&lin, &f, 2.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn factorization_identity_on_burgers() {
        let m = Burgers1D::<f64>::new(1.2);
        let f = [0.3, 0.05];
        let site = SiteState::new(&m, &f);
        let delta = site.distance_factor();
        let mut feq = [0.0; 2];
        m.equilibrium(&[0.35], &mut feq);
        assert!((delta - (f[0] - feq[0])).abs() < 1e-16);
        for &w in &[0.5, 1.3, 2.0, 2.2] {
            let raw = imbalance(&m, &f, w).unwrap();
            let fac = factorized_imbalance(&m, &f, w).unwrap();
            assert!((delta * fac - raw).abs() <= 1e-12 * raw.abs().max(1e-14), "{w}: {raw} {}", delta * fac);
        }
    }

    #[test]
    fn shallow_water_stable_imbalance_matches_direct() {
        let m = ShallowWater1D::<f64>::new(1.0, 6.0);
        let mut f = [0.0; 4];
        m.equilibrium(&[1.2, 0.3], &mut f);
        f[0] += 0.05;
        f[2] -= 0.05;
        f[1] -= 0.02;
        f[3] += 0.02;
        let site = SiteState::new(&m, &f);
        for &w in &[0.5, 1.5, 2.0] {
            let raw = imbalance(&m, &f, w).unwrap();
            let stable = stable_imbalance(m.pack(), &m, &site, w).unwrap();
            assert!((raw - stable).abs() < 1e-12 * (1.0 + raw.abs()), "{raw} {stable}");
        }
    }

    #[test]
    fn missing_pack_is_config_error() {
        let m = crate::models::Euler2D::<f64>::new(1.4, 6.21);
        let f = [0.0; 16];
        assert!(matches!(micro_entropy_site(&m, &f), Err(Error::Config(_))));
    }
}
