//! Kinetic relaxation models: fluxes, equilibria and wave speeds.
//!
//! Every model pairs a conservation law `d_t u + sum_j d_j phi^j(u) = 0`
//! with a discrete velocity set and equilibria satisfying the moment
//! relations `sum_k f_k^eq = u` and `sum_k V_k^j f_k^eq = phi^j(u)`.

mod burgers;
mod cubic;
mod euler;
mod linear;
mod shallow_water;

pub use burgers::{Burgers1D, Burgers2D, BurgersEntropy};
pub use cubic::real_cubic_roots;
pub use euler::Euler2D;
pub use linear::{LinearAdvection1D, LinearAdvection2D, QuadraticEntropy};
pub use shallow_water::{ShallowWater1D, ShallowWaterEntropy};

use crate::entropy::EntropyPack;
use crate::error::Result;
use crate::scalar::Real;

/// Largest `q * M` over the built-in models (D2Q4 Euler).
pub const MAX_SITE_VALUES: usize = 16;

/// Discrete velocity stencil, `V_k = V e_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocitySet {
    D1Q2,
    D2Q4,
}

const D1Q2_DIRS: [[i64; 2]; 2] = [[1, 0], [-1, 0]];
const D2Q4_DIRS: [[i64; 2]; 4] = [[1, 0], [0, 1], [-1, 0], [0, -1]];

impl VelocitySet {
    pub fn dim(self) -> usize {
        match self {
            VelocitySet::D1Q2 => 1,
            VelocitySet::D2Q4 => 2,
        }
    }

    pub fn len(self) -> usize {
        self.directions().len()
    }

    pub fn is_empty(self) -> bool {
        false
    }

    /// Unit directions `e_k`; ordering `+x, -x` in 1D and `+x, +y, -x, -y` in 2D.
    pub fn directions(self) -> &'static [[i64; 2]] {
        match self {
            VelocitySet::D1Q2 => &D1Q2_DIRS,
            VelocitySet::D2Q4 => &D2Q4_DIRS,
        }
    }
}

/// A conservation law together with its discrete-velocity relaxation system.
pub trait KineticModel<T: Real>: Send + Sync {
    fn name(&self) -> &'static str;

    fn velocity_set(&self) -> VelocitySet;

    /// Number of conserved components `M`.
    fn components(&self) -> usize;

    /// Kinetic speed `V`.
    fn speed(&self) -> T;

    /// `phi^axis(u)` written into `out` (length `M`).
    fn flux(&self, axis: usize, u: &[T], out: &mut [T]);

    /// Largest absolute eigenvalue of the flux Jacobians at `u`.
    fn max_wave_speed(&self, u: &[T]) -> Result<T>;

    /// Kinetic entropies, when the model provides them.
    fn entropy(&self) -> Option<&dyn EntropyPack<T>> {
        None
    }

    fn dim(&self) -> usize {
        self.velocity_set().dim()
    }

    fn velocities(&self) -> usize {
        self.velocity_set().len()
    }

    /// `f_k^eq(u) = u / q + (e_k . phi(u)) / (2V)`, laid out as `[k * M + c]`.
    ///
    /// This is the D1Q2 equilibrium `u/2 +- phi/(2V)` and the D2Q4 choice
    /// `u/4 +- phi_{x/y}/(2V)`.
    fn equilibrium(&self, u: &[T], out: &mut [T]) {
        let m = self.components();
        let set = self.velocity_set();
        let q = set.len();
        let mut phi = [T::zero(); 2 * MAX_SITE_VALUES];
        for axis in 0..set.dim() {
            self.flux(axis, u, &mut phi[axis * m..(axis + 1) * m]);
        }
        let inv_q = T::one() / T::count(q);
        let inv_2v = T::one() / (T::lit(2.0) * self.speed());
        for (k, e) in set.directions().iter().enumerate() {
            for c in 0..m {
                let mut proj = T::zero();
                for (axis, &ej) in e.iter().enumerate().take(set.dim()) {
                    if ej != 0 {
                        proj += T::lit(ej as f64) * phi[axis * m + c];
                    }
                }
                out[k * m + c] = u[c] * inv_q + proj * inv_2v;
            }
        }
    }
}

/// Moment `sum_k V_k^axis f_k` of one site.
pub fn velocity_moment<T: Real>(model: &dyn KineticModel<T>, axis: usize, f: &[T], out: &mut [T]) {
    let m = model.components();
    let v = model.speed();
    out[..m].iter_mut().for_each(|o| *o = T::zero());
    for (k, e) in model.velocity_set().directions().iter().enumerate() {
        if e[axis] != 0 {
            let w = v * T::lit(e[axis] as f64);
            for c in 0..m {
                out[c] += w * f[k * m + c];
            }
        }
    }
}

/// `u = sum_k f_k` of one site.
#[inline]
pub fn site_moments<T: Real>(q: usize, m: usize, f: &[T], u: &mut [T]) {
    for c in 0..m {
        let mut s = T::zero();
        for k in 0..q {
            s += f[k * m + c];
        }
        u[c] = s;
    }
}
