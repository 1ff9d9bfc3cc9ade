use crate::error::{Error, Result};
use crate::models::{KineticModel, VelocitySet};
use crate::scalar::Real;

/// Compressible Euler `u = (rho, rho u, rho v, E)` with the polytropic
/// closure `E = rho (u^2 + v^2)/2 + p/(gamma - 1)`, on D2Q4.
///
/// No kinetic entropies are attached: only fixed-parameter relaxation is
/// available for this model.
#[derive(Debug, Clone)]
pub struct Euler2D<T> {
    gamma: T,
    v: T,
}

impl<T: Real> Euler2D<T> {
    pub fn new(gamma: T, v: T) -> Self {
        Self { gamma, v }
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn pressure(&self, u: &[T]) -> T {
        let rho = u[0];
        let kinetic = (u[1] * u[1] + u[2] * u[2]) / (T::lit(2.0) * rho);
        (self.gamma - T::one()) * (u[3] - kinetic)
    }

    /// Conserved state from primitive `(rho, u, v, p)`.
    pub fn conserved(&self, rho: T, vx: T, vy: T, p: T) -> [T; 4] {
        let e = rho * (vx * vx + vy * vy) / T::lit(2.0) + p / (self.gamma - T::one());
        [rho, rho * vx, rho * vy, e]
    }
}

impl<T: Real> KineticModel<T> for Euler2D<T> {
    fn name(&self) -> &'static str {
        "euler-2d"
    }

    fn velocity_set(&self) -> VelocitySet {
        VelocitySet::D2Q4
    }

    fn components(&self) -> usize {
        4
    }

    fn speed(&self) -> T {
        self.v
    }

    fn flux(&self, axis: usize, u: &[T], out: &mut [T]) {
        let rho = u[0];
        let p = self.pressure(u);
        let vel = [u[1] / rho, u[2] / rho];
        let vn = vel[axis];
        out[0] = u[1 + axis];
        out[1] = u[1] * vn;
        out[2] = u[2] * vn;
        out[1 + axis] += p;
        out[3] = vn * (u[3] + p);
    }

    fn max_wave_speed(&self, u: &[T]) -> Result<T> {
        let rho = u[0];
        if !(rho > T::zero()) {
            return Err(Error::Inadmissible(format!("density {rho} <= 0")));
        }
        let p = self.pressure(u);
        if !(p > T::zero()) {
            return Err(Error::Inadmissible(format!("pressure {p} <= 0")));
        }
        let speed = ((u[1] * u[1] + u[2] * u[2]) / (rho * rho)).sqrt();
        Ok(speed + (self.gamma * p / rho).sqrt())
    }
}
