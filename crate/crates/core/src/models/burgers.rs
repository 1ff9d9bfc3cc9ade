use crate::entropy::EntropyPack;
use crate::error::{Error, Result};
use crate::models::{KineticModel, VelocitySet};
use crate::scalar::Real;

/// Kinetic entropies of the D1Q2 Burgers model.
///
/// `s_+-(f) = V^2/6 ((1 +- 4f/V)^{3/2} -+ 6f/V - 1)`, duals
/// `s*_+-(p) = p^2/4 +- p^3/(12V)`, convex while `1 +- 4f/V > 0`.
#[derive(Debug, Clone, Copy)]
pub struct BurgersEntropy<T> {
    v: T,
}

impl<T: Real> BurgersEntropy<T> {
    pub fn new(v: T) -> Self {
        Self { v }
    }

    #[inline]
    fn sign(k: usize) -> T {
        if k == 0 {
            T::one()
        } else {
            -T::one()
        }
    }

    /// `1 +- 4f/V`
    #[inline]
    fn radicand(&self, k: usize, f: T) -> T {
        T::one() + Self::sign(k) * T::lit(4.0) * f / self.v
    }
}

impl<T: Real> EntropyPack<T> for BurgersEntropy<T> {
    fn kinetic_entropy(&self, k: usize, f_k: &[T], _u: &[T]) -> Result<T> {
        let a = self.radicand(k, f_k[0]);
        if !(a > T::zero()) {
            return Err(Error::NonConvex { velocity: k });
        }
        let v = self.v;
        Ok(v * v / T::lit(6.0) * (a * a.sqrt() - Self::sign(k) * T::lit(6.0) * f_k[0] / v - T::one()))
    }

    fn kinetic_gradient(&self, k: usize, f_k: &[T], _u: &[T], out: &mut [T]) -> Result<()> {
        let a = self.radicand(k, f_k[0]);
        if !(a > T::zero()) {
            return Err(Error::NonConvex { velocity: k });
        }
        out[0] = Self::sign(k) * self.v * (a.sqrt() - T::one());
        Ok(())
    }

    fn dual_entropy(&self, k: usize, p: &[T]) -> T {
        let p = p[0];
        p * p / T::lit(4.0) + Self::sign(k) * p * p * p / (T::lit(12.0) * self.v)
    }

    fn dual_gradient(&self, k: usize, p: &[T], out: &mut [T]) {
        let p = p[0];
        out[0] = p / T::lit(2.0) + Self::sign(k) * p * p / (T::lit(4.0) * self.v);
    }

    fn macro_entropy(&self, u: &[T]) -> T {
        u[0] * u[0] / T::lit(2.0)
    }

    fn macro_entropy_flux(&self, _axis: usize, u: &[T]) -> T {
        u[0] * u[0] * u[0] / T::lit(3.0)
    }

    fn conjugate(&self, u: &[T], out: &mut [T]) {
        out[0] = u[0];
    }

    fn is_convex_at(&self, k: usize, f_k: &[T], _u: &[T]) -> bool {
        self.radicand(k, f_k[0]) > T::zero()
    }

    /// With `a = sqrt(1 +- 4 base/V)` and `b = sqrt(1 +- 4 (base+delta)/V)`
    /// the divergence is `(8 delta^2 / 3) (b + a/2) / (a + b)^2`.
    fn bregman(&self, k: usize, _u: &[T], base: &[T], delta: &[T]) -> Result<T> {
        let ra = self.radicand(k, base[0]);
        let rb = self.radicand(k, base[0] + delta[0]);
        if !(ra > T::zero()) || !(rb > T::zero()) {
            return Err(Error::NonConvex { velocity: k });
        }
        let (a, b) = (ra.sqrt(), rb.sqrt());
        let d = delta[0];
        Ok(T::lit(8.0) / T::lit(3.0) * d * d * (b + a / T::lit(2.0)) / ((a + b) * (a + b)))
    }
}

/// Inviscid Burgers `d_t u + d_x (u^2/2) = 0` on D1Q2.
#[derive(Debug, Clone)]
pub struct Burgers1D<T> {
    v: T,
    entropy: BurgersEntropy<T>,
}

impl<T: Real> Burgers1D<T> {
    pub fn new(v: T) -> Self {
        Self { v, entropy: BurgersEntropy::new(v) }
    }
}

impl<T: Real> KineticModel<T> for Burgers1D<T> {
    fn name(&self) -> &'static str {
        "burgers-1d"
    }

    fn velocity_set(&self) -> VelocitySet {
        VelocitySet::D1Q2
    }

    fn components(&self) -> usize {
        1
    }

    fn speed(&self) -> T {
        self.v
    }

    fn flux(&self, _axis: usize, u: &[T], out: &mut [T]) {
        out[0] = u[0] * u[0] / T::lit(2.0);
    }

    fn max_wave_speed(&self, u: &[T]) -> Result<T> {
        Ok(u[0].abs())
    }

    fn entropy(&self) -> Option<&dyn EntropyPack<T>> {
        Some(&self.entropy)
    }
}

/// `d_t u + d_x (u^2/2) + d_y (3u^2/10) = 0` on D2Q4.
#[derive(Debug, Clone)]
pub struct Burgers2D<T> {
    v: T,
}

impl<T: Real> Burgers2D<T> {
    pub fn new(v: T) -> Self {
        Self { v }
    }
}

impl<T: Real> KineticModel<T> for Burgers2D<T> {
    fn name(&self) -> &'static str {
        "burgers-2d"
    }

    fn velocity_set(&self) -> VelocitySet {
        VelocitySet::D2Q4
    }

    fn components(&self) -> usize {
        1
    }

    fn speed(&self) -> T {
        self.v
    }

    fn flux(&self, axis: usize, u: &[T], out: &mut [T]) {
        let w = if axis == 0 { T::lit(0.5) } else { T::lit(0.3) };
        out[0] = w * u[0] * u[0];
    }

    fn max_wave_speed(&self, u: &[T]) -> Result<T> {
        Ok(u[0].abs())
    }
}
