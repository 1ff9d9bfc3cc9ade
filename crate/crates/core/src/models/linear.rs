use crate::entropy::EntropyPack;
use crate::error::{Error, Result};
use crate::models::{KineticModel, VelocitySet};
use crate::scalar::Real;

/// Quadratic kinetic entropies `s_k(f) = c_k f^2` of a scalar linear model.
///
/// The duals are `s*_k(p) = p^2 / (4 c_k)`; the macroscopic pair is
/// `S = u^2 / 2`, `G^j = a_j u^2 / 2`.
#[derive(Debug, Clone)]
pub struct QuadraticEntropy<T> {
    coeffs: Vec<T>,
    advection: [T; 2],
}

impl<T: Real> QuadraticEntropy<T> {
    /// D1Q2: `c_+- = V / (V +- a)`.
    pub fn d1q2(a: T, v: T) -> Self {
        Self { coeffs: vec![v / (v + a), v / (v - a)], advection: [a, T::zero()] }
    }

    /// D2Q4: `c_{+-,x/y} = 2V / (V +- 2 a_{x/y})`.
    pub fn d2q4(ax: T, ay: T, v: T) -> Self {
        let two = T::lit(2.0);
        Self {
            coeffs: vec![
                two * v / (v + two * ax),
                two * v / (v + two * ay),
                two * v / (v - two * ax),
                two * v / (v - two * ay),
            ],
            advection: [ax, ay],
        }
    }

    pub fn coefficient(&self, k: usize) -> T {
        self.coeffs[k]
    }

    fn convex(&self, k: usize) -> bool {
        let c = self.coeffs[k];
        c > T::zero() && c.is_finite()
    }
}

impl<T: Real> EntropyPack<T> for QuadraticEntropy<T> {
    fn kinetic_entropy(&self, k: usize, f_k: &[T], _u: &[T]) -> Result<T> {
        if !self.convex(k) {
            return Err(Error::NonConvex { velocity: k });
        }
        Ok(self.coeffs[k] * f_k[0] * f_k[0])
    }

    fn kinetic_gradient(&self, k: usize, f_k: &[T], _u: &[T], out: &mut [T]) -> Result<()> {
        if !self.convex(k) {
            return Err(Error::NonConvex { velocity: k });
        }
        out[0] = T::lit(2.0) * self.coeffs[k] * f_k[0];
        Ok(())
    }

    fn dual_entropy(&self, k: usize, p: &[T]) -> T {
        p[0] * p[0] / (T::lit(4.0) * self.coeffs[k])
    }

    fn dual_gradient(&self, k: usize, p: &[T], out: &mut [T]) {
        out[0] = p[0] / (T::lit(2.0) * self.coeffs[k]);
    }

    fn macro_entropy(&self, u: &[T]) -> T {
        u[0] * u[0] / T::lit(2.0)
    }

    fn macro_entropy_flux(&self, axis: usize, u: &[T]) -> T {
        self.advection[axis] * u[0] * u[0] / T::lit(2.0)
    }

    fn conjugate(&self, u: &[T], out: &mut [T]) {
        out[0] = u[0];
    }

    fn is_convex_at(&self, k: usize, _f_k: &[T], _u: &[T]) -> bool {
        self.convex(k)
    }

    fn bregman(&self, k: usize, _u: &[T], _base: &[T], delta: &[T]) -> Result<T> {
        if !self.convex(k) {
            return Err(Error::NonConvex { velocity: k });
        }
        Ok(self.coeffs[k] * delta[0] * delta[0])
    }
}

/// Linear advection `d_t u + a d_x u = 0` on D1Q2.
#[derive(Debug, Clone)]
pub struct LinearAdvection1D<T> {
    a: T,
    v: T,
    entropy: QuadraticEntropy<T>,
}

impl<T: Real> LinearAdvection1D<T> {
    pub fn new(a: T, v: T) -> Self {
        Self { a, v, entropy: QuadraticEntropy::d1q2(a, v) }
    }

    pub fn velocity(&self) -> T {
        self.a
    }
}

impl<T: Real> KineticModel<T> for LinearAdvection1D<T> {
    fn name(&self) -> &'static str {
        "linear-advection-1d"
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
        out[0] = self.a * u[0];
    }

    fn max_wave_speed(&self, _u: &[T]) -> Result<T> {
        Ok(self.a.abs())
    }

    fn entropy(&self) -> Option<&dyn EntropyPack<T>> {
        Some(&self.entropy)
    }
}

/// Linear advection with velocity `(a_x, a_y)` on D2Q4.
#[derive(Debug, Clone)]
pub struct LinearAdvection2D<T> {
    a: [T; 2],
    v: T,
    entropy: QuadraticEntropy<T>,
}

impl<T: Real> LinearAdvection2D<T> {
    pub fn new(ax: T, ay: T, v: T) -> Self {
        Self { a: [ax, ay], v, entropy: QuadraticEntropy::d2q4(ax, ay, v) }
    }
}

impl<T: Real> KineticModel<T> for LinearAdvection2D<T> {
    fn name(&self) -> &'static str {
        "linear-advection-2d"
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
        out[0] = self.a[axis] * u[0];
    }

    fn max_wave_speed(&self, _u: &[T]) -> Result<T> {
        Ok(self.a[0].abs().max(self.a[1].abs()))
    }

    fn entropy(&self) -> Option<&dyn EntropyPack<T>> {
        Some(&self.entropy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wave_speed_is_advection_speed() {
        let m = LinearAdvection1D::<f64>::new(-0.3, 1.0);
        assert_eq!(m.max_wave_speed(&[5.0]).unwrap(), 0.3);
        let m2 = LinearAdvection2D::<f64>::new(0.1, -0.4, 1.0);
        assert_eq!(m2.max_wave_speed(&[1.0]).unwrap(), 0.4);
    }

    #[test]
    fn d2q4_duals_match_printed_form() {
        // s*_{+-,x/y}(p) = (1/2 +- a/V) p^2 / 4
        let (ax, ay, v) = (0.2, -0.1, 1.0);
        let pack = QuadraticEntropy::<f64>::d2q4(ax, ay, v);
        let p = [0.7];
        let expected = [
            (0.5 + ax / v) * 0.49 / 4.0,
            (0.5 + ay / v) * 0.49 / 4.0,
            (0.5 - ax / v) * 0.49 / 4.0,
            (0.5 - ay / v) * 0.49 / 4.0,
        ];
        for (k, e) in expected.iter().enumerate() {
            assert!((pack.dual_entropy(k, &p) - e).abs() < 1e-15);
        }
    }
}
