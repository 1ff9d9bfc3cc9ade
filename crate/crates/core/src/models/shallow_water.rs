use crate::entropy::EntropyPack;
use crate::error::{Error, Result};
use crate::models::cubic::real_cubic_roots;
use crate::models::{KineticModel, VelocitySet};
use crate::scalar::Real;

/// Kinetic entropies of the D1Q2 shallow water model.
///
/// The duals are `s*_+-(p) = (V +- p2)(2 p1 + p2^2)^2 / (16 g V)`. The primal
/// entropies have no printable closed form; they are evaluated through the
/// conjugate map `f -> p` solving `grad s*_+-(p) = f`, which reduces to a
/// cubic in `p2`.
#[derive(Debug, Clone, Copy)]
pub struct ShallowWaterEntropy<T> {
    g: T,
    v: T,
}

const ROUND_TRIP_TOL: f64 = 1e-9;

impl<T: Real> ShallowWaterEntropy<T> {
    pub fn new(g: T, v: T) -> Self {
        Self { g, v }
    }

    #[inline]
    fn sign(k: usize) -> T {
        if k == 0 {
            T::one()
        } else {
            -T::one()
        }
    }

    /// `p1` as a function of `p2` from the first gradient equation.
    fn p1_of(&self, sign: T, f1: T, p2: T) -> T {
        let v = self.v;
        (T::lit(4.0) * v * self.g * f1 - v * p2 * p2 - sign * p2 * p2 * p2) / (T::lit(2.0) * (v + sign * p2))
    }

    /// Coefficients `[a3, a2, a1, a0]` of the cubic in `p2`.
    ///
    /// Obtained by eliminating `p1` from `grad s*(p) = f`:
    /// `(f1 p2 - f2)(V +- p2)^2 +- g V f1^2 = 0`.
    pub fn cubic_coefficients(&self, k: usize, f: &[T]) -> [T; 4] {
        let s = Self::sign(k);
        let (f1, f2, v, g) = (f[0], f[1], self.v, self.g);
        let two = T::lit(2.0);
        [f1, s * two * v * f1 - f2, v * v * f1 - s * two * v * f2, -v * v * f2 + s * g * v * f1 * f1]
    }

    /// Convexity of `s*_k` at `p`: `c > 0`, `0 < w < 2 c^2` with
    /// `c = V +- p2`, `w = 2 p1 + p2^2`.
    fn dual_convex(&self, k: usize, p: [T; 2]) -> bool {
        let c = self.v + Self::sign(k) * p[1];
        let w = T::lit(2.0) * p[0] + p[1] * p[1];
        c > T::zero() && w > T::zero() && w < T::lit(2.0) * c * c
    }

    /// Conjugate variables `p_k(f_k)`, choosing the cubic root closest to `hint`.
    ///
    /// The hint is the macroscopic velocity of the site; at equilibrium the
    /// selected branch returns `(g h - u^2/2, u)`.
    pub fn conjugate_of(&self, k: usize, f: &[T], hint: T) -> Result<[T; 2]> {
        let [a3, a2, a1, a0] = self.cubic_coefficients(k, f);
        let s = Self::sign(k);
        let best = real_cubic_roots(a3, a2, a1, a0)
            .into_iter()
            .filter(|&p2| self.v + s * p2 > T::zero())
            .min_by(|x, y| (*x - hint).abs().partial_cmp(&(*y - hint).abs()).unwrap_or(std::cmp::Ordering::Equal));
        let p2 = best.ok_or_else(|| {
            Error::NoConjugateRoot(format!("no admissible cubic root for velocity {k} at f = ({}, {})", f[0], f[1]))
        })?;
        let p = [self.p1_of(s, f[0], p2), p2];
        let mut back = [T::zero(); 2];
        self.dual_gradient(k, &p, &mut back);
        let scale = T::one() + f[0].abs() + f[1].abs();
        let residual = (back[0] - f[0]).abs() + (back[1] - f[1]).abs();
        if !(residual <= T::lit(ROUND_TRIP_TOL) * scale) {
            return Err(Error::NoConjugateRoot(format!("round-trip residual {residual} for velocity {k}")));
        }
        Ok(p)
    }

    fn hint(u: &[T]) -> T {
        if u[0] > T::zero() {
            u[1] / u[0]
        } else {
            T::zero()
        }
    }

    fn convex_conjugate(&self, k: usize, f_k: &[T], u: &[T]) -> Result<[T; 2]> {
        let p = self.conjugate_of(k, f_k, Self::hint(u))?;
        if !self.dual_convex(k, p) {
            return Err(Error::NonConvex { velocity: k });
        }
        Ok(p)
    }
}

impl<T: Real> EntropyPack<T> for ShallowWaterEntropy<T> {
    fn kinetic_entropy(&self, k: usize, f_k: &[T], u: &[T]) -> Result<T> {
        let p = self.convex_conjugate(k, f_k, u)?;
        Ok(p[0] * f_k[0] + p[1] * f_k[1] - self.dual_entropy(k, &p))
    }

    fn kinetic_gradient(&self, k: usize, f_k: &[T], u: &[T], out: &mut [T]) -> Result<()> {
        let p = self.convex_conjugate(k, f_k, u)?;
        out[..2].copy_from_slice(&p);
        Ok(())
    }

    fn dual_entropy(&self, k: usize, p: &[T]) -> T {
        let c = self.v + Self::sign(k) * p[1];
        let w = T::lit(2.0) * p[0] + p[1] * p[1];
        c * w * w / (T::lit(16.0) * self.g * self.v)
    }

    fn dual_gradient(&self, k: usize, p: &[T], out: &mut [T]) {
        let s = Self::sign(k);
        let c = self.v + s * p[1];
        let w = T::lit(2.0) * p[0] + p[1] * p[1];
        let den = T::lit(16.0) * self.g * self.v;
        out[0] = T::lit(4.0) * c * w / den;
        out[1] = (s * w * w + T::lit(4.0) * c * w * p[1]) / den;
    }

    fn macro_entropy(&self, u: &[T]) -> T {
        let h = u[0];
        let vel = u[1] / h;
        h * vel * vel / T::lit(2.0) + self.g * h * h / T::lit(2.0)
    }

    fn macro_entropy_flux(&self, _axis: usize, u: &[T]) -> T {
        let h = u[0];
        let vel = u[1] / h;
        h * vel * vel * vel / T::lit(2.0) + self.g * h * h * vel
    }

    fn conjugate(&self, u: &[T], out: &mut [T]) {
        let vel = u[1] / u[0];
        out[0] = self.g * u[0] - vel * vel / T::lit(2.0);
        out[1] = vel;
    }

    fn is_convex_at(&self, k: usize, f_k: &[T], u: &[T]) -> bool {
        self.convex_conjugate(k, f_k, u).is_ok()
    }

    /// Evaluated as the dual divergence `s*(p_eq) - s*(p') - grad s*(p') . (p_eq - p')`
    /// with `p' = p_k(base + delta)`, expanded exactly in `p_eq - p'`.
    fn bregman(&self, k: usize, u: &[T], base: &[T], delta: &[T]) -> Result<T> {
        let mut p_eq = [T::zero(); 2];
        self.conjugate(u, &mut p_eq);
        let shifted = [base[0] + delta[0], base[1] + delta[1]];
        let p = self.convex_conjugate(k, &shifted, u)?;
        let s = Self::sign(k);
        let (d1, d2) = (p_eq[0] - p[0], p_eq[1] - p[1]);
        let two = T::lit(2.0);
        let c = self.v + s * p[1];
        let w = two * p[0] + p[1] * p[1];
        let dw = two * d1 + two * p[1] * d2 + d2 * d2;
        let num = c * (two * w * d2 * d2 + dw * dw) + s * d2 * (two * w * dw + dw * dw);
        Ok(num / (T::lit(16.0) * self.g * self.v))
    }
}

/// Shallow water `u = (h, hu)`, `phi = (hu, hu^2 + g h^2/2)` on D1Q2.
#[derive(Debug, Clone)]
pub struct ShallowWater1D<T> {
    g: T,
    v: T,
    entropy: ShallowWaterEntropy<T>,
}

impl<T: Real> ShallowWater1D<T> {
    pub fn new(g: T, v: T) -> Self {
        Self { g, v, entropy: ShallowWaterEntropy::new(g, v) }
    }

    pub fn gravity(&self) -> T {
        self.g
    }

    pub fn pack(&self) -> &ShallowWaterEntropy<T> {
        &self.entropy
    }
}

impl<T: Real> KineticModel<T> for ShallowWater1D<T> {
    fn name(&self) -> &'static str {
        "shallow-water-1d"
    }

    fn velocity_set(&self) -> VelocitySet {
        VelocitySet::D1Q2
    }

    fn components(&self) -> usize {
        2
    }

    fn speed(&self) -> T {
        self.v
    }

    fn flux(&self, _axis: usize, u: &[T], out: &mut [T]) {
        let (h, hu) = (u[0], u[1]);
        out[0] = hu;
        out[1] = if h == T::zero() { T::zero() } else { hu * hu / h } + self.g * h * h / T::lit(2.0);
    }

    fn max_wave_speed(&self, u: &[T]) -> Result<T> {
        if !(u[0] > T::zero()) {
            return Err(Error::Inadmissible(format!("water height {} <= 0", u[0])));
        }
        Ok((u[1] / u[0]).abs() + (self.g * u[0]).sqrt())
    }

    fn entropy(&self) -> Option<&dyn EntropyPack<T>> {
        Some(&self.entropy)
    }
}
