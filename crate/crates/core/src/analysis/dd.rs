//! Double-double arithmetic for the Fourier symbols of long compositions.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_traits::{Num, One, Zero};

/// Scalar used by the Fourier analysis: `f64`, or [`DoubleDouble`] when the
/// quantities of interest sit below `f64` rounding.
pub trait FourierScalar: Copy + Num + Neg<Output = Self> + PartialOrd + fmt::Debug + Send + Sync + 'static {
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn sin_cos(self) -> (Self, Self);

    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
}

impl FourierScalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, about 106 bits.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const PI: DoubleDouble = DoubleDouble { hi: std::f64::consts::PI, lo: 1.224_646_799_147_353_2e-16 };

    pub const fn new(hi: f64) -> Self {
        Self { hi, lo: 0.0 }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    /// Exact product of two doubles.
    pub fn mul_f64(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Self::renorm(hi, lo)
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    fn trunc(self) -> Self {
        let hi = self.hi.trunc();
        if hi == self.hi {
            Self::renorm(hi, self.lo.trunc())
        } else {
            Self::new(hi)
        }
    }

    fn round(self) -> Self {
        let hi = self.hi.round();
        if hi == self.hi {
            Self::renorm(hi, self.lo.round())
        } else if (hi - self.hi).abs() == 0.5 {
            // Tie on the leading part: the tail decides.
            let adj = if self.lo > 0.0 && hi < self.hi {
                1.0
            } else if self.lo < 0.0 && hi > self.hi {
                -1.0
            } else {
                0.0
            };
            Self::new(hi + adj)
        } else {
            Self::new(hi)
        }
    }

    fn ldexp(self, e: i32) -> Self {
        let s = 2f64.powi(e);
        Self { hi: self.hi * s, lo: self.lo * s }
    }

    /// Taylor series of `sin` and `cos` for `|x| <= pi/4`.
    fn sin_cos_small(x: Self) -> (Self, Self) {
        let x2 = x * x;
        let eps = 1e-34;
        let mut sin = x;
        let mut cos = Self::one();
        let mut term_s = x;
        let mut term_c = Self::one();
        let mut k = 1.0;
        loop {
            term_c = -(term_c * x2) / Self::new(k * (k + 1.0));
            term_s = -(term_s * x2) / Self::new((k + 1.0) * (k + 2.0));
            cos = cos + term_c;
            sin = sin + term_s;
            k += 2.0;
            if term_c.hi.abs() < eps && term_s.hi.abs() < eps {
                break;
            }
        }
        (sin, cos)
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.hi + self.lo)
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Self::renorm(s, e + f)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        Self::renorm(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self - o * Self::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Self::new(q2);
        let q3 = r.hi / o.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self { hi: q1, lo: q2 } + Self::new(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, o: Self) -> Self {
        self - (self / o).trunc() * o
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self::new(0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        Self::new(1.0)
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        debug_assert_eq!(radix, 10);
        s.parse::<f64>().map(Self::new)
    }
}

impl FourierScalar for DoubleDouble {
    fn from_f64(x: f64) -> Self {
        Self::new(x)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::new(self.hi.sqrt());
        }
        let a = self.hi.sqrt();
        let y = Self::new(a);
        y + (self - y * y) * Self::new(0.5 / a)
    }

    fn sin_cos(self) -> (Self, Self) {
        // x = k pi/2 + r with |r| <= pi/4.
        let half_pi = Self::PI.ldexp(-1);
        let k = (self / half_pi).round();
        let r = self - k * half_pi;
        let (s, c) = Self::sin_cos_small(r);
        match (k.hi as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_keeps_the_tail() {
        let third = DoubleDouble::one() / DoubleDouble::new(3.0);
        let back = third * DoubleDouble::new(3.0) - DoubleDouble::one();
        assert!(back.to_f64().abs() < 1e-31);
        let two = DoubleDouble::new(2.0).sqrt();
        assert!((two * two - DoubleDouble::new(2.0)).to_f64().abs() < 1e-31);
    }

    #[test]
    fn trig_identities() {
        for &x in &[1e-3, 0.3, 1.0, 2.5, -4.0, 10.0] {
            let (s, c) = DoubleDouble::new(x).sin_cos();
            assert!((s * s + c * c - DoubleDouble::one()).to_f64().abs() < 1e-30);
            assert!((s.to_f64() - x.sin()).abs() < 1e-15);
            assert!((c.to_f64() - x.cos()).abs() < 1e-15);
        }
        let (s, _) = (DoubleDouble::PI / DoubleDouble::new(6.0)).sin_cos();
        assert!((s - DoubleDouble::new(0.5)).to_f64().abs() < 1e-31);
    }
}
