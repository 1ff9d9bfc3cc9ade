use crate::scalar::Real;

fn horner<T: Real>(coeffs: [T; 4], x: T) -> (T, T) {
    let [a3, a2, a1, a0] = coeffs;
    let p = ((a3 * x + a2) * x + a1) * x + a0;
    let dp = (T::lit(3.0) * a3 * x + T::lit(2.0) * a2) * x + a1;
    (p, dp)
}

fn polish<T: Real>(coeffs: [T; 4], mut x: T) -> T {
    for _ in 0..3 {
        let (p, dp) = horner(coeffs, x);
        if dp == T::zero() || !dp.is_finite() {
            break;
        }
        let next = x - p / dp;
        if !next.is_finite() || horner(coeffs, next).0.abs() >= p.abs() {
            break;
        }
        x = next;
    }
    x
}

/// Real roots of `a3 x^3 + a2 x^2 + a1 x + a0`, each refined by Newton steps.
///
/// Closed-form trigonometric/Cardano evaluation; degenerates to the quadratic
/// or linear formula when the leading coefficients vanish.
pub fn real_cubic_roots<T: Real>(a3: T, a2: T, a1: T, a0: T) -> Vec<T> {
    let scale = a3.abs().max(a2.abs()).max(a1.abs()).max(a0.abs());
    if scale == T::zero() {
        return Vec::new();
    }
    let tiny = T::epsilon() * T::lit(8.0) * scale;
    if a3.abs() <= tiny {
        return real_quadratic_roots(a2, a1, a0, tiny);
    }
    let coeffs = [a3, a2, a1, a0];
    let b = a2 / a3;
    let c = a1 / a3;
    let d = a0 / a3;
    let three = T::lit(3.0);
    let shift = b / three;
    let p = c - b * b / three;
    let q = T::lit(2.0) * b * b * b / T::lit(27.0) - b * c / three + d;

    let mut roots = Vec::with_capacity(3);
    let disc = q * q / T::lit(4.0) + p * p * p / T::lit(27.0);
    if p < T::zero() && disc <= T::zero() {
        let r = T::lit(2.0) * (-p / three).sqrt();
        let arg = (three * q / (T::lit(2.0) * p) * (-three / p).sqrt()).max(-T::one()).min(T::one());
        let theta = arg.acos() / three;
        let two_pi_3 = T::lit(2.0) * T::PI() / three;
        for k in 0..3 {
            roots.push(r * (theta - two_pi_3 * T::count(k)).cos() - shift);
        }
    } else {
        let sq = disc.max(T::zero()).sqrt();
        let a = -(q.signum()) * (q.abs() / T::lit(2.0) + sq).cbrt();
        let t = if a == T::zero() { T::zero() } else { a - p / (three * a) };
        roots.push(t - shift);
    }
    let mut out: Vec<T> = roots.into_iter().map(|x| polish(coeffs, x)).collect();
    out.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    out
}

fn real_quadratic_roots<T: Real>(a2: T, a1: T, a0: T, tiny: T) -> Vec<T> {
    if a2.abs() <= tiny {
        if a1.abs() <= tiny {
            return Vec::new();
        }
        return vec![-a0 / a1];
    }
    let disc = a1 * a1 - T::lit(4.0) * a2 * a0;
    if disc < T::zero() {
        return Vec::new();
    }
    let s = disc.sqrt();
    let qq = -(a1 + a1.signum() * s) / T::lit(2.0);
    let mut out = vec![qq / a2];
    if qq != T::zero() {
        out.push(a0 / qq);
    } else {
        out.push(T::zero());
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    out
}
