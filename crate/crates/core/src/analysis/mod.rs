//! Von Neumann analysis of the schemes applied to linear D1Q2 transport.
//!
//! With `u(x) = e^{i xi x}` a shift of `c` cells multiplies `f_+` by
//! `e^{-i c xi dx}` and `f_-` by `e^{+i c xi dx}`; a relaxation acts as
//! `(1 - omega) I + omega E 1^T` with `E = ((1 + a/V)/2, (1 - a/V)/2)`.
//! Symbols are ordered `(f_+, f_-)`.

mod dd;
mod dispersion;
mod trace_poly;

pub use dd::{DoubleDouble, FourierScalar};
pub use dispersion::{dispersion_expansion, DispersionConfig, DispersionReport, PowerFit};
pub use trace_poly::{trace_poly_coefficient, trace_polynomial, trace_polynomial_dd};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::operators::{Action, RelaxSlot, StepPlan, Variant};

pub type Mat2<S> = [[Complex<S>; 2]; 2];

fn mat_mul<S: FourierScalar>(a: &Mat2<S>, b: &Mat2<S>) -> Mat2<S> {
    let mut out = [[Complex::new(S::zero(), S::zero()); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn identity<S: FourierScalar>() -> Mat2<S> {
    let z = Complex::new(S::zero(), S::zero());
    let o = Complex::new(S::one(), S::zero());
    [[o, z], [z, o]]
}

/// Fourier symbol of one composed step at a single frequency.
#[derive(Debug, Clone, Copy)]
pub struct AmplificationMatrix<S> {
    pub m: Mat2<S>,
    pub xi_dx: f64,
    /// `C = a dt / (kappa dx)`.
    pub courant: f64,
    pub variant: Variant,
}

impl<S: FourierScalar> AmplificationMatrix<S> {
    pub fn trace(&self) -> Complex<S> {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex<S> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Roots of `z^2 - tr z + det`.
    pub fn eigenvalues(&self) -> [Complex<S>; 2] {
        let two = S::from_f64(2.0);
        let half_tr = self.trace() / Complex::new(two, S::zero());
        let disc = csqrt(half_tr * half_tr - self.det());
        [half_tr + disc, half_tr - disc]
    }

    /// `(1, 1) M (theta, 1 - theta)^T`: the conserved moment after one step
    /// from a weighted initial datum.
    pub fn moment_response(&self, theta: S) -> Complex<S> {
        let w = [Complex::new(theta, S::zero()), Complex::new(S::one() - theta, S::zero())];
        (0..2).map(|i| self.m[0][i] * w[i] + self.m[1][i] * w[i]).fold(Complex::new(S::zero(), S::zero()), |a, b| a + b)
    }
}

/// Principal complex square root without cancellation.
pub fn csqrt<S: FourierScalar>(z: Complex<S>) -> Complex<S> {
    let zero = S::zero();
    if z.re == zero && z.im == zero {
        return z;
    }
    let half = S::from_f64(0.5);
    let r = (z.re * z.re + z.im * z.im).sqrt();
    if z.re >= zero {
        let t = ((r + z.re) * half).sqrt();
        Complex::new(t, z.im / (t + t))
    } else {
        let t = ((r - z.re) * half).sqrt();
        let re = z.im.abs() / (t + t);
        Complex::new(re, if z.im < zero { -t } else { t })
    }
}

/// `e^{i x}`.
pub fn cis<S: FourierScalar>(x: S) -> Complex<S> {
    let (s, c) = x.sin_cos();
    Complex::new(c, s)
}

/// Fourier symbol of `variant` for `d_t u + a d_x u = 0` on D1Q2 with
/// kinetic speed `v`, every reflection at `omega = 2`.
pub fn amplification<S: FourierScalar>(
    variant: Variant,
    a: f64,
    v: f64,
    kappa: i64,
    xi_dx: S,
) -> Result<AmplificationMatrix<S>> {
    if !(v > 0.0) || !a.is_finite() {
        return Err(Error::Config(format!("invalid linear model a = {a}, V = {v}")));
    }
    let plan = StepPlan::new(variant, kappa)?;
    let courant = a * (variant.travel_per_step() as f64) / v;
    Ok(compose(&plan, a, v, xi_dx, courant, variant))
}

pub(crate) fn compose<S: FourierScalar>(
    plan: &StepPlan,
    a: f64,
    v: f64,
    xi_dx: S,
    courant: f64,
    variant: Variant,
) -> AmplificationMatrix<S> {
    let ratio = S::from_f64(a) / S::from_f64(v);
    let half = S::from_f64(0.5);
    let e = [(S::one() + ratio) * half, (S::one() - ratio) * half];
    let relax_matrix = |omega: S| -> Mat2<S> {
        let keep = S::one() - omega;
        let mut r = [[Complex::new(S::zero(), S::zero()); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let diag = if i == j { keep } else { S::zero() };
                r[i][j] = Complex::new(diag + omega * e[i], S::zero());
            }
        }
        r
    };
    let reflection = relax_matrix(S::from_f64(2.0));
    let projection = relax_matrix(S::one());
    let mut m = identity::<S>();
    for action in &plan.actions {
        let step = match *action {
            Action::Transport(c) => {
                let phase = cis(-(S::from_f64(c as f64) * xi_dx));
                let z = Complex::new(S::zero(), S::zero());
                [[phase, z], [z, phase.conj()]]
            }
            Action::Relax(RelaxSlot::Reflection) => reflection,
            Action::Relax(RelaxSlot::Projection) => projection,
        };
        m = mat_mul(&step, &m);
    }
    AmplificationMatrix { m, xi_dx: xi_dx.to_f64(), courant, variant }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityFlag {
    Stable,
    /// `|tr| = 2` within tolerance away from the exceptional frequencies.
    Marginal,
    /// `|tr| = 2` at `xi dx` in `{0, pi/(2 kappa)}`, where the minimal
    /// polynomial is simple.
    Exceptional,
    Unstable,
}

impl StabilityFlag {
    pub fn is_violation(self) -> bool {
        self == StabilityFlag::Unstable
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScanRow {
    pub a_over_v: f64,
    pub xi_dx: f64,
    pub trace: Complex<f64>,
    pub det_abs: f64,
    pub spectral_radius: f64,
    pub flag: StabilityFlag,
}

#[derive(Debug, Clone, Copy)]
pub struct RatioSummary {
    pub a_over_v: f64,
    pub max_abs_trace: f64,
    pub xi_at_max: f64,
    pub violations: usize,
    pub marginal: usize,
    /// Frequency of the largest violation, if any.
    pub critical_xi: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub variant: Variant,
    pub kappa: i64,
    pub rows: Vec<ScanRow>,
    pub summaries: Vec<RatioSummary>,
}

impl StabilityReport {
    pub fn summary(&self, a_over_v: f64) -> Option<&RatioSummary> {
        self.summaries.iter().find(|s| (s.a_over_v - a_over_v).abs() < 1e-12)
    }
}

/// Tolerance on `|tr| - 2` and on `rho - 1`.
pub const STABILITY_TOL: f64 = 1e-10;

/// `sin(kappa xi dx)` in `{0, +-1}`: `xi dx` is `0` or `pi/(2 kappa)` up to
/// the symmetries of the symbol.
fn is_exceptional(xi_dx: f64, kappa: i64) -> bool {
    let r = (kappa as f64) * xi_dx.abs() / std::f64::consts::FRAC_PI_2;
    (r - r.round()).abs() < 1e-9
}

/// Evenly spaced frequencies on `[0, pi]`.
pub fn frequency_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| std::f64::consts::PI * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Trace bound `|tr| <= 2` over every `(a/V, xi dx)` pair.
///
/// When `det = 1` the eigenvalues stay on the unit circle exactly when the
/// real trace satisfies `|tr| <= 2`; other schemes are judged by their
/// spectral radius.
pub fn stability_scan(variant: Variant, kappa: i64, ratios: &[f64], xis: &[f64]) -> Result<StabilityReport> {
    if ratios.is_empty() || xis.is_empty() {
        return Err(Error::Config("stability scan needs nonempty grids".into()));
    }
    let plan = StepPlan::new(variant, kappa)?;
    let mut rows = Vec::with_capacity(ratios.len() * xis.len());
    let mut summaries = Vec::with_capacity(ratios.len());
    for &r in ratios {
        let mut summary = RatioSummary {
            a_over_v: r,
            max_abs_trace: 0.0,
            xi_at_max: 0.0,
            violations: 0,
            marginal: 0,
            critical_xi: None,
        };
        let mut worst = 0.0;
        for &xi in xis {
            let amp = compose::<f64>(&plan, r, 1.0, xi, r * variant.travel_per_step() as f64, variant);
            let tr = amp.trace();
            let det = amp.det();
            let rho = amp.eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
            let unit_det = (det - 1.0).norm() < 1e-9;
            let excess = if unit_det { tr.norm() - 2.0 } else { rho - 1.0 };
            let flag = if excess > STABILITY_TOL {
                StabilityFlag::Unstable
            } else if unit_det && excess.abs() <= STABILITY_TOL {
                if is_exceptional(xi, kappa) {
                    StabilityFlag::Exceptional
                } else {
                    StabilityFlag::Marginal
                }
            } else {
                StabilityFlag::Stable
            };
            match flag {
                StabilityFlag::Unstable => {
                    summary.violations += 1;
                    // The trace is even in sin(kappa xi dx), so the peak repeats at
                    // mirrored frequencies; ties resolve to the first one on the grid.
                    if excess > worst * (1.0 + 1e-9) {
                        worst = excess;
                        summary.critical_xi = Some(xi);
                    }
                }
                StabilityFlag::Marginal => summary.marginal += 1,
                _ => {}
            }
            if tr.norm() > summary.max_abs_trace {
                summary.max_abs_trace = tr.norm();
                summary.xi_at_max = xi;
            }
            rows.push(ScanRow { a_over_v: r, xi_dx: xi, trace: tr, det_abs: det.norm(), spectral_radius: rho, flag });
        }
        summaries.push(summary);
    }
    Ok(StabilityReport { variant, kappa, rows, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn identity_at_zero_frequency() {
        let amp = amplification::<f64>(Variant::I, 0.5, 1.2, 1, 0.0).unwrap();
        let id = identity::<f64>();
        for i in 0..2 {
            for j in 0..2 {
                assert!((amp.m[i][j] - id[i][j]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn unit_determinant_and_real_trace() {
        for &xi in &[0.1, 0.7, 2.0, 3.0] {
            let amp = amplification::<f64>(Variant::I, 0.3, 1.0, 1, xi).unwrap();
            assert!((amp.det() - 1.0).norm() < 1e-12);
            assert!(amp.trace().im.abs() < 1e-12);
        }
    }

    #[test]
    fn csqrt_branches() {
        for z in [Complex::new(4.0, 0.0), Complex::new(-4.0, 0.0), Complex::new(-1.0, -1e-20), Complex::new(3.0, 4.0)] {
            let s = csqrt(z);
            assert!((s * s - z).norm() < 1e-14 * (1.0 + z.norm()));
            assert!(s.re >= 0.0);
        }
    }

    #[test]
    fn exceptional_frequencies() {
        assert!(is_exceptional(0.0, 1));
        assert!(is_exceptional(PI / 2.0, 1));
        assert!(is_exceptional(PI / 4.0, 2));
        assert!(!is_exceptional(PI / 4.0, 1));
    }

    #[test]
    fn sonic_ratio_quarter_frequency_matrix() {
        // a = V, xi dx = pi/4: both reflections swap the streams exactly.
        let amp = amplification::<f64>(Variant::I, 1.0, 1.0, 1, PI / 4.0).unwrap();
        let want =
            [[Complex::new(1.0, 0.0), Complex::new(0.0, 32.0)], [Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((amp.m[i][j] - want[i][j]).norm() < 1e-12, "entry ({i},{j}) = {}", amp.m[i][j]);
            }
        }
    }

    #[test]
    fn trace_polynomial_matches_matrix_product() {
        let mut worst: f64 = 0.0;
        for i in 0..50 {
            let c = -24.0 + 48.0 * i as f64 / 49.0;
            for j in 0..50 {
                let xi = PI * j as f64 / 49.0;
                let amp = amplification::<DoubleDouble>(Variant::I, c / 24.0, 1.0, 1, DoubleDouble::new(xi)).unwrap();
                let tr = amp.trace().re.to_f64();
                let poly = trace_polynomial(c, xi.sin());
                worst = worst.max((poly - tr).abs() / tr.abs().max(1.0));
            }
        }
        assert!(worst < 1e-9, "worst relative gap {worst:e}");
    }

    #[test]
    fn scan_bound_and_sonic_violation() {
        let xis = frequency_grid(2001);
        let report = stability_scan(Variant::I, 1, &[0.0, 0.5, 0.9, 1.02], &xis).unwrap();
        for r in [0.0, 0.5, 0.9] {
            assert_eq!(report.summary(r).unwrap().violations, 0, "a/V = {r}");
        }
        let s = report.summary(1.02).unwrap();
        assert!(s.violations > 0);
        assert!((s.critical_xi.unwrap() - PI / 4.0).abs() < 0.1, "critical xi {:?}", s.critical_xi);
    }

    #[test]
    fn odd_projection_count_breaks_unit_determinant() {
        let amp = amplification::<f64>(Variant::II, 0.4, 1.0, 1, 0.3).unwrap();
        assert!(amp.det().norm() < 1e-12);
    }

    #[test]
    fn leading_dispersion_coefficients() {
        let (a, v) = (0.5, 1.2);
        let cfg = DispersionConfig::default();
        let one = dispersion_expansion(Variant::I, a, v, None, &cfg).unwrap();
        let k = 24.0 * a.powi(4) - 25.0 * a * a * v * v + v.powi(4);
        let want = (a * k).abs() / 622_080.0;
        assert_eq!(one.z1.rounded, 5);
        assert!((one.z1.magnitude() - want).abs() < 0.05 * want, "{} vs {want}", one.z1.magnitude());
        let four = dispersion_expansion(Variant::IV, a, v, None, &cfg).unwrap();
        let want = (a * a * (a * a - v * v)).abs() / 3456.0;
        assert_eq!(four.z1.rounded, 4);
        assert!((four.z1.magnitude() - want).abs() < 0.05 * want, "{} vs {want}", four.z1.magnitude());
    }

    #[test]
    fn initialization_response_orders() {
        let (a, v, theta) = (0.5, 1.2, 0.25);
        let cfg = DispersionConfig::default();
        let three = dispersion_expansion(Variant::III, a, v, Some(theta), &cfg).unwrap();
        let g = three.g_hat.unwrap();
        let want = a * a / 1728.0 * (a + v - 2.0 * v * theta);
        assert_eq!(g.rounded, 3);
        assert!((g.magnitude() - want.abs()).abs() < 0.05 * want.abs(), "{} vs {want}", g.magnitude());
        let four = dispersion_expansion(Variant::IV, a, v, Some(theta), &cfg).unwrap();
        let g = four.g_hat.unwrap();
        let want = a / 288.0 * (a + v - 2.0 * v * theta);
        assert_eq!(g.rounded, 2);
        assert!((g.magnitude() - want.abs()).abs() < 0.05 * want.abs(), "{} vs {want}", g.magnitude());
        assert_eq!(three.implied_order, 3);
        assert_eq!(four.implied_order, 2);
    }

    #[test]
    fn sixth_order_at_special_ratio() {
        let v = 1.2;
        let a = 6f64.sqrt() / 12.0 * v;
        let cfg = DispersionConfig { scale: 8.0, ..DispersionConfig::default() };
        let one = dispersion_expansion(Variant::I, a, v, None, &cfg).unwrap();
        assert_eq!(one.z1.rounded, 7, "exponent {}", one.z1.exponent);
        assert_eq!(one.implied_order, 6);
    }
}
