use num_complex::Complex;

use super::dd::{DoubleDouble, FourierScalar};
use super::{cis, compose};
use crate::error::{Error, Result};
use crate::operators::{StepPlan, Variant};

type Dd = DoubleDouble;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionConfig {
    /// Ladder `xi dt = 2^-j * scale` for `j` in `levels`.
    pub scale: f64,
    pub levels: (i32, i32),
    pub kappa: i64,
    /// Errors below this magnitude are treated as rounding noise.
    pub noise_floor: f64,
    /// Largest accepted standard error of the fitted exponent.
    pub max_stderr: f64,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self { scale: 1.0, levels: (6, 14), kappa: 1, noise_floor: 1e-27, max_stderr: 1e-2 }
    }
}

/// `err(x) ~ c x^p` fitted on a geometric ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    /// Least-squares slope of `ln err` against `ln x`.
    pub exponent: f64,
    pub rounded: u32,
    /// Leading coefficient at the rounded exponent, Richardson-extrapolated.
    pub coefficient: Complex<f64>,
    pub stderr: f64,
    pub points: usize,
}

impl PowerFit {
    pub fn magnitude(&self) -> f64 {
        self.coefficient.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionReport {
    pub variant: Variant,
    /// `z_1 - e^{-i a xi dt}`, `z_1` the eigenvalue closest to the exact factor.
    pub z1: PowerFit,
    /// `(1, 1) phi (theta, 1 - theta)^T - e^{-i a xi dt}`.
    pub g_hat: Option<PowerFit>,
    /// Global order implied by the two local expansions.
    pub implied_order: u32,
}

fn fit(xs: &[f64], errs: &[Complex<Dd>], cfg: &DispersionConfig) -> Result<PowerFit> {
    let usable: Vec<(f64, Complex<f64>)> = xs
        .iter()
        .zip(errs)
        .map(|(&x, e)| (x, Complex::new(e.re.to_f64(), e.im.to_f64())))
        .filter(|(_, e)| e.norm() > cfg.noise_floor)
        .collect();
    if usable.len() < 3 {
        return Err(Error::Fit(format!(
            "only {} ladder points above the noise floor; enlarge the sampling scale",
            usable.len()
        )));
    }
    let n = usable.len() as f64;
    let lx: Vec<f64> = usable.iter().map(|(x, _)| x.ln()).collect();
    let le: Vec<f64> = usable.iter().map(|(_, e)| e.norm().ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let me = le.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxe: f64 = lx.iter().zip(&le).map(|(x, e)| (x - mx) * (e - me)).sum();
    let slope = sxe / sxx;
    let ssr: f64 = lx.iter().zip(&le).map(|(x, e)| (e - me - slope * (x - mx)).powi(2)).sum();
    let stderr = if usable.len() > 2 { (ssr / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    if !(stderr <= cfg.max_stderr) {
        return Err(Error::Fit(format!("exponent {slope:.4} has standard error {stderr:.2e}")));
    }
    let rounded = slope.round().max(0.0) as u32;
    let scaled: Vec<(f64, Complex<f64>)> = usable.iter().map(|&(x, e)| (x, e / x.powi(rounded as i32))).collect();
    // Two finest points; consecutive ladder entries differ by a factor 2.
    let (x_f, c_f) = scaled[scaled.len() - 1];
    let (x_c, c_c) = scaled[scaled.len() - 2];
    let r = x_c / x_f;
    let coefficient = (c_f * r - c_c) / (r - 1.0);
    Ok(PowerFit { exponent: slope, rounded, coefficient, stderr, points: usable.len() })
}

/// Low-frequency expansions of the linear D1Q2 symbol of `variant`.
pub fn dispersion_expansion(
    variant: Variant,
    a: f64,
    v: f64,
    theta: Option<f64>,
    cfg: &DispersionConfig,
) -> Result<DispersionReport> {
    if !(v > 0.0) || !(a.abs() < v) {
        return Err(Error::Config(format!("need |a| < V, got a = {a}, V = {v}")));
    }
    if cfg.levels.0 > cfg.levels.1 || !(cfg.scale > 0.0) {
        return Err(Error::Config("empty dispersion ladder".into()));
    }
    let plan = StepPlan::new(variant, cfg.kappa)?;
    let travel = (variant.travel_per_step() * cfg.kappa) as f64;
    let mut xs = Vec::new();
    let mut z_err = Vec::new();
    let mut g_err = Vec::new();
    for j in cfg.levels.0..=cfg.levels.1 {
        let x = cfg.scale * 2f64.powi(-j);
        let xi_dx = Dd::mul_f64(x, v) / Dd::new(travel);
        let amp = compose::<Dd>(&plan, a, v, xi_dx, a * travel / v, variant);
        let exact = cis(-Dd::mul_f64(a, x));
        let [z1, z2] = amp.eigenvalues();
        let d1 = z1 - exact;
        let d2 = z2 - exact;
        let norm2 = |z: Complex<Dd>| (z.re * z.re + z.im * z.im).to_f64();
        z_err.push(if norm2(d1) <= norm2(d2) { d1 } else { d2 });
        if let Some(t) = theta {
            g_err.push(amp.moment_response(Dd::new(t)) - exact);
        }
        xs.push(x);
    }
    let z1 = fit(&xs, &z_err, cfg)?;
    let g_hat = if theta.is_some() { Some(fit(&xs, &g_err, cfg)?) } else { None };
    let from_z = z1.rounded.saturating_sub(1);
    let implied_order = g_hat.map_or(from_z, |g| from_z.min(g.rounded));
    Ok(DispersionReport { variant, z1, g_hat, implied_order })
}
