//! Classical solution of the inviscid Burgers equation before shock formation.

use crate::datum::Profile;
use crate::error::{HarnessError, Result};

/// Residual tolerance of the characteristic equation.
pub const NEWTON_TOL: f64 = 1e-14;
const MAX_NEWTON: usize = 60;

/// `u(x, t)` solving `u = u0(x - u t)` by Newton iteration.
///
/// Fails at or beyond the shock time, and whenever the iteration does not
/// reach a residual of [`NEWTON_TOL`].
pub fn exact_burgers(u0: &dyn Profile, t: f64, x: f64) -> Result<f64> {
    if !(t >= 0.0) || !x.is_finite() {
        return Err(HarnessError::Exact(format!("invalid point (x, t) = ({x}, {t})")));
    }
    if t >= u0.shock_time() {
        return Err(HarnessError::Exact(format!("t = {t} is past the shock time {}", u0.shock_time())));
    }
    let mut u = u0.value(x);
    for _ in 0..MAX_NEWTON {
        let foot = x - u * t;
        let residual = u - u0.value(foot);
        if residual.abs() <= NEWTON_TOL {
            return Ok(u);
        }
        // Positive before the shock time: characteristics do not cross.
        let slope = 1.0 + t * u0.derivative(foot);
        if !(slope > 0.0) {
            return Err(HarnessError::Exact(format!("characteristics cross at x = {x}, t = {t}")));
        }
        u -= residual / slope;
    }
    Err(HarnessError::Exact(format!("Newton did not converge at x = {x}, t = {t}")))
}
