use std::f64::consts::PI;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::quadrature::integrate;

const F_ABS_TOL: f64 = 1e-15;
const F_REL_TOL: f64 = 1e-13;

/// `f(α) = √(2/(πt)) e^{-α²t/2} + α + |α| √(2t/π) ∫₀^{|α|} e^{-s²t/2} ds`,
/// the boundary-gradient bound for the survival function at time `t`.
pub fn psi_gradient_bound_f(alpha: f64, t: f64) -> Result<f64> {
    ensure_finite("alpha", alpha)?;
    ensure_positive("t", t)?;
    let a = alpha.abs();
    let head = (2.0 / (PI * t)).sqrt() * (-alpha * alpha * t / 2.0).exp() + alpha;
    if a == 0.0 {
        return Ok(head);
    }
    let q = integrate(|s| (-s * s * t / 2.0).exp(), 0.0, a, F_ABS_TOL, F_REL_TOL)?;
    Ok(head + a * (2.0 * t / PI).sqrt() * q.value)
}

/// `α + √(2/(πt)) e^{-α²t/2} + min(|α|, α² √(2t)/√π)`.
pub fn psi_cap_exp(alpha: f64, t: f64) -> Result<f64> {
    ensure_finite("alpha", alpha)?;
    ensure_positive("t", t)?;
    let gauss = (2.0 / (PI * t)).sqrt() * (-alpha * alpha * t / 2.0).exp();
    Ok(alpha + gauss + alpha.abs().min(alpha * alpha * (2.0 * t).sqrt() / PI.sqrt()))
}

/// `√(2/(πt)) + α + √(t/(2π)) α²`.
pub fn psi_cap_quadratic(alpha: f64, t: f64) -> Result<f64> {
    ensure_finite("alpha", alpha)?;
    ensure_positive("t", t)?;
    Ok((2.0 / (PI * t)).sqrt() + alpha + (t / (2.0 * PI)).sqrt() * alpha * alpha)
}

/// Closed form of `f''(α) = √(2t/π) e^{-α²t/2}`.
pub fn psi_f_second_derivative(alpha: f64, t: f64) -> f64 {
    (2.0 * t / PI).sqrt() * (-alpha * alpha * t / 2.0).exp()
}

/// `inf_t e^{λt/2} f(α, t)` over `t_grid`, an upper bound for
/// `‖∇φ‖_{∂D,∞} / ‖φ‖∞` of a Dirichlet eigenfunction.
///
/// Returns `(value, argmin t)`.
pub fn boundary_gradient_bound(alpha: f64, lambda: f64, t_grid: &[f64]) -> Result<(f64, f64)> {
    ensure_positive("lambda", lambda)?;
    if t_grid.is_empty() {
        return Err(Error::invalid("t_grid", "must not be empty"));
    }
    let mut best = (f64::INFINITY, f64::NAN);
    for &t in t_grid {
        let v = (lambda * t / 2.0).exp() * psi_gradient_bound_f(alpha, t)?;
        if v < best.0 {
            best = (v, t);
        }
    }
    Ok(best)
}
