//! First-passage law of `Y_t = ε + b_t + α t` to 0.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::quadrature::integrate;

const ABS_TOL: f64 = 1e-14;
const REL_TOL: f64 = 1e-12;
/// Below `r = e^{-6}` the factor `e^{-1/r}` is under `1e-170`.
const LOG_R_MIN: f64 = -6.0;

/// Hitting density `ε e^{-(ε+αs)²/(2s)} / √(2πs³)`.
pub fn fpt_density(alpha: f64, eps: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    eps * (-(eps + alpha * s).powi(2) / (2.0 * s)).exp() / (2.0 * PI * s.powi(3)).sqrt()
}

fn check(alpha: f64, eps: f64, t: f64) -> Result<()> {
    ensure_finite("alpha", alpha)?;
    ensure_positive("eps", eps)?;
    ensure_positive("t", t)
}

/// `(2/√π) ∫₀^z e^{-w²} dw`.
fn erf_quad(z: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(0.0);
    }
    let q = integrate(|w| (-w * w).exp(), 0.0, z.min(8.0), ABS_TOL, REL_TOL)?;
    Ok(2.0 / PI.sqrt() * q.value)
}

/// `∫₀^R e^{-1/r}/√(πr³) (1 - e^{-c r}) dr`, integrated in `u = ln r`.
fn drift_defect(c: f64, big_r: f64) -> Result<f64> {
    if c == 0.0 {
        return Ok(0.0);
    }
    let hi = big_r.ln();
    let lo = LOG_R_MIN.min(hi - 1.0);
    let g = |u: f64| {
        let r = u.exp();
        (-1.0 / r).exp() / (PI * r).sqrt() * -(-c * r).exp_m1()
    };
    // Split at r = 1 where the integrand peaks.
    let mid = 0.0f64.clamp(lo, hi);
    let a = integrate(g, lo, mid, ABS_TOL, REL_TOL)?.value;
    let b = integrate(g, mid, hi, ABS_TOL, REL_TOL)?.value;
    Ok(a + b)
}

/// `P(t < T^α(ε))`, the probability of not having hit 0 by time `t`.
///
/// Computed as `1 - e^{-αε}(1 - T - D)` with `T = erf(ε/√(2t))` the tail of
/// `∫ r^{-3/2} e^{-1/r}` beyond `2t/ε²` and `D` the drift defect; every term
/// is `O(ε)` so the small-`ε` regime keeps full relative accuracy.
pub fn fpt_survival_exact(alpha: f64, eps: f64, t: f64) -> Result<f64> {
    check(alpha, eps, t)?;
    let big_r = 2.0 * t / (eps * eps);
    let tail = erf_quad(eps / (2.0 * t).sqrt())?;
    let defect = drift_defect(alpha * alpha * eps * eps / 4.0, big_r)?;
    let damp = (-alpha * eps).exp();
    let s = -(-alpha * eps).exp_m1() + damp * (tail + defect);
    if !s.is_finite() {
        return Err(Error::Numerical(format!("survival not finite for alpha={alpha}, eps={eps}, t={t}")));
    }
    Ok(s.clamp(0.0, 1.0))
}

/// `P(t ≥ T^α(ε)) = e^{-αε} ∫₀^{2t/ε²} e^{-1/r}/√(πr³) e^{-α²ε²r/4} dr`.
pub fn fpt_probability_exact(alpha: f64, eps: f64, t: f64) -> Result<f64> {
    Ok(1.0 - fpt_survival_exact(alpha, eps, t)?)
}

/// The same probability by direct quadrature of the `r`-integral, without the
/// complementary split. Used as a cross-check.
pub fn fpt_probability_direct(alpha: f64, eps: f64, t: f64) -> Result<f64> {
    check(alpha, eps, t)?;
    let hi = (2.0 * t / (eps * eps)).ln();
    let lo = LOG_R_MIN.min(hi - 1.0);
    let c = alpha * alpha * eps * eps / 4.0;
    let g = |u: f64| {
        let r = u.exp();
        (-1.0 / r - c * r).exp() / (PI * r).sqrt()
    };
    let mid = 0.0f64.clamp(lo, hi);
    let v = integrate(g, lo, mid, ABS_TOL, REL_TOL)?.value + integrate(g, mid, hi, ABS_TOL, REL_TOL)?.value;
    Ok(((-alpha * eps).exp() * v).clamp(0.0, 1.0))
}

/// `∫₀^∞ r^{-3/2} e^{-1/r} dr` by quadrature (equals `Γ(1/2) = √π`).
pub fn gamma_half_integral() -> Result<f64> {
    let g = |u: f64| {
        let r = u.exp();
        (-1.0 / r).exp() / r.sqrt()
    };
    Ok(integrate(g, LOG_R_MIN, 0.0, ABS_TOL, REL_TOL)?.value + integrate(g, 0.0, 90.0, ABS_TOL, REL_TOL)?.value)
}

/// Linear fit `y ≈ a + b ε` through the three smallest `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// The extrapolated value at `ε = 0`.
    pub slope: f64,
    /// Standard error of `slope` (zero for the quadrature path).
    pub stderr: f64,
    pub eps: Vec<f64>,
    /// `(1 - P(t ≥ T^α(ε))) / ε` at each `ε`.
    pub ratios: Vec<f64>,
}

/// Weights `w_i` with `a = Σ w_i y_i` for the least-squares intercept.
pub(crate) fn intercept_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    x.iter().map(|v| 1.0 / n - mean * (v - mean) / sxx).collect()
}

/// Three smallest values of `eps_list`, validated.
pub(crate) fn slope_ladder(eps_list: &[f64]) -> Result<Vec<f64>> {
    if eps_list.len() < 3 {
        return Err(Error::invalid("eps_list", "need at least three values"));
    }
    if eps_list.iter().any(|&e| !(e.is_finite() && e > 0.0)) {
        return Err(Error::invalid("eps_list", "values must be finite and > 0"));
    }
    let mut e = eps_list.to_vec();
    e.sort_by(f64::total_cmp);
    e.dedup();
    if e.len() < 3 {
        return Err(Error::invalid("eps_list", "need three distinct values"));
    }
    if e[e.len() - 1] < 10.0 * e[0] {
        return Err(Error::invalid("eps_list", "values must span at least a decade"));
    }
    e.truncate(3);
    Ok(e)
}

/// `lim_{ε→0} (1 - P(t ≥ T^α(ε)))/ε` from the exact law.
pub fn fpt_small_eps_slope(alpha: f64, t: f64, eps_list: &[f64]) -> Result<SlopeFit> {
    let eps = slope_ladder(eps_list)?;
    let ratios = eps
        .iter()
        .map(|&e| fpt_survival_exact(alpha, e, t).map(|s| s / e))
        .collect::<Result<Vec<_>>>()?;
    let w = intercept_weights(&eps);
    let slope = w.iter().zip(&ratios).map(|(w, y)| w * y).sum();
    Ok(SlopeFit {
        slope,
        stderr: 0.0,
        eps,
        ratios,
    })
}
