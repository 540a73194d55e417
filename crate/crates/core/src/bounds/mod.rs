//! Closed-form gradient-ratio bounds for Dirichlet and Neumann eigenfunctions.
//!
//! Every bound here is a function of a handful of scalar curvature constants
//! collected in [`GeometryParams`], the eigenvalue `λ`, and (for the
//! non-convex Neumann case) a sampled [`ReferenceFunction`]. Results are
//! ratios `‖∇φ‖∞ / ‖φ‖∞` unless a function says otherwise.
//!
//! Sign convention: a stored `k` means `Ric ≥ -k`, so positive `k` is
//! negative curvature.

mod dirichlet;
mod neumann;
mod psi;

pub use dirichlet::*;
pub use neumann::*;
pub use psi::*;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// Relative size `|K| / λ` below which `K` is treated as zero in the
/// `(λ/(λ+K))^{λ/K}` family of expressions.
pub const LIMIT_THRESHOLD: f64 = 1e-8;

/// Scalar curvature and boundary constants consumed by the bound formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    /// Intrinsic dimension.
    pub d: usize,
    /// Effective dimension of the curvature-dimension condition, `n ≥ d`.
    pub n: f64,
    /// `CD(-k, n)` / Ricci lower-bound constant.
    pub k: f64,
    /// Bakry–Émery Ricci constant: `Ric - Hess V ≥ -k_v`.
    pub k_v: f64,
    /// Mean-curvature constant: `H ≥ -theta`.
    pub theta: f64,
    /// Second-fundamental-form constant: `II ≥ -delta`.
    pub delta: f64,
    /// Upper bound for `½ L ρ` off the cut locus of the boundary.
    pub alpha: f64,
}

impl GeometryParams {
    /// Flat geometry with convex boundary in dimension `d` (`n = d`, all constants zero).
    pub fn flat(d: usize) -> Self {
        GeometryParams {
            d,
            n: d as f64,
            k: 0.0,
            k_v: 0.0,
            theta: 0.0,
            delta: 0.0,
            alpha: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::invalid("d", "dimension must be at least 1"));
        }
        if !(self.n.is_finite() && self.n >= self.d as f64) {
            return Err(Error::invalid(
                "n",
                format!("need n >= d = {}, got {}", self.d, self.n),
            ));
        }
        ensure_finite("k", self.k)?;
        ensure_finite("k_v", self.k_v)?;
        ensure_finite("theta", self.theta)?;
        ensure_finite("delta", self.delta)?;
        ensure_finite("alpha", self.alpha)?;
        Ok(())
    }

    /// Sets `alpha` from mean curvature and Ricci constants:
    /// `½ max(θ, √((d-1) K₀))`.
    pub fn with_alpha0(mut self, theta: f64, k0: f64) -> Self {
        self.theta = theta;
        self.alpha = alpha0(self.d, theta, k0);
        self
    }
}

/// `½ max(θ, √((d-1) K₀))` for `θ, K₀ ≥ 0`.
pub fn alpha0(d: usize, theta: f64, k0: f64) -> f64 {
    let ricci_part = ((d.saturating_sub(1)) as f64 * k0.max(0.0)).sqrt();
    0.5 * theta.max(ricci_part)
}

/// `½ (max(θ, √((d-1) K₀)) + ‖∇V‖∞)`, the drift-aware version of [`alpha0`].
pub fn alpha_with_drift(d: usize, theta: f64, k0: f64, grad_v_sup: f64) -> f64 {
    alpha0(d, theta, k0) + 0.5 * grad_v_sup.abs()
}

/// `(λ/(λ+K))^{λ/K}`, extended continuously by `1/e` at `K = 0`.
///
/// Accepts any `K > -λ`. At `K = -λ` the expression tends to 0 and that
/// value is returned.
pub fn convention_power(lambda: f64, k: f64) -> Result<f64> {
    ensure_positive("lambda", lambda)?;
    ensure_finite("K", k)?;
    let shift = lambda + k;
    if shift < 0.0 {
        return Err(Error::NegativeShift {
            lambda,
            k,
            sum: shift,
        });
    }
    if shift == 0.0 {
        return Ok(0.0);
    }
    let x = k / lambda;
    let exponent = if x.abs() < LIMIT_THRESHOLD {
        // (1/x) ln(1+x) = 1 - x/2 + x²/3 - ...
        1.0 - x / 2.0 + x * x / 3.0
    } else {
        x.ln_1p() / x
    };
    Ok((-exponent).exp())
}

/// `λ² (λ/(λ+K))^{λ/K} / (λ+K)`, with the limit `λ` at `λ + K = 0`.
pub(crate) fn lower_core(lambda: f64, k: f64) -> Result<f64> {
    let p = convention_power(lambda, k)?;
    let shift = lambda + k;
    if shift == 0.0 {
        Ok(lambda)
    } else {
        Ok(lambda * lambda * p / shift)
    }
}

/// `(λ+K)(1 + K/λ)^{λ/K}`, with the limit `λ` at `λ + K = 0`.
pub(crate) fn upper_core(lambda: f64, k: f64) -> Result<f64> {
    let p = convention_power(lambda, k)?;
    let shift = lambda + k;
    if shift == 0.0 {
        Ok(lambda)
    } else {
        Ok(shift / p)
    }
}

/// Which side of the `ε`-maximisation the optimum fell on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpsBranch {
    /// `B > 2A`: the maximum is at `ε = 0` and the bound is `B`.
    LargeEigenvalue,
    /// `B < 2A`: interior maximum `A + B²/(4A)`.
    Interior,
    /// `B = 2A`: both expressions coincide.
    Boundary,
    /// The variant is a direct closed form without an `ε` split.
    Direct,
}

/// `max_{ε∈[0,1]} (εA + √(1-ε) B)` in closed form.
pub fn eps_max_closed_form(a: f64, b: f64) -> Result<f64> {
    eps_max_with_branch(a, b).map(|(v, _)| v)
}

pub fn eps_max_with_branch(a: f64, b: f64) -> Result<(f64, EpsBranch)> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::invalid("A", format!("must be finite and >= 0, got {a}")));
    }
    if !(b.is_finite() && b >= 0.0) {
        return Err(Error::invalid("B", format!("must be finite and >= 0, got {b}")));
    }
    let two_a = 2.0 * a;
    let tie_tol = 1e-12 * (two_a + b);
    if (b - two_a).abs() <= tie_tol {
        // A + B²/(4A) = A + A = B at the tie.
        return Ok((b, EpsBranch::Boundary));
    }
    if b > two_a {
        Ok((b, EpsBranch::LargeEigenvalue))
    } else {
        Ok((a + b * b / (4.0 * a), EpsBranch::Interior))
    }
}
