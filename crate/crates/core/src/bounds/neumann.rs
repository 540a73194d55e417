use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use super::{lower_core, upper_core, GeometryParams};
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::optimize::golden_section_max;

fn check_shift(lambda: f64, k: f64) -> Result<()> {
    if lambda + k < 0.0 {
        Err(Error::NegativeShift {
            lambda,
            k,
            sum: lambda + k,
        })
    } else {
        Ok(())
    }
}

/// `√(2(λ+K)/π · (1+K/λ)^{λ/K})` for convex or empty boundary.
///
/// Negative `K` is admitted as long as `λ + K ≥ 0`. For the conformally
/// changed bound pass `K(f)` and multiply the result by `‖f‖∞`.
pub fn neumann_upper_bound(k: f64, lambda: f64) -> Result<f64> {
    ensure_positive("lambda", lambda)?;
    ensure_finite("K", k)?;
    check_shift(lambda, k)?;
    Ok((2.0 / PI * upper_core(lambda, k)?).sqrt())
}

/// `√(2e(λ+K⁺)/π)`, the weaker form of [`neumann_upper_bound`].
pub fn neumann_upper_bound_weak(k: f64, lambda: f64) -> Result<f64> {
    ensure_positive("lambda", lambda)?;
    check_shift(lambda, k)?;
    Ok((2.0 * E * (lambda + k.max(0.0)) / PI).sqrt())
}

/// `√(λ² / (n(λ+K)) · (λ/(λ+K))^{λ/K})` for convex or empty boundary.
pub fn neumann_lower_bound(g: &GeometryParams, lambda: f64) -> Result<f64> {
    g.validate()?;
    ensure_positive("lambda", lambda)?;
    check_shift(lambda, g.k)?;
    Ok((lower_core(lambda, g.k)? / g.n).sqrt())
}

/// `λ / √(n e (λ+K⁺))`.
pub fn neumann_lower_bound_weak(g: &GeometryParams, lambda: f64) -> Result<f64> {
    g.validate()?;
    ensure_positive("lambda", lambda)?;
    check_shift(lambda, g.k)?;
    Ok(lambda / (g.n * E * (lambda + g.k.max(0.0))).sqrt())
}

/// Samples of a reference function `f ≥ 1` (with `inf f = 1`) and the
/// derived quantities the conformal-change bounds need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFunction {
    pub samples: Vec<f64>,
    /// `|∇ log f|²`
    pub log_grad_sq: Vec<f64>,
    /// `L log f = Δ log f + ⟨∇V, ∇ log f⟩`
    pub l_log_f: Vec<f64>,
    pub sup_norm: f64,
}

impl ReferenceFunction {
    /// `f ≡ 1` on `len` nodes.
    pub fn constant(len: usize) -> Self {
        ReferenceFunction {
            samples: vec![1.0; len],
            log_grad_sq: vec![0.0; len],
            l_log_f: vec![0.0; len],
            sup_norm: 1.0,
        }
    }

    /// Builds from samples of `f`, `f'`, `f''` and optionally `V'` on a 1-D grid.
    ///
    /// `f` is rescaled so that its minimum is 1; derivatives of `log f` do
    /// not change under the rescaling.
    pub fn from_derivatives(f: &[f64], df: &[f64], d2f: &[f64], dv: Option<&[f64]>) -> Result<Self> {
        let n = f.len();
        if n == 0 || df.len() != n || d2f.len() != n || dv.is_some_and(|v| v.len() != n) {
            return Err(Error::invalid("samples", "length mismatch or empty"));
        }
        if f.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::invalid("f", "samples must be finite and > 0"));
        }
        let min = f.iter().copied().fold(f64::INFINITY, f64::min);
        let mut log_grad_sq = Vec::with_capacity(n);
        let mut l_log_f = Vec::with_capacity(n);
        for i in 0..n {
            let g = df[i] / f[i];
            let lap = d2f[i] / f[i] - g * g;
            let drift = dv.map_or(0.0, |v| v[i] * g);
            log_grad_sq.push(g * g);
            l_log_f.push(lap + drift);
        }
        let samples: Vec<f64> = f.iter().map(|v| v / min).collect();
        let sup_norm = samples.iter().copied().fold(1.0, f64::max);
        Ok(ReferenceFunction {
            samples,
            log_grad_sq,
            l_log_f,
            sup_norm,
        })
    }

    /// Samples `f` and its first two derivatives, returned as `(f, f', f'')`, on `grid`.
    pub fn from_fn<F>(grid: &[f64], f: F, dv: Option<&[f64]>) -> Result<Self>
    where
        F: Fn(f64) -> (f64, f64, f64),
    {
        let (mut v, mut d1, mut d2) = (Vec::new(), Vec::new(), Vec::new());
        for &x in grid {
            let (a, b, c) = f(x);
            v.push(a);
            d1.push(b);
            d2.push(c);
        }
        Self::from_derivatives(&v, &d1, &d2, dv)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Which definition of `c_ε(f)` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CEpsMode {
    /// `V = 0`: `4ε|∇log f|²/(1-ε) + K - 2Δ log f`.
    Laplacian,
    /// General `L`: `4ε|∇log f|²/(1-ε) + εK + (1-ε)K_V - 2L log f`.
    Weighted,
}

/// Grid supremum defining `c_ε(f)`.
pub fn compute_c_eps_f(rf: &ReferenceFunction, eps: f64, k: f64, k_v: f64, mode: CEpsMode) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid("eps", format!("must lie in (0, 1), got {eps}")));
    }
    if rf.is_empty() {
        return Err(Error::invalid("rf", "no samples"));
    }
    let constant = match mode {
        CEpsMode::Laplacian => k,
        CEpsMode::Weighted => eps * k + (1.0 - eps) * k_v,
    };
    let w = 4.0 * eps / (1.0 - eps);
    Ok(rf
        .log_grad_sq
        .iter()
        .zip(&rf.l_log_f)
        .map(|(g2, l)| w * g2 + constant - 2.0 * l)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `K(f) = sup {2|∇log f|² + K_V - L log f}`.
pub fn compute_k_f(rf: &ReferenceFunction, k_v: f64) -> f64 {
    rf.log_grad_sq
        .iter()
        .zip(&rf.l_log_f)
        .map(|(g2, l)| 2.0 * g2 + k_v - l)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The 999-point grid `{0.001, …, 0.999}`.
pub fn default_eps_grid() -> Vec<f64> {
    (1..1000).map(|i| i as f64 / 1000.0).collect()
}

/// Lower bound under a conformal change of metric, maximised over `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsSupremum {
    pub value: f64,
    pub eps: f64,
    pub c_eps: f64,
}

fn conformal_lower_at(rf: &ReferenceFunction, g: &GeometryParams, lambda: f64, eps: f64) -> Result<(f64, f64)> {
    let c = compute_c_eps_f(rf, eps, g.k, g.k_v, CEpsMode::Weighted)?;
    check_shift(lambda, c)?;
    let sq = eps * lower_core(lambda, c)? / g.n;
    Ok((sq.sqrt() / rf.sup_norm, c))
}

/// `sup_ε √(ε λ² / (n(λ+c_ε)) · (λ/(λ+c_ε))^{λ/c_ε}) / ‖f‖∞` over `eps_grid`,
/// refined by golden-section search between the neighbours of the best node.
pub fn conformal_lower_bound(
    rf: &ReferenceFunction,
    g: &GeometryParams,
    lambda: f64,
    eps_grid: &[f64],
) -> Result<EpsSupremum> {
    g.validate()?;
    ensure_positive("lambda", lambda)?;
    if eps_grid.is_empty() {
        return Err(Error::invalid("eps_grid", "must not be empty"));
    }
    let mut grid = eps_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut best: Option<EpsSupremum> = None;
    let mut best_idx = 0;
    for (i, &eps) in grid.iter().enumerate() {
        let (value, c) = conformal_lower_at(rf, g, lambda, eps)?;
        if best.is_none_or(|b| value > b.value) {
            best = Some(EpsSupremum { value, eps, c_eps: c });
            best_idx = i;
        }
    }
    let mut best = best.expect("grid is non-empty");
    if grid.len() >= 2 {
        let lo = grid[best_idx.saturating_sub(1)];
        let hi = grid[(best_idx + 1).min(grid.len() - 1)];
        let refined = golden_section_max(
            |e| conformal_lower_at(rf, g, lambda, e).map_or(f64::NEG_INFINITY, |(v, _)| v),
            lo,
            hi,
            1e-10,
        );
        if refined.value > best.value {
            let (value, c) = conformal_lower_at(rf, g, lambda, refined.arg)?;
            best = EpsSupremum {
                value,
                eps: refined.arg,
                c_eps: c,
            };
        }
    }
    Ok(best)
}

/// `sup_ε √(ε λ² / (n e (λ+c_ε⁺))) / ‖f‖∞` over `eps_grid` (no refinement).
pub fn conformal_lower_bound_weak(
    rf: &ReferenceFunction,
    g: &GeometryParams,
    lambda: f64,
    eps_grid: &[f64],
) -> Result<f64> {
    g.validate()?;
    ensure_positive("lambda", lambda)?;
    let mut best = f64::NEG_INFINITY;
    for &eps in eps_grid {
        let c = compute_c_eps_f(rf, eps, g.k, g.k_v, CEpsMode::Weighted)?;
        check_shift(lambda, c)?;
        let v = (eps * lambda * lambda / (g.n * E * (lambda + c.max(0.0)))).sqrt() / rf.sup_norm;
        best = best.max(v);
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::invalid("eps_grid", "must not be empty"))
    }
}

/// `‖f‖∞ √(2(λ+K(f))/π · (1+K(f)/λ)^{λ/K(f)})`.
pub fn conformal_upper_bound(rf: &ReferenceFunction, k_v: f64, lambda: f64) -> Result<f64> {
    Ok(rf.sup_norm * neumann_upper_bound(compute_k_f(rf, k_v), lambda)?)
}
