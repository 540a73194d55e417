use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use super::{eps_max_with_branch, lower_core, EpsBranch, GeometryParams};
use crate::error::{ensure_positive, Error, Result};
use crate::optimize::{grid_then_golden, log_grid};

/// `√(λ² / (n(λ+K⁺)) · (λ/(λ+K⁺))^{λ/K⁺})`, the Dirichlet lower ratio bound.
pub fn dirichlet_lower_bound(g: &GeometryParams, lambda: f64) -> Result<f64> {
    g.validate()?;
    ensure_positive("lambda", lambda)?;
    let k_plus = g.k.max(0.0);
    Ok((lower_core(lambda, k_plus)? / g.n).sqrt())
}

/// `λ / √(n e (λ+K⁺))`, the weaker form of [`dirichlet_lower_bound`].
pub fn dirichlet_lower_bound_weak(g: &GeometryParams, lambda: f64) -> Result<f64> {
    g.validate()?;
    ensure_positive("lambda", lambda)?;
    let k_plus = g.k.max(0.0);
    Ok(lambda / (g.n * E * (lambda + k_plus)).sqrt())
}

/// `λ² (e^{Kt} - 1) / (n K e^{(λ+K)⁺ t})`: the squared-ratio lower bound for a fixed time `t`.
pub fn lower_bound_at_time(n: f64, k: f64, lambda: f64, t: f64) -> f64 {
    let kt = k * t;
    let pre = lambda * lambda / n;
    if lambda + k >= 0.0 {
        // (e^{Kt} - 1) e^{-(λ+K)t} / K = (1 - e^{-Kt}) e^{-λt} / K, free of overflow.
        let decay = if kt.abs() < super::LIMIT_THRESHOLD {
            t * (1.0 - 0.5 * kt)
        } else {
            -(-kt).exp_m1() / k
        };
        pre * decay * (-lambda * t).exp()
    } else {
        pre * kt.exp_m1() / k
    }
}

/// The time that maximises [`lower_bound_at_time`] for `K ≥ 0`:
/// `log(1 + K/λ) / K`, or `1/λ` when `K = 0`.
pub fn optimal_time(lambda: f64, k: f64) -> f64 {
    let x = k / lambda;
    if x.abs() < super::LIMIT_THRESHOLD {
        (1.0 - x / 2.0) / lambda
    } else {
        x.ln_1p() / k
    }
}

/// Numerical supremum over `t` of the squared lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSupremum {
    /// Squared ratio bound at the maximiser.
    pub value: f64,
    pub t_star: f64,
}

/// Maximises [`lower_bound_at_time`] over `t_grid` and refines the best node
/// by golden-section search.
pub fn dirichlet_lower_bound_sup_t(
    g: &GeometryParams,
    lambda: f64,
    t_grid: &[f64],
) -> Result<TimeSupremum> {
    g.validate()?;
    ensure_positive("lambda", lambda)?;
    if t_grid.is_empty() {
        return Err(Error::invalid("t_grid", "must not be empty"));
    }
    if t_grid.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
        return Err(Error::invalid("t_grid", "entries must be finite and > 0"));
    }
    let mut grid = t_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let best = grid_then_golden(|t| lower_bound_at_time(g.n, g.k, lambda, t), &grid)
        .ok_or_else(|| Error::Numerical("objective not finite on t_grid".into()))?;
    Ok(TimeSupremum {
        value: best.value,
        t_star: best.arg,
    })
}

/// A log-spaced time grid bracketing `1/λ` by four decades on each side.
pub fn default_time_grid(lambda: f64) -> Vec<f64> {
    log_grid(1e-4 / lambda, 1e4 / lambda, 801)
}

/// Upper-bound variants; each is admissible only for one sign of `alpha`
/// (both at `alpha = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpperVariant {
    /// `α ≥ 0`, sharpest constant `A` with the `min(|α|, ·)` term.
    A,
    /// `α ≥ 0`, `A' = 2α + √(2S/π) e^{-α²/(2S)}`.
    APrime,
    /// `α ≤ 0`, `A* = √(2S/π) e^{-α²/(2S)}`.
    AStar,
    /// `α ≤ 0`, the two-time rule with `Â` and weights `e` vs `√e`.
    AHat,
    /// `α ≤ 0`, `√(eS) (√(2/π) + ¼√(π/2))`.
    SimplifiedNeg,
    /// `α ≥ 0`, the explicit closed form without the `ε` split.
    SimplifiedPos,
}

impl UpperVariant {
    pub const ALL: [UpperVariant; 6] = [
        UpperVariant::A,
        UpperVariant::APrime,
        UpperVariant::AStar,
        UpperVariant::AHat,
        UpperVariant::SimplifiedNeg,
        UpperVariant::SimplifiedPos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UpperVariant::A => "a",
            UpperVariant::APrime => "a-prime",
            UpperVariant::AStar => "a-star",
            UpperVariant::AHat => "a-hat",
            UpperVariant::SimplifiedNeg => "simplified-neg",
            UpperVariant::SimplifiedPos => "simplified-pos",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }

    pub fn sign(self) -> AlphaSign {
        match self {
            UpperVariant::A | UpperVariant::APrime | UpperVariant::SimplifiedPos => {
                AlphaSign::NonNegative
            }
            UpperVariant::AStar | UpperVariant::AHat | UpperVariant::SimplifiedNeg => {
                AlphaSign::NonPositive
            }
        }
    }

    pub fn admits(self, alpha: f64) -> bool {
        match self.sign() {
            AlphaSign::NonNegative => alpha >= 0.0,
            AlphaSign::NonPositive => alpha <= 0.0,
        }
    }
}

impl std::fmt::Display for UpperVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaSign {
    NonNegative,
    NonPositive,
}

/// Named constants that went into an upper bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Intermediates {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_prime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub b: Option<f64>,
}

/// Lower and upper ratio bounds with the branch bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub lower: f64,
    pub upper: f64,
    pub variant: UpperVariant,
    pub sign: AlphaSign,
    pub branch: EpsBranch,
    pub intermediates: Intermediates,
}

fn gaussian_term(shift: f64, alpha: f64) -> f64 {
    (2.0 * shift / PI).sqrt() * (-alpha * alpha / (2.0 * shift)).exp()
}

fn min_term(shift: f64, alpha: f64) -> f64 {
    alpha
        .abs()
        .min(2f64.sqrt() * alpha * alpha / (PI * shift).sqrt())
}

/// Dirichlet upper ratio bound for one variant.
///
/// `S = λ + K_V⁺` is the effective shift; `λ + K_V < 0` is rejected as
/// inconsistent curvature data.
pub fn dirichlet_upper_bound(
    g: &GeometryParams,
    lambda: f64,
    variant: UpperVariant,
) -> Result<BoundSet> {
    g.validate()?;
    ensure_positive("lambda", lambda)?;
    let alpha = g.alpha;
    if !variant.admits(alpha) {
        return Err(Error::VariantSign {
            variant: variant.name(),
            required: match variant.sign() {
                AlphaSign::NonNegative => ">= 0",
                AlphaSign::NonPositive => "<= 0",
            },
            alpha,
        });
    }
    if lambda + g.k_v < 0.0 {
        return Err(Error::NegativeShift {
            lambda,
            k: g.k_v,
            sum: lambda + g.k_v,
        });
    }
    let shift = lambda + g.k_v.max(0.0);
    let b = shift.sqrt();
    let sqrt_e = E.sqrt();
    let mut inter = Intermediates {
        b: Some(b),
        ..Default::default()
    };

    let (upper, branch) = match variant {
        UpperVariant::A => {
            let a = alpha + gaussian_term(shift, alpha) + min_term(shift, alpha);
            inter.a = Some(a);
            let (v, br) = eps_max_with_branch(a, b)?;
            (sqrt_e * v, br)
        }
        UpperVariant::APrime => {
            let a = 2.0 * alpha + gaussian_term(shift, alpha);
            inter.a_prime = Some(a);
            let (v, br) = eps_max_with_branch(a, b)?;
            (sqrt_e * v, br)
        }
        UpperVariant::AStar => {
            let a = gaussian_term(shift, alpha);
            inter.a_star = Some(a);
            let (v, br) = eps_max_with_branch(a, b)?;
            (sqrt_e * v, br)
        }
        UpperVariant::AHat => {
            // Boundary term weighted by e, interior term by √e.
            let a = alpha + gaussian_term(lambda, alpha) + min_term(lambda, alpha);
            inter.a_hat = Some(a);
            let (v, br) = eps_max_with_branch(E * a, sqrt_e * b)?;
            (v, br)
        }
        UpperVariant::SimplifiedNeg => {
            let c = (2.0 / PI).sqrt() + 0.25 * (PI / 2.0).sqrt();
            (b * c * sqrt_e, EpsBranch::Direct)
        }
        UpperVariant::SimplifiedPos => {
            let x = (2.0 * alpha + (2.0 * shift).sqrt()) / PI.sqrt();
            (sqrt_e * (x + shift / (4.0 * x)), EpsBranch::Direct)
        }
    };
    if !upper.is_finite() {
        return Err(Error::Numerical(format!(
            "upper bound {variant} is not finite"
        )));
    }

    Ok(BoundSet {
        lower: dirichlet_lower_bound(g, lambda)?,
        upper,
        variant,
        sign: variant.sign(),
        branch,
        intermediates: inter,
    })
}

/// Every variant admissible for `g.alpha`, in [`UpperVariant::ALL`] order.
pub fn dirichlet_upper_bounds(g: &GeometryParams, lambda: f64) -> Result<Vec<BoundSet>> {
    UpperVariant::ALL
        .into_iter()
        .filter(|v| v.admits(g.alpha))
        .map(|v| dirichlet_upper_bound(g, lambda, v))
        .collect()
}

/// The admissible variant with the smallest upper bound.
///
/// [`UpperVariant::SimplifiedPos`] is reported by [`dirichlet_upper_bounds`]
/// but skipped here: for `α > 0` its `2α/√π` term is smaller than the `2α`
/// of `A'`, so it is not implied by the `ε`-maximisation.
pub fn best_dirichlet_upper_bound(g: &GeometryParams, lambda: f64) -> Result<BoundSet> {
    dirichlet_upper_bounds(g, lambda)?
        .into_iter()
        .filter(|b| b.variant != UpperVariant::SimplifiedPos)
        .min_by(|a, b| a.upper.total_cmp(&b.upper))
        .ok_or_else(|| Error::Numerical("no admissible upper-bound variant".into()))
}

/// The explicit constants `(c₁, c₂)` obtained from the first eigenvalue,
/// with `A = 2α₀⁺ + √(2(λ₁+K)/π)` and `B = √(λ₁+K)`.
///
/// `g.alpha` is read as `α₀`.
pub fn c1_c2_from_lambda1(g: &GeometryParams, lambda1: f64) -> Result<(f64, f64)> {
    g.validate()?;
    ensure_positive("lambda1", lambda1)?;
    let shift = lambda1 + g.k;
    if shift <= 0.0 {
        return Err(Error::NegativeShift {
            lambda: lambda1,
            k: g.k,
            sum: shift,
        });
    }
    let c1 = lambda1.sqrt() / (g.d as f64 * E * shift).sqrt();
    let b = shift.sqrt();
    let a = 2.0 * g.alpha.max(0.0) + (2.0 * shift / PI).sqrt();
    let c2 = if b > 2.0 * a {
        (E * shift).sqrt() / lambda1.sqrt()
    } else {
        E.sqrt() / lambda1.sqrt() * (a + shift / (4.0 * a))
    };
    Ok((c1, c2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn geom(n: f64, k: f64, k_v: f64, alpha: f64) -> GeometryParams {
        GeometryParams {
            d: n.floor() as usize,
            n,
            k,
            k_v,
            theta: 0.0,
            delta: 0.0,
            alpha,
        }
    }

    // ε-grid oracle in u = √(1-ε), where the objective is a parabola.
    fn eps_grid_max(a: f64, b: f64) -> f64 {
        (0..=200_000)
            .map(|i| {
                let u = i as f64 / 200_000.0;
                (1.0 - u * u) * a + u * b
            })
            .fold(f64::MIN, f64::max)
    }

    #[test]
    fn lower_bound_examples() {
        let g = geom(1.0, 0.0, 0.0, 0.0);
        assert_abs_diff_eq!(dirichlet_lower_bound(&g, 1.0).unwrap(), (1.0 / E).sqrt(), epsilon = 1e-15);
        let g = geom(2.0, 1.0, 0.0, 0.0);
        assert_abs_diff_eq!(dirichlet_lower_bound(&g, 1.0).unwrap(), 0.125f64.sqrt(), epsilon = 1e-15);
        let g = geom(2.0, 0.0, 0.0, 0.0);
        let lam = 5.783_185_962_946_784;
        let v = dirichlet_lower_bound(&g, lam).unwrap();
        assert_abs_diff_eq!(v, (lam / (2.0 * E)).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(v, 1.031_386, epsilon = 1e-6);
    }

    #[test]
    fn negative_k_is_clipped() {
        let g = geom(1.0, -3.0, 0.0, 0.0);
        let flat = geom(1.0, 0.0, 0.0, 0.0);
        assert_eq!(
            dirichlet_lower_bound(&g, 2.0).unwrap(),
            dirichlet_lower_bound(&flat, 2.0).unwrap()
        );
    }

    #[test]
    fn sup_t_examples() {
        let g = geom(1.0, 0.0, 0.0, 0.0);
        let s = dirichlet_lower_bound_sup_t(&g, 1.0, &default_time_grid(1.0)).unwrap();
        assert_abs_diff_eq!(s.t_star, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(s.value, 1.0 / E, epsilon = 1e-14);

        let g = geom(2.0, 1.0, 0.0, 0.0);
        let s = dirichlet_lower_bound_sup_t(&g, 1.0, &default_time_grid(1.0)).unwrap();
        assert_abs_diff_eq!(s.t_star, 2f64.ln(), epsilon = 1e-6);
        assert_abs_diff_eq!(s.value, 0.125, epsilon = 1e-14);

        let g = geom(1.0, 2.0, 0.0, 0.0);
        let s = dirichlet_lower_bound_sup_t(&g, 3.0, &default_time_grid(3.0)).unwrap();
        let cf = dirichlet_lower_bound(&g, 3.0).unwrap().powi(2);
        assert_abs_diff_eq!(s.value, cf, epsilon = 1e-8);
        assert_abs_diff_eq!(s.t_star, optimal_time(3.0, 2.0), epsilon = 1e-6);
    }

    #[test]
    fn sup_t_rejects_empty_grid() {
        assert!(dirichlet_lower_bound_sup_t(&GeometryParams::flat(1), 1.0, &[]).is_err());
    }

    #[test]
    fn upper_a_prime_flat() {
        let g = geom(1.0, 0.0, 0.0, 0.0);
        let bs = dirichlet_upper_bound(&g, 1.0, UpperVariant::APrime).unwrap();
        let expected = (2.0 * E / PI).sqrt() + (PI * E).sqrt() / (4.0 * 2f64.sqrt());
        assert_abs_diff_eq!(bs.upper, expected, epsilon = 1e-14);
        assert_abs_diff_eq!(bs.upper, 1.832_081, epsilon = 1e-6);
        assert_eq!(bs.branch, EpsBranch::Interior);
        assert_abs_diff_eq!(bs.intermediates.b.unwrap(), 1.0);
    }

    #[test]
    fn upper_a_prime_with_kv() {
        let g = geom(1.0, 0.0, 3.0, 0.0);
        let bs = dirichlet_upper_bound(&g, 1.0, UpperVariant::APrime).unwrap();
        let a = bs.intermediates.a_prime.unwrap();
        assert_abs_diff_eq!(a, (8.0 / PI).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(bs.intermediates.b.unwrap(), 2.0);
        assert_eq!(bs.branch, EpsBranch::Interior);
        assert_abs_diff_eq!(bs.upper, E.sqrt() * eps_grid_max(a, 2.0), epsilon = 1e-9);
        assert_abs_diff_eq!(bs.upper, 3.664_161, epsilon = 1e-6);
    }

    #[test]
    fn upper_a_star_ball() {
        let lam = 5.783_19;
        let g = geom(2.0, 0.0, 0.0, -0.5);
        let bs = dirichlet_upper_bound(&g, lam, UpperVariant::AStar).unwrap();
        let a = bs.intermediates.a_star.unwrap();
        assert_abs_diff_eq!(a, (2.0 * lam / PI).sqrt() * (-0.25 / (2.0 * lam)).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(a, 1.877_746, epsilon = 1e-6);
        assert_eq!(bs.branch, EpsBranch::Interior);
        assert_abs_diff_eq!(bs.upper, E.sqrt() * eps_grid_max(a, lam.sqrt()), epsilon = 1e-9);
        assert_abs_diff_eq!(bs.upper, 4.365_336, epsilon = 1e-6);
    }

    #[test]
    fn a_hat_uses_e_weight() {
        let lam = 2.0;
        let g = geom(1.0, 0.0, 0.0, -0.3);
        let bs = dirichlet_upper_bound(&g, lam, UpperVariant::AHat).unwrap();
        let a = bs.intermediates.a_hat.unwrap();
        let grid = (0..=200_000)
            .map(|i| {
                let eps = i as f64 / 200_000.0;
                E * eps * a + (E * (1.0 - eps) * lam).sqrt()
            })
            .fold(f64::MIN, f64::max);
        assert!((bs.upper - grid).abs() < 1e-6);
    }

    #[test]
    fn variant_sign_mismatch_is_error() {
        let g = geom(1.0, 0.0, 0.0, 0.5);
        assert!(matches!(
            dirichlet_upper_bound(&g, 1.0, UpperVariant::AStar),
            Err(Error::VariantSign { .. })
        ));
        let g = geom(1.0, 0.0, 0.0, -0.5);
        assert!(dirichlet_upper_bound(&g, 1.0, UpperVariant::A).is_err());
        // alpha = 0 admits everything
        assert_eq!(dirichlet_upper_bounds(&GeometryParams::flat(1), 1.0).unwrap().len(), 6);
    }

    #[test]
    fn understated_kv_is_rejected() {
        let g = geom(1.0, 0.0, -10.0, 0.0);
        assert!(matches!(
            dirichlet_upper_bound(&g, 1.0, UpperVariant::APrime),
            Err(Error::NegativeShift { .. })
        ));
    }

    #[test]
    fn c1_c2_examples() {
        let g = geom(1.0, 0.0, 0.0, 0.0);
        let (c1, c2) = c1_c2_from_lambda1(&g, 1.0).unwrap();
        assert_abs_diff_eq!(c1, (1.0 / E).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(c2, 1.832_081, epsilon = 1e-6);

        let g = geom(2.0, 0.0, 0.0, 0.0);
        let (c1, _) = c1_c2_from_lambda1(&g, 5.783_19).unwrap();
        assert_abs_diff_eq!(c1, (1.0 / (2.0 * E)).sqrt(), epsilon = 1e-15);

        let g = geom(1.0, 1.0, 0.0, 1.0);
        let (_, c2) = c1_c2_from_lambda1(&g, 1.0).unwrap();
        let a = 2.0 + (4.0 / PI).sqrt();
        assert!(2f64.sqrt() <= 2.0 * a);
        assert_abs_diff_eq!(c2, E.sqrt() * (a + 2.0 / (4.0 * a)), epsilon = 1e-14);
    }

    #[test]
    fn c2_matches_a_prime_bound_in_flat_case() {
        // The intro constant is the A' bound (α ≥ 0, no Gaussian damping at α=0) per √λ.
        let g = geom(2.0, 0.0, 0.0, 0.0);
        for lam in [1.0, 3.0, 10.0] {
            let (_, c2) = c1_c2_from_lambda1(&g, lam).unwrap();
            let ub = dirichlet_upper_bound(&g, lam, UpperVariant::APrime).unwrap().upper;
            assert_abs_diff_eq!(c2 * lam.sqrt(), ub, epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn variant_a_never_exceeds_a_prime(alpha in 0.0f64..5.0, lam in 0.1f64..50.0, kv in 0.0f64..5.0) {
            let g = geom(2.0, 0.0, kv, alpha);
            let a = dirichlet_upper_bound(&g, lam, UpperVariant::A).unwrap().upper;
            let ap = dirichlet_upper_bound(&g, lam, UpperVariant::APrime).unwrap().upper;
            prop_assert!(a <= ap + 1e-12);
        }

        #[test]
        fn lower_never_exceeds_upper(alpha in -3.0f64..3.0, lam in 0.05f64..100.0, k in 0.0f64..5.0, n in 1.0f64..4.0) {
            let mut g = geom(n, k, k, alpha);
            g.d = 1;
            for bs in dirichlet_upper_bounds(&g, lam).unwrap() {
                prop_assert!(bs.lower <= bs.upper, "{:?}", bs);
            }
        }

        #[test]
        fn lower_chain(lam in 0.01f64..100.0, k in 0.0f64..20.0, n in 1.0f64..6.0) {
            let g = geom(n, k, 0.0, 0.0);
            let strong = dirichlet_lower_bound(&g, lam).unwrap();
            let weak = dirichlet_lower_bound_weak(&g, lam).unwrap();
            prop_assert!(weak <= strong * (1.0 + 1e-14));
        }
    }
}
