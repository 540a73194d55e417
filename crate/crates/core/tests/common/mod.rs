#![allow(dead_code)]

use std::f64::consts::PI;

/// `J_n(x)` by its power series; accurate to ~1e-15 for `|x| ≤ 6`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for m in 1..60 {
        let m = m as f64;
        term *= -half * half / (m * (m + n as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// First positive zero of `J_0` by Newton's method (`J_0' = -J_1`).
pub fn j0_first_zero() -> f64 {
    let mut x = 2.4;
    for _ in 0..50 {
        let step = bessel_j(0, x) / -bessel_j(1, x);
        x -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    x
}

/// `max_{[0, j0,1]} |J_1|`, located where `J_1' = J_0 - J_1/x` vanishes.
pub fn j1_max_on_first_lobe() -> f64 {
    let g = |x: f64| bessel_j(0, x) - bessel_j(1, x) / x;
    let (mut lo, mut hi) = (1.0, 2.4);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(lo) * g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    bessel_j(1, 0.5 * (lo + hi))
}

/// Standard normal CDF through `statrs`'s `erfc`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / 2f64.sqrt())
}

/// `P(T ≤ t)` for the hitting time of 0 by `ε + b_s + α s`, from the
/// closed-form survival law of drifted Brownian motion.
pub fn fpt_closed_form(alpha: f64, eps: f64, t: f64) -> f64 {
    let st = t.sqrt();
    let survive = normal_cdf((eps + alpha * t) / st) - (-2.0 * alpha * eps).exp() * normal_cdf((alpha * t - eps) / st);
    1.0 - survive
}

/// `f(α)` through `erf`: `√(2/(πt)) e^{-α²t/2} + α + |α| erf(|α| √(t/2))`.
pub fn f_alpha_erf(alpha: f64, t: f64) -> f64 {
    let a = alpha.abs();
    (2.0 / (PI * t)).sqrt() * (-alpha * alpha * t / 2.0).exp() + alpha + a * statrs::function::erf::erf(a * (t / 2.0).sqrt())
}
