//! Eigenpairs of `L = Δ + ∇V` on the model domains.
//!
//! The interval and the radial ball use a conservative finite-volume
//! discretisation `S φ = λ M φ`, symmetrised to `M^{-½} S M^{-½}`, whose
//! lowest modes come from Sturm bisection and inverse iteration. The
//! reported eigenvalue is the Rayleigh quotient of the discrete mode
//! evaluated with fourth-order derivatives and Simpson weights; the raw
//! matrix eigenvalue is kept in `lambda_discrete`.

use serde::{Deserialize, Serialize};

use crate::domains::{DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::tridiag::SymTridiag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryCondition {
    Dirichlet,
    /// Neumann on domains with boundary, the closed problem on the circle.
    Neumann,
}

impl BoundaryCondition {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
        }
    }
}

/// A sampled eigenpair, normalised so that `‖φ‖∞ = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda: f64,
    pub lambda_discrete: f64,
    pub bc: BoundaryCondition,
    pub grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub norm_phi: f64,
    pub norm_grad: f64,
    /// `None` when the domain has no boundary.
    pub norm_grad_boundary: Option<f64>,
}

impl EigenPair {
    /// Cubic Hermite interpolation of `φ` at `x` (the radius for balls).
    pub fn eval(&self, x: f64) -> f64 {
        let g = &self.grid;
        let h = g[1] - g[0];
        let n = g.len();
        let s = ((x - g[0]) / h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let u = s - i as f64;
        let (p0, p1) = (self.phi[i], self.phi[i + 1]);
        let (m0, m1) = (self.dphi[i] * h, self.dphi[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * p0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * p1
            + (u3 - u2) * m1
    }
}

/// `‖∇φ‖∞ / ‖φ‖∞`.
pub fn gradient_ratio(ep: &EigenPair) -> f64 {
    ep.norm_grad / ep.norm_phi
}

/// `‖∇φ‖_{∂D,∞}`, from fourth-order one-sided differences at the boundary nodes.
pub fn boundary_gradient(ep: &EigenPair, spec: &DomainSpec) -> Result<f64> {
    match spec.kind {
        DomainKind::Circle { .. } => Err(Error::EmptyBoundary),
        DomainKind::Interval { .. } => Ok(ep.dphi[0].abs().max(ep.dphi[ep.dphi.len() - 1].abs())),
        DomainKind::Ball { .. } => Ok(ep.dphi[ep.dphi.len() - 1].abs()),
    }
}

/// Solves on any catalog domain; balls support Dirichlet only.
pub fn solve(spec: &DomainSpec, bc: BoundaryCondition, m: usize) -> Result<Vec<EigenPair>> {
    match spec.kind {
        DomainKind::Interval { .. } => solve_interval(spec, bc, m),
        DomainKind::Ball { .. } => match bc {
            BoundaryCondition::Dirichlet => solve_ball_radial(spec, m),
            BoundaryCondition::Neumann => Err(Error::UnsupportedDomain(
                "Neumann modes on the ball are not implemented".into(),
            )),
        },
        DomainKind::Circle { .. } => match bc {
            BoundaryCondition::Neumann => circle_modes(spec, m),
            BoundaryCondition::Dirichlet => Err(Error::UnsupportedDomain(
                "the circle has no boundary; use the closed (neumann) problem".into(),
            )),
        },
    }
}

/// The discrete system on the full grid: flux coefficients at half nodes,
/// masses at nodes and the range of unknown indices.
struct System {
    flux: Vec<f64>,
    mass: Vec<f64>,
    first: usize,
    last: usize,
    h: f64,
}

fn interval_system(spec: &DomainSpec, bc: BoundaryCondition) -> System {
    let n = spec.grid.len();
    let h = spec.step();
    let v = |i: usize| spec.drift.as_ref().map_or(0.0, |d| d.v[i]);
    let flux = (0..n - 1).map(|i| (0.5 * (v(i) + v(i + 1))).exp()).collect();
    let mut mass: Vec<f64> = (0..n).map(|i| v(i).exp() * h).collect();
    mass[0] *= 0.5;
    mass[n - 1] *= 0.5;
    let (first, last) = match bc {
        BoundaryCondition::Dirichlet => (1, n - 2),
        BoundaryCondition::Neumann => (0, n - 1),
    };
    System { flux, mass, first, last, h }
}

fn ball_system(spec: &DomainSpec, dim: usize) -> System {
    let n = spec.grid.len();
    let h = spec.step();
    let p = (dim - 1) as i32;
    let flux = (0..n - 1).map(|i| ((i as f64 + 0.5) * h).powi(p)).collect();
    let mut mass: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(p) * h).collect();
    mass[0] = (0.5 * h).powi(dim as i32) / dim as f64;
    System {
        flux,
        mass,
        first: 0,
        last: n - 2,
        h,
    }
}

impl System {
    fn matrix(&self) -> SymTridiag {
        let idx: Vec<usize> = (self.first..=self.last).collect();
        let diag = idx
            .iter()
            .map(|&i| {
                let left = if i > 0 { self.flux[i - 1] } else { 0.0 };
                let right = if i < self.flux.len() { self.flux[i] } else { 0.0 };
                (left + right) / (self.h * self.mass[i])
            })
            .collect();
        let off = idx
            .windows(2)
            .map(|w| -self.flux[w[0]] / (self.h * (self.mass[w[0]] * self.mass[w[1]]).sqrt()))
            .collect();
        SymTridiag::new(diag, off).expect("consistent sizes")
    }

    /// `(S φ)_i / M_i - λ φ_i` over the unknowns.
    fn residual(&self, lambda: f64, phi: &[f64]) -> f64 {
        (self.first..=self.last)
            .map(|i| {
                let mut s = 0.0;
                if i > 0 {
                    s += self.flux[i - 1] * (phi[i] - phi[i - 1]);
                }
                if i < self.flux.len() {
                    s += self.flux[i] * (phi[i] - phi[i + 1]);
                }
                (s / (self.h * self.mass[i]) - lambda * phi[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Sup-norm of the discrete residual of `(λ, φ)` in the finite-volume system.
pub fn operator_residual(spec: &DomainSpec, bc: BoundaryCondition, lambda: f64, phi: &[f64]) -> Result<f64> {
    if phi.len() != spec.grid.len() {
        return Err(Error::invalid("phi", "length must match the grid"));
    }
    let sys = match spec.kind {
        DomainKind::Interval { .. } => interval_system(spec, bc),
        DomainKind::Ball { dim, .. } => ball_system(spec, dim),
        DomainKind::Circle { .. } => return Err(Error::UnsupportedDomain("circle residual".into())),
    };
    Ok(sys.residual(lambda, phi))
}

/// Mass weights `M_i` of the discrete inner product (zero on Dirichlet nodes).
pub fn mass_weights(spec: &DomainSpec, bc: BoundaryCondition) -> Result<Vec<f64>> {
    let sys = match spec.kind {
        DomainKind::Interval { .. } => interval_system(spec, bc),
        DomainKind::Ball { dim, .. } => ball_system(spec, dim),
        DomainKind::Circle { .. } => return Ok(vec![spec.step(); spec.grid.len()]),
    };
    Ok((0..spec.grid.len())
        .map(|i| if i >= sys.first && i <= sys.last { sys.mass[i] } else { 0.0 })
        .collect())
}

/// Composite Simpson weights on `n` equispaced points, closing with the
/// 3/8 rule when the number of intervals is odd.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 4, "need at least four points");
    let mut w = vec![0.0; n];
    let intervals = n - 1;
    let simpson_end = if intervals.is_multiple_of(2) { n - 1 } else { n - 4 };
    for i in (0..simpson_end).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if intervals % 2 == 1 {
        let s = n - 4;
        w[s] += 3.0 * h / 8.0;
        w[s + 1] += 9.0 * h / 8.0;
        w[s + 2] += 9.0 * h / 8.0;
        w[s + 3] += 3.0 * h / 8.0;
    }
    w
}

/// Quadrature weights for `∫_D g` of a function sampled on the grid
/// (`e^V dx` on the interval, `r^{d-1} dr` on the ball, up to the sphere area).
pub fn quadrature_weights(spec: &DomainSpec) -> Vec<f64> {
    let n = spec.grid.len();
    let h = spec.step();
    match spec.kind {
        DomainKind::Circle { .. } => vec![h; n],
        DomainKind::Interval { .. } => {
            let mut w = simpson_weights(n, h);
            if let Some(d) = &spec.drift {
                w.iter_mut().zip(&d.v).for_each(|(w, v)| *w *= v.exp());
            }
            w
        }
        DomainKind::Ball { dim, .. } => {
            let mut w = simpson_weights(n, h);
            w.iter_mut()
                .zip(&spec.grid)
                .for_each(|(w, r)| *w *= r.powi(dim as i32 - 1));
            w
        }
    }
}

/// Fourth-order first derivative on a uniform grid. `even_left` / `even_right`
/// use an even reflection at that end (centre of a ball, Neumann ends).
fn derivative4(f: &[f64], h: f64, even_left: bool, even_right: bool) -> Vec<f64> {
    let n = f.len();
    let at = |i: isize| -> f64 {
        if i < 0 {
            f[(-i) as usize]
        } else if i as usize >= n {
            f[2 * (n - 1) - i as usize]
        } else {
            f[i as usize]
        }
    };
    let central = |i: usize| {
        let i = i as isize;
        (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * h)
    };
    let mut d = vec![0.0; n];
    for (i, di) in d.iter_mut().enumerate() {
        let interior = i >= 2 && i + 2 < n;
        let left_ok = even_left && i < 2;
        let right_ok = even_right && i + 2 >= n;
        if interior || left_ok || right_ok {
            *di = central(i);
        }
    }
    if !even_left {
        d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
        d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
    }
    if !even_right {
        let m = n - 1;
        d[m] = (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4]) / (12.0 * h);
        d[m - 1] = (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]) / (12.0 * h);
    }
    if even_left {
        d[0] = 0.0;
    }
    if even_right {
        d[n - 1] = 0.0;
    }
    d
}

/// Maximum of `|f|` with a three-point parabolic correction at interior
/// extrema; reflected ends are treated as interior.
fn refined_abs_max(f: &[f64], even_left: bool, even_right: bool) -> (f64, usize) {
    let n = f.len();
    let (i, _) = f
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) });
    let y0 = f[i].abs();
    let neighbours = if i > 0 && i + 1 < n {
        Some((f[i - 1].abs(), f[i + 1].abs()))
    } else if i == 0 && even_left && n > 1 {
        Some((f[1].abs(), f[1].abs()))
    } else if i + 1 == n && even_right && n > 1 {
        Some((f[n - 2].abs(), f[n - 2].abs()))
    } else {
        None
    };
    let peak = match neighbours {
        Some((ym, yp)) => {
            let curv = yp - 2.0 * y0 + ym;
            if curv < 0.0 {
                y0 - (yp - ym).powi(2) / (8.0 * curv)
            } else {
                y0
            }
        }
        None => y0,
    };
    (peak, i)
}

struct Shape {
    even_left: bool,
    even_right: bool,
    has_boundary: bool,
}

fn assemble(
    spec: &DomainSpec,
    bc: BoundaryCondition,
    sys: &System,
    shape: &Shape,
    lambda_discrete: f64,
    y: &[f64],
) -> EigenPair {
    let n = spec.grid.len();
    let h = sys.h;
    let mut phi = vec![0.0; n];
    for (k, i) in (sys.first..=sys.last).enumerate() {
        phi[i] = y[k] / sys.mass[i].sqrt();
    }
    let (peak, imax) = refined_abs_max(&phi, shape.even_left, shape.even_right);
    let sign = if phi[imax] < 0.0 { -1.0 } else { 1.0 };
    phi.iter_mut().for_each(|v| *v *= sign / peak);
    let dphi = derivative4(&phi, h, shape.even_left, shape.even_right);
    let (norm_grad, _) = refined_abs_max(&dphi, false, false);

    let weights = quadrature_weights(spec);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        let w = weights[i];
        num += w * dphi[i] * dphi[i];
        den += w * phi[i] * phi[i];
    }
    let norm_grad_boundary = shape.has_boundary.then(|| match spec.kind {
        DomainKind::Ball { .. } => dphi[n - 1].abs(),
        _ => dphi[0].abs().max(dphi[n - 1].abs()),
    });
    EigenPair {
        lambda: num / den,
        lambda_discrete,
        bc,
        grid: spec.grid.clone(),
        phi,
        dphi,
        norm_phi: 1.0,
        norm_grad,
        norm_grad_boundary,
    }
}

fn solve_system(
    spec: &DomainSpec,
    bc: BoundaryCondition,
    sys: System,
    shape: Shape,
    skip: usize,
    m: usize,
) -> Result<Vec<EigenPair>> {
    let unknowns = sys.last + 1 - sys.first;
    if m == 0 {
        return Err(Error::invalid("m", "need at least one mode"));
    }
    if m + skip > unknowns / 4 {
        return Err(Error::TooManyModes {
            requested: m,
            max: (unknowns / 4).saturating_sub(skip),
        });
    }
    let a = sys.matrix();
    let lambdas: Vec<f64> = map_indexed(m + skip, Execution::default(), |k| a.eigenvalue(k))
        .into_iter()
        .collect::<Result<_>>()?;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + skip);
    for &lam in &lambdas {
        let v = a.eigenvector(lam, &basis)?;
        basis.push(v);
    }
    Ok(lambdas
        .iter()
        .zip(&basis)
        .skip(skip)
        .map(|(&lam, y)| assemble(spec, bc, &sys, &shape, lam, y))
        .collect())
}

/// The `m` lowest eigenpairs on an interval (Neumann excludes the constant mode).
pub fn solve_interval(spec: &DomainSpec, bc: BoundaryCondition, m: usize) -> Result<Vec<EigenPair>> {
    if !matches!(spec.kind, DomainKind::Interval { .. }) {
        return Err(Error::UnsupportedDomain("solve_interval needs an interval".into()));
    }
    let neumann = bc == BoundaryCondition::Neumann;
    let shape = Shape {
        even_left: neumann,
        even_right: neumann,
        has_boundary: true,
    };
    let sys = interval_system(spec, bc);
    solve_system(spec, bc, sys, shape, usize::from(neumann), m)
}

/// The `m` lowest radial Dirichlet eigenpairs of the ball.
pub fn solve_ball_radial(spec: &DomainSpec, m: usize) -> Result<Vec<EigenPair>> {
    let DomainKind::Ball { dim, .. } = spec.kind else {
        return Err(Error::UnsupportedDomain("solve_ball_radial needs a ball".into()));
    };
    let shape = Shape {
        even_left: true,
        even_right: false,
        has_boundary: true,
    };
    let sys = ball_system(spec, dim);
    solve_system(spec, BoundaryCondition::Dirichlet, sys, shape, 0, m)
}

/// Closed-form modes of the circle: `sin` and `cos` of frequency
/// `2πk/L` for `k = 1, 2, …`, returned in pairs.
pub fn circle_modes(spec: &DomainSpec, m: usize) -> Result<Vec<EigenPair>> {
    let DomainKind::Circle { length } = spec.kind else {
        return Err(Error::UnsupportedDomain("circle_modes needs a circle".into()));
    };
    if m == 0 || m > spec.grid.len() / 4 {
        return Err(Error::TooManyModes {
            requested: m,
            max: spec.grid.len() / 4,
        });
    }
    Ok((0..m)
        .map(|j| {
            let k = (j / 2 + 1) as f64;
            let w = 2.0 * std::f64::consts::PI * k / length;
            let (phi, dphi): (Vec<f64>, Vec<f64>) = spec
                .grid
                .iter()
                .map(|&x| {
                    if j % 2 == 0 {
                        ((w * x).sin(), w * (w * x).cos())
                    } else {
                        ((w * x).cos(), -w * (w * x).sin())
                    }
                })
                .unzip();
            let (np, _) = refined_abs_max(&phi, false, false);
            let (ng, _) = refined_abs_max(&dphi, false, false);
            EigenPair {
                lambda: w * w,
                lambda_discrete: w * w,
                bc: BoundaryCondition::Neumann,
                grid: spec.grid.clone(),
                phi: phi.iter().map(|v| v / np).collect(),
                dphi: dphi.iter().map(|v| v / np).collect(),
                norm_phi: 1.0,
                norm_grad: ng / np,
                norm_grad_boundary: None,
            }
        })
        .collect())
}

/// Coefficients `c_k = ⟨1, φ_k⟩ / ⟨φ_k, φ_k⟩` of the constant function.
fn unit_coefficients(spec: &DomainSpec, modes: &[EigenPair]) -> Vec<f64> {
    let w = quadrature_weights(spec);
    modes
        .iter()
        .map(|ep| {
            let (mut a, mut b) = (0.0, 0.0);
            for (wi, p) in w.iter().zip(&ep.phi) {
                a += wi * p;
                b += wi * p * p;
            }
            a / b
        })
        .collect()
}

/// Survival function `ψ(t, ·) = Σ c_k e^{-λ_k t/2} φ_k` on the grid, for
/// the diffusion with generator `½ L` killed at the boundary.
pub fn survival_series(spec: &DomainSpec, modes: &[EigenPair], t: f64) -> Result<Vec<f64>> {
    check_series(spec, modes, t)?;
    let c = unit_coefficients(spec, modes);
    let mut psi = vec![0.0; spec.grid.len()];
    for (ep, ck) in modes.iter().zip(&c) {
        let a = ck * (-ep.lambda * t / 2.0).exp();
        psi.iter_mut().zip(&ep.phi).for_each(|(p, f)| *p += a * f);
    }
    Ok(psi)
}

/// `ψ(t, x)` from the series, by Hermite interpolation of each mode.
pub fn survival_series_at(spec: &DomainSpec, modes: &[EigenPair], t: f64, x: f64) -> Result<f64> {
    check_series(spec, modes, t)?;
    let c = unit_coefficients(spec, modes);
    Ok(modes
        .iter()
        .zip(&c)
        .map(|(ep, ck)| ck * (-ep.lambda * t / 2.0).exp() * ep.eval(x))
        .sum())
}

/// Inward normal derivative of `ψ(t, ·)` at the boundary point `x = 0`
/// (interval) or `r = R` (ball).
pub fn survival_boundary_derivative(spec: &DomainSpec, modes: &[EigenPair], t: f64) -> Result<f64> {
    check_series(spec, modes, t)?;
    let c = unit_coefficients(spec, modes);
    let last = spec.grid.len() - 1;
    Ok(modes
        .iter()
        .zip(&c)
        .map(|(ep, ck)| {
            let inward = match spec.kind {
                DomainKind::Ball { .. } => -ep.dphi[last],
                _ => ep.dphi[0],
            };
            ck * (-ep.lambda * t / 2.0).exp() * inward
        })
        .sum())
}

fn check_series(spec: &DomainSpec, modes: &[EigenPair], t: f64) -> Result<()> {
    if !spec.has_boundary() {
        return Err(Error::EmptyBoundary);
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid("t", format!("must be > 0, got {t}")));
    }
    if modes.is_empty() || modes.iter().any(|m| m.bc != BoundaryCondition::Dirichlet) {
        return Err(Error::invalid("modes", "need a non-empty list of Dirichlet modes"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{make_ball, make_circle, make_interval, DEFAULT_NODES};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn derivative_stencils_are_fourth_order() {
        let h = 0.01;
        let f: Vec<f64> = (0..200).map(|i| (i as f64 * h).sin()).collect();
        let d = derivative4(&f, h, false, false);
        for (i, di) in d.iter().enumerate() {
            assert_abs_diff_eq!(*di, (i as f64 * h).cos(), epsilon = 1e-8);
        }
    }

    #[test]
    fn simpson_handles_odd_interval_count() {
        for n in [5, 6, 101, 102] {
            let h = 1.0 / (n - 1) as f64;
            let w = simpson_weights(n, h);
            let s: f64 = w.iter().enumerate().map(|(i, w)| w * (i as f64 * h).powi(3)).sum();
            assert_abs_diff_eq!(s, 0.25, epsilon = 1e-14);
        }
    }

    #[test]
    fn interval_dirichlet_modes() {
        let (spec, _) = make_interval(PI, DEFAULT_NODES).unwrap();
        let modes = solve_interval(&spec, BoundaryCondition::Dirichlet, 3).unwrap();
        for (k, ep) in modes.iter().enumerate() {
            let kk = (k + 1) as f64;
            assert_abs_diff_eq!(ep.lambda, kk * kk, epsilon = 1e-5);
            assert_abs_diff_eq!(gradient_ratio(ep), kk, epsilon = 1e-6);
            assert_abs_diff_eq!(boundary_gradient(ep, &spec).unwrap(), kk, epsilon = 1e-6);
            assert_eq!(ep.phi[0], 0.0);
            assert_eq!(*ep.phi.last().unwrap(), 0.0);
        }
    }

    #[test]
    fn interval_neumann_modes() {
        let (spec, _) = make_interval(PI, DEFAULT_NODES).unwrap();
        let modes = solve_interval(&spec, BoundaryCondition::Neumann, 2).unwrap();
        for (k, ep) in modes.iter().enumerate() {
            let kk = (k + 1) as f64;
            assert_abs_diff_eq!(ep.lambda, kk * kk, epsilon = 1e-5);
            assert_abs_diff_eq!(gradient_ratio(ep), kk, epsilon = 1e-5);
            assert!(ep.norm_grad_boundary.unwrap() < 1e-12);
        }
    }

    #[test]
    fn unit_interval() {
        let (spec, _) = make_interval(1.0, DEFAULT_NODES).unwrap();
        let ep = &solve_interval(&spec, BoundaryCondition::Dirichlet, 1).unwrap()[0];
        assert_abs_diff_eq!(ep.lambda, PI * PI, epsilon = 1e-4);
    }

    #[test]
    fn ball_three_dimensional() {
        let (spec, _) = make_ball(3, 1.0, DEFAULT_NODES).unwrap();
        let ep = &solve_ball_radial(&spec, 1).unwrap()[0];
        assert_abs_diff_eq!(ep.lambda, PI * PI, epsilon = 1e-4);
        // φ = sin(πr)/(πr): the boundary gradient is 1.
        assert_abs_diff_eq!(boundary_gradient(ep, &spec).unwrap(), 1.0, epsilon = 1e-4);
    }

    #[test]
    fn circle() {
        let (spec, _) = make_circle(2.0 * PI, 1024).unwrap();
        let modes = circle_modes(&spec, 4).unwrap();
        assert_abs_diff_eq!(gradient_ratio(&modes[0]), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(modes[3].lambda, 4.0, epsilon = 1e-12);
        assert!(boundary_gradient(&modes[0], &spec).is_err());
    }

    #[test]
    fn hermite_eval() {
        let (spec, _) = make_interval(PI, 512).unwrap();
        let ep = &solve_interval(&spec, BoundaryCondition::Dirichlet, 1).unwrap()[0];
        assert_abs_diff_eq!(ep.eval(PI / 4.0), (PI / 4.0).sin(), epsilon = 1e-7);
        assert_abs_diff_eq!(ep.eval(PI / 2.0), 1.0, epsilon = 1e-7);
    }

    #[test]
    fn survival_series_on_pi_interval() {
        let (spec, _) = make_interval(PI, DEFAULT_NODES).unwrap();
        let modes = solve_interval(&spec, BoundaryCondition::Dirichlet, 20).unwrap();
        // odd k: 4/(kπ) e^{-k²t/2} sin(kx)
        let exact: f64 = (0..10)
            .map(|j| {
                let k = (2 * j + 1) as f64;
                4.0 / (k * PI) * (-k * k / 2.0).exp() * (k * PI / 2.0).sin()
            })
            .sum();
        let v = survival_series_at(&spec, &modes, 1.0, PI / 2.0).unwrap();
        assert_abs_diff_eq!(v, exact, epsilon = 1e-6);
        let d = survival_boundary_derivative(&spec, &modes, 1.0).unwrap();
        let exact_d: f64 = (0..10)
            .map(|j| {
                let k = (2 * j + 1) as f64;
                4.0 / PI * (-k * k / 2.0).exp()
            })
            .sum();
        assert_abs_diff_eq!(d, exact_d, epsilon = 1e-6);
        let psi = survival_series(&spec, &modes, 1.0).unwrap();
        assert_eq!(psi[0], 0.0);
        assert!(psi[1..psi.len() - 1].iter().all(|&p| p > 0.0));
    }

    #[test]
    fn rejects_too_many_modes() {
        let (spec, _) = make_interval(1.0, 64).unwrap();
        assert!(matches!(
            solve_interval(&spec, BoundaryCondition::Dirichlet, 17),
            Err(Error::TooManyModes { .. })
        ));
    }
}
