//! Model domains with exact curvature data: an interval with optional drift,
//! a Euclidean ball (radial coordinate) and a circle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bounds::GeometryParams;
use crate::error::{ensure_positive, Error, Result};

/// Default number of interior grid nodes.
pub const DEFAULT_NODES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum DomainKind {
    /// `[0, length]` with weight `e^V dx`.
    Interval { length: f64 },
    /// Euclidean ball `B(0, radius) ⊂ ℝ^dim`, sampled in the radial coordinate.
    Ball { dim: usize, radius: f64 },
    /// `ℝ / length ℤ`, no boundary.
    Circle { length: f64 },
}

/// Samples of `V`, `V'` and `V''` on the domain grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSamples {
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub d2v: Vec<f64>,
}

/// A sampled model domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    /// Uniform mesh. Interval: `[0, L]` including both ends. Ball: `[0, R]`
    /// in `r`, including the centre. Circle: `[0, L)`, periodic.
    pub grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftSamples>,
    /// Dirichlet eigenvalues when known in closed form (radial only for balls).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dirichlet_eigenvalues: Vec<f64>,
    /// Non-zero Neumann (or closed) eigenvalues when known in closed form.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub neumann_eigenvalues: Vec<f64>,
}

/// Curvature and boundary constants of a model domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureData {
    /// `Ric ≥ -k0` for the bare metric.
    pub k0: f64,
    /// `Ric - Hess V ≥ -k_v`.
    pub k_v: f64,
    /// `H ≥ -theta`.
    pub theta: f64,
    /// `II ≥ -delta`.
    pub delta: f64,
    /// Grid supremum of `½ L ρ` off the cut locus.
    pub alpha: f64,
    /// `½ (max(θ, √((d-1) k0)) + ‖∇V‖∞)`, a coarser admissible `α`.
    pub alpha_drift: f64,
    pub cut_locus: Vec<f64>,
}

impl CurvatureData {
    /// Geometry for the bound formulas with effective dimension `n` and CD constant `k`.
    pub fn geometry(&self, d: usize, n: f64, k: f64) -> GeometryParams {
        GeometryParams {
            d,
            n,
            k,
            k_v: self.k_v,
            theta: self.theta,
            delta: self.delta,
            alpha: self.alpha,
        }
    }
}

/// Polynomial drift `V(x) = Σ c_i x^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Polynomial { coeffs }
    }

    /// `(V, V', V'')` at `x` by Horner's scheme.
    pub fn eval3(&self, x: f64) -> (f64, f64, f64) {
        let (mut p, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            d2 = d2 * x + 2.0 * d1;
            d1 = d1 * x + p;
            p = p * x + c;
        }
        (p, d1, d2)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

impl DomainSpec {
    /// Mesh width.
    pub fn step(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::Interval { .. } | DomainKind::Circle { .. } => 1,
            DomainKind::Ball { dim, .. } => dim,
        }
    }

    pub fn has_boundary(&self) -> bool {
        !matches!(self.kind, DomainKind::Circle { .. })
    }

    pub fn has_drift(&self) -> bool {
        self.drift.is_some()
    }

    /// Distance to the boundary of the point with coordinate `x`
    /// (the radius for balls).
    pub fn boundary_distance(&self, x: f64) -> Result<f64> {
        match self.kind {
            DomainKind::Interval { length } => Ok(x.min(length - x)),
            DomainKind::Ball { radius, .. } => Ok(radius - x.abs()),
            DomainKind::Circle { .. } => Err(Error::EmptyBoundary),
        }
    }

    /// Whether `x` lies strictly inside the domain.
    pub fn is_interior(&self, x: f64) -> bool {
        match self.kind {
            DomainKind::Interval { length } => x > 0.0 && x < length,
            DomainKind::Ball { radius, .. } => x.abs() < radius,
            DomainKind::Circle { .. } => x.is_finite(),
        }
    }

    /// The CD(-K, n) constant `sup (V'' + V'^2/(n-d))` for the interval.
    ///
    /// Without drift this is `K₀` for any `n ≥ d`. With drift `n > d` is required.
    pub fn cd_constant(&self, n: f64) -> Result<f64> {
        let d = self.dim() as f64;
        if n.is_nan() || n < d {
            return Err(Error::invalid("n", format!("need n >= {d}, got {n}")));
        }
        let Some(drift) = &self.drift else {
            return Ok(0.0);
        };
        let flat = drift.dv.iter().chain(&drift.d2v).all(|&v| v == 0.0);
        if flat {
            return Ok(0.0);
        }
        if n == d {
            return Err(Error::invalid("n", "a non-constant drift needs n > d"));
        }
        Ok(drift
            .dv
            .iter()
            .zip(&drift.d2v)
            .map(|(dv, d2v)| d2v + dv * dv / (n - d))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Recommended `(n, K)` pair: `(d, 0)` without drift, `(d + 1, sup(V'' + V'²))` with drift.
    pub fn default_cd(&self) -> Result<(f64, f64)> {
        let d = self.dim() as f64;
        let n = if self.has_drift() { d + 1.0 } else { d };
        Ok((n, self.cd_constant(n)?))
    }
}

fn check_nodes(nodes: usize) -> Result<()> {
    if nodes < 8 {
        return Err(Error::invalid("nodes", format!("need at least 8 interior nodes, got {nodes}")));
    }
    Ok(())
}

fn uniform(lo: f64, hi: f64, cells: usize) -> Vec<f64> {
    let h = (hi - lo) / cells as f64;
    (0..=cells).map(|i| lo + i as f64 * h).collect()
}

fn interval_curvature(length: f64, grid: &[f64], drift: Option<&DriftSamples>) -> CurvatureData {
    let mid = length / 2.0;
    let h = grid[1] - grid[0];
    let (k_v, alpha, grad_sup) = match drift {
        None => (0.0, 0.0, 0.0),
        Some(s) => {
            let k_v = s.d2v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            // ½ L ρ = ½ V' ρ' with ρ' = ±1 away from the midpoint.
            let alpha = grid
                .iter()
                .zip(&s.dv)
                .filter(|(x, _)| (**x - mid).abs() >= 0.5 * h)
                .map(|(x, dv)| 0.5 * dv * if *x < mid { 1.0 } else { -1.0 })
                .fold(f64::NEG_INFINITY, f64::max);
            let grad_sup = s.dv.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            (k_v, alpha, grad_sup)
        }
    };
    CurvatureData {
        k0: 0.0,
        k_v,
        theta: 0.0,
        delta: 0.0,
        alpha,
        alpha_drift: 0.5 * grad_sup,
        cut_locus: vec![mid],
    }
}

const ANALYTIC_COUNT: usize = 20;

/// Flat interval `[0, length]` with `nodes` interior grid points.
pub fn make_interval(length: f64, nodes: usize) -> Result<(DomainSpec, CurvatureData)> {
    ensure_positive("length", length)?;
    check_nodes(nodes)?;
    let grid = uniform(0.0, length, nodes + 1);
    let curv = interval_curvature(length, &grid, None);
    let ks = (1..=ANALYTIC_COUNT).map(|k| (k as f64 * PI / length).powi(2));
    Ok((
        DomainSpec {
            kind: DomainKind::Interval { length },
            grid,
            drift: None,
            dirichlet_eigenvalues: ks.clone().collect(),
            neumann_eigenvalues: ks.collect(),
        },
        curv,
    ))
}

/// Interval with a drift `V` given as `x ↦ (V, V', V'')`, sampled once on the grid.
pub fn make_interval_with_drift<F>(length: f64, nodes: usize, drift: F) -> Result<(DomainSpec, CurvatureData)>
where
    F: Fn(f64) -> (f64, f64, f64),
{
    ensure_positive("length", length)?;
    check_nodes(nodes)?;
    let grid = uniform(0.0, length, nodes + 1);
    let mut s = DriftSamples {
        v: Vec::with_capacity(grid.len()),
        dv: Vec::with_capacity(grid.len()),
        d2v: Vec::with_capacity(grid.len()),
    };
    for &x in &grid {
        let (v, d1, d2) = drift(x);
        if !(v.is_finite() && d1.is_finite() && d2.is_finite()) {
            return Err(Error::invalid("drift", format!("non-finite sample at x = {x}")));
        }
        s.v.push(v);
        s.dv.push(d1);
        s.d2v.push(d2);
    }
    let curv = interval_curvature(length, &grid, Some(&s));
    Ok((
        DomainSpec {
            kind: DomainKind::Interval { length },
            grid,
            drift: Some(s),
            dirichlet_eigenvalues: Vec::new(),
            neumann_eigenvalues: Vec::new(),
        },
        curv,
    ))
}

/// Interval with polynomial drift; a zero polynomial gives [`make_interval`].
pub fn make_interval_poly(length: f64, nodes: usize, v: &Polynomial) -> Result<(DomainSpec, CurvatureData)> {
    if v.is_zero() {
        make_interval(length, nodes)
    } else {
        make_interval_with_drift(length, nodes, |x| v.eval3(x))
    }
}

/// Ball of radius `radius` in `ℝ^dim`, radial grid with `nodes` points in `(0, R)`.
pub fn make_ball(dim: usize, radius: f64, nodes: usize) -> Result<(DomainSpec, CurvatureData)> {
    if dim < 2 {
        return Err(Error::invalid("dim", format!("ball needs dim >= 2, got {dim}")));
    }
    ensure_positive("radius", radius)?;
    check_nodes(nodes)?;
    let grid = uniform(0.0, radius, nodes + 1);
    let h = grid[1];
    // ½ Δ(R - r) = -(d-1)/(2r), sup over r ∈ [h, R] (one cell around the centre removed).
    let alpha = grid
        .iter()
        .filter(|&&r| r >= h * (1.0 - 1e-12))
        .map(|&r| -((dim - 1) as f64) / (2.0 * r))
        .fold(f64::NEG_INFINITY, f64::max);
    let dirichlet_eigenvalues = if dim == 3 {
        (1..=ANALYTIC_COUNT).map(|k| (k as f64 * PI / radius).powi(2)).collect()
    } else {
        Vec::new()
    };
    Ok((
        DomainSpec {
            kind: DomainKind::Ball { dim, radius },
            grid,
            drift: None,
            dirichlet_eigenvalues,
            neumann_eigenvalues: Vec::new(),
        },
        CurvatureData {
            k0: 0.0,
            k_v: 0.0,
            theta: 0.0,
            delta: 0.0,
            alpha,
            alpha_drift: 0.0,
            cut_locus: vec![0.0],
        },
    ))
}

/// Circle of circumference `length` sampled at `nodes` points.
pub fn make_circle(length: f64, nodes: usize) -> Result<(DomainSpec, CurvatureData)> {
    ensure_positive("length", length)?;
    check_nodes(nodes)?;
    let h = length / nodes as f64;
    let grid = (0..nodes).map(|i| i as f64 * h).collect();
    let neumann_eigenvalues = (1..=ANALYTIC_COUNT)
        .map(|k| (2.0 * PI * k as f64 / length).powi(2))
        .collect();
    Ok((
        DomainSpec {
            kind: DomainKind::Circle { length },
            grid,
            drift: None,
            dirichlet_eigenvalues: Vec::new(),
            neumann_eigenvalues,
        },
        CurvatureData {
            k0: 0.0,
            k_v: 0.0,
            theta: 0.0,
            delta: 0.0,
            alpha: 0.0,
            alpha_drift: 0.0,
            cut_locus: Vec::new(),
        },
    ))
}
