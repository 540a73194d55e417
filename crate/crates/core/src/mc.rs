//! Monte-Carlo estimators for the diffusion with generator `½ L`.
//!
//! Paths are split into fixed-size chunks; chunk `i` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `i`, and chunk statistics are
//! merged in chunk order. Results are therefore a deterministic function of
//! the configuration, whichever [`Execution`] mode runs the chunks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bounds::psi_gradient_bound_f;
use crate::domains::{CurvatureData, DomainKind, DomainSpec};
use crate::eigensolver::{BoundaryCondition, EigenPair};
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::fpt::{fpt_probability_exact, intercept_weights, slope_ladder, SlopeFit};

/// Paths per chunk. Part of the reproducibility contract.
pub const CHUNK_SIZE: u64 = 1 << 14;
/// Largest ball dimension the simulator supports.
pub const MAX_DIM: usize = 8;
/// Default number of time steps over the horizon.
pub const DEFAULT_STEPS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub n_paths: u64,
    /// Time step; `None` means `t / 2000`. Must satisfy `dt ≤ t/100`.
    pub dt: Option<f64>,
    pub seed: u64,
    pub bridge_correction: bool,
    #[serde(default)]
    pub execution: Execution,
}

impl MCConfig {
    pub fn new(n_paths: u64, seed: u64) -> Self {
        MCConfig {
            n_paths,
            dt: None,
            seed,
            bridge_correction: true,
            execution: Execution::default(),
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_bridge(mut self, on: bool) -> Self {
        self.bridge_correction = on;
        self
    }

    /// Same budget with an independent stream family.
    pub fn reseeded(mut self, tag: u64) -> Self {
        self.seed = splitmix64(self.seed ^ splitmix64(tag));
        self
    }

    /// Number of steps and step size covering `[0, t]`.
    pub fn steps_for(&self, t: f64) -> Result<(usize, f64)> {
        if self.n_paths == 0 {
            return Err(Error::invalid("n_paths", "must be at least 1"));
        }
        let dt = self.dt.unwrap_or(t / DEFAULT_STEPS as f64);
        ensure_positive("dt", dt)?;
        if dt > t / 100.0 * (1.0 + 1e-12) {
            return Err(Error::invalid("dt", format!("need dt <= t/100 = {}, got {dt}", t / 100.0)));
        }
        let n = (t / dt).ceil().max(1.0) as usize;
        Ok((n, t / n as f64))
    }
}

/// SplitMix64 finaliser, used to derive independent seeds.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Running count, mean and centred sum of squares (Welford, with Chan's merge).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, o: &Moments) {
        if o.n == 0 {
            return;
        }
        let (na, nb) = (self.n as f64, o.n as f64);
        let n = na + nb;
        let d = o.mean - self.mean;
        self.mean += d * nb / n;
        self.m2 += o.m2 + d * d * na * nb / n;
        self.n += o.n;
    }

    fn mean(&self) -> f64 {
        self.mean
    }

    fn stderr(&self) -> f64 {
        let n = self.n as f64;
        (self.m2.max(0.0) / (n - 1.0).max(1.0) / n).sqrt()
    }
}

/// Runs `path` over `cfg.n_paths` paths in deterministic chunks, with `k`
/// accumulators per path.
fn run_paths<F>(cfg: &MCConfig, k: usize, path: F) -> Vec<Moments>
where
    F: Fn(&mut ChaCha8Rng, &mut [Moments]) + Sync + Send,
{
    let chunks = cfg.n_paths.div_ceil(CHUNK_SIZE);
    let per_chunk = map_indexed(chunks as usize, cfg.execution, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(c as u64);
        let count = CHUNK_SIZE.min(cfg.n_paths - c as u64 * CHUNK_SIZE);
        let mut acc = vec![Moments::default(); k];
        for _ in 0..count {
            path(&mut rng, &mut acc);
        }
        acc
    });
    let mut total = vec![Moments::default(); k];
    for acc in &per_chunk {
        for (t, a) in total.iter_mut().zip(acc) {
            t.merge(a);
        }
    }
    total
}

/// Probability that a Brownian bridge between distances `y0, y1 > 0` from a
/// flat barrier touches it within time `dt`.
#[inline]
fn bridge_hit(y0: f64, y1: f64, dt: f64) -> f64 {
    (-2.0 * y0 * y1 / dt).exp()
}

/// Monte-Carlo vs exact first-passage probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FptResult {
    pub alpha: f64,
    pub eps: f64,
    pub t: f64,
    /// Empirical `P(t ≥ T^α(ε))`.
    pub estimate: f64,
    /// Binomial standard error.
    pub stderr: f64,
    /// Quadrature value.
    pub exact: f64,
    /// `(estimate - exact) / stderr`, with `stderr` floored at `1/n_paths`.
    pub z_score: f64,
    pub n_paths: u64,
}

/// Euler paths of `ε + b_s + α s` with bridge crossing tests, reporting the
/// hitting probability by time `t`.
pub fn simulate_fpt(alpha: f64, eps: f64, t: f64, cfg: &MCConfig) -> Result<FptResult> {
    ensure_finite("alpha", alpha)?;
    ensure_positive("eps", eps)?;
    ensure_positive("t", t)?;
    let exact = fpt_probability_exact(alpha, eps, t)?;
    let (steps, dt) = cfg.steps_for(t)?;
    let sd = dt.sqrt();
    let drift = alpha * dt;
    let bridge = cfg.bridge_correction;
    let m = run_paths(cfg, 1, |rng, acc| {
        let mut y = eps;
        let mut hit = 0.0;
        for _ in 0..steps {
            let z: f64 = rng.sample(StandardNormal);
            let y1 = y + drift + sd * z;
            if y1 <= 0.0 || (bridge && rng.random::<f64>() < bridge_hit(y, y1, dt)) {
                hit = 1.0;
                break;
            }
            y = y1;
        }
        acc[0].push(hit);
    });
    let p = m[0].mean();
    let n = m[0].n as f64;
    let stderr = (p * (1.0 - p) / n).sqrt();
    Ok(FptResult {
        alpha,
        eps,
        t,
        estimate: p,
        stderr,
        exact,
        z_score: (p - exact) / stderr.max(1.0 / n),
        n_paths: m[0].n,
    })
}

/// Monte-Carlo version of [`crate::fpt::fpt_small_eps_slope`]; each `ε`
/// uses an independent stream family and the standard error is propagated
/// through the intercept weights.
pub fn fpt_small_eps_slope_mc(alpha: f64, t: f64, eps_list: &[f64], cfg: &MCConfig) -> Result<SlopeFit> {
    let eps = slope_ladder(eps_list)?;
    let mut ratios = Vec::with_capacity(3);
    let mut errs = Vec::with_capacity(3);
    for (i, &e) in eps.iter().enumerate() {
        let r = simulate_fpt(alpha, e, t, &cfg.reseeded(i as u64))?;
        ratios.push((1.0 - r.estimate) / e);
        errs.push(r.stderr / e);
    }
    let w = intercept_weights(&eps);
    Ok(SlopeFit {
        slope: w.iter().zip(&ratios).map(|(w, y)| w * y).sum(),
        stderr: w.iter().zip(&errs).map(|(w, s)| (w * s).powi(2)).sum::<f64>().sqrt(),
        eps,
        ratios,
    })
}

/// A killed diffusion on a model domain.
struct Walker<'a> {
    spec: &'a DomainSpec,
    kind: WalkerKind,
    bridge: bool,
}

#[derive(Clone, Copy)]
enum WalkerKind {
    Interval { length: f64 },
    Ball { dim: usize, radius: f64 },
}

impl<'a> Walker<'a> {
    fn new(spec: &'a DomainSpec, bridge: bool) -> Result<Self> {
        let kind = match spec.kind {
            DomainKind::Interval { length } => WalkerKind::Interval { length },
            DomainKind::Ball { dim, radius } => {
                if dim > MAX_DIM {
                    return Err(Error::UnsupportedDomain(format!("ball simulation needs dim <= {MAX_DIM}")));
                }
                WalkerKind::Ball { dim, radius }
            }
            DomainKind::Circle { .. } => return Err(Error::EmptyBoundary),
        };
        Ok(Walker { spec, kind, bridge })
    }

    fn start(&self, x: f64) -> Result<[f64; MAX_DIM]> {
        if !self.spec.is_interior(x) {
            return Err(Error::invalid("x", format!("{x} is not an interior point")));
        }
        let mut s = [0.0; MAX_DIM];
        s[0] = x;
        Ok(s)
    }

    /// `½ V'(x)` by linear interpolation of the drift samples.
    fn half_drift(&self, x: f64) -> f64 {
        let Some(d) = &self.spec.drift else { return 0.0 };
        let g = &self.spec.grid;
        let h = g[1] - g[0];
        let s = (x / h).clamp(0.0, (g.len() - 1) as f64);
        let i = (s.floor() as usize).min(g.len() - 2);
        let u = s - i as f64;
        0.5 * ((1.0 - u) * d.dv[i] + u * d.dv[i + 1])
    }

    /// Coordinate at which eigenfunctions are evaluated (radius for balls).
    fn coordinate(&self, s: &[f64; MAX_DIM]) -> f64 {
        match self.kind {
            WalkerKind::Interval { .. } => s[0],
            WalkerKind::Ball { dim, .. } => s[..dim].iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }

    /// One Euler step; returns `false` if the path is killed.
    fn step(&self, s: &mut [f64; MAX_DIM], dt: f64, rng: &mut ChaCha8Rng) -> bool {
        let sd = dt.sqrt();
        match self.kind {
            WalkerKind::Interval { length } => {
                let x0 = s[0];
                let z: f64 = rng.sample(StandardNormal);
                let x1 = x0 + self.half_drift(x0) * dt + sd * z;
                if x1 <= 0.0 || x1 >= length {
                    return false;
                }
                if self.bridge {
                    let p0 = bridge_hit(x0, x1, dt);
                    let pl = bridge_hit(length - x0, length - x1, dt);
                    if rng.random::<f64>() < 1.0 - (1.0 - p0) * (1.0 - pl) {
                        return false;
                    }
                }
                s[0] = x1;
                true
            }
            WalkerKind::Ball { dim, radius } => {
                let r0 = self.coordinate(s);
                for v in s[..dim].iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *v += sd * z;
                }
                let r1 = self.coordinate(s);
                if r1 >= radius {
                    return false;
                }
                !(self.bridge && rng.random::<f64>() < bridge_hit(radius - r0, radius - r1, dt))
            }
        }
    }
}

/// Survival frequency with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalEstimate {
    pub x: f64,
    pub t: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub n_paths: u64,
}

/// Estimates `ψ(t, x) = P(τ_D > t)` for the diffusion `dX = ½∇V dt + dB`
/// started at `x` (a radius for balls; the path starts on the first axis).
pub fn simulate_killed_diffusion(spec: &DomainSpec, x: f64, t: f64, cfg: &MCConfig) -> Result<SurvivalEstimate> {
    ensure_positive("t", t)?;
    let walker = Walker::new(spec, cfg.bridge_correction)?;
    let start = walker.start(x)?;
    let (steps, dt) = cfg.steps_for(t)?;
    let m = run_paths(cfg, 1, |rng, acc| {
        let mut s = start;
        let mut alive = 1.0;
        for _ in 0..steps {
            if !walker.step(&mut s, dt, rng) {
                alive = 0.0;
                break;
            }
        }
        acc[0].push(alive);
    });
    let p = m[0].mean();
    Ok(SurvivalEstimate {
        x,
        t,
        estimate: p,
        stderr: (p * (1.0 - p) / m[0].n as f64).sqrt(),
        n_paths: m[0].n,
    })
}

/// `ψ(t, x) ≤ P(t < T^α(ρ(x)))` comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominationCheck {
    pub psi: SurvivalEstimate,
    pub comparison: f64,
    pub holds: bool,
}

/// Compares the simulated survival with the drifted-Brownian comparison
/// process at distance `ρ_∂D(x)`, allowing three standard errors.
pub fn survival_domination(
    spec: &DomainSpec,
    curv: &CurvatureData,
    x: f64,
    t: f64,
    cfg: &MCConfig,
) -> Result<DominationCheck> {
    let psi = simulate_killed_diffusion(spec, x, t, cfg)?;
    let comparison = 1.0 - fpt_probability_exact(curv.alpha, spec.boundary_distance(x)?, t)?;
    Ok(DominationCheck {
        psi,
        comparison,
        holds: psi.estimate <= comparison + 3.0 * psi.stderr,
    })
}

/// One checkpoint of the eigenfunction martingale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MartingalePoint {
    pub t: f64,
    pub estimate: f64,
    pub stderr: f64,
    /// `(estimate - φ(x)) / stderr`; 0 when both are at rounding level, `±f64::MAX` for a
    /// deterministic mismatch.
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub x: f64,
    pub phi_x: f64,
    pub lambda: f64,
    pub points: Vec<MartingalePoint>,
}

impl MartingaleReport {
    pub fn max_abs_z(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p.z_score.abs()))
    }

    pub fn passes(&self, z_max: f64) -> bool {
        self.max_abs_z() <= z_max
    }
}

/// Estimates `E[φ(X_{t∧τ}) e^{λ(t∧τ)/2}]` at each checkpoint from one set of
/// paths. Killed paths contribute 0 because `φ` vanishes on the boundary.
pub fn martingale_check(
    ep: &EigenPair,
    spec: &DomainSpec,
    x: f64,
    t_checkpoints: &[f64],
    cfg: &MCConfig,
) -> Result<MartingaleReport> {
    if ep.bc != BoundaryCondition::Dirichlet {
        return Err(Error::UnsupportedDomain(
            "martingale check needs a Dirichlet eigenpair (reflection is not simulated)".into(),
        ));
    }
    if t_checkpoints.iter().any(|&t| !(t.is_finite() && t >= 0.0)) {
        return Err(Error::invalid("t_checkpoints", "must be finite and >= 0"));
    }
    let walker = Walker::new(spec, cfg.bridge_correction)?;
    let start = walker.start(x)?;
    let phi_x = ep.eval(x.abs());
    let mut ts = t_checkpoints.to_vec();
    ts.sort_by(f64::total_cmp);
    let horizon = ts.last().copied().unwrap_or(0.0);
    let dt = if horizon > 0.0 { cfg.steps_for(horizon)?.1 } else { 1.0 };
    // Steps per segment between consecutive checkpoints.
    let mut segments = Vec::with_capacity(ts.len());
    let mut prev = 0.0;
    for &t in &ts {
        let gap = t - prev;
        let n = if gap > 0.0 { (gap / dt).ceil() as usize } else { 0 };
        segments.push((n, if n > 0 { gap / n as f64 } else { 0.0 }));
        prev = t;
    }
    let weights: Vec<f64> = ts.iter().map(|t| (ep.lambda * t / 2.0).exp()).collect();
    let m = run_paths(cfg, ts.len(), |rng, acc| {
        let mut s = start;
        let mut alive = true;
        for (k, &(n, h)) in segments.iter().enumerate() {
            for _ in 0..n {
                if !alive {
                    break;
                }
                alive = walker.step(&mut s, h, rng);
            }
            let v = if alive { ep.eval(walker.coordinate(&s)) * weights[k] } else { 0.0 };
            acc[k].push(v);
        }
    });
    let points = ts
        .iter()
        .zip(&m)
        .map(|(&t, mo)| {
            let estimate = mo.mean();
            let stderr = mo.stderr();
            let diff = estimate - phi_x;
            // Below this the spread is rounding noise (e.g. t = 0).
            let tol = 1e-12 * phi_x.abs().max(f64::MIN_POSITIVE);
            let z_score = if stderr > tol {
                diff / stderr
            } else if diff.abs() <= tol {
                0.0
            } else {
                f64::MAX.copysign(diff)
            };
            MartingalePoint {
                t,
                estimate,
                stderr,
                z_score,
            }
        })
        .collect();
    Ok(MartingaleReport {
        x,
        phi_x,
        lambda: ep.lambda,
        points,
    })
}

/// `|∇ψ(t, ·)|` at a boundary point, extrapolated from `ψ(t, x_ε)/ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGradientEstimate {
    pub t: f64,
    pub value: f64,
    pub stderr: f64,
    pub alpha: f64,
    /// `f(α, t)`.
    pub bound: f64,
    pub eps: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `value ≤ bound + 3 stderr`.
    pub within_bound: bool,
}

/// Default `ε` ladder for boundary-slope extrapolation.
pub const DEFAULT_EPS_LADDER: [f64; 4] = [0.01, 0.02, 0.04, 0.1];

/// Simulates `ψ(t, x_ε)` at distance `ε` from the boundary (`x = ε` on the
/// interval, `r = R - ε` on the ball) and extrapolates `ψ/ε` to `ε = 0`.
pub fn boundary_gradient_psi(
    spec: &DomainSpec,
    curv: &CurvatureData,
    t: f64,
    cfg: &MCConfig,
    eps_list: &[f64],
) -> Result<BoundaryGradientEstimate> {
    if !spec.has_boundary() {
        return Err(Error::EmptyBoundary);
    }
    let eps = slope_ladder(eps_list)?;
    let mut ratios = Vec::with_capacity(3);
    let mut errs = Vec::with_capacity(3);
    for (i, &e) in eps.iter().enumerate() {
        let x = match spec.kind {
            DomainKind::Ball { radius, .. } => radius - e,
            _ => e,
        };
        let s = simulate_killed_diffusion(spec, x, t, &cfg.reseeded(i as u64))?;
        ratios.push(s.estimate / e);
        errs.push(s.stderr / e);
    }
    let w = intercept_weights(&eps);
    let value: f64 = w.iter().zip(&ratios).map(|(w, y)| w * y).sum();
    let stderr = w.iter().zip(&errs).map(|(w, s)| (w * s).powi(2)).sum::<f64>().sqrt();
    let bound = psi_gradient_bound_f(curv.alpha, t)?;
    Ok(BoundaryGradientEstimate {
        t,
        value,
        stderr,
        alpha: curv.alpha,
        bound,
        eps,
        ratios,
        within_bound: value <= bound + 3.0 * stderr,
    })
}
