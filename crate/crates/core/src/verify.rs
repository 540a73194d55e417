//! End-to-end verification pipeline driven by a TOML config: build a domain,
//! solve for eigenpairs, sandwich each gradient ratio between the lower and
//! upper bounds, and optionally run Monte-Carlo checks.
//!
//! ```toml
//! id = "interval-dirichlet"
//! boundary = "dirichlet"
//! modes = 5
//!
//! [domain]
//! type = "interval"          # interval | ball | circle
//! length = 3.141592653589793
//! nodes = 2048
//! drift = [0.0, 0.0, 0.5]    # optional V(x) = Σ c_i x^i (interval only)
//!
//! [curvature]                # optional overrides
//! k_v = 0.0
//!
//! [bounds]
//! variants = ["a", "a-prime"] # optional; default is every admissible variant
//!
//! [mc]                       # optional
//! paths = 100000
//! seed = 42
//! fpt = [[0.0, 1.0, 1.0]]    # (alpha, eps, t) cases
//! martingale_t = [0.1, 0.5, 1.0]
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    dirichlet_lower_bound, dirichlet_upper_bound, neumann_lower_bound, neumann_upper_bound, BoundSet,
    GeometryParams, UpperVariant,
};
use crate::domains::{
    make_ball, make_circle, make_interval, make_interval_poly, CurvatureData, DomainKind, DomainSpec, Polynomial,
    DEFAULT_NODES,
};
use crate::eigensolver::{gradient_ratio, solve, BoundaryCondition, EigenPair};
use crate::error::{Error, Result};
use crate::mc::{
    boundary_gradient_psi, martingale_check, simulate_fpt, BoundaryGradientEstimate, FptResult, MCConfig,
    MartingaleReport, DEFAULT_EPS_LADDER,
};

/// Column header of `report.csv`.
pub const CSV_HEADER: &str = "lambda,ratio,lb,ub,branch,margin_lb,margin_ub";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub id: String,
    /// `dirichlet` or `neumann`; ignored (closed problem) on the circle.
    #[serde(default = "default_boundary")]
    pub boundary: String,
    #[serde(default = "default_modes")]
    pub modes: usize,
    pub domain: DomainConfig,
    #[serde(default)]
    pub curvature: CurvatureOverrides,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub mc: Option<McSection>,
}

fn default_boundary() -> String {
    "dirichlet".into()
}

fn default_modes() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(rename = "type")]
    pub kind: String,
    pub length: Option<f64>,
    pub radius: Option<f64>,
    pub dim: Option<usize>,
    pub nodes: Option<usize>,
    pub drift: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureOverrides {
    pub n: Option<f64>,
    pub k: Option<f64>,
    pub k_v: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub variants: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(default = "default_paths")]
    pub paths: u64,
    #[serde(default)]
    pub seed: u64,
    pub dt: Option<f64>,
    #[serde(default = "yes")]
    pub bridge: bool,
    #[serde(default = "default_z")]
    pub z_threshold: f64,
    #[serde(default)]
    pub fpt: Vec<[f64; 3]>,
    #[serde(default)]
    pub martingale_t: Vec<f64>,
    pub martingale_x: Option<f64>,
    pub boundary_gradient_t: Option<f64>,
}

fn default_paths() -> u64 {
    100_000
}

fn yes() -> bool {
    true
}

fn default_z() -> f64 {
    4.0
}

impl VerifyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    fn boundary_condition(&self) -> Result<BoundaryCondition> {
        match self.boundary.as_str() {
            "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            "neumann" => Ok(BoundaryCondition::Neumann),
            other => Err(Error::Config(format!("unknown boundary condition `{other}`"))),
        }
    }

    fn variants(&self) -> Result<Vec<UpperVariant>> {
        match &self.bounds.variants {
            None => Ok(UpperVariant::ALL.to_vec()),
            Some(names) => names
                .iter()
                .map(|n| UpperVariant::parse(n).ok_or_else(|| Error::Config(format!("unknown bound variant `{n}`"))))
                .collect(),
        }
    }

    /// Builds the domain from the catalog.
    pub fn build_domain(&self) -> Result<(DomainSpec, CurvatureData)> {
        let d = &self.domain;
        let nodes = d.nodes.unwrap_or(DEFAULT_NODES);
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::Config(format!("domain needs `{name}`")));
        match d.kind.as_str() {
            "interval" => {
                let length = need(d.length, "length")?;
                match &d.drift {
                    Some(c) => make_interval_poly(length, nodes, &Polynomial::new(c.clone())),
                    None => make_interval(length, nodes),
                }
            }
            "ball" if d.drift.is_none() => make_ball(d.dim.unwrap_or(2), need(d.radius, "radius")?, nodes),
            "circle" if d.drift.is_none() => make_circle(need(d.length, "length")?, nodes),
            "ball" | "circle" => Err(Error::Config("drift is only supported on the interval".into())),
            other => Err(Error::Config(format!("domain type `{other}` is not in the catalog"))),
        }
    }
}

/// Which eigenvalue problem a report covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Dirichlet,
    Neumann,
    Closed,
}

/// One upper-bound variant evaluated for a row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantBound {
    pub variant: String,
    pub upper: f64,
    pub branch: String,
    /// Whether the variant can decide pass/fail.
    pub proven: bool,
}

/// One eigenpair sandwiched between its bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub index: usize,
    pub lambda: f64,
    pub ratio: f64,
    pub lb: f64,
    pub ub: f64,
    /// Deciding upper-bound variant and its ε-maximisation branch.
    pub branch: String,
    /// `(ratio - lb) / ratio`.
    pub margin_lb: f64,
    /// `(ub - ratio) / ub`.
    pub margin_ub: f64,
    pub pass: bool,
    pub variants: Vec<VariantBound>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct McAppendix {
    pub fpt: Vec<FptResult>,
    pub martingale: Vec<MartingaleReport>,
    pub boundary_gradient: Option<BoundaryGradientEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub id: String,
    pub mode: Mode,
    pub domain: DomainKind,
    pub nodes: usize,
    pub geometry: GeometryParams,
    pub rows: Vec<ReportRow>,
    pub mc: McAppendix,
    pub z_threshold: f64,
    pub rows_pass: bool,
    pub mc_pass: bool,
    pub pass: bool,
}

impl VerificationReport {
    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serialisable") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad report: {e}")))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.lambda, r.ratio, r.lb, r.ub, r.branch, r.margin_lb, r.margin_ub
            );
        }
        s
    }

    /// `k, λ, ratio, lb, ub` for plotting.
    pub fn sandwich_tsv(&self) -> String {
        let mut s = String::from("k\tlambda\tratio\tlb\tub\n");
        for r in &self.rows {
            let _ = writeln!(s, "{}\t{}\t{}\t{}\t{}", r.index, r.lambda, r.ratio, r.lb, r.ub);
        }
        s
    }

    /// Human-readable summary.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} ({:?}, {} nodes)", self.id, self.mode, self.nodes);
        let _ = writeln!(
            s,
            "{:>3} {:>14} {:>12} {:>12} {:>12} {:>8} {:>8}  branch",
            "k", "lambda", "lb", "ratio", "ub", "m_lb", "m_ub"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>3} {:>14.8} {:>12.6} {:>12.6} {:>12.6} {:>8.4} {:>8.4}  {}{}",
                r.index,
                r.lambda,
                r.lb,
                r.ratio,
                r.ub,
                r.margin_lb,
                r.margin_ub,
                r.branch,
                if r.pass { "" } else { "  FAIL" }
            );
        }
        for f in &self.mc.fpt {
            let _ = writeln!(
                s,
                "fpt alpha={} eps={} t={}: mc {:.6} ± {:.6}, exact {:.6}, z {:+.2}",
                f.alpha, f.eps, f.t, f.estimate, f.stderr, f.exact, f.z_score
            );
        }
        for m in &self.mc.martingale {
            let _ = writeln!(s, "martingale x={} phi(x)={:.6}: max |z| {:.2}", m.x, m.phi_x, m.max_abs_z());
        }
        if let Some(b) = &self.mc.boundary_gradient {
            let _ = writeln!(
                s,
                "boundary gradient t={}: {:.5} ± {:.5} vs f(alpha,t) = {:.5}",
                b.t, b.value, b.stderr, b.bound
            );
        }
        let _ = writeln!(s, "{}", if self.pass { "PASS" } else { "FAIL" });
        s
    }
}

/// A finished run: the report plus the eigenpairs it was computed from.
#[derive(Debug, Clone)]
pub struct Verification {
    pub report: VerificationReport,
    pub modes: Vec<EigenPair>,
}

/// `x` followed by one column per mode, at most 1025 rows.
pub fn modes_tsv(modes: &[EigenPair]) -> String {
    let mut s = String::from("x");
    for k in 1..=modes.len() {
        let _ = write!(s, "\tphi_{k}");
    }
    s.push('\n');
    let Some(first) = modes.first() else { return s };
    let n = first.grid.len();
    let stride = n.div_ceil(1024).max(1);
    let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
    if idx.last() != Some(&(n - 1)) {
        idx.push(n - 1);
    }
    for i in idx {
        let _ = write!(s, "{}", first.grid[i]);
        for m in modes {
            let _ = write!(s, "\t{}", m.phi[i]);
        }
        s.push('\n');
    }
    s
}

impl Verification {
    /// Writes `report.json`, `report.csv`, `sandwich.tsv` and `modes.tsv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::Config(format!("cannot write to {}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        fs::write(dir.join("report.json"), self.report.to_json()).map_err(io)?;
        fs::write(dir.join("report.csv"), self.report.to_csv()).map_err(io)?;
        fs::write(dir.join("sandwich.tsv"), self.report.sandwich_tsv()).map_err(io)?;
        fs::write(dir.join("modes.tsv"), modes_tsv(&self.modes)).map_err(io)?;
        Ok(())
    }
}

fn margins(lb: f64, ratio: f64, ub: f64) -> (f64, f64) {
    ((ratio - lb) / ratio, (ub - ratio) / ub)
}

fn dirichlet_row(g: &GeometryParams, variants: &[UpperVariant], index: usize, ep: &EigenPair) -> Result<ReportRow> {
    let lambda = ep.lambda;
    let ratio = gradient_ratio(ep);
    let lb = dirichlet_lower_bound(g, lambda)?;
    let sets: Vec<BoundSet> = variants
        .iter()
        .filter(|v| v.admits(g.alpha))
        .map(|&v| dirichlet_upper_bound(g, lambda, v))
        .collect::<Result<_>>()?;
    let best = sets
        .iter()
        .filter(|b| b.variant != UpperVariant::SimplifiedPos)
        .min_by(|a, b| a.upper.total_cmp(&b.upper))
        .ok_or_else(|| Error::Config(format!("no proven upper-bound variant admits alpha = {}", g.alpha)))?;
    let label = |b: &BoundSet| format!("{}/{:?}", b.variant.name(), b.branch).to_lowercase();
    let (margin_lb, margin_ub) = margins(lb, ratio, best.upper);
    Ok(ReportRow {
        index,
        lambda,
        ratio,
        lb,
        ub: best.upper,
        branch: label(best),
        margin_lb,
        margin_ub,
        pass: lb <= ratio && ratio <= best.upper,
        variants: sets
            .iter()
            .map(|b| VariantBound {
                variant: b.variant.name().into(),
                upper: b.upper,
                branch: label(b),
                proven: b.variant != UpperVariant::SimplifiedPos,
            })
            .collect(),
    })
}

fn neumann_row(g: &GeometryParams, index: usize, ep: &EigenPair) -> Result<ReportRow> {
    let lambda = ep.lambda;
    let ratio = gradient_ratio(ep);
    let lb = neumann_lower_bound(g, lambda)?;
    let ub = neumann_upper_bound(g.k_v, lambda)?;
    let (margin_lb, margin_ub) = margins(lb, ratio, ub);
    Ok(ReportRow {
        index,
        lambda,
        ratio,
        lb,
        ub,
        branch: "neumann".into(),
        margin_lb,
        margin_ub,
        pass: lb <= ratio && ratio <= ub,
        variants: Vec::new(),
    })
}

/// Runs the full pipeline for a parsed config.
pub fn run_verify_config(cfg: &VerifyConfig) -> Result<Verification> {
    let (spec, curv) = cfg.build_domain()?;
    let closed = matches!(spec.kind, DomainKind::Circle { .. });
    let bc = if closed { BoundaryCondition::Neumann } else { cfg.boundary_condition()? };
    let mode = match (closed, bc) {
        (true, _) => Mode::Closed,
        (false, BoundaryCondition::Dirichlet) => Mode::Dirichlet,
        (false, BoundaryCondition::Neumann) => Mode::Neumann,
    };
    let variants = cfg.variants()?;

    let (n_default, k_default) = spec.default_cd()?;
    let o = &cfg.curvature;
    let n = o.n.unwrap_or(n_default);
    let k = match o.k {
        Some(k) => k,
        None if o.n.is_some() => spec.cd_constant(n)?,
        None => k_default,
    };
    let mut geometry = curv.geometry(spec.dim(), n, k);
    if let Some(kv) = o.k_v {
        geometry.k_v = kv;
    }
    if let Some(a) = o.alpha {
        geometry.alpha = a;
    }
    geometry.validate()?;

    let modes = solve(&spec, bc, cfg.modes)?;
    let rows: Vec<ReportRow> = modes
        .iter()
        .enumerate()
        .map(|(i, ep)| match mode {
            Mode::Dirichlet => dirichlet_row(&geometry, &variants, i + 1, ep),
            Mode::Neumann | Mode::Closed => neumann_row(&geometry, i + 1, ep),
        })
        .collect::<Result<_>>()?;
    let rows_pass = rows.iter().all(|r| r.pass);

    let mut mc = McAppendix::default();
    let mut z_threshold = default_z();
    let mut mc_pass = true;
    if let Some(sec) = &cfg.mc {
        z_threshold = sec.z_threshold;
        let mut base = MCConfig::new(sec.paths, sec.seed).with_bridge(sec.bridge);
        base.dt = sec.dt;
        for (i, c) in sec.fpt.iter().enumerate() {
            let r = simulate_fpt(c[0], c[1], c[2], &base.reseeded(i as u64))?;
            mc_pass &= r.z_score.abs() <= z_threshold;
            mc.fpt.push(r);
        }
        if !sec.martingale_t.is_empty() {
            if mode != Mode::Dirichlet {
                return Err(Error::Config("martingale checks need a Dirichlet problem".into()));
            }
            let x = sec.martingale_x.unwrap_or(match spec.kind {
                DomainKind::Interval { length } => length / 2.0,
                _ => 0.0,
            });
            let r = martingale_check(&modes[0], &spec, x, &sec.martingale_t, &base.reseeded(1 << 32))?;
            mc_pass &= r.passes(z_threshold);
            mc.martingale.push(r);
        }
        if let Some(t) = sec.boundary_gradient_t {
            let mut c = curv.clone();
            c.alpha = geometry.alpha;
            let r = boundary_gradient_psi(&spec, &c, t, &base.reseeded(1 << 33), &DEFAULT_EPS_LADDER)?;
            mc_pass &= r.within_bound;
            mc.boundary_gradient = Some(r);
        }
    }

    let report = VerificationReport {
        id: cfg.id.clone(),
        mode,
        domain: spec.kind,
        nodes: spec.grid.len(),
        geometry,
        rows,
        mc,
        z_threshold,
        rows_pass,
        mc_pass,
        pass: rows_pass && mc_pass,
    };
    Ok(Verification { report, modes })
}

/// Loads `path` and runs the pipeline.
pub fn run_verify(path: &Path) -> Result<Verification> {
    run_verify_config(&VerifyConfig::load(path)?)
}
