//! Experiment runners behind the `axiform` command line. Each runner turns an
//! [`ExperimentConfig`] into a [`StabilityReport`] plus the text files it
//! produced; nothing here touches the file system except scene loading.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::axis::{build_skeleton, filter_axis, FilteredAxis};
use crate::critical::{
    estimate_critical_function, reach_summary, reach_summary_with, CriticalProfile, LevelGrid, ReachSummary,
};
use crate::error::{AxisError, Result};
use crate::flow::{integrate_flow, StepControl, StopCondition};
use crate::geom::{dist, norm, Point};
use crate::metric::{
    geodesic_diameter, gh_distortion, hausdorff_report, hypotheses, stability_constants, GeodesicGraph,
    StabilityConstants,
};
use crate::scene::SiteScene;
use crate::svg::{profile_plot, Figure};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Side of the bundled square scene; its critical level is `side / 2`.
pub const SQUARE_SIDE: f64 = 1.0;

/// Where the scene comes from: an inline object, a JSON file, or one of
/// `builtin:two-site`, `builtin:square3d`, `builtin:random:<n>:<seed>[:<min_sep>]`
/// (`n` sites in a ball of radius 5, pairwise `min_sep` apart, default 1.5) or
/// `builtin:pairs:<k>:<seed>` (`k` close pairs in a ball of radius 5).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SceneSource {
    Inline(SiteScene),
    Named(String),
}

impl SceneSource {
    /// Relative paths are taken relative to `base`.
    pub fn resolve(&self, base: Option<&Path>) -> Result<SiteScene> {
        match self {
            SceneSource::Inline(s) => {
                s.validate()?;
                Ok(s.clone())
            }
            SceneSource::Named(name) => match name.strip_prefix("builtin:") {
                Some("two-site") => Ok(SiteScene::two_site()),
                Some("square3d") => SiteScene::square_3d(SQUARE_SIDE, 400, 2.0 * SQUARE_SIDE),
                Some(rest) if rest.starts_with("random:") => {
                    let parts: Vec<&str> = rest.split(':').collect();
                    let bad = || {
                        AxisError::InvalidInput(format!("expected builtin:random:<n>:<seed>[:<min_sep>], got {name:?}"))
                    };
                    let int = |s: &str| s.parse::<u64>().map_err(|_| bad());
                    let min_sep = match parts.len() {
                        3 => 1.5,
                        4 => parts[3].parse::<f64>().map_err(|_| bad())?,
                        _ => return Err(bad()),
                    };
                    SiteScene::random_planar(int(parts[1])? as usize, 5.0, min_sep, int(parts[2])?)
                }
                Some(rest) if rest.starts_with("pairs:") => {
                    let bad = || AxisError::InvalidInput(format!("expected builtin:pairs:<k>:<seed>, got {name:?}"));
                    let parts: Vec<u64> =
                        rest[6..].split(':').map(|s| s.parse::<u64>().map_err(|_| bad())).collect::<Result<_>>()?;
                    match parts[..] {
                        [k, seed] => SiteScene::random_pairs(k as usize, 5.0, seed),
                        _ => Err(bad()),
                    }
                }
                Some(_) => Err(AxisError::InvalidInput(format!("unknown builtin scene {name:?}"))),
                None => {
                    let p = PathBuf::from(name);
                    let p = match base {
                        Some(b) if p.is_relative() => b.join(p),
                        _ => p,
                    };
                    SiteScene::load(&p)
                }
            },
        }
    }

    fn is_square(&self) -> bool {
        matches!(self, SceneSource::Named(n) if n == "builtin:square3d")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Perturbation {
    /// every site moves by its own uniform random vector of norm at most ε
    #[default]
    Jitter,
    /// every site moves by `(ε, 0)`
    Translate,
}

/// Expected range `[lo, hi]` of `χ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiExpectation {
    pub t: f64,
    pub lo: f64,
    pub hi: f64,
}

fn default_mu() -> f64 {
    0.5
}
fn default_samples() -> usize {
    4000
}
fn default_levels() -> usize {
    500
}
fn default_pairs() -> usize {
    200
}
fn default_true() -> bool {
    true
}

/// Experiment description, read from JSON. Unset tolerances default to
/// `R_bound / 1000` (resolution) and `R_bound / 2000` (band width).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scene: SceneSource,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub alphas: Vec<f64>,
    /// explicit `(λ, α)` points for `axis`; otherwise the product of the grids
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub perturbation: Perturbation,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub resolution: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples_per_level: usize,
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// explicit χ levels; overrides `levels`
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub band_width: Option<f64>,
    #[serde(default = "default_pairs")]
    pub sample_pairs: usize,
    /// also measure GH distortion in the sweeps
    #[serde(default = "default_true")]
    pub gh_sweeps: bool,
    #[serde(default)]
    pub start: Option<Vec<f64>>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub chi_expect: Vec<ChiExpectation>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(scene: SceneSource) -> Self {
        ExperimentConfig {
            scene,
            lambdas: vec![],
            alphas: vec![],
            points: vec![],
            epsilons: vec![],
            perturbation: Perturbation::Jitter,
            mu: default_mu(),
            seed: 0,
            resolution: None,
            samples_per_level: default_samples(),
            levels: default_levels(),
            t_grid: None,
            band_width: None,
            sample_pairs: default_pairs(),
            gh_sweeps: true,
            start: None,
            horizon: None,
            alpha: None,
            chi_expect: vec![],
            out_dir: None,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

fn check_grid(name: &str, g: &[f64], positive: bool) -> Result<()> {
    if g.is_empty() {
        return Err(AxisError::InvalidInput(format!("{name} grid is empty")));
    }
    if g.iter().any(|v| !v.is_finite() || *v < 0.0 || (positive && *v == 0.0)) {
        return Err(AxisError::InvalidInput(format!("{name} grid has an invalid value: {g:?}")));
    }
    if g.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(AxisError::InvalidInput(format!("{name} grid is not strictly increasing: {g:?}")));
    }
    Ok(())
}

fn single(name: &str, g: &[f64]) -> Result<f64> {
    match g {
        [v] if v.is_finite() && *v > 0.0 => Ok(*v),
        _ => Err(AxisError::InvalidInput(format!("{name} must hold exactly one positive value, got {g:?}"))),
    }
}

/// Validates an ε list: non-negative, strictly increasing, and spanning at
/// least two decades of positive values.
fn check_epsilons(eps: &[f64]) -> Result<()> {
    check_grid("epsilon", eps, false)?;
    let pos: Vec<f64> = eps.iter().copied().filter(|&e| e > 0.0).collect();
    match (pos.first(), pos.last()) {
        (Some(&lo), Some(&hi)) if hi / lo >= 100.0 * (1.0 - 1e-12) => Ok(()),
        _ => Err(AxisError::InvalidInput(format!("epsilon list must span at least two decades, got {eps:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub label: String,
    pub values: BTreeMap<String, f64>,
}

impl Measurement {
    fn new(label: impl Into<String>, values: &[(&str, f64)]) -> Self {
        Measurement { label: label.into(), values: values.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
    }
}

/// Least-squares fit of `ln y = slope ln x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// root mean square of the residuals
    pub residual: f64,
    pub samples: usize,
}

/// Fits over the points with positive finite coordinates; `None` with fewer
/// than two such points.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    Some(SlopeFit { slope, intercept, residual: (ss / nf).sqrt(), samples: n })
}

/// One compared inequality `lhs <= rhs`. Only enforced assertions decide the
/// exit status; the rest are reported.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// the constant or hypothesis the right-hand side comes from
    pub source: String,
    pub enforced: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub kind: String,
    pub seed: u64,
    pub resolution: f64,
    pub measurements: Vec<Measurement>,
    pub slope: Option<SlopeFit>,
    pub constants: Vec<StabilityConstants>,
    pub assertions: Vec<Assertion>,
    /// assertions not enforced because a hypothesis failed
    pub skipped: usize,
    pub flags: Vec<String>,
    pub passed: bool,
}

impl StabilityReport {
    fn new(kind: &str, seed: u64, resolution: f64) -> Self {
        StabilityReport {
            kind: kind.to_string(),
            seed,
            resolution,
            measurements: vec![],
            slope: None,
            constants: vec![],
            assertions: vec![],
            skipped: 0,
            flags: vec![],
            passed: true,
        }
    }

    fn assert_le(&mut self, name: String, lhs: f64, rhs: f64, source: &str, enforced: bool) -> bool {
        let passed = lhs <= rhs;
        if !enforced {
            self.skipped += 1;
        }
        self.assertions.push(Assertion { name, lhs, rhs, source: source.to_string(), enforced, passed });
        passed
    }

    fn finish(mut self) -> Self {
        self.passed = self.assertions.iter().all(|a| !a.enforced || a.passed);
        self
    }

    pub fn failed(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| a.enforced && !a.passed).collect()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// A report and the files that go with it, as `(file name, contents)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub report: StabilityReport,
    pub files: Vec<(String, String)>,
}

impl ExperimentOutput {
    /// Writes `report.json` and every produced file into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.report.to_json_string())?;
        for (name, body) in &self.files {
            std::fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

/// Measurement rows as CSV, one column per value name.
pub fn measurements_csv(rows: &[Measurement]) -> String {
    let keys: std::collections::BTreeSet<&str> =
        rows.iter().flat_map(|m| m.values.keys().map(String::as_str)).collect();
    let mut out = String::from("label");
    for k in &keys {
        out.push(',');
        out.push_str(k);
    }
    out.push('\n');
    for m in rows {
        out.push_str(&m.label.replace(',', ";"));
        for k in &keys {
            out.push(',');
            if let Some(v) = m.values.get(*k) {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    out
}

fn table_output(report: StabilityReport, name: &str) -> ExperimentOutput {
    let report = report.finish();
    let files = vec![(name.to_string(), measurements_csv(&report.measurements))];
    ExperimentOutput { report, files }
}

struct Setup {
    scene: SiteScene,
    resolution: f64,
    band: f64,
}

fn setup(cfg: &ExperimentConfig, base: Option<&Path>) -> Result<Setup> {
    let scene = cfg.scene.resolve(base)?;
    let rb = scene.bounding_radius;
    let resolution = cfg.resolution.unwrap_or(rb / 1000.0);
    let band = cfg.band_width.unwrap_or(rb / 2000.0);
    if !(resolution > 0.0) || !(band > 0.0) {
        return Err(AxisError::InvalidInput("resolution and band_width must be positive".into()));
    }
    if !(cfg.mu > 0.0 && cfg.mu <= 1.0) {
        return Err(AxisError::InvalidInput(format!("mu must lie in (0, 1], got {}", cfg.mu)));
    }
    Ok(Setup { scene, resolution, band })
}

fn planar(scene: &SiteScene, what: &str) -> Result<()> {
    if scene.dim() != 2 {
        return Err(AxisError::InvalidInput(format!("{what} needs a planar scene, got dimension {}", scene.dim())));
    }
    Ok(())
}

/// The measured critical function of a scene.
pub fn measure_profile(scene: &SiteScene, cfg: &ExperimentConfig, band: f64, seed: u64) -> Result<CriticalProfile> {
    let grid = match &cfg.t_grid {
        Some(ts) => {
            check_grid("t", ts, true)?;
            LevelGrid::Explicit(ts.clone())
        }
        None => LevelGrid::Uniform { steps: cfg.levels },
    };
    estimate_critical_function(scene, &grid, cfg.samples_per_level, band, seed)
}

fn name_num(v: f64) -> String {
    format!("{v}")
}

fn diameter(axis: &FilteredAxis, resolution: f64) -> Result<f64> {
    Ok(geodesic_diameter(&GeodesicGraph::build(axis, resolution)?).diameter)
}

/// Builds the filtered axis at every `(λ, α)` point.
pub fn run_axis(cfg: &ExperimentConfig, base: Option<&Path>) -> Result<ExperimentOutput> {
    let s = setup(cfg, base)?;
    planar(&s.scene, "axis")?;
    let points: Vec<[f64; 2]> = if cfg.points.is_empty() {
        check_grid("lambda", &cfg.lambdas, false)?;
        check_grid("alpha", &cfg.alphas, false)?;
        cfg.lambdas.iter().flat_map(|&l| cfg.alphas.iter().map(move |&a| [l, a])).collect()
    } else {
        cfg.points.clone()
    };
    let skel = build_skeleton(&s.scene)?;
    let axes: Vec<FilteredAxis> = points.par_iter().map(|&[l, a]| filter_axis(&skel, l, a)).collect::<Result<_>>()?;
    let mut report = StabilityReport::new("axis", cfg.seed, s.resolution);
    let mut files = Vec::new();
    for (&[l, a], ax) in points.iter().zip(&axes) {
        let stem = format!("axis_l{}_a{}", name_num(l), name_num(a));
        report.measurements.push(Measurement::new(
            stem.clone(),
            &[
                ("lambda", l),
                ("alpha", a),
                ("segments", ax.segments.len() as f64),
                ("components", ax.component_count() as f64),
                ("isolated", ax.isolated.len() as f64),
                ("length", ax.total_length()),
            ],
        ));
        if ax.is_empty() {
            report.flags.push(format!("empty axis at lambda = {l}, alpha = {a}"));
        }
        report.flags.extend(ax.flags.iter().map(|f| format!("{stem}: {f}")));
        files.push((format!("{stem}.json"), ax.to_json_string()));
        files.push((format!("{stem}.svg"), Figure::new(&s.scene).axis(ax, "crimson").render()));
    }
    Ok(ExperimentOutput { report: report.finish(), files })
}

/// Estimates `χ` and writes it as CSV and SVG. For the bundled square scene
/// the plateau at `1/√2` and the zero at `side / 2` are asserted.
pub fn run_critfn(cfg: &ExperimentConfig, base: Option<&Path>) -> Result<ExperimentOutput> {
    let s = setup(cfg, base)?;
    let mut cfg = cfg.clone();
    let square = cfg.scene.is_square();
    if square && cfg.t_grid.is_none() {
        let step = SQUARE_SIDE / 200.0;
        cfg.t_grid = Some((1..=120).map(|i| i as f64 * step).collect());
    }
    let profile = measure_profile(&s.scene, &cfg, s.band, cfg.seed)?;
    let mut report = StabilityReport::new("critfn", cfg.seed, s.resolution);
    let summary = reach_summary(&profile, cfg.mu, 0.0, 0.0)?;
    report.measurements.push(Measurement::new(
        "summary",
        &[
            ("R_max", profile.r_max),
            ("wfs", summary.wfs),
            ("r_mu", summary.r_mu_alpha),
            ("samples", profile.sample_count as f64),
            ("empty_levels", profile.flagged_empty() as f64),
        ],
    ));
    report.flags.extend(summary.flags.iter().cloned());
    if profile.flagged_empty() > 0 {
        report.flags.push(format!("{} levels had no samples", profile.flagged_empty()));
    }
    if profile.r_max_truncated {
        report.flags.push("traces truncated above the last level; R_max is a lower estimate".into());
    }
    for e in &cfg.chi_expect {
        let c = profile.chi_at(e.t);
        report.assert_le(format!("chi({}) >= {}", e.t, e.lo), e.lo, c, "chi_expect", true);
        report.assert_le(format!("chi({}) <= {}", e.t, e.hi), c, e.hi, "chi_expect", true);
    }
    if square {
        let t_crit = SQUARE_SIDE / 2.0;
        let target = std::f64::consts::FRAC_1_SQRT_2;
        let mut plateau: Vec<f64> = profile
            .t_grid
            .iter()
            .zip(&profile.chi)
            .filter(|(&t, _)| t > 0.1 * SQUARE_SIDE && t < 0.9 * t_crit)
            .map(|(_, &c)| c)
            .collect();
        plateau.sort_by(f64::total_cmp);
        let median = if plateau.is_empty() { f64::NAN } else { plateau[plateau.len() / 2] };
        let at_crit = profile.chi_at(t_crit);
        report.measurements.push(Measurement::new(
            "square",
            &[("median_chi", median), ("chi_at_t_crit", at_crit), ("t_crit", t_crit), ("wfs", summary.wfs)],
        ));
        report.assert_le("median chi >= 1/sqrt2 - 0.05".into(), target - 0.05, median, "square plateau", true);
        report.assert_le("median chi <= 1/sqrt2 + 0.02".into(), median, target + 0.02, "square plateau", true);
        report.assert_le("chi(t_crit) <= 0.1".into(), at_crit, 0.1, "square critical level", true);
        report.assert_le(
            "|wfs - t_crit| <= 5% t_crit".into(),
            (summary.wfs - t_crit).abs(),
            0.05 * t_crit,
            "square critical level",
            true,
        );
    }
    let files = vec![("chi.csv".to_string(), profile.to_csv()), ("chi.svg".to_string(), profile_plot(&profile))];
    Ok(ExperimentOutput { report: report.finish(), files })
}

/// Integrates one trajectory and checks the monotonicity of `R` and `F^α`.
pub fn run_flow(cfg: &ExperimentConfig, base: Option<&Path>) -> Result<ExperimentOutput> {
    let s = setup(cfg, base)?;
    let start = cfg.start.clone().ok_or_else(|| AxisError::InvalidInput("flow needs a start point".into()))?;
    let horizon = cfg.horizon.ok_or_else(|| AxisError::InvalidInput("flow needs a horizon".into()))?;
    let ctl = StepControl::for_scene(&s.scene);
    let traj = integrate_flow(&s.scene, &start, cfg.alpha, horizon, StopCondition::TimeExhausted, ctl)?;
    let mut report = StabilityReport::new("flow", cfg.seed, s.resolution);
    let end = traj.end();
    report.measurements.push(Measurement::new(
        "trajectory",
        &[
            ("nodes", traj.nodes.len() as f64),
            ("t_end", end.t),
            ("length", traj.length()),
            ("R_end", end.r),
            ("grad_norm_end", end.grad_norm),
        ],
    ));
    report.flags.push(format!("stop reason: {:?}", traj.stop_reason));
    let r_drop = traj.nodes.windows(2).map(|w| w[0].r - w[1].r).fold(0.0, f64::max);
    report.assert_le("R nondecreasing".into(), r_drop, 0.0, "flow monotonicity", true);
    if cfg.alpha.is_some() {
        let f_drop = traj.nodes.windows(2).filter_map(|w| Some(w[0].f_alpha? - w[1].f_alpha?)).fold(0.0, f64::max);
        report.assert_le("F^alpha nondecreasing".into(), f_drop, 1e-7, "flow monotonicity", true);
    }
    let svg = Figure::new(&s.scene).polyline(&traj.points(), "steelblue").render();
    let files = vec![("trajectory.csv".to_string(), traj.to_csv()), ("trajectory.svg".to_string(), svg)];
    Ok(ExperimentOutput { report: report.finish(), files })
}

#[derive(Clone, Copy)]
enum Sweep {
    Lambda,
    Alpha,
}

fn run_sweep(cfg: &ExperimentConfig, base: Option<&Path>, which: Sweep) -> Result<ExperimentOutput> {
    let s = setup(cfg, base)?;
    planar(&s.scene, "sweeps")?;
    let (grid, fixed, kind) = match which {
        Sweep::Lambda => {
            check_grid("lambda", &cfg.lambdas, true)?;
            (&cfg.lambdas, single("alpha", &cfg.alphas)?, "sweep-lambda")
        }
        Sweep::Alpha => {
            check_grid("alpha", &cfg.alphas, true)?;
            (&cfg.alphas, single("lambda", &cfg.lambdas)?, "sweep-alpha")
        }
    };
    if grid.len() < 2 {
        return Err(AxisError::InvalidInput("a sweep needs at least two grid points".into()));
    }
    let res = s.resolution;
    let skel = build_skeleton(&s.scene)?;
    let axes: Vec<FilteredAxis> = grid
        .par_iter()
        .map(|&v| match which {
            Sweep::Lambda => filter_axis(&skel, v, fixed),
            Sweep::Alpha => filter_axis(&skel, fixed, v),
        })
        .collect::<Result<_>>()?;
    let profile = measure_profile(&s.scene, cfg, s.band, cfg.seed)?;
    let diameters: Vec<Option<f64>> = if cfg.gh_sweeps {
        axes.par_iter()
            .map(|a| if a.component_count() == 1 { diameter(a, res).map(Some) } else { Ok(None) })
            .collect::<Result<_>>()?
    } else {
        vec![None; axes.len()]
    };
    let mut report = StabilityReport::new(kind, cfg.seed, res);
    report.measurements.push(Measurement::new("profile", &[("R_max", profile.r_max), ("mu", cfg.mu)]));
    let subset_tol = 1e-9 * s.scene.bounding_radius;

    for i in 0..grid.len() - 1 {
        let (lo, hi) = (grid[i], grid[i + 1]);
        let delta = hi - lo;
        // μ̃ is taken at the top of the sub-interval and the Lipschitz
        // constant at its bottom
        let (summary, reach_ok) = match which {
            Sweep::Lambda => {
                let mut sm = reach_summary(&profile, cfg.mu, fixed, hi)?;
                let ok = sm.mu_tilde > 0.0 && sm.r_mu_alpha > fixed + hi;
                sm.lambda = lo;
                (sm, ok)
            }
            Sweep::Alpha => {
                let mut sm = reach_summary_with(&profile, cfg.mu, hi, fixed, lo)?;
                let ok = sm.mu_tilde > 0.0 && sm.r_mu_alpha_prime > hi + fixed;
                sm.alpha = lo;
                (sm, ok)
            }
        };
        let (da, db) = (diameters[i], diameters[i + 1]);
        let d = match (da, db) {
            (Some(a), Some(b)) => a.max(b),
            _ => f64::NAN,
        };
        let constants = stability_constants(&summary, delta, 0.0, d, d)?;
        let (lip, t, gh_bound, lip_name, gh_name) = match which {
            Sweep::Lambda => (
                constants.lipschitz_lambda,
                constants.t_lambda,
                constants.gh_lambda_bound,
                "lipschitz_lambda",
                "gh_lambda_bound",
            ),
            Sweep::Alpha => (
                constants.lipschitz_alpha,
                constants.t_alpha,
                constants.gh_alpha_bound,
                "lipschitz_alpha",
                "gh_alpha_bound",
            ),
        };
        let hr = hausdorff_report(&axes[i], &axes[i + 1], res)?;
        let bound = lip * delta + res;
        let label = format!("[{lo}, {hi}]");
        let mut row = vec![
            ("from", lo),
            ("to", hi),
            ("delta", delta),
            ("d_H", hr.d_h),
            ("subset_gap", hr.b_to_a),
            ("lipschitz", lip),
            ("bound", bound),
            ("mu_tilde", summary.mu_tilde),
            ("T", t),
            ("hypotheses", if reach_ok { 1.0 } else { 0.0 }),
        ];
        if !reach_ok {
            report.flags.push(format!("outside-hypothesis on {label}: r_mu does not clear alpha + lambda"));
        }
        let ok = report.assert_le(format!("d_H on {label}"), hr.d_h, bound, lip_name, reach_ok);
        if !ok {
            let why = if reach_ok { "" } else { " (outside-hypothesis)" };
            report.flags.push(format!("discontinuity on {label}: d_H = {} exceeds {bound}{why}", hr.d_h));
        }
        report.assert_le(format!("subset direction on {label}"), hr.b_to_a, subset_tol, "monotone filtration", true);

        if cfg.gh_sweeps {
            if d.is_finite() && hr.d_h.is_finite() {
                let seed = cfg.seed ^ (i as u64 + 1).wrapping_mul(GOLDEN);
                let dist = gh_distortion(&axes[i], &axes[i + 1], hr.d_h + 2.0 * res, cfg.sample_pairs, res, seed)?;
                row.push(("gh_distortion", dist.distortion));
                row.push(("gh_bound", gh_bound));
                row.push(("D", d));
                report.assert_le(format!("GH distortion on {label}"), dist.distortion, gh_bound, gh_name, reach_ok);
            } else {
                report.flags.push(format!("gh skipped on {label}: an axis is empty or disconnected"));
            }
        }
        report.measurements.push(Measurement::new(label, &row));
        report.constants.push(constants);
    }
    Ok(table_output(report, "sweep.csv"))
}

/// Hausdorff distance between consecutive `λ` axes against the Lipschitz
/// bound, and the matching GH bound.
pub fn run_sweep_lambda(cfg: &ExperimentConfig, base: Option<&Path>) -> Result<ExperimentOutput> {
    run_sweep(cfg, base, Sweep::Lambda)
}

/// Same in `α` at fixed `λ`.
pub fn run_sweep_alpha(cfg: &ExperimentConfig, base: Option<&Path>) -> Result<ExperimentOutput> {
    run_sweep(cfg, base, Sweep::Alpha)
}

/// Moves every site by at most `eps`; returns the scene and the largest
/// displacement.
pub fn perturb_scene(scene: &SiteScene, eps: f64, model: Perturbation, seed: u64) -> Result<(SiteScene, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = scene.dim();
    let sites: Vec<Point> = scene
        .sites
        .iter()
        .map(|p| {
            let v: Point = match model {
                Perturbation::Translate => (0..dim).map(|k| if k == 0 { eps } else { 0.0 }).collect(),
                Perturbation::Jitter => loop {
                    let v: Point = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    if norm(&v) <= 1.0 {
                        break v.iter().map(|c| c * eps).collect();
                    }
                },
            };
            p.iter().zip(&v).map(|(a, b)| a + b).collect()
        })
        .collect();
    let moved = scene.sites.iter().zip(&sites).map(|(a, b)| dist(a, b)).fold(0.0, f64::max);
    let out = SiteScene::with_tolerance(sites, scene.bounding_radius, scene.tie_tolerance)?;
    Ok((out, moved))
}

/// Worst case of two summaries: larger `R_max`, smaller reach and `μ̃`.
fn merge(a: &ReachSummary, b: &ReachSummary) -> ReachSummary {
    let mut m = a.clone();
    m.r_max = a.r_max.max(b.r_max);
    m.mu_tilde = a.mu_tilde.min(b.mu_tilde);
    m.r_mu_alpha = a.r_mu_alpha.min(b.r_mu_alpha);
    m.r_mu_alpha_prime = a.r_mu_alpha_prime.min(b.r_mu_alpha_prime);
    m.censored = a.censored && b.censored;
    for f in &b.flags {
        if !m.flags.contains(f) {
            m.flags.push(f.clone());
        }
    }
    m
}

struct Perturbed {
    eps: f64,
    moved: f64,
    axis: FilteredAxis,
    constants_summary: ReachSummary,
}

fn perturbations(cfg: &ExperimentConfig, s: &Setup, lambda: f64, alpha: f64) -> Result<(FilteredAxis, Vec<Perturbed>)> {
    check_epsilons(&cfg.epsilons)?;
    let axis = filter_axis(&build_skeleton(&s.scene)?, lambda, alpha)?;
    let base_profile = measure_profile(&s.scene, cfg, s.band, cfg.seed)?;
    let base_summary = reach_summary(&base_profile, cfg.mu, alpha, lambda)?;
    let out = cfg
        .epsilons
        .iter()
        .enumerate()
        .map(|(k, &eps)| {
            let seed = cfg.seed ^ (k as u64 + 1).wrapping_mul(GOLDEN);
            let (scene, moved) = perturb_scene(&s.scene, eps, cfg.perturbation, seed)?;
            let axis = filter_axis(&build_skeleton(&scene)?, lambda, alpha)?;
            let summary = if eps == 0.0 {
                base_summary.clone()
            } else {
                let profile = measure_profile(&scene, cfg, s.band, cfg.seed)?;
                merge(&base_summary, &reach_summary(&profile, cfg.mu, alpha, lambda)?)
            };
            Ok(Perturbed { eps, moved, axis, constants_summary: summary })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((axis, out))
}

fn lambda_alpha(cfg: &ExperimentConfig) -> Result<(f64, f64)> {
    Ok((single("lambda", &cfg.lambdas)?, single("alpha", &cfg.alphas)?))
}

/// Hausdorff stability of the axis under site perturbations of size `ε`.
pub fn run_perturb(cfg: &ExperimentConfig, base: Option<&Path>) -> Result<ExperimentOutput> {
    let s = setup(cfg, base)?;
    planar(&s.scene, "perturb")?;
    let (lambda, alpha) = lambda_alpha(cfg)?;
    let res = s.resolution;
    let (axis, runs) = perturbations(cfg, &s, lambda, alpha)?;
    let mut report = StabilityReport::new("perturb", cfg.seed, res);
    let (mut xs, mut ys) = (vec![], vec![]);
    let mut all_hold = true;
    for p in &runs {
        let c = stability_constants(&p.constants_summary, 0.0, p.eps, 0.0, 0.0)?;
        let holds = c.holds(hypotheses::HAUSDORFF);
        all_hold &= holds || p.eps == 0.0;
        let d = hausdorff_report(&axis, &p.axis, res)?.d_h;
        let label = format!("eps = {}", p.eps);
        report.measurements.push(Measurement::new(
            label.clone(),
            &[
                ("epsilon", p.eps),
                ("site_displacement", p.moved),
                ("d_H", d),
                ("bound", c.hausdorff_bound),
                ("C", c.c),
                ("mu_tilde", c.mu_tilde),
                ("R_max", c.r_max),
                ("hypotheses", if holds { 1.0 } else { 0.0 }),
            ],
        ));
        report.assert_le(format!("d_H(K, K') <= eps at {label}"), p.moved, p.eps, "perturbation model", true);
        report.assert_le(format!("d_H of axes at {label}"), d, c.hausdorff_bound, "hausdorff_bound", holds);
        if !holds {
            report.flags.push(format!("hypotheses-not-met at {label}"));
        }
        if p.eps > 0.0 {
            xs.push(p.eps);
            ys.push(d);
        }
        report.constants.push(c);
    }
    report.slope = fit_loglog(&xs, &ys);
    match report.slope {
        Some(fit) if fit.samples >= 4 => {
            report.assert_le("log-log slope >= 0.4".into(), 0.4, fit.slope, "hausdorff exponent", all_hold);
        }
        _ => report.flags.push("slope fit needs at least four positive measurements; not asserted".into()),
    }
    Ok(table_output(report, "perturb.csv"))
}

/// GH distortion of the nearest-point relation between the axes of `K` and
/// a perturbed `K'`, against the three-term bound.
pub fn run_gh(cfg: &ExperimentConfig, base: Option<&Path>) -> Result<ExperimentOutput> {
    let s = setup(cfg, base)?;
    planar(&s.scene, "gh")?;
    let (lambda, alpha) = lambda_alpha(cfg)?;
    let res = s.resolution;
    let (axis, runs) = perturbations(cfg, &s, lambda, alpha)?;
    let mut report = StabilityReport::new("gh", cfg.seed, res);
    if axis.component_count() != 1 {
        report.flags.push(format!("gh skipped: base axis has {} components", axis.component_count()));
        report.skipped += runs.len();
        return Ok(table_output(report, "gh.csv"));
    }
    let da = diameter(&axis, res)?;
    for (k, p) in runs.iter().enumerate() {
        let label = format!("eps = {}", p.eps);
        if p.axis.component_count() != 1 {
            report
                .flags
                .push(format!("gh skipped at {label}: perturbed axis has {} components", p.axis.component_count()));
            report.skipped += 1;
            continue;
        }
        let db = diameter(&p.axis, res)?;
        let c = stability_constants(&p.constants_summary, 0.0, p.eps, da, db)?;
        let holds = c.holds(hypotheses::GH);
        // at ε = 0 the relation only has to close the sampling gap
        let radius = if p.eps > 0.0 { c.hausdorff_bound } else { 2.0 * res };
        let seed = cfg.seed ^ (k as u64 + 1).wrapping_mul(GOLDEN);
        let dist = match gh_distortion(&axis, &p.axis, radius, cfg.sample_pairs, res, seed) {
            Ok(d) => d,
            Err(AxisError::Precondition(msg)) => {
                report.flags.push(format!("relation not surjective at {label}: {msg}"));
                report.assert_le(format!("surjective at {label}"), f64::INFINITY, radius, "hausdorff_bound", true);
                continue;
            }
            Err(e) => return Err(e),
        };
        let gap = dist.correspondence.pairs.iter().map(|p| p.2).fold(0.0, f64::max);
        report.measurements.push(Measurement::new(
            label.clone(),
            &[
                ("epsilon", p.eps),
                ("distortion", dist.distortion),
                ("radius", radius),
                ("max_gap", gap),
                ("bound", c.gh_bound),
                ("term_flow_time", c.gh_terms.flow_time),
                ("term_displacement", c.gh_terms.displacement),
                ("term_stretch", c.gh_terms.stretch),
                ("D", c.d),
                ("C", c.c),
                ("mu_tilde", c.mu_tilde),
                ("hypotheses", if holds { 1.0 } else { 0.0 }),
            ],
        ));
        report.assert_le(format!("surjective at {label}"), gap, radius, "hausdorff_bound", true);
        if p.eps == 0.0 {
            report.assert_le(format!("distortion at {label}"), dist.distortion, 2.0 * res, "resolution", true);
        } else {
            report.assert_le(format!("distortion at {label}"), dist.distortion, c.gh_bound, "gh_bound", holds);
            if !holds {
                report.flags.push(format!("hypotheses-not-met at {label}"));
            }
        }
        report.constants.push(c);
    }
    Ok(table_output(report, "gh.csv"))
}
