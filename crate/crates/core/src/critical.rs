//! Sampled critical function `χ_K(t)` and the reach quantities read off it.
//!
//! Random starts are flowed until they stop at a critical point. Every face
//! crossed on the way is a piece of a flow line on which `|∇_K|` is known as
//! a function of `R_K`, so each piece contributes to every level band it
//! meets. The band minimum is an upper estimate of the infimum over the level
//! set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{AxisError, Result};
use crate::flow::{fmt17, trace_pieces, FlowPiece};
use crate::geom::{axpy, dist, norm, Point};
use crate::scene::SiteScene;

/// Level below which `χ` counts as zero for the weak feature size.
pub const CHI_ZERO_THRESHOLD: f64 = 0.05;

const MAX_TRACE_STEPS: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LevelGrid {
    /// `steps` equally spaced levels in `(0, 0.99 R_max]`
    Uniform {
        steps: usize,
    },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalProfile {
    pub t_grid: Vec<f64>,
    pub chi: Vec<f64>,
    /// levels whose band met no sample; `chi` is 1 there
    pub empty: Vec<bool>,
    pub sample_count: usize,
    pub band_width: f64,
    pub r_max: f64,
    /// traces were cut off above the last explicit level, so `r_max` is only
    /// a lower estimate
    pub r_max_truncated: bool,
    /// explicit levels at or above `0.99 R_max` that were dropped
    pub dropped_levels: usize,
}

impl CriticalProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,chi\n");
        for (t, c) in self.t_grid.iter().zip(&self.chi) {
            out.push_str(&format!("{},{}\n", fmt17(*t), fmt17(*c)));
        }
        out
    }

    pub fn flagged_empty(&self) -> usize {
        self.empty.iter().filter(|&&e| e).count()
    }

    /// Linear interpolation of the sampled profile, clamped at both ends.
    pub fn chi_at(&self, t: f64) -> f64 {
        let g = &self.t_grid;
        if g.is_empty() {
            return 1.0;
        }
        if t <= g[0] {
            return self.chi[0];
        }
        match g.iter().position(|&x| x >= t) {
            None => *self.chi.last().unwrap(),
            Some(i) => {
                let w = (t - g[i - 1]) / (g[i] - g[i - 1]);
                self.chi[i - 1] + w * (self.chi[i] - self.chi[i - 1])
            }
        }
    }
}

struct Trace {
    pieces: Vec<FlowPiece>,
    r_end: f64,
    r_start: f64,
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Point {
    loop {
        let v: Point = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Half of the starts are uniform in the ball, half lie near a random site,
/// closer than its nearest neighbour.
fn start_point(scene: &SiteScene, nn: &[f64], seed: u64, index: usize) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let dim = scene.dim();
    let rb = scene.bounding_radius;
    if index.is_multiple_of(2) {
        loop {
            let v: Point = (0..dim).map(|_| rng.gen_range(-rb..rb)).collect();
            if norm(&v) < rb * (1.0 - 1e-9) {
                return v;
            }
        }
    }
    let k = rng.gen_range(0..scene.sites.len());
    let rho = rng.gen_range(0.0..1.0) * nn[k];
    axpy(&scene.sites[k], rho.max(1e-9 * rb), &random_unit(&mut rng, dim))
}

fn nearest_neighbour_gaps(scene: &SiteScene) -> Vec<f64> {
    let rb = scene.bounding_radius;
    scene
        .sites
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let wall = rb - norm(p);
            scene.sites.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, q)| dist(p, q)).fold(wall, f64::min)
        })
        .collect()
}

/// Band minimum of `|∇|` over the part of `piece` with `|R - t| < band`.
fn piece_band_min(piece: &FlowPiece, t: f64, band: f64) -> Option<f64> {
    let lo = (t - band).max(piece.r0);
    let hi = (t + band).min(piece.r1);
    if lo > hi {
        return None;
    }
    if piece.straight {
        // F is constant and |∇| = sqrt(1 - (F/R)^2) grows with R
        let g = (1.0 - (piece.f0 / lo).powi(2)).max(0.0).sqrt();
        return Some(g.min(1.0));
    }
    let span = piece.r1 - piece.r0;
    let at = |r: f64| {
        if span <= 0.0 {
            piece.g0.min(piece.g1)
        } else {
            piece.g0 + (r - piece.r0) / span * (piece.g1 - piece.g0)
        }
    };
    Some(at(lo).min(at(hi)).clamp(0.0, 1.0))
}

pub fn estimate_critical_function(
    scene: &SiteScene,
    grid: &LevelGrid,
    samples_per_level: usize,
    band_width: f64,
    seed: u64,
) -> Result<CriticalProfile> {
    if samples_per_level < 100 {
        return Err(AxisError::InvalidInput(format!("samples_per_level must be >= 100, got {samples_per_level}")));
    }
    if !(band_width > 0.0) {
        return Err(AxisError::InvalidInput(format!("band_width must be positive, got {band_width}")));
    }
    let nn = nearest_neighbour_gaps(scene);
    let r_stop = match grid {
        LevelGrid::Explicit(ts) => ts.last().map_or(f64::INFINITY, |t| t + 2.0 * band_width),
        LevelGrid::Uniform { .. } => f64::INFINITY,
    };
    let traces: Vec<Trace> = (0..samples_per_level)
        .into_par_iter()
        .filter_map(|i| {
            let x = start_point(scene, &nn, seed, i);
            let r_start = scene.nearest_sites(&x).ok()?.distance;
            let (pieces, r_end) = trace_pieces(scene, &x, MAX_TRACE_STEPS, r_stop).ok()?;
            Some(Trace { pieces, r_end, r_start })
        })
        .collect();
    if traces.is_empty() {
        return Err(AxisError::InvalidInput("no valid sample start in the scene".into()));
    }
    let r_max = traces.iter().map(|t| t.r_end).fold(0.0, f64::max);
    let cap = 0.99 * r_max;
    let (t_grid, dropped_levels) = match grid {
        LevelGrid::Uniform { steps } => {
            let n = (*steps).max(2);
            ((1..=n).map(|i| cap * i as f64 / n as f64).collect::<Vec<_>>(), 0)
        }
        LevelGrid::Explicit(ts) => {
            if ts.windows(2).any(|w| !(w[1] > w[0])) || ts.iter().any(|&t| !(t > 0.0)) {
                return Err(AxisError::InvalidInput("t_grid must be positive and strictly increasing".into()));
            }
            let kept: Vec<f64> = ts.iter().copied().filter(|&t| t <= cap).collect();
            let dropped = ts.len() - kept.len();
            (kept, dropped)
        }
    };

    let mut chi = vec![f64::INFINITY; t_grid.len()];
    let level_range = |lo: f64, hi: f64| {
        let a = t_grid.partition_point(|&t| t < lo - band_width);
        let b = t_grid.partition_point(|&t| t <= hi + band_width);
        a..b
    };
    for tr in &traces {
        for p in &tr.pieces {
            for i in level_range(p.r0, p.r1) {
                if let Some(g) = piece_band_min(p, t_grid[i], band_width) {
                    chi[i] = chi[i].min(g);
                }
            }
        }
        // the trace stops at a critical point unless it was cut off
        if tr.r_end <= r_stop {
            let (r, g) = if tr.pieces.is_empty() { (tr.r_start, 1.0) } else { (tr.r_end, 0.0) };
            for i in level_range(r, r) {
                if (t_grid[i] - r).abs() < band_width {
                    chi[i] = chi[i].min(g);
                }
            }
        }
    }
    let empty: Vec<bool> = chi.iter().map(|c| c.is_infinite()).collect();
    for c in chi.iter_mut() {
        if c.is_infinite() {
            *c = 1.0;
        }
    }
    Ok(CriticalProfile {
        t_grid,
        chi,
        empty,
        sample_count: traces.len(),
        band_width,
        r_max,
        r_max_truncated: r_stop.is_finite() && r_max > r_stop,
        dropped_levels,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReachSummary {
    pub mu: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub alpha_prime: f64,
    pub r_mu_alpha: f64,
    /// `χ` never dropped below `μ` above `α`
    pub censored: bool,
    /// `r_μ^{α'}` used for `μ̃`
    pub r_mu_alpha_prime: f64,
    pub wfs: f64,
    pub wfs_censored: bool,
    #[serde(rename = "R_max")]
    pub r_max: f64,
    pub mu_tilde: f64,
    pub flags: Vec<String>,
}

/// First `t > from` at which the sampled profile drops below `level`.
fn first_crossing(profile: &CriticalProfile, from: f64, level: f64) -> Option<f64> {
    let g = &profile.t_grid;
    let c = &profile.chi;
    let i = (0..g.len()).find(|&i| g[i] > from && c[i] < level)?;
    if i > 0 && g[i - 1] > from && c[i - 1] >= level {
        let w = (c[i - 1] - level) / (c[i - 1] - c[i]);
        Some(g[i - 1] + w * (g[i] - g[i - 1]))
    } else {
        Some(g[i])
    }
}

pub fn reach_summary(profile: &CriticalProfile, mu: f64, alpha: f64, lambda: f64) -> Result<ReachSummary> {
    reach_summary_with(profile, mu, alpha, lambda, alpha)
}

/// Like [`reach_summary`] with `μ̃` built from `r_μ^{α'}`.
pub fn reach_summary_with(
    profile: &CriticalProfile,
    mu: f64,
    alpha: f64,
    lambda: f64,
    alpha_prime: f64,
) -> Result<ReachSummary> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(AxisError::InvalidInput(format!("mu must lie in (0, 1], got {mu}")));
    }
    if !(alpha >= 0.0) || !(alpha_prime >= 0.0) || !(lambda >= 0.0) {
        return Err(AxisError::InvalidInput("alpha, alpha' and lambda must be non-negative".into()));
    }
    let mut flags = Vec::new();
    let r_max = profile.r_max;
    let (r_mu_alpha, censored) = match first_crossing(profile, alpha, mu) {
        Some(r) => (r, false),
        None => {
            flags.push("censored".to_string());
            (r_max, true)
        }
    };
    let r_mu_alpha_prime =
        if alpha_prime == alpha { r_mu_alpha } else { first_crossing(profile, alpha_prime, mu).unwrap_or(r_max) };
    let (wfs, wfs_censored) = match first_crossing(profile, 0.0, CHI_ZERO_THRESHOLD) {
        Some(w) => (w, false),
        None => {
            flags.push("wfs censored".to_string());
            (r_max, true)
        }
    };
    let gap = r_mu_alpha_prime - alpha;
    let mu_tilde = if gap > lambda {
        mu.min((1.0 - (lambda / gap).powi(2)).sqrt())
    } else {
        flags.push(format!("lambda = {lambda} is not below r_mu^alpha' - alpha = {gap}"));
        0.0
    };
    if profile.flagged_empty() > 0 {
        flags.push(format!("{} empty level bands", profile.flagged_empty()));
    }
    Ok(ReachSummary {
        mu,
        alpha,
        lambda,
        alpha_prime,
        r_mu_alpha,
        censored,
        r_mu_alpha_prime,
        wfs,
        wfs_censored,
        r_max,
        mu_tilde,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_site_profile() -> CriticalProfile {
        let sc = SiteScene::two_site();
        estimate_critical_function(&sc, &LevelGrid::Uniform { steps: 500 }, 4000, sc.bounding_radius / 2000.0, 7)
            .unwrap()
    }

    #[test]
    fn two_site_levels() {
        let p = two_site_profile();
        assert!((p.r_max - 5.05).abs() < 1e-6, "{}", p.r_max);
        let chi_half = p.chi_at(0.5);
        assert!((chi_half - 1.0).abs() < 0.02, "{chi_half}");
        let chi_two = p.chi_at(2.0);
        assert!((chi_two - 0.75f64.sqrt()).abs() < 0.02, "{chi_two}");
        assert!(p.chi_at(1.0) <= 0.05, "{}", p.chi_at(1.0));
        for c in &p.chi {
            assert!((0.0..=1.0).contains(c));
        }
        assert!(p.t_grid.windows(2).all(|w| w[1] > w[0]));
        assert!(*p.t_grid.last().unwrap() < p.r_max);
    }

    #[test]
    fn two_site_reach() {
        let p = two_site_profile();
        let s = reach_summary(&p, 0.5, 0.25, 0.1).unwrap();
        assert!((s.r_mu_alpha - 1.0).abs() < 0.02, "{}", s.r_mu_alpha);
        assert!(!s.censored);
        assert!((s.wfs - 1.0).abs() < 0.02, "{}", s.wfs);
        assert!(s.mu_tilde <= s.mu);
        // a tiny mu lands on the weak feature size
        let tiny = reach_summary(&p, 0.051, 0.0, 0.0).unwrap();
        assert!((tiny.r_mu_alpha - s.wfs).abs() < 0.02);
    }

    #[test]
    fn single_site_profile_is_one_until_the_circle() {
        let sc = SiteScene::new(vec![vec![0.0, 0.0]], 10.0).unwrap();
        let p = estimate_critical_function(&sc, &LevelGrid::Uniform { steps: 200 }, 400, 0.005, 1).unwrap();
        assert!((p.r_max - 5.0).abs() < 1e-9);
        assert!(p.chi.iter().all(|&c| (c - 1.0).abs() < 1e-12));
        let s = reach_summary(&p, 0.5, 0.0, 0.0).unwrap();
        assert!(s.censored && s.r_mu_alpha == p.r_max);
    }

    #[test]
    fn deterministic_for_seed() {
        let sc = SiteScene::random_planar(8, 5.0, 0.5, 3).unwrap();
        let a = estimate_critical_function(&sc, &LevelGrid::Uniform { steps: 100 }, 300, 0.0025, 11).unwrap();
        let b = estimate_critical_function(&sc, &LevelGrid::Uniform { steps: 100 }, 300, 0.0025, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_arguments() {
        let sc = SiteScene::two_site();
        assert!(estimate_critical_function(&sc, &LevelGrid::Uniform { steps: 10 }, 50, 0.01, 0).is_err());
        assert!(estimate_critical_function(&sc, &LevelGrid::Explicit(vec![1.0, 0.5]), 100, 0.01, 0).is_err());
        let p = estimate_critical_function(&sc, &LevelGrid::Explicit(vec![1.0, 2.0, 9.0]), 100, 0.01, 0).unwrap();
        assert_eq!(p.t_grid, vec![1.0, 2.0]);
        assert_eq!(p.dropped_levels, 1);
        assert!(!p.r_max_truncated);
        let p = estimate_critical_function(&sc, &LevelGrid::Explicit(vec![0.5, 2.0]), 100, 0.01, 0).unwrap();
        assert!(p.r_max_truncated && p.r_max > 2.0);
    }

    #[test]
    fn csv_shape() {
        let sc = SiteScene::two_site();
        let p = estimate_critical_function(&sc, &LevelGrid::Uniform { steps: 20 }, 100, 0.01, 0).unwrap();
        let csv = p.to_csv();
        assert!(csv.starts_with("t,chi\n"));
        assert_eq!(csv.lines().count(), 21);
    }
}
