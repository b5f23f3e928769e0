//! Hausdorff and intrinsic (geodesic) distances on filtered axes, the
//! distortion of the nearest-point relation between two axes, and the
//! closed-form stability constants.
//!
//! The Gromov-Hausdorff distance follows the convention without the factor
//! 1/2: a correspondence of distortion `d` certifies `d_GH <= d`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::axis::FilteredAxis;
use crate::critical::ReachSummary;
use crate::error::{AxisError, Result};
use crate::geom::{dist, lerp, Point};

/// Largest refined vertex count before the resolution is coarsened.
pub const VERTEX_BUDGET: usize = 5000;

/// Points of an axis spaced at most `resolution` apart along every segment,
/// endpoints and isolated vertices included.
pub fn sample_axis(axis: &FilteredAxis, resolution: f64) -> Vec<Point> {
    let mut out: Vec<Point> = axis.isolated.iter().map(|&i| axis.vertices[i].clone()).collect();
    for k in 0..axis.segments.len() {
        let (a, b) = axis.segment_points(k);
        let n = ((dist(a, b) / resolution).ceil() as usize).max(1);
        out.extend((0..=n).map(|i| lerp(a, b, i as f64 / n as f64)));
    }
    out
}

fn directed(samples: &[Point], to: &FilteredAxis) -> f64 {
    samples.par_iter().map(|x| to.distance_to(x)).reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HausdorffReport {
    #[serde(rename = "d_H")]
    pub d_h: f64,
    pub a_to_b: f64,
    pub b_to_a: f64,
    pub resolution: f64,
    /// sampling error bound
    pub error: f64,
}

pub fn hausdorff_report(a: &FilteredAxis, b: &FilteredAxis, resolution: f64) -> Result<HausdorffReport> {
    if !(resolution > 0.0) {
        return Err(AxisError::InvalidInput(format!("resolution must be positive, got {resolution}")));
    }
    if a.is_empty() || b.is_empty() {
        let inf = f64::INFINITY;
        let both = a.is_empty() && b.is_empty();
        let d = if both { 0.0 } else { inf };
        return Ok(HausdorffReport { d_h: d, a_to_b: d, b_to_a: d, resolution, error: 0.0 });
    }
    let a_to_b = directed(&sample_axis(a, resolution), b);
    let b_to_a = directed(&sample_axis(b, resolution), a);
    Ok(HausdorffReport { d_h: a_to_b.max(b_to_a), a_to_b, b_to_a, resolution, error: 0.5 * resolution })
}

/// Symmetric Hausdorff distance between the point sets of two axes; infinite
/// when exactly one of them is empty.
pub fn hausdorff_distance(a: &FilteredAxis, b: &FilteredAxis, resolution: f64) -> Result<f64> {
    Ok(hausdorff_report(a, b, resolution)?.d_h)
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Where a refined vertex sits on the axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Anchor {
    Vertex(usize),
    /// on segment `k` at arclength `offset` from its first endpoint
    Segment {
        k: usize,
        offset: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicGraph {
    pub resolution: f64,
    /// the resolution had to be increased to stay within the vertex budget
    pub coarsened: bool,
    pub points: Vec<Point>,
    pub anchors: Vec<Anchor>,
    pub component_ids: Vec<usize>,
    /// axis vertices with degree other than 2, as refined vertex ids
    pub key_vertices: Vec<usize>,
    segments: Vec<(usize, usize, f64)>,
    vertex_points: Vec<Point>,
    /// exact shortest-path distances between axis vertices
    apsp: Vec<Vec<f64>>,
    pred: Vec<Vec<usize>>,
}

fn dijkstra(adj: &[Vec<(usize, f64)>], src: usize) -> (Vec<f64>, Vec<usize>) {
    let mut d = vec![f64::INFINITY; adj.len()];
    let mut pred = vec![usize::MAX; adj.len()];
    let mut heap = BinaryHeap::new();
    d[src] = 0.0;
    heap.push(Entry(0.0, src));
    while let Some(Entry(du, u)) = heap.pop() {
        if du > d[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = du + w;
            if nd < d[v] {
                d[v] = nd;
                pred[v] = u;
                heap.push(Entry(nd, v));
            }
        }
    }
    (d, pred)
}

impl GeodesicGraph {
    pub fn build(axis: &FilteredAxis, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0) {
            return Err(AxisError::InvalidInput(format!("resolution must be positive, got {resolution}")));
        }
        let n = axis.vertices.len();
        let segments: Vec<(usize, usize, f64)> =
            axis.segments.iter().map(|s| (s.a, s.b, dist(&axis.vertices[s.a], &axis.vertices[s.b]))).collect();
        let mut adj = vec![Vec::new(); n];
        for &(a, b, l) in &segments {
            adj[a].push((b, l));
            adj[b].push((a, l));
        }
        let (apsp, pred): (Vec<_>, Vec<_>) = (0..n).into_par_iter().map(|s| dijkstra(&adj, s)).unzip();

        let mut res = resolution;
        let mut coarsened = false;
        let pieces =
            |res: f64| -> Vec<usize> { segments.iter().map(|s| ((s.2 / res).ceil() as usize).max(1)).collect() };
        let mut counts = pieces(res);
        while n + counts.iter().map(|c| c - 1).sum::<usize>() > VERTEX_BUDGET {
            res *= 2.0;
            coarsened = true;
            counts = pieces(res);
        }
        let mut points = axis.vertices.clone();
        let mut anchors: Vec<Anchor> = (0..n).map(Anchor::Vertex).collect();
        let mut component_ids = axis.components.clone();
        for (k, &(a, b, l)) in segments.iter().enumerate() {
            let m = counts[k];
            for i in 1..m {
                let t = i as f64 / m as f64;
                points.push(lerp(&axis.vertices[a], &axis.vertices[b], t));
                anchors.push(Anchor::Segment { k, offset: t * l });
                component_ids.push(axis.components[a]);
            }
        }
        let degree: Vec<usize> = (0..n).map(|v| adj[v].len()).collect();
        let key_vertices = (0..n).filter(|&v| degree[v] != 2).collect();
        Ok(GeodesicGraph {
            resolution: res,
            coarsened,
            points,
            anchors,
            component_ids,
            key_vertices,
            segments,
            vertex_points: axis.vertices.clone(),
            apsp,
            pred,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn component_count(&self) -> usize {
        self.component_ids.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Axis vertices reachable from refined vertex `i`, with the distance to
    /// each.
    fn exits(&self, i: usize) -> ([(usize, f64); 2], usize) {
        match self.anchors[i] {
            Anchor::Vertex(v) => ([(v, 0.0), (v, 0.0)], 1),
            Anchor::Segment { k, offset } => {
                let (a, b, l) = self.segments[k];
                ([(a, offset), (b, l - offset)], 2)
            }
        }
    }

    /// Intrinsic distance between two refined vertices (infinite across
    /// components).
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        // fixed summation order keeps the metric exactly symmetric
        let (i, j) = (i.min(j), i.max(j));
        let (ei, ni) = self.exits(i);
        let (ej, nj) = self.exits(j);
        let mut best = f64::INFINITY;
        if let (Anchor::Segment { k: ki, offset: oi }, Anchor::Segment { k: kj, offset: oj }) =
            (self.anchors[i], self.anchors[j])
        {
            if ki == kj {
                best = (oi - oj).abs();
            }
        }
        for &(u, du) in &ei[..ni] {
            for &(v, dv) in &ej[..nj] {
                best = best.min(du + self.apsp[u][v] + dv);
            }
        }
        best
    }

    /// Refined vertex closest to `x` and its distance.
    pub fn nearest_vertex(&self, x: &[f64]) -> Option<(usize, f64)> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, dist(p, x)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
    }

    fn vertex_path(&self, u: usize, v: usize) -> Vec<Point> {
        let mut ids = vec![v];
        let mut cur = v;
        while cur != u {
            cur = self.pred[u][cur];
            ids.push(cur);
        }
        ids.reverse();
        ids.into_iter().map(|w| self.vertex_points[w].clone()).collect()
    }

    /// Polyline realising [`GeodesicGraph::distance`].
    pub fn path(&self, i: usize, j: usize) -> Vec<Point> {
        if i > j {
            let mut p = self.path(j, i);
            p.reverse();
            return p;
        }
        let target = self.distance(i, j);
        if !target.is_finite() {
            return Vec::new();
        }
        if i == j {
            return vec![self.points[i].clone()];
        }
        if let (Anchor::Segment { k: ki, offset: oi }, Anchor::Segment { k: kj, offset: oj }) =
            (self.anchors[i], self.anchors[j])
        {
            if ki == kj && (oi - oj).abs() <= target {
                return vec![self.points[i].clone(), self.points[j].clone()];
            }
        }
        let (ei, ni) = self.exits(i);
        let (ej, nj) = self.exits(j);
        for &(u, du) in &ei[..ni] {
            for &(v, dv) in &ej[..nj] {
                if du + self.apsp[u][v] + dv <= target {
                    let mut out = vec![self.points[i].clone()];
                    out.extend(self.vertex_path(u, v));
                    out.push(self.points[j].clone());
                    out.dedup();
                    return out;
                }
            }
        }
        Vec::new()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Geodesic {
    pub length: f64,
    pub polyline: Vec<Point>,
    /// the endpoints lie in different components
    pub disconnected: bool,
}

/// Shortest path on the axis between the refined vertices nearest to `a`
/// and `b`.
pub fn geodesic(graph: &GeodesicGraph, a: &[f64], b: &[f64]) -> Result<Geodesic> {
    let snap = |x: &[f64]| -> Result<usize> {
        match graph.nearest_vertex(x) {
            Some((i, d)) if d <= graph.resolution => Ok(i),
            Some((_, d)) => Err(AxisError::InvalidInput(format!(
                "point {x:?} is {d} from the axis, more than the resolution {}",
                graph.resolution
            ))),
            None => Err(AxisError::InvalidInput("empty axis".into())),
        }
    };
    let (i, j) = (snap(a)?, snap(b)?);
    let length = graph.distance(i, j);
    Ok(Geodesic { length, polyline: graph.path(i, j), disconnected: !length.is_finite() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiameterReport {
    /// largest diameter over components
    pub diameter: f64,
    pub per_component: Vec<f64>,
    pub resolution: f64,
    pub coarsened: bool,
}

/// Geodesic diameter over refined vertex pairs, per component.
pub fn geodesic_diameter(graph: &GeodesicGraph) -> DiameterReport {
    let n = graph.len();
    let comps = graph.component_count();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = vec![0.0f64; comps];
            let c = graph.component_ids[i];
            for j in i + 1..n {
                if graph.component_ids[j] == c {
                    best[c] = best[c].max(graph.distance(i, j));
                }
            }
            best
        })
        .collect();
    let mut per_component = vec![0.0f64; comps];
    for r in rows {
        for (c, v) in r.into_iter().enumerate() {
            per_component[c] = per_component[c].max(v);
        }
    }
    DiameterReport {
        diameter: per_component.iter().copied().fold(0.0, f64::max),
        per_component,
        resolution: graph.resolution,
        coarsened: graph.coarsened,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correspondence {
    /// (refined vertex of A, refined vertex of B, Euclidean gap)
    pub pairs: Vec<(usize, usize, f64)>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distortion {
    pub distortion: f64,
    pub correspondence: Correspondence,
    /// number of relation pairs used as sources
    pub sources: usize,
    pub resolution: f64,
}

fn nearest_in(g: &GeodesicGraph, x: &[f64]) -> (usize, f64) {
    g.nearest_vertex(x).expect("nonempty graph")
}

/// Distortion of the nearest-point relation between two connected axes.
///
/// Every refined vertex of either axis is paired with its nearest refined
/// vertex on the other; all gaps must stay below `radius`. The distortion is
/// the largest `|d_A(a, b) - d_B(a', b')|` over all relation pairs `(b, b')`
/// and `sample_pairs` source pairs `(a, a')`, key vertices always included.
pub fn gh_distortion(
    a: &FilteredAxis,
    b: &FilteredAxis,
    radius: f64,
    sample_pairs: usize,
    resolution: f64,
    seed: u64,
) -> Result<Distortion> {
    if a.is_empty() || b.is_empty() {
        return Err(AxisError::Precondition("gh distortion needs two nonempty axes".into()));
    }
    if a.component_count() != 1 || b.component_count() != 1 {
        return Err(AxisError::Precondition(format!(
            "gh distortion needs connected axes (components: {} and {})",
            a.component_count(),
            b.component_count()
        )));
    }
    let ga = GeodesicGraph::build(a, resolution)?;
    let gb = GeodesicGraph::build(b, resolution)?;
    let mut pairs: Vec<(usize, usize, f64)> = (0..ga.len())
        .into_par_iter()
        .map(|i| {
            let (j, d) = nearest_in(&gb, &ga.points[i]);
            (i, j, d)
        })
        .collect();
    pairs.extend(
        (0..gb.len())
            .into_par_iter()
            .map(|j| {
                let (i, d) = nearest_in(&ga, &gb.points[j]);
                (i, j, d)
            })
            .collect::<Vec<_>>(),
    );
    pairs.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));
    pairs.dedup_by(|x, y| x.0 == y.0 && x.1 == y.1);
    let uncovered: Vec<String> = pairs
        .iter()
        .filter(|p| !(p.2 < radius))
        .take(5)
        .map(|p| format!("A#{} ~ B#{} (gap {})", p.0, p.1, p.2))
        .collect();
    if !uncovered.is_empty() {
        return Err(AxisError::Precondition(format!(
            "relation is not surjective within radius {radius}: {}",
            uncovered.join(", ")
        )));
    }

    let mut sources: Vec<usize> = (0..pairs.len())
        .filter(|&k| {
            let (i, j, _) = pairs[k];
            matches!(ga.anchors[i], Anchor::Vertex(v) if ga.key_vertices.contains(&v))
                || matches!(gb.anchors[j], Anchor::Vertex(v) if gb.key_vertices.contains(&v))
        })
        .collect();
    let mut rest: Vec<usize> = (0..pairs.len()).filter(|k| !sources.contains(k)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rest.shuffle(&mut rng);
    rest.truncate(sample_pairs);
    sources.extend(rest);

    let distortion = sources
        .par_iter()
        .map(|&s| {
            let (ia, ib, _) = pairs[s];
            pairs.iter().map(|&(ja, jb, _)| (ga.distance(ia, ja) - gb.distance(ib, jb)).abs()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(Distortion {
        distortion,
        sources: sources.len(),
        correspondence: Correspondence { pairs, radius },
        resolution: ga.resolution.max(gb.resolution),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

/// The three terms of the Gromov-Hausdorff perturbation bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GhTerms {
    /// `2 C^{3/2} ε^{1/4}`
    pub flow_time: f64,
    /// `2 C ε^{1/2} e^{C^{3/2} ε^{1/4} / α}`
    pub displacement: f64,
    /// `D (e^{C^{3/2} ε^{1/4} / α} - 1)`
    pub stretch: f64,
}

impl GhTerms {
    pub fn total(&self) -> f64 {
        self.flow_time + self.displacement + self.stretch
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityConstants {
    #[serde(rename = "R_max")]
    pub r_max: f64,
    pub mu: f64,
    pub mu_tilde: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub delta: f64,
    pub epsilon: f64,
    /// `R_max^2 δ / (α λ μ̃^2)`
    pub t_lambda: f64,
    /// `R_max δ / (α μ̃^2)`
    pub t_alpha: f64,
    /// `(22/3) R_max^2 / (α^{1/2} μ̃^{3/2} λ)`
    pub c: f64,
    /// Hausdorff Lipschitz constant in `λ`, with `λ_min = λ`
    pub lipschitz_lambda: f64,
    /// Hausdorff Lipschitz constant in `α`, with `α_min = α`
    pub lipschitz_alpha: f64,
    /// `D = max(Gdiam A, Gdiam B)`
    pub d: f64,
    /// `2 T_λ + D (e^{T_λ/α} - 1)`
    pub gh_lambda_bound: f64,
    /// `2 T_α + D (e^{T_α/α} - 1)`
    pub gh_alpha_bound: f64,
    /// `C ε^{1/2}`
    pub hausdorff_bound: f64,
    /// `8 R_max^2 ε / ((2λ - δ) δ μ̃)`
    pub entry_time_bound: f64,
    pub gh_terms: GhTerms,
    pub gh_bound: f64,
    pub gdiam_bound: Option<f64>,
    pub checks: Vec<HypothesisCheck>,
    pub flags: Vec<String>,
}

impl StabilityConstants {
    pub fn holds(&self, name: &str) -> bool {
        self.checks.iter().any(|c| c.name == name && c.holds)
    }
}

/// Names of the hypothesis groups recorded in [`StabilityConstants::checks`].
pub mod hypotheses {
    /// `r_μ^α > α + λ` and `μ̃ > 0`
    pub const REACH: &str = "reach";
    /// `δ < λ`, `ε < min(2α, (2λ - δ)δ / (8 R_max))`
    pub const ENTRY: &str = "entry";
    /// `2 sqrt(α μ̃ ε) < λ` and the two-term bound on `ε`
    pub const HAUSDORFF: &str = "hausdorff";
    /// six-term bound on `ε`
    pub const GH: &str = "gh";
}

fn check(name: &str, holds: bool, detail: String) -> HypothesisCheck {
    HypothesisCheck { name: name.to_string(), holds, detail }
}

/// Closed-form constants for a measured reach summary. Failing hypotheses are
/// recorded and flagged; the constants are still computed.
pub fn stability_constants(
    summary: &ReachSummary,
    delta: f64,
    epsilon: f64,
    gdiam_a: f64,
    gdiam_b: f64,
) -> Result<StabilityConstants> {
    let (r, mu, mt, alpha, lambda) = (summary.r_max, summary.mu, summary.mu_tilde, summary.alpha, summary.lambda);
    if !(alpha > 0.0) || !(lambda > 0.0) {
        return Err(AxisError::InvalidInput(format!("need alpha, lambda > 0 (alpha = {alpha}, lambda = {lambda})")));
    }
    if !(delta >= 0.0) || !(epsilon >= 0.0) {
        return Err(AxisError::InvalidInput(format!(
            "need delta, epsilon >= 0 (delta = {delta}, epsilon = {epsilon})"
        )));
    }
    let mt2 = mt * mt;
    let t_lambda = r * r * delta / (alpha * lambda * mt2);
    let t_alpha = r * delta / (alpha * mt2);
    let c = 22.0 / 3.0 * r * r / (alpha.sqrt() * mt.powf(1.5) * lambda);
    let d = gdiam_a.max(gdiam_b);
    let stretch = |t: f64| 2.0 * t + d * ((t / alpha).exp() - 1.0);
    let flow = c.powf(1.5) * epsilon.powf(0.25);
    let growth = (flow / alpha).exp();
    let gh_terms =
        GhTerms { flow_time: 2.0 * flow, displacement: 2.0 * c * epsilon.sqrt() * growth, stretch: d * (growth - 1.0) };

    let mut checks = Vec::new();
    let reach_ok = mt > 0.0 && summary.r_mu_alpha_prime > alpha + lambda;
    checks.push(check(
        hypotheses::REACH,
        reach_ok,
        format!("r_mu^alpha' = {} vs alpha + lambda = {}, mu_tilde = {mt}", summary.r_mu_alpha_prime, alpha + lambda),
    ));
    let entry_cap = (2.0 * alpha).min((2.0 * lambda - delta) * delta / (8.0 * r));
    checks.push(check(
        hypotheses::ENTRY,
        reach_ok && delta > 0.0 && delta < lambda && epsilon < entry_cap,
        format!("delta = {delta} < lambda = {lambda}; epsilon = {epsilon} < {entry_cap}"),
    ));
    let de = 2.0 * (alpha * mt * epsilon).sqrt();
    let haus_cap = ((2.0 * lambda - de) * de / (8.0 * r)).min(lambda * lambda / (16.0 * alpha * mt));
    checks.push(check(
        hypotheses::HAUSDORFF,
        reach_ok && de < lambda && epsilon < haus_cap,
        format!("2 sqrt(alpha mu~ eps) = {de} < lambda; epsilon = {epsilon} < {haus_cap}"),
    ));
    let l2 = lambda * lambda;
    let six = [
        l2 * alpha * mt / (16.0 * r * r),
        l2 / (16.0 * alpha * mt),
        9.0 * l2 * l2 * alpha * mt.powi(3) / (400.0 * r.powi(4)),
        (2.0 * alpha / c).powi(2),
        (l2 * alpha * mt / (16.0 * r * r * c)).powi(2),
        (l2 / (16.0 * alpha * mt * c)).powi(2),
    ];
    let gh_cap = six.iter().copied().fold(f64::INFINITY, f64::min);
    checks.push(check(hypotheses::GH, reach_ok && epsilon < gh_cap, format!("epsilon = {epsilon} < {gh_cap}")));
    let mut flags: Vec<String> =
        checks.iter().filter(|c| !c.holds).map(|c| format!("hypotheses-not-met: {}", c.name)).collect();
    flags.extend(summary.flags.iter().cloned());
    Ok(StabilityConstants {
        r_max: r,
        mu,
        mu_tilde: mt,
        alpha,
        lambda,
        delta,
        epsilon,
        t_lambda,
        t_alpha,
        c,
        lipschitz_lambda: r * r / (alpha * lambda * mt2),
        lipschitz_alpha: r / (alpha * mt2),
        d,
        gh_lambda_bound: stretch(t_lambda),
        gh_alpha_bound: stretch(t_alpha),
        hausdorff_bound: c * epsilon.sqrt(),
        entry_time_bound: 8.0 * r * r * epsilon / ((2.0 * lambda - delta) * delta * mt),
        gh_bound: gh_terms.total(),
        gh_terms,
        gdiam_bound: None,
        checks,
        flags,
    })
}

/// Universal bound on the geodesic diameter of `(K^{⊕α})^c` from a covering
/// of `(K^{⊕α'})^c` by balls of radius `α - α'` inside a ball of radius
/// `r_bound` in dimension `dim`.
pub fn offset_complement_diameter_bound(alpha: f64, alpha_prime: f64, mu: f64, r_bound: f64, dim: i32) -> f64 {
    let gap = alpha - alpha_prime;
    let n = (4.0 * r_bound / gap).powi(dim);
    2.0 * gap / mu + 2.0 * (n + 1.0) * gap * (gap / (alpha * mu)).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiameterBound {
    pub complement_bound: f64,
    pub bound: f64,
    pub mu_tilde: f64,
    pub hypotheses_met: bool,
}

/// `2 R_max / μ̃^2 + Gdiam((K^{⊕α})^c) e^{R_max / (α μ̃^2)}` with the
/// complement diameter replaced by its universal bound. `half` must be a
/// summary taken with `α' = α / 2`.
pub fn axis_diameter_bound(half: &ReachSummary, r_bound: f64, dim: i32) -> DiameterBound {
    let (alpha, mu, mt, r) = (half.alpha, half.mu, half.mu_tilde, half.r_max);
    let complement_bound = offset_complement_diameter_bound(alpha, half.alpha_prime, mu, r_bound, dim);
    let bound = 2.0 * r / (mt * mt) + complement_bound * (r / (alpha * mt * mt)).exp();
    let hypotheses_met = mt > 0.0 && half.r_mu_alpha_prime > alpha + half.lambda;
    DiameterBound { complement_bound, bound, mu_tilde: mt, hypotheses_met }
}

/// Report JSON shape shared by the metric experiments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    #[serde(rename = "d_H")]
    pub d_h: f64,
    pub resolution: f64,
    pub gh_distortion: Option<f64>,
    pub constants: Option<StabilityConstants>,
    pub flags: Vec<String>,
}
