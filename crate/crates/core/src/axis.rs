//! Planar `(λ, α)`-medial axis as a filtered Voronoi skeleton.
//!
//! For two or more sites every skeleton edge lies on the bisector of a site
//! pair `(p, q)`, where `F_K = h = |p - q| / 2` is constant and
//! `R_K = sqrt(h^2 + s^2)` with `s` the signed offset from the midpoint. The
//! filter `F_K^α >= λ` then keeps `|s| >= s*` with `s*` in closed form. The
//! wall only clips edges. A single site has the site/wall ellipse as its
//! whole axis, handled as a fine polygon.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{AxisError, Result};
use crate::field::{eval_field, f_alpha};
use crate::geom::{add, dist, dot, norm, norm2, scale, sub, Point};
use crate::scene::SiteScene;
use crate::seb::smallest_enclosing_ball;

/// Number of segments used for the site/wall ellipse of a single site.
pub const SINGLE_SITE_SEGMENTS: usize = 720;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum VertexKind {
    /// equidistant to three or more sites
    Voronoi { sites: Vec<usize> },
    /// a bisector edge meets the site/wall tie locus
    WallClip { sites: (usize, usize) },
    /// point of the site/wall ellipse of a single site
    WallArc { site: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkeletonVertex {
    pub point: Point,
    pub kind: VertexKind,
    pub r: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EdgeKind {
    /// `x(s) = mid + s·dir` for `s` in `[s0, s1]`
    Bisector { sites: (usize, usize), h: f64, mid: Point, dir: Point, s0: f64, s1: f64 },
    /// ellipse between the polar angles `u0 < u1` around `site`
    WallArc { site: usize, u0: f64, u1: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkeletonEdge {
    pub a: usize,
    pub b: usize,
    pub kind: EdgeKind,
    pub wall_limited: bool,
}

impl SkeletonEdge {
    pub fn h(&self) -> Option<f64> {
        match self.kind {
            EdgeKind::Bisector { h, .. } => Some(h),
            EdgeKind::WallArc { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoronoiSkeleton {
    pub bounding_radius: f64,
    pub sites: Vec<Point>,
    pub vertices: Vec<SkeletonVertex>,
    pub edges: Vec<SkeletonEdge>,
}

impl VoronoiSkeleton {
    pub fn max_f(&self) -> f64 {
        self.vertices.iter().map(|v| v.f).fold(0.0, f64::max)
    }
}

fn require_planar(scene: &SiteScene) -> Result<()> {
    if scene.dim() != 2 {
        return Err(AxisError::InvalidInput(format!(
            "axis extraction needs planar sites, got dimension {}",
            scene.dim()
        )));
    }
    Ok(())
}

/// Point of the site/wall ellipse around `p` in direction `(cos u, sin u)`.
fn ellipse_point(p: &[f64], rb: f64, u: f64) -> Point {
    let dir = [u.cos(), u.sin()];
    let r = (rb * rb - norm2(p)) / (2.0 * (rb + dot(&dir, p)));
    vec![p[0] + r * dir[0], p[1] + r * dir[1]]
}

fn wall_f(p: &[f64], z: &[f64], rb: f64) -> f64 {
    let w = scale(z, rb / norm(z));
    0.5 * dist(p, &w)
}

/// Range of `s` where `mid + s·dir` is closer to the sites than to the wall:
/// `A - B s >= sqrt(h^2 + s^2)`.
fn wall_interval(mid: &[f64], dir: &[f64], h: f64, rb: f64) -> Option<(f64, f64)> {
    let a = (rb * rb + h * h - norm2(mid)) / (2.0 * rb);
    let b = dot(mid, dir) / rb;
    let qa = 1.0 - b * b;
    let qb = 2.0 * a * b;
    let qc = h * h - a * a;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 || qa <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // stable pair of roots
    let q = -0.5 * (qb + qb.signum() * sq);
    let (r1, r2) = if q == 0.0 { (-sq / (2.0 * qa), sq / (2.0 * qa)) } else { (q / qa, qc / q) };
    let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
    // both roots satisfy A - B s >= 0 on the branch we want
    (a - b * lo >= 0.0 && a - b * hi >= 0.0).then_some((lo, hi))
}

struct VertexPool {
    merge: f64,
    vertices: Vec<SkeletonVertex>,
}

impl VertexPool {
    fn insert(&mut self, v: SkeletonVertex) -> usize {
        if let Some(i) = self.vertices.iter().position(|w| dist(&w.point, &v.point) <= self.merge) {
            // keep the richest witness description
            if let (VertexKind::Voronoi { sites: a }, VertexKind::Voronoi { sites: b }) =
                (&mut self.vertices[i].kind, &v.kind)
            {
                for s in b {
                    if !a.contains(s) {
                        a.push(*s);
                    }
                }
                a.sort_unstable();
            }
            return i;
        }
        self.vertices.push(v);
        self.vertices.len() - 1
    }
}

/// Builds the Voronoi skeleton of a planar scene, clipped by the wall.
pub fn build_skeleton(scene: &SiteScene) -> Result<VoronoiSkeleton> {
    scene.validate()?;
    require_planar(scene)?;
    let rb = scene.bounding_radius;
    let sites = &scene.sites;
    if sites.len() == 1 {
        return Ok(single_site_skeleton(&sites[0], rb));
    }
    let mut pool = VertexPool { merge: 1e-9 * rb, vertices: Vec::new() };
    let mut edges = Vec::new();
    let tie = 1e-9 * rb;
    for i in 0..sites.len() {
        for j in i + 1..sites.len() {
            let (p, q) = (&sites[i], &sites[j]);
            let pq = sub(q, p);
            let h = 0.5 * norm(&pq);
            let mid = scale(&add(p, q), 0.5);
            let dir = vec![-pq[1] / (2.0 * h), pq[0] / (2.0 * h)];
            let Some((mut s0, mut s1)) = wall_interval(&mid, &dir, h, rb) else { continue };
            let (mut lim0, mut lim1): (Vec<usize>, Vec<usize>) = (Vec::new(), Vec::new());
            let mut empty = false;
            for (k, r) in sites.iter().enumerate() {
                if k == i || k == j {
                    continue;
                }
                // |x - p|^2 <= |x - r|^2  <=>  c s <= e
                let rp = sub(r, p);
                let c = 2.0 * dot(&dir, &rp);
                let e = norm2(r) - norm2(p) - 2.0 * dot(&mid, &rp);
                if c.abs() < 1e-14 * rb {
                    if e < 0.0 {
                        empty = true;
                        break;
                    }
                    continue;
                }
                let bound = e / c;
                if c > 0.0 {
                    if bound < s1 - tie {
                        s1 = bound;
                        lim1 = vec![k];
                    } else if (bound - s1).abs() <= tie && !lim1.is_empty() {
                        lim1.push(k);
                    }
                } else if bound > s0 + tie {
                    s0 = bound;
                    lim0 = vec![k];
                } else if (bound - s0).abs() <= tie && !lim0.is_empty() {
                    lim0.push(k);
                }
            }
            if empty || s1 - s0 <= 1e-12 * rb {
                continue;
            }
            let mut end = |s: f64, lim: &Vec<usize>| -> Result<usize> {
                let x: Point = vec![mid[0] + s * dir[0], mid[1] + s * dir[1]];
                let r = dist(&x, p);
                let (kind, f) = if lim.is_empty() {
                    let w = scene.wall_point(&x);
                    let f = smallest_enclosing_ball(&[p.clone(), q.clone(), w])?.radius;
                    (VertexKind::WallClip { sites: (i, j) }, f)
                } else {
                    let mut ids = vec![i, j];
                    ids.extend(lim.iter().copied());
                    ids.sort_unstable();
                    let pts: Vec<Point> = ids.iter().map(|&k| sites[k].clone()).collect();
                    let f = smallest_enclosing_ball(&pts)?.radius;
                    (VertexKind::Voronoi { sites: ids }, f)
                };
                Ok(pool.insert(SkeletonVertex { point: x, kind, r, f }))
            };
            let a = end(s0, &lim0)?;
            let b = end(s1, &lim1)?;
            if a == b {
                continue;
            }
            edges.push(SkeletonEdge {
                a,
                b,
                kind: EdgeKind::Bisector { sites: (i, j), h, mid, dir, s0, s1 },
                wall_limited: lim0.is_empty() || lim1.is_empty(),
            });
        }
    }
    Ok(VoronoiSkeleton { bounding_radius: rb, sites: sites.clone(), vertices: pool.vertices, edges })
}

fn single_site_skeleton(p: &[f64], rb: f64) -> VoronoiSkeleton {
    let n = SINGLE_SITE_SEGMENTS;
    let step = std::f64::consts::TAU / n as f64;
    let vertices = (0..n)
        .map(|k| {
            let z = ellipse_point(p, rb, k as f64 * step);
            SkeletonVertex { r: dist(&z, p), f: wall_f(p, &z, rb), point: z, kind: VertexKind::WallArc { site: 0 } }
        })
        .collect();
    let edges = (0..n)
        .map(|k| SkeletonEdge {
            a: k,
            b: (k + 1) % n,
            kind: EdgeKind::WallArc { site: 0, u0: k as f64 * step, u1: (k + 1) as f64 * step },
            wall_limited: false,
        })
        .collect();
    VoronoiSkeleton { bounding_radius: rb, sites: vec![p.to_vec()], vertices, edges }
}

/// Field values at a segment endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndData {
    pub r: f64,
    pub f: f64,
    pub f_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSegment {
    pub a: usize,
    pub b: usize,
    pub ends: [EndData; 2],
    pub wall_limited: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredAxis {
    pub lambda: f64,
    pub alpha: f64,
    pub vertices: Vec<Point>,
    pub segments: Vec<AxisSegment>,
    /// vertex ids with no incident segment
    pub isolated: Vec<usize>,
    /// component id per vertex
    pub components: Vec<usize>,
    pub flags: Vec<String>,
}

/// Wire form of a filtered axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisJson {
    pub lambda: f64,
    pub alpha: f64,
    pub vertices: Vec<Point>,
    pub segments: Vec<[usize; 2]>,
    pub isolated: Vec<usize>,
    pub components: Vec<usize>,
}

impl FilteredAxis {
    /// Axis made of plain geometry, without field data at the endpoints.
    pub fn from_graph(vertices: Vec<Point>, edges: &[[usize; 2]]) -> Self {
        let none = EndData { r: f64::NAN, f: f64::NAN, f_alpha: f64::NAN };
        let segments: Vec<AxisSegment> =
            edges.iter().map(|&[a, b]| AxisSegment { a, b, ends: [none, none], wall_limited: false }).collect();
        let mut degree = vec![0usize; vertices.len()];
        for s in &segments {
            degree[s.a] += 1;
            degree[s.b] += 1;
        }
        let isolated = (0..vertices.len()).filter(|&i| degree[i] == 0).collect();
        let components = component_ids(vertices.len(), segments.iter().map(|s| (s.a, s.b)));
        FilteredAxis { lambda: f64::NAN, alpha: f64::NAN, vertices, segments, isolated, components, flags: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn component_count(&self) -> usize {
        self.components.iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn segment_points(&self, k: usize) -> (&Point, &Point) {
        let s = &self.segments[k];
        (&self.vertices[s.a], &self.vertices[s.b])
    }

    pub fn total_length(&self) -> f64 {
        (0..self.segments.len())
            .map(|k| {
                let (a, b) = self.segment_points(k);
                dist(a, b)
            })
            .sum()
    }

    /// Distance from `x` to the axis as a point set.
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        let seg = (0..self.segments.len())
            .map(|k| {
                let (a, b) = self.segment_points(k);
                crate::geom::point_segment_distance(x, a, b)
            })
            .fold(f64::INFINITY, f64::min);
        self.isolated.iter().map(|&i| dist(x, &self.vertices[i])).fold(seg, f64::min)
    }

    pub fn to_wire(&self) -> AxisJson {
        AxisJson {
            lambda: self.lambda,
            alpha: self.alpha,
            vertices: self.vertices.clone(),
            segments: self.segments.iter().map(|s| [s.a, s.b]).collect(),
            isolated: self.isolated.clone(),
            components: self.components.clone(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_wire()).expect("axis serializes")
    }
}

struct AxisBuilder {
    vertices: Vec<Point>,
    data: Vec<EndData>,
    from_skeleton: BTreeMap<usize, usize>,
    segments: Vec<AxisSegment>,
}

impl AxisBuilder {
    fn skeleton_vertex(&mut self, id: usize, v: &SkeletonVertex, alpha: f64) -> usize {
        if let Some(&k) = self.from_skeleton.get(&id) {
            return k;
        }
        let k = self.fresh(v.point.clone(), EndData { r: v.r, f: v.f, f_alpha: f_alpha(v.r, v.f, alpha) });
        self.from_skeleton.insert(id, k);
        k
    }

    fn fresh(&mut self, p: Point, d: EndData) -> usize {
        self.vertices.push(p);
        self.data.push(d);
        self.vertices.len() - 1
    }

    fn segment(&mut self, a: usize, b: usize, wall_limited: bool) {
        let ends = [self.data[a], self.data[b]];
        self.segments.push(AxisSegment { a, b, ends, wall_limited });
    }
}

/// Keeps the part of the skeleton where `F_K^α >= λ`.
pub fn filter_axis(skel: &VoronoiSkeleton, lambda: f64, alpha: f64) -> Result<FilteredAxis> {
    if !(lambda > 0.0) || !(alpha >= 0.0) {
        return Err(AxisError::InvalidInput(format!(
            "need lambda > 0 and alpha >= 0 (lambda = {lambda}, alpha = {alpha})"
        )));
    }
    let mut ab =
        AxisBuilder { vertices: Vec::new(), data: Vec::new(), from_skeleton: BTreeMap::new(), segments: Vec::new() };
    let mut flags = Vec::new();
    let rb = skel.bounding_radius;
    let vertex_keeps = |v: &SkeletonVertex| v.r > alpha && f_alpha(v.r, v.f, alpha) >= lambda;

    for e in &skel.edges {
        let (va, vb) = (&skel.vertices[e.a], &skel.vertices[e.b]);
        match &e.kind {
            EdgeKind::Bisector { h, mid, dir, s0, s1, .. } => {
                let h = *h;
                if lambda >= h {
                    continue;
                }
                let r_star = alpha * h / (h - lambda);
                let s_star = if r_star <= h { 0.0 } else { (r_star * r_star - h * h).sqrt() };
                let at = |s: f64| -> Point { vec![mid[0] + s * dir[0], mid[1] + s * dir[1]] };
                let cut = EndData {
                    r: r_star.max(h),
                    f: h,
                    f_alpha: if r_star <= h { f_alpha(h, h, alpha) } else { lambda },
                };
                // kept pieces: [s0, min(s1, -s*)] and [max(s0, s*), s1]
                let mut pieces = Vec::new();
                if s_star == 0.0 {
                    pieces.push((*s0, *s1));
                } else {
                    if *s0 < -s_star {
                        pieces.push((*s0, s1.min(-s_star)));
                    }
                    if *s1 > s_star {
                        pieces.push((s0.max(s_star), *s1));
                    }
                }
                for (lo, hi) in pieces {
                    if hi - lo <= 1e-12 * rb {
                        continue;
                    }
                    let a = if lo == *s0 { ab.skeleton_vertex(e.a, va, alpha) } else { ab.fresh(at(lo), cut) };
                    let b = if hi == *s1 { ab.skeleton_vertex(e.b, vb, alpha) } else { ab.fresh(at(hi), cut) };
                    ab.segment(a, b, e.wall_limited);
                }
            }
            EdgeKind::WallArc { site, u0, u1 } => {
                let (ka, kb) = (vertex_keeps(va), vertex_keeps(vb));
                if ka && kb {
                    let a = ab.skeleton_vertex(e.a, va, alpha);
                    let b = ab.skeleton_vertex(e.b, vb, alpha);
                    ab.segment(a, b, false);
                } else if ka != kb {
                    let p = &skel.sites[*site];
                    let keep_at = |u: f64| {
                        let z = ellipse_point(p, rb, u);
                        let r = dist(&z, p);
                        r > alpha && f_alpha(r, wall_f(p, &z, rb), alpha) >= lambda
                    };
                    // bisect for the crossing between the two polygon vertices
                    let (mut lo, mut hi) = if ka { (*u0, *u1) } else { (*u1, *u0) };
                    for _ in 0..100 {
                        let m = 0.5 * (lo + hi);
                        if keep_at(m) {
                            lo = m;
                        } else {
                            hi = m;
                        }
                    }
                    let z = ellipse_point(p, rb, lo);
                    let r = dist(&z, p);
                    let f = wall_f(p, &z, rb);
                    let c = ab.fresh(z, EndData { r, f, f_alpha: f_alpha(r, f, alpha) });
                    let kept = if ka { ab.skeleton_vertex(e.a, va, alpha) } else { ab.skeleton_vertex(e.b, vb, alpha) };
                    if ka {
                        ab.segment(kept, c, false);
                    } else {
                        ab.segment(c, kept, false);
                    }
                }
            }
        }
    }
    // Voronoi and wall-clip vertices that survive on their own
    for (id, v) in skel.vertices.iter().enumerate() {
        let candidate = matches!(v.kind, VertexKind::Voronoi { .. } | VertexKind::WallClip { .. });
        if candidate && !ab.from_skeleton.contains_key(&id) && vertex_keeps(v) {
            ab.skeleton_vertex(id, v, alpha);
        }
    }
    let mut degree = vec![0usize; ab.vertices.len()];
    for s in &ab.segments {
        degree[s.a] += 1;
        degree[s.b] += 1;
    }
    let isolated: Vec<usize> = (0..ab.vertices.len()).filter(|&i| degree[i] == 0).collect();
    let components = component_ids(ab.vertices.len(), ab.segments.iter().map(|s| (s.a, s.b)));
    if ab.vertices.is_empty() {
        flags.push("empty axis: lambda is at or above the largest F on the skeleton".to_string());
    }
    if ab.segments.iter().any(|s| s.wall_limited) {
        flags.push("wall-limited".to_string());
    }
    Ok(FilteredAxis { lambda, alpha, vertices: ab.vertices, segments: ab.segments, isolated, components, flags })
}

/// Connected components of a graph on `n` vertices, numbered in order of
/// first vertex.
pub fn component_ids(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut label = BTreeMap::new();
    (0..n)
        .map(|i| {
            let r = find(&mut parent, i);
            let next = label.len();
            *label.entry(r).or_insert(next)
        })
        .collect()
}

/// Field-based membership test, independent of the skeleton.
pub fn axis_membership(scene: &SiteScene, x: &[f64], lambda: f64, alpha: f64) -> Result<bool> {
    let s = eval_field(scene, x, Some(alpha))?;
    Ok(s.f_alpha.expect("alpha supplied") >= lambda)
}

/// Filtered axis straight from a scene.
pub fn filtered_axis(scene: &SiteScene, lambda: f64, alpha: f64) -> Result<FilteredAxis> {
    filter_axis(&build_skeleton(scene)?, lambda, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::lerp;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_site_skeleton_is_clipped_bisector() {
        let sk = build_skeleton(&SiteScene::two_site()).unwrap();
        assert_eq!(sk.edges.len(), 1);
        let e = &sk.edges[0];
        assert!(e.wall_limited);
        let ys: Vec<f64> = [e.a, e.b].iter().map(|&i| sk.vertices[i].point[1]).collect();
        assert!((ys[0].abs() - 4.95).abs() < 1e-12 && (ys[1].abs() - 4.95).abs() < 1e-12, "{ys:?}");
        assert!(ys[0] * ys[1] < 0.0);
        assert_eq!(e.h(), Some(1.0));
    }

    #[test]
    fn two_site_hole() {
        let ax = filtered_axis(&SiteScene::two_site(), 0.75, 0.5).unwrap();
        assert_eq!(ax.segments.len(), 2);
        let mut spans: Vec<(f64, f64)> = (0..2)
            .map(|k| {
                let (a, b) = ax.segment_points(k);
                let (lo, hi) = (a[1].min(b[1]), a[1].max(b[1]));
                (lo, hi)
            })
            .collect();
        spans.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let s3 = 3f64.sqrt();
        assert!((spans[0].0 + 4.95).abs() < 1e-6 && (spans[0].1 + s3).abs() < 1e-6, "{spans:?}");
        assert!((spans[1].0 - s3).abs() < 1e-6 && (spans[1].1 - 4.95).abs() < 1e-6, "{spans:?}");
        assert_eq!(ax.component_count(), 2);
        for s in &ax.segments {
            for e in s.ends {
                assert!(e.f_alpha >= 0.75 - 1e-9);
            }
        }
    }

    #[test]
    fn two_site_no_hole_when_alpha_plus_lambda_below_h() {
        let ax = filtered_axis(&SiteScene::two_site(), 0.5, 0.25).unwrap();
        assert_eq!(ax.segments.len(), 1);
        assert!((ax.total_length() - 9.9).abs() < 1e-9);
    }

    #[test]
    fn lambda_above_h_leaves_the_wall_clip_points() {
        let sc = SiteScene::two_site();
        let ax = filtered_axis(&sc, 1.0, 0.0).unwrap();
        assert!(ax.segments.is_empty());
        assert_eq!(ax.isolated.len(), 2);
        for &i in &ax.isolated {
            assert!((ax.vertices[i][1].abs() - 4.95).abs() < 1e-9);
        }
        // the clip points tie with both sites and the wall at distance 5.05
        let top = build_skeleton(&sc).unwrap().max_f();
        assert!((top - 5.05).abs() < 1e-9);
        let ax = filtered_axis(&sc, top + 0.1, 0.0).unwrap();
        assert!(ax.is_empty());
        assert!(!ax.flags.is_empty());
    }

    #[test]
    fn equilateral_triangle() {
        let sites: Vec<Point> = (0..3)
            .map(|k| {
                let a = std::f64::consts::FRAC_PI_2 + k as f64 * std::f64::consts::TAU / 3.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let sk = build_skeleton(&SiteScene::new(sites, 10.0).unwrap()).unwrap();
        assert_eq!(sk.edges.len(), 3);
        let centers: Vec<&SkeletonVertex> =
            sk.vertices.iter().filter(|v| matches!(v.kind, VertexKind::Voronoi { .. })).collect();
        assert_eq!(centers.len(), 1);
        assert!(norm(&centers[0].point) < 1e-12);
        assert!((centers[0].f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_site_circle() {
        let sk = build_skeleton(&SiteScene::new(vec![vec![0.0, 0.0]], 10.0).unwrap()).unwrap();
        assert_eq!(sk.edges.len(), SINGLE_SITE_SEGMENTS);
        for v in &sk.vertices {
            assert!((norm(&v.point) - 5.0).abs() < 1e-12);
            assert!((v.f - 5.0).abs() < 1e-12);
        }
        let ax = filter_axis(&sk, 1.0, 0.5).unwrap();
        assert_eq!(ax.segments.len(), SINGLE_SITE_SEGMENTS);
        assert_eq!(ax.component_count(), 1);
    }

    #[test]
    fn off_center_single_site_is_cut_where_f_alpha_meets_lambda() {
        let sc = SiteScene::new(vec![vec![4.0, 0.0]], 10.0).unwrap();
        let sk = build_skeleton(&sc).unwrap();
        // F ranges from 3 (near side) to 7 (far side)
        let ax = filter_axis(&sk, 4.0, 0.5).unwrap();
        assert!(!ax.is_empty() && ax.segments.len() < SINGLE_SITE_SEGMENTS);
        for s in &ax.segments {
            for e in s.ends {
                assert!(e.f_alpha >= 4.0 - 1e-9, "{}", e.f_alpha);
            }
        }
    }

    #[test]
    fn membership_examples() {
        let sc = SiteScene::two_site();
        assert!(axis_membership(&sc, &[0.0, 2.0], 0.75, 0.5).unwrap());
        assert!(!axis_membership(&sc, &[0.0, 1.0], 0.75, 0.5).unwrap());
        assert!(!axis_membership(&sc, &[0.4, 2.0], 0.75, 0.5).unwrap());
    }

    fn random_points_on(ax: &FilteredAxis, rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
        (0..n)
            .map(|_| {
                let k = rng.gen_range(0..ax.segments.len());
                let (a, b) = ax.segment_points(k);
                lerp(a, b, rng.gen_range(0.0..1.0))
            })
            .collect()
    }

    #[test]
    fn segments_agree_with_field_oracle() {
        for seed in 0..6u64 {
            let sc = SiteScene::random_planar(5 + 5 * seed as usize, 5.0, 0.4, seed).unwrap();
            let ax = filtered_axis(&sc, 0.3, 0.2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            if ax.segments.is_empty() {
                continue;
            }
            for x in random_points_on(&ax, &mut rng, 300) {
                let s = eval_field(&sc, &x, Some(0.2)).unwrap();
                assert!(s.f_alpha.unwrap() >= 0.3 - 1e-9, "seed {seed} x {x:?} {:?}", s.summary());
                assert_eq!(s.theta.len(), 2);
            }
        }
    }

    #[test]
    fn inclusion_chain() {
        let sc = SiteScene::random_planar(12, 5.0, 0.4, 9).unwrap();
        let sk = build_skeleton(&sc).unwrap();
        let (lambda, alpha) = (0.5, 0.2);
        let inner = filter_axis(&sk, lambda, alpha).unwrap();
        let mid = filter_axis(&sk, lambda, 0.0).unwrap();
        let outer = filter_axis(&sk, lambda - alpha, alpha).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for x in random_points_on(&inner, &mut rng, 500) {
            assert!(mid.distance_to(&x) < 1e-7);
        }
        for x in random_points_on(&mid, &mut rng, 500) {
            assert!(outer.distance_to(&x) < 1e-7);
        }
    }

    #[test]
    fn lambda_axis_keeps_whole_edges() {
        let sc = SiteScene::random_planar(10, 5.0, 0.4, 4).unwrap();
        let sk = build_skeleton(&sc).unwrap();
        let ax = filter_axis(&sk, 0.6, 0.0).unwrap();
        let whole = sk.edges.iter().filter(|e| e.h().unwrap() > 0.6).count();
        assert_eq!(ax.segments.len(), whole);
        let tiny = filter_axis(&sk, 1e-9, 0.0).unwrap();
        assert_eq!(tiny.segments.len(), sk.edges.len());
    }

    #[test]
    fn isolated_vertex_of_acute_triangle() {
        // circumradius 1, shortest half side sin(50°) ~ 0.766
        let ang = [90.0f64, 90.0 + 130.0, 90.0 + 230.0];
        let sites: Vec<Point> = ang.iter().map(|a| vec![a.to_radians().cos(), a.to_radians().sin()]).collect();
        let sc = SiteScene::new(sites, 10.0).unwrap();
        let sk = build_skeleton(&sc).unwrap();
        let h_max = sk.edges.iter().map(|e| e.h().unwrap()).fold(0.0, f64::max);
        let ax = filter_axis(&sk, 0.5 * (h_max + 1.0), 0.0).unwrap();
        assert!(ax.segments.is_empty());
        // the circumcenter plus the three wall-clip points
        assert_eq!(ax.isolated.len(), 4);
        let inner: Vec<usize> = ax.isolated.iter().copied().filter(|&i| norm(&ax.vertices[i]) < 2.0).collect();
        assert_eq!(inner.len(), 1);
        assert!(norm(&ax.vertices[inner[0]]) < 1e-9);
    }

    #[test]
    fn json_wire_format() {
        let ax = filtered_axis(&SiteScene::two_site(), 0.75, 0.5).unwrap();
        let v: serde_json::Value = serde_json::from_str(&ax.to_json_string()).unwrap();
        for key in ["lambda", "alpha", "vertices", "segments", "isolated", "components"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::geom::lerp;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn monotone_in_lambda_and_alpha(seed in 0u64..500, l1 in 0.05f64..0.8, dl in 0.0f64..0.4, a1 in 0.0f64..0.5, da in 0.0f64..0.5) {
            let sc = SiteScene::random_planar(10, 5.0, 0.4, seed).unwrap();
            let sk = build_skeleton(&sc).unwrap();
            let big = filter_axis(&sk, l1, a1).unwrap();
            let small = filter_axis(&sk, l1 + dl, a1 + da).unwrap();
            for k in 0..small.segments.len() {
                let (a, b) = small.segment_points(k);
                for t in [0.0, 0.3, 0.7, 1.0] {
                    prop_assert!(big.distance_to(&lerp(a, b, t)) < 1e-7);
                }
            }
            for &i in &small.isolated {
                prop_assert!(big.distance_to(&small.vertices[i]) < 1e-7);
            }
        }

        #[test]
        fn generic_points_are_off_both(seed in 0u64..500, x in -4.0f64..4.0, y in -4.0f64..4.0) {
            let sc = SiteScene::random_planar(8, 5.0, 0.4, seed).unwrap();
            prop_assume!(sc.distance(&[x, y]) > 0.3);
            let ax = filtered_axis(&sc, 0.2, 0.1).unwrap();
            let inside = axis_membership(&sc, &[x, y], 0.2, 0.1).unwrap();
            prop_assert_eq!(inside, ax.distance_to(&[x, y]) < 1e-7);
        }
    }
}
