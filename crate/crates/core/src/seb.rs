//! Smallest enclosing balls.
//!
//! Up to three points are handled by direct case analysis (diameter balls,
//! then the circumscribed ball); larger inputs go through the move-to-front
//! recursion, which is exact up to the containment slack below and
//! deterministic for a fixed input ordering.

use serde::{Deserialize, Serialize};

use crate::error::{AxisError, Result};
use crate::geom::{dist, dist2, dot, lerp, solve_linear, sub, Point};

/// Relative slack used when testing whether a point lies inside a ball.
const CONTAIN_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn point(p: &[f64]) -> Self {
        Ball { center: p.to_vec(), radius: 0.0 }
    }

    fn diameter(a: &[f64], b: &[f64]) -> Self {
        Ball { center: lerp(a, b, 0.5), radius: 0.5 * dist(a, b) }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        let slack = CONTAIN_REL * (self.radius + self.center.iter().map(|c| c.abs()).sum::<f64>() + 1.0);
        dist(&self.center, p) <= self.radius + slack
    }
}

/// Ball through every point of `support` whose center lies in their affine
/// hull. Returns `None` if the support is affinely dependent.
fn circumball(support: &[&[f64]]) -> Option<Ball> {
    match support.len() {
        0 => None,
        1 => Some(Ball::point(support[0])),
        2 => Some(Ball::diameter(support[0], support[1])),
        k => {
            let o = support[0];
            let v: Vec<Point> = support[1..].iter().map(|s| sub(s, o)).collect();
            let m: Vec<Vec<f64>> = (0..k - 1).map(|i| (0..k - 1).map(|j| 2.0 * dot(&v[i], &v[j])).collect()).collect();
            let rhs: Vec<f64> = v.iter().map(|vi| dot(vi, vi)).collect();
            let lam = solve_linear(m, rhs)?;
            let mut c = o.to_vec();
            for (l, vi) in lam.iter().zip(&v) {
                for (cd, vd) in c.iter_mut().zip(vi) {
                    *cd += l * vd;
                }
            }
            let r = support.iter().map(|s| dist(&c, s)).fold(0.0, f64::max);
            Some(Ball { center: c, radius: r })
        }
    }
}

/// Exact smallest ball of at most three points.
fn small_ball(pts: &[&[f64]]) -> Ball {
    match pts.len() {
        1 => Ball::point(pts[0]),
        2 => Ball::diameter(pts[0], pts[1]),
        3 => {
            let mut best: Option<Ball> = None;
            for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
                let b = Ball::diameter(pts[i], pts[j]);
                if b.contains(pts[k]) && best.as_ref().is_none_or(|bb| b.radius < bb.radius) {
                    best = Some(b);
                }
            }
            best.or_else(|| circumball(pts)).unwrap_or_else(|| farthest_pair_ball(pts))
        }
        _ => unreachable!("small_ball takes 1..=3 points"),
    }
}

fn farthest_pair_ball(pts: &[&[f64]]) -> Ball {
    let mut best = Ball::point(pts[0]);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if dist2(pts[i], pts[j]) > 4.0 * best.radius * best.radius {
                best = Ball::diameter(pts[i], pts[j]);
            }
        }
    }
    best
}

fn mtf<'a>(pts: &mut Vec<&'a [f64]>, end: usize, support: &mut Vec<&'a [f64]>, dim: usize) -> Ball {
    let mut ball = if support.is_empty() {
        Ball { center: pts[0].to_vec(), radius: -1.0 }
    } else {
        circumball(support).unwrap_or_else(|| farthest_pair_ball(support))
    };
    if support.len() == dim + 1 {
        return ball;
    }
    let mut i = 0;
    while i < end {
        let p = pts[i];
        if ball.radius < 0.0 || !ball.contains(p) {
            support.push(p);
            ball = mtf(pts, i, support, dim);
            support.pop();
            let moved = pts.remove(i);
            pts.insert(0, moved);
        }
        i += 1;
    }
    ball
}

/// Smallest ball enclosing a nonempty point list.
pub fn smallest_enclosing_ball(points: &[Point]) -> Result<Ball> {
    if points.is_empty() {
        return Err(AxisError::InvalidInput("smallest enclosing ball of an empty set".into()));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim || p.iter().any(|c| !c.is_finite())) {
        return Err(AxisError::InvalidInput("points must be finite and share one dimension".into()));
    }
    let refs: Vec<&[f64]> = points.iter().map(|p| p.as_slice()).collect();
    if refs.len() <= 3 {
        return Ok(small_ball(&refs));
    }
    let mut order = refs.clone();
    let n = order.len();
    let mut support = Vec::with_capacity(dim + 1);
    let mut ball = mtf(&mut order, n, &mut support, dim);
    // numerical safety: the recursion can leave a point a few ulps outside
    let r = refs.iter().map(|p| dist(&ball.center, p)).fold(0.0, f64::max);
    ball.radius = ball.radius.max(r);
    Ok(ball)
}
