//! Generalized-gradient flow `Φ_K`.
//!
//! Between sheet crossings the gradient of a finite site set is constant in
//! direction: on a face with active witness set `A` the point moves straight
//! away from the center of the smallest ball enclosing `A`. Explicit Euler
//! steps therefore follow the exact path; a step that would cross a sheet is
//! shortened so that it ends on it. Faces tied to the wall are curved; there
//! each Euler step is projected back onto the site/wall tie and halved until
//! `R_K` and `F_K` do not decrease.

use serde::Serialize;

use crate::error::{AxisError, Result};
use crate::field::{eval_field, f_alpha, FieldSample};
use crate::geom::{axpy, dist, dot, norm, norm2, polyline_length, scale, sub, Point};
use crate::scene::{SiteScene, WitnessKind};

/// Gradients shorter than this are treated as critical points.
pub const CRITICAL_GRAD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepControl {
    /// upper bound on each Euler time step
    pub max_step: f64,
    /// relative slack allowed on `F_K` when accepting a curved step
    pub grad_refine_tolerance: f64,
}

impl StepControl {
    pub fn for_scene(scene: &SiteScene) -> Self {
        StepControl { max_step: scene.bounding_radius / 500.0, grad_refine_tolerance: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopCondition {
    TimeExhausted,
    /// stop at the first node with `F_K^α >= λ`
    EnteredAxis {
        lambda: f64,
        alpha: f64,
    },
    /// stop at the first node with `|∇_K| < η`
    GradientBelow(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    Horizon,
    EnteredAxis,
    GradientBelow,
    CriticalPoint,
    StepBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowNode {
    pub t: f64,
    /// accumulated Euclidean arclength
    pub s: f64,
    pub y: Point,
    pub r: f64,
    pub f: f64,
    pub f_alpha: Option<f64>,
    pub grad_norm: f64,
    pub witness_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub start: Point,
    pub alpha: Option<f64>,
    pub nodes: Vec<FlowNode>,
    pub step_control: StepControl,
    pub stop_reason: StopReason,
}

impl Trajectory {
    pub fn end(&self) -> &FlowNode {
        self.nodes.last().expect("trajectory has at least one node")
    }

    pub fn points(&self) -> Vec<Point> {
        self.nodes.iter().map(|n| n.y.clone()).collect()
    }

    pub fn length(&self) -> f64 {
        self.end().s
    }

    /// First node time at which the stop condition held, if it did.
    pub fn entry_time(&self) -> Option<f64> {
        (self.stop_reason == StopReason::EnteredAxis).then(|| self.end().t)
    }

    /// CSV with header `t,s,x,y,R,F_alpha,grad_norm` (planar trajectories).
    /// Missing `F_alpha` values are written as `nan`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,s,x,y,R,F_alpha,grad_norm\n");
        for n in &self.nodes {
            let fa = n.f_alpha.unwrap_or(f64::NAN);
            let y1 = n.y.get(1).copied().unwrap_or(0.0);
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt17(n.t),
                fmt17(n.s),
                fmt17(n.y[0]),
                fmt17(y1),
                fmt17(n.r),
                fmt17(fa),
                fmt17(n.grad_norm)
            ));
        }
        out
    }
}

/// 17 significant digits.
pub fn fmt17(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.16e}")
    }
}

fn node(t: f64, s: f64, p: &FieldSample, alpha: Option<f64>) -> FlowNode {
    FlowNode {
        t,
        s,
        y: p.point.clone(),
        r: p.r,
        f: p.f,
        f_alpha: alpha.filter(|&a| p.r > a).map(|a| f_alpha(p.r, p.f, a)),
        grad_norm: p.grad_norm(),
        witness_count: p.theta.len(),
    }
}

/// Witnesses that stay closest when leaving `probe` along `dir`.
fn active_set(probe: &FieldSample, dir: &[f64]) -> Vec<usize> {
    let keys: Vec<f64> = probe.theta.iter().map(|w| dot(dir, &w.point)).collect();
    let max = keys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-9 * (probe.r + norm(&probe.point));
    (0..keys.len()).filter(|&i| keys[i] >= max - slack).collect()
}

/// Distance along the unit direction `dir` from `y` to the next sheet, for a
/// face whose active witnesses are all sites.
fn next_event(scene: &SiteScene, probe: &FieldSample, dir: &[f64], active: &[usize]) -> f64 {
    let y = &probe.point;
    let r2 = probe.r * probe.r;
    let k_a = active.iter().map(|&i| dot(dir, &sub(y, &probe.theta[i].point))).sum::<f64>() / active.len() as f64;
    let in_active = |idx: usize| active.iter().any(|&i| probe.theta[i].kind == WitnessKind::Site(idx));
    let mut best = f64::INFINITY;
    for (idx, s) in scene.sites.iter().enumerate() {
        if in_active(idx) {
            continue;
        }
        let ys = sub(y, s);
        let denom = 2.0 * (k_a - dot(dir, &ys));
        if denom > 0.0 {
            let u = (norm2(&ys) - r2) / denom;
            if u > 0.0 && u < best {
                best = u;
            }
        }
    }
    // wall: R_b - |y + u d| = sqrt(R^2 + 2 u k_a + u^2)
    let rb = scene.bounding_radius;
    let vy = dot(dir, y);
    let y2 = norm2(y);
    let a = (rb * rb + y2 - r2) / (2.0 * rb);
    let b = (vy - k_a) / rb;
    let qa = 1.0 - b * b;
    let qb = 2.0 * (vy - a * b);
    let qc = y2 - a * a;
    let mut roots = Vec::with_capacity(2);
    if qa.abs() < 1e-14 {
        if qb.abs() > 0.0 {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            roots.push((-qb - sq) / (2.0 * qa));
            roots.push((-qb + sq) / (2.0 * qa));
        }
    }
    let min_u = 1e-12 * rb;
    for u in roots {
        if u > min_u && u < best {
            let z = axpy(y, u, dir);
            let wall = rb - norm(&z);
            let d = (r2 + 2.0 * u * k_a + u * u).max(0.0).sqrt();
            if wall >= 0.0 && (wall - d).abs() <= 1e-7 * rb {
                best = u;
            }
        }
    }
    best
}

/// Newton projection onto `R_b - |z| = |z - p|`.
fn project_site_wall(scene: &SiteScene, z: &[f64], p: &[f64]) -> Point {
    let mut z = z.to_vec();
    for _ in 0..8 {
        let nz = norm(&z);
        let zp = sub(&z, p);
        let dp = norm(&zp);
        if nz == 0.0 || dp == 0.0 {
            break;
        }
        let phi = scene.bounding_radius - nz - dp;
        let grad: Point = z.iter().zip(&zp).map(|(zi, qi)| -zi / nz - qi / dp).collect();
        let g2 = norm2(&grad);
        if g2 == 0.0 {
            break;
        }
        z = axpy(&z, -phi / g2, &grad);
        if phi.abs() <= 1e-15 * scene.bounding_radius {
            break;
        }
    }
    z
}

struct Advance {
    probe: FieldSample,
    dt: f64,
}

fn site_indices(p: &FieldSample) -> Vec<usize> {
    p.theta
        .iter()
        .filter_map(|w| match w.kind {
            WitnessKind::Site(i) => Some(i),
            WitnessKind::Wall => None,
        })
        .collect()
}

/// One Euler step of at most `dt_straight` (site faces) or `dt_curved`
/// (wall faces) in time.
fn advance(
    scene: &SiteScene,
    cur: &FieldSample,
    dt_straight: f64,
    dt_curved: f64,
    ctl: &StepControl,
) -> Result<Advance> {
    let gn = cur.grad_norm();
    let dir = scale(&cur.grad, 1.0 / gn);
    let active = active_set(cur, &dir);
    let wall_active = active.iter().any(|&i| cur.theta[i].kind == WitnessKind::Wall);
    let min_move = 1e-12 * scene.bounding_radius;

    if !wall_active {
        let u_event = next_event(scene, cur, &dir, &active);
        let u_step = dt_straight * gn;
        let (u, dt) = if u_step < u_event { (u_step, dt_straight) } else { (u_event, u_event / gn) };
        if !(u > 0.0) || !u.is_finite() {
            return Err(AxisError::Stall { time: 0.0, point: cur.point.clone() });
        }
        let probe = eval_field(scene, &axpy(&cur.point, u, &dir), None)?;
        return Ok(Advance { probe, dt });
    }

    let active_sites: Vec<usize> = active
        .iter()
        .filter_map(|&i| match cur.theta[i].kind {
            WitnessKind::Site(k) => Some(k),
            WitnessKind::Wall => None,
        })
        .collect();
    let pin = (active_sites.len() == 1).then(|| scene.sites[active_sites[0]].clone());
    let place = |tau: f64, dt: f64| -> Point {
        let z = axpy(&cur.point, tau * dt, &cur.grad);
        match &pin {
            Some(p) => project_site_wall(scene, &z, p),
            None => z,
        }
    };
    let known = site_indices(cur);
    let f_floor = cur.f * (1.0 - ctl.grad_refine_tolerance) - ctl.grad_refine_tolerance * scene.bounding_radius;
    let mut dt = dt_curved;
    loop {
        if dt * gn < min_move {
            return Err(AxisError::Stall { time: 0.0, point: cur.point.clone() });
        }
        let z = place(1.0, dt);
        if norm(&z) >= scene.bounding_radius {
            dt *= 0.5;
            continue;
        }
        let probe = eval_field(scene, &z, None)?;
        let newcomer = site_indices(&probe).into_iter().find(|i| !known.contains(i));
        if newcomer.is_none() && probe.r >= cur.r && probe.f >= f_floor {
            return Ok(Advance { probe, dt });
        }
        // a new site took over: land on its tie with the current witnesses
        if let Some(s) = newcomer {
            let site = &scene.sites[s];
            let gap = |tau: f64| {
                let zz = place(tau, dt);
                let own = cur
                    .theta
                    .iter()
                    .map(|w| match w.kind {
                        WitnessKind::Site(k) => dist(&zz, &scene.sites[k]),
                        WitnessKind::Wall => scene.bounding_radius - norm(&zz),
                    })
                    .fold(f64::INFINITY, f64::min);
                dist(&zz, site) - own
            };
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            if gap(lo) > 0.0 && gap(hi) <= 0.0 {
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if gap(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let zz = place(hi, dt);
                if dist(&zz, &cur.point) >= min_move && norm(&zz) < scene.bounding_radius {
                    let probe = eval_field(scene, &zz, None)?;
                    if probe.r >= cur.r && probe.f >= f_floor {
                        return Ok(Advance { probe, dt: hi * dt });
                    }
                }
            }
        }
        dt *= 0.5;
    }
}

/// Integrates `Φ_K(·, x0)` up to `horizon` or until `stop` fires.
pub fn integrate_flow(
    scene: &SiteScene,
    x0: &[f64],
    alpha: Option<f64>,
    horizon: f64,
    stop: StopCondition,
    ctl: StepControl,
) -> Result<Trajectory> {
    if !(horizon >= 0.0) {
        return Err(AxisError::InvalidInput(format!("horizon must be >= 0, got {horizon}")));
    }
    let mut cur = eval_field(scene, x0, None)?;
    let mut nodes = vec![node(0.0, 0.0, &cur, alpha)];
    let (mut t, mut s) = (0.0f64, 0.0f64);
    let budget = 2_000_000usize;
    let reason = loop {
        let last = nodes.last().unwrap();
        match stop {
            StopCondition::EnteredAxis { lambda, .. } if last.f_alpha.is_some_and(|fa| fa >= lambda) => {
                break StopReason::EnteredAxis
            }
            StopCondition::GradientBelow(eta) if last.grad_norm < eta => break StopReason::GradientBelow,
            _ => {}
        }
        if t >= horizon {
            break StopReason::Horizon;
        }
        if cur.grad_norm() < CRITICAL_GRAD {
            if horizon.is_finite() {
                nodes.push(FlowNode { t: horizon, ..node(t, s, &cur, alpha) });
            }
            break StopReason::CriticalPoint;
        }
        if nodes.len() >= budget {
            break StopReason::StepBudget;
        }
        let dt_max = ctl.max_step.min(horizon - t);
        let adv = advance(scene, &cur, dt_max, dt_max, &ctl).map_err(|e| match e {
            AxisError::Stall { point, .. } => AxisError::Stall { time: t, point },
            other => other,
        })?;
        s += dist(&cur.point, &adv.probe.point);
        t = if horizon - (t + adv.dt) <= 1e-15 * horizon.max(1.0) { horizon } else { t + adv.dt };
        cur = adv.probe;
        nodes.push(node(t, s, &cur, alpha));
    };
    Ok(Trajectory { start: x0.to_vec(), alpha, nodes, step_control: ctl, stop_reason: reason })
}

/// `Φ_K(T, x)`.
pub fn flow_point(scene: &SiteScene, x: &[f64], time: f64, ctl: StepControl) -> Result<Point> {
    Ok(integrate_flow(scene, x, None, time, StopCondition::TimeExhausted, ctl)?.end().y.clone())
}

/// One piece of a traced flow line on which `|∇_K|` is a known function of
/// `R_K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowPiece {
    pub r0: f64,
    pub r1: f64,
    pub f0: f64,
    pub f1: f64,
    pub g0: f64,
    pub g1: f64,
    /// site-only face: `F` is constant and `|∇| = sqrt(1 - (F/R)^2)` exactly
    pub straight: bool,
}

/// Follows the flow from `x0` until a critical point or until `R_K` exceeds
/// `r_stop`, recording each face crossed. Site faces are taken in a single
/// step each.
pub fn trace_pieces(scene: &SiteScene, x0: &[f64], max_nodes: usize, r_stop: f64) -> Result<(Vec<FlowPiece>, f64)> {
    let ctl = StepControl::for_scene(scene);
    let mut cur = eval_field(scene, x0, None)?;
    let mut pieces = Vec::new();
    for _ in 0..max_nodes {
        if cur.grad_norm() < 1e-6 || cur.r > r_stop {
            break;
        }
        let straight = !cur.has_wall() || {
            let dir = scale(&cur.grad, 1.0 / cur.grad_norm());
            !active_set(&cur, &dir).iter().any(|&i| cur.theta[i].kind == WitnessKind::Wall)
        };
        // curved faces: roughly constant displacement per step
        let dt_curved = ctl.max_step / cur.grad_norm().max(0.05);
        let adv = match advance(scene, &cur, f64::INFINITY, dt_curved, &ctl) {
            Ok(a) => a,
            Err(AxisError::Stall { .. }) => break,
            Err(e) => return Err(e),
        };
        let next = adv.probe;
        pieces.push(FlowPiece {
            r0: cur.r,
            r1: next.r,
            f0: cur.f,
            f1: next.f,
            g0: cur.grad_norm(),
            g1: next.grad_norm(),
            straight,
        });
        cur = next;
    }
    Ok((pieces, cur.r))
}

/// Per-node residuals of the lower bound
/// `(R(y(s)) - α)^2 >= (S0 + s)^2 + λ^2` along a trajectory that stays
/// outside the `(λ, α)`-axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusCertificate {
    pub s0: f64,
    pub residuals: Vec<f64>,
    pub min_residual: f64,
}

pub fn radius_certificate(traj: &Trajectory, alpha: f64, lambda: f64) -> Result<RadiusCertificate> {
    let first = &traj.nodes[0];
    if !(first.r - alpha > lambda) {
        return Err(AxisError::Precondition(format!(
            "R_K(start) - alpha = {} does not exceed lambda = {lambda}",
            first.r - alpha
        )));
    }
    for (i, n) in traj.nodes.iter().enumerate() {
        let fa = f_alpha(n.r, n.f, alpha);
        if fa >= lambda {
            return Err(AxisError::Precondition(format!("node {i} (t = {}) is inside the axis: F^alpha = {fa}", n.t)));
        }
    }
    let s0 = ((first.r - alpha).powi(2) - lambda * lambda).sqrt();
    let residuals: Vec<f64> =
        traj.nodes.iter().map(|n| (n.r - alpha).powi(2) - (s0 + n.s).powi(2) - lambda * lambda).collect();
    let min_residual = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(RadiusCertificate { s0, residuals, min_residual })
}

/// A path transported by the flow with its endpoints held fixed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PushedPath {
    pub base_path: Vec<Point>,
    pub time: f64,
    pub result: Vec<Point>,
    pub base_length: f64,
    pub pushed_length: f64,
}

impl PushedPath {
    /// `2T + L e^{T/α}`
    pub fn length_bound(&self, alpha: f64) -> f64 {
        2.0 * self.time + self.base_length * (self.time / alpha).exp()
    }
}

/// Checks that a polyline stays at distance more than `alpha` from `K`,
/// sampling each segment at its vertices and `samples` interior points.
pub fn check_outside_offset(scene: &SiteScene, path: &[Point], alpha: f64, samples: usize) -> Result<()> {
    let check = |p: &[f64], what: String| -> Result<()> {
        if norm(p) >= scene.bounding_radius || scene.distance(p) <= alpha {
            Err(AxisError::Precondition(format!("{what} leaves the complement of the alpha-offset (alpha = {alpha})")))
        } else {
            Ok(())
        }
    };
    for (i, p) in path.iter().enumerate() {
        check(p, format!("vertex {i}"))?;
    }
    for (i, w) in path.windows(2).enumerate() {
        for k in 1..=samples {
            let t = k as f64 / (samples + 1) as f64;
            check(&crate::geom::lerp(&w[0], &w[1], t), format!("segment {i} at parameter {t}"))?;
        }
    }
    Ok(())
}

/// Splits every segment so that no piece is longer than `spacing`.
pub fn densify(path: &[Point], spacing: f64) -> Vec<Point> {
    let mut out = vec![path[0].clone()];
    for w in path.windows(2) {
        let n = ((dist(&w[0], &w[1]) / spacing).ceil() as usize).max(1);
        for k in 1..=n {
            out.push(crate::geom::lerp(&w[0], &w[1], k as f64 / n as f64));
        }
    }
    out
}

pub fn push_path(
    scene: &SiteScene,
    base: &[Point],
    time: f64,
    alpha: f64,
    spacing: f64,
    ctl: StepControl,
) -> Result<PushedPath> {
    if base.is_empty() {
        return Err(AxisError::InvalidInput("empty base path".into()));
    }
    if !(alpha > 0.0) || !(time >= 0.0) {
        return Err(AxisError::InvalidInput(format!("need alpha > 0 and T >= 0 (alpha = {alpha}, T = {time})")));
    }
    check_outside_offset(scene, base, alpha, 8)?;
    let base_length = polyline_length(base);
    if time == 0.0 {
        return Ok(PushedPath {
            base_path: base.to_vec(),
            time,
            result: base.to_vec(),
            base_length,
            pushed_length: base_length,
        });
    }
    let head = integrate_flow(scene, &base[0], None, time, StopCondition::TimeExhausted, ctl)?;
    let tail = integrate_flow(scene, base.last().unwrap(), None, time, StopCondition::TimeExhausted, ctl)?;
    let mut result = head.points();
    let fine = densify(base, spacing);
    for p in &fine[1..fine.len() - 1] {
        result.push(flow_point(scene, p, time, ctl)?);
    }
    result.extend(tail.points().into_iter().rev());
    let pushed_length = polyline_length(&result);
    Ok(PushedPath { base_path: base.to_vec(), time, result, base_length, pushed_length })
}

/// `(|Φ(T,x2) - Φ(T,x1)|, |x2 - x1| e^{T/α})`
pub fn flow_expansion_check(
    scene: &SiteScene,
    x1: &[f64],
    x2: &[f64],
    alpha: f64,
    time: f64,
    ctl: StepControl,
) -> Result<(f64, f64)> {
    for (name, x) in [("x1", x1), ("x2", x2)] {
        let r = scene.nearest_sites(x)?.distance;
        if r < alpha {
            return Err(AxisError::Precondition(format!("R_K({name}) = {r} is below alpha = {alpha}")));
        }
    }
    let y1 = flow_point(scene, x1, time, ctl)?;
    let y2 = flow_point(scene, x2, time, ctl)?;
    Ok((dist(&y1, &y2), dist(x1, x2) * (time / alpha).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> SiteScene {
        SiteScene::new(vec![vec![0.0, 0.0]], 10.0).unwrap()
    }

    fn ctl(scene: &SiteScene) -> StepControl {
        StepControl::for_scene(scene)
    }

    #[test]
    fn single_site_moves_radially() {
        let sc = single();
        let tr = integrate_flow(&sc, &[2.0, 0.0], None, 3.0, StopCondition::TimeExhausted, ctl(&sc)).unwrap();
        let end = tr.end();
        assert!((end.y[0] - 5.0).abs() < 1e-9 && end.y[1].abs() < 1e-12, "{:?}", end.y);
        assert!((end.t - 3.0).abs() < 1e-12);
        assert!((end.s - 3.0).abs() < 1e-9);
    }

    #[test]
    fn zero_horizon_is_identity() {
        let sc = SiteScene::two_site();
        let tr = integrate_flow(&sc, &[0.3, 0.4], None, 0.0, StopCondition::TimeExhausted, ctl(&sc)).unwrap();
        assert_eq!(tr.nodes.len(), 1);
        assert_eq!(tr.end().y, vec![0.3, 0.4]);
    }

    #[test]
    fn bisector_start_stays_on_bisector() {
        let sc = SiteScene::two_site();
        let tr = integrate_flow(&sc, &[0.0, 0.5], None, 2.0, StopCondition::TimeExhausted, ctl(&sc)).unwrap();
        for n in &tr.nodes {
            assert!(n.y[0].abs() < 1e-12, "{:?}", n.y);
        }
        // on the bisector y' = y / sqrt(1 + y^2), whose time to go from a to b
        // is G(b) - G(a) with G(y) = sqrt(1 + y^2) + ln(y / (1 + sqrt(1 + y^2)))
        let g = |y: f64| (1.0 + y * y).sqrt() + (y / (1.0 + (1.0 + y * y).sqrt())).ln();
        let (mut lo, mut hi) = (0.5, 5.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if g(mid) - g(0.5) < 2.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let end = tr.end();
        assert!((end.y[1] - lo).abs() < 1e-2, "{} vs {lo}", end.y[1]);
    }

    #[test]
    fn flow_reaches_bisector_then_follows_it() {
        let sc = SiteScene::two_site();
        let tr = integrate_flow(&sc, &[0.5, 0.5], None, 1.0, StopCondition::TimeExhausted, ctl(&sc)).unwrap();
        let end = tr.end();
        assert!(end.y[0].abs() < 1e-9, "{:?}", end.y);
        assert!(end.y[1] > 0.5);
    }

    #[test]
    fn semigroup() {
        let sc = SiteScene::two_site();
        let c = ctl(&sc);
        let x = [0.7, 0.2];
        let once = flow_point(&sc, &x, 1.5, c).unwrap();
        let mid = flow_point(&sc, &x, 0.6, c).unwrap();
        let twice = flow_point(&sc, &mid, 0.9, c).unwrap();
        assert!(dist(&once, &twice) < 1e-6, "{once:?} vs {twice:?}");
    }

    #[test]
    fn curved_wall_face_step_halving_converges() {
        let sc = SiteScene::new(vec![vec![2.0, 0.0]], 10.0).unwrap();
        let x = [-3.0, 1.0];
        let h = 3.0;
        let run = |max_step: f64| {
            let c = StepControl { max_step, grad_refine_tolerance: 1e-9 };
            flow_point(&sc, &x, h, c).unwrap()
        };
        let fine = run(1e-4);
        let e1 = dist(&run(0.02), &fine);
        let e2 = dist(&run(0.01), &fine);
        assert!(e1 > 0.0);
        let ratio = e2 / e1;
        assert!((0.3..=0.7).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn flow_on_wall_ellipse_keeps_invariants() {
        let sc = SiteScene::new(vec![vec![2.0, 0.0]], 10.0).unwrap();
        let tr = integrate_flow(&sc, &[-3.0, 1.0], Some(0.5), 100.0, StopCondition::TimeExhausted, ctl(&sc)).unwrap();
        for w in tr.nodes.windows(2) {
            assert!(w[1].t > w[0].t);
            assert!(w[1].r >= w[0].r, "{} < {}", w[1].r, w[0].r);
            assert!(w[1].f >= w[0].f - 1e-7, "{} < {}", w[1].f, w[0].f);
        }
        // heads for the far end of the ellipse, (-4, 0), where R = 6
        let end = tr.end();
        assert!(dist(&end.y, &[-4.0, 0.0]) < 0.05, "{:?}", end.y);
        assert!(end.r > 6.0 - 1e-3 && end.r <= 6.0 + 1e-12, "{}", end.r);
    }

    #[test]
    fn entered_axis_stop() {
        let sc = SiteScene::two_site();
        let stop = StopCondition::EnteredAxis { lambda: 0.75, alpha: 0.5 };
        let tr = integrate_flow(&sc, &[0.2, 0.3], Some(0.5), 10.0, stop, ctl(&sc)).unwrap();
        assert_eq!(tr.stop_reason, StopReason::EnteredAxis);
        assert!(tr.end().f_alpha.unwrap() >= 0.75);
        assert!(tr.entry_time().unwrap() < 10.0);
    }

    #[test]
    fn wall_face_stops_on_site_tie() {
        // wall-only face down the y axis; the site (1, 2) ties with the wall at y = 10/3
        let sc = SiteScene::new(vec![vec![1.0, 2.0]], 5.0).unwrap();
        let tr = integrate_flow(&sc, &[0.0, 4.5], None, 1.5, StopCondition::TimeExhausted, ctl(&sc)).unwrap();
        let hit = tr.nodes.iter().any(|n| dist(&n.y, &[0.0, 10.0 / 3.0]) < 1e-9);
        assert!(hit, "no node on the tie");
        for n in tr.nodes.iter().take_while(|n| n.y[1] > 10.0 / 3.0 + 1e-9) {
            assert!((n.r - 0.5 - n.s).abs() < 1e-12);
        }
    }

    #[test]
    fn radius_certificate_on_single_site() {
        let sc = single();
        let tr = integrate_flow(&sc, &[2.0, 0.0], Some(0.5), 2.0, StopCondition::TimeExhausted, ctl(&sc)).unwrap();
        let cert = radius_certificate(&tr, 0.5, 1.0).unwrap();
        assert!(cert.min_residual >= -1e-9, "{}", cert.min_residual);
    }

    #[test]
    fn push_path_respects_bound() {
        let sc = SiteScene::two_site();
        let base = vec![vec![-0.3, 1.5], vec![0.4, 1.6]];
        let p = push_path(&sc, &base, 0.5, 0.4, 0.05, ctl(&sc)).unwrap();
        assert!(p.pushed_length <= p.length_bound(0.4));
        assert_eq!(p.result.first().unwrap(), &base[0]);
        assert_eq!(p.result.last().unwrap(), &base[1]);
    }

    #[test]
    fn push_path_rejects_offset_violation() {
        let sc = SiteScene::two_site();
        let base = vec![vec![-0.9, 0.1], vec![0.0, 1.0]];
        assert!(matches!(push_path(&sc, &base, 0.5, 0.4, 0.05, ctl(&sc)), Err(AxisError::Precondition(_))));
    }

    #[test]
    fn trace_ends_at_critical_point() {
        let sc = SiteScene::two_site();
        let (pieces, r_end) = trace_pieces(&sc, &[0.3, 0.2], 100_000, f64::INFINITY).unwrap();
        assert!(!pieces.is_empty());
        assert!((r_end - 5.05).abs() < 1e-6, "{r_end}");
    }

    #[test]
    fn csv_header() {
        let sc = single();
        let tr = integrate_flow(&sc, &[1.0, 0.0], Some(0.5), 0.01, StopCondition::TimeExhausted, ctl(&sc)).unwrap();
        let csv = tr.to_csv();
        assert!(csv.starts_with("t,s,x,y,R,F_alpha,grad_norm\n"));
        assert_eq!(csv.lines().count(), tr.nodes.len() + 1);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn flow_invariants(seed in 0u64..1000, px in -0.95f64..0.95, py in -0.95f64..0.95) {
            let sc = SiteScene::random_planar(6, 5.0, 0.5, seed).unwrap();
            let x = [px * 4.0, py * 4.0];
            prop_assume!(norm(&x) < 4.9);
            prop_assume!(sc.distance(&x) > 0.05);
            let tr = integrate_flow(&sc, &x, Some(0.05), 3.0, StopCondition::TimeExhausted, StepControl::for_scene(&sc)).unwrap();
            for w in tr.nodes.windows(2) {
                prop_assert!(w[1].t > w[0].t);
                prop_assert!(w[1].r >= w[0].r);
                let ds = w[1].s - w[0].s;
                prop_assert!(ds >= 0.0 && ds <= (w[1].t - w[0].t) * (1.0 + 1e-6) + 1e-12);
                if let (Some(a), Some(b)) = (w[0].f_alpha, w[1].f_alpha) {
                    prop_assert!(b >= a - 1e-7, "F^alpha {} -> {}", a, b);
                }
            }
        }
    }
}
