//! The input set `K`: the complement of an open ball together with finitely
//! many point sites inside it.

use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AxisError, Result};
use crate::geom::{dist, norm, Point};

pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-9;

fn default_tie() -> f64 {
    DEFAULT_TIE_TOLERANCE
}

/// `K = {x : |x| >= bounding_radius} ∪ sites`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteScene {
    pub sites: Vec<Point>,
    pub bounding_radius: f64,
    #[serde(default = "default_tie")]
    pub tie_tolerance: f64,
}

/// Which part of `K` realizes a closest point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum WitnessKind {
    Site(usize),
    Wall,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub kind: WitnessKind,
    pub point: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nearest {
    pub distance: f64,
    pub witnesses: Vec<Witness>,
}

impl Nearest {
    pub fn has_wall(&self) -> bool {
        self.witnesses.iter().any(|w| w.kind == WitnessKind::Wall)
    }

    pub fn kinds(&self) -> Vec<WitnessKind> {
        self.witnesses.iter().map(|w| w.kind).collect()
    }

    pub fn points(&self) -> Vec<Point> {
        self.witnesses.iter().map(|w| w.point.clone()).collect()
    }
}

impl SiteScene {
    pub fn new(sites: Vec<Point>, bounding_radius: f64) -> Result<Self> {
        Self::with_tolerance(sites, bounding_radius, DEFAULT_TIE_TOLERANCE)
    }

    pub fn with_tolerance(sites: Vec<Point>, bounding_radius: f64, tie_tolerance: f64) -> Result<Self> {
        let s = SiteScene { sites, bounding_radius, tie_tolerance };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(AxisError::InvalidInput(m));
        if !(self.bounding_radius.is_finite() && self.bounding_radius > 0.0) {
            return bad(format!("bounding_radius must be positive, got {}", self.bounding_radius));
        }
        if !(self.tie_tolerance.is_finite() && self.tie_tolerance >= 0.0 && self.tie_tolerance < 1e-2) {
            return bad(format!("tie_tolerance out of range: {}", self.tie_tolerance));
        }
        let Some(first) = self.sites.first() else {
            return bad("a scene needs at least one site".into());
        };
        let d = first.len();
        if d < 2 {
            return bad("sites must have dimension >= 2".into());
        }
        for (i, s) in self.sites.iter().enumerate() {
            if s.len() != d || s.iter().any(|c| !c.is_finite()) {
                return bad(format!("site {i} is malformed"));
            }
            if norm(s) >= self.bounding_radius {
                return bad(format!("site {i} is not strictly inside the bounding ball"));
            }
        }
        let sep = 10.0 * self.tie_tolerance * self.bounding_radius;
        for i in 0..self.sites.len() {
            for j in i + 1..self.sites.len() {
                if dist(&self.sites[i], &self.sites[j]) <= sep {
                    return bad(format!("sites {i} and {j} are closer than {sep}"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.sites[0].len()
    }

    /// True iff `x` lies in the open complement of `K` (sites excluded).
    pub fn in_complement(&self, x: &[f64]) -> bool {
        norm(x) < self.bounding_radius && self.sites.iter().all(|s| s.as_slice() != x)
    }

    /// Closest point of the wall `|y| = R` to an interior `x`.
    pub fn wall_point(&self, x: &[f64]) -> Point {
        let n = norm(x);
        if n == 0.0 {
            let mut p = vec![0.0; x.len()];
            p[0] = self.bounding_radius;
            p
        } else {
            x.iter().map(|c| c * self.bounding_radius / n).collect()
        }
    }

    /// `R_K(x)` only, without collecting witnesses.
    pub fn distance(&self, x: &[f64]) -> f64 {
        let wall = self.bounding_radius - norm(x);
        self.sites.iter().map(|s| dist(s, x)).fold(wall, f64::min)
    }

    /// Distance to `K` and every closest point within the relative tie band.
    pub fn nearest_sites(&self, x: &[f64]) -> Result<Nearest> {
        if x.len() != self.dim() {
            return Err(AxisError::InvalidInput(format!("query has dimension {}, scene has {}", x.len(), self.dim())));
        }
        let wall = self.bounding_radius - norm(x);
        if !(wall > 0.0) {
            return Err(AxisError::Domain { point: x.to_vec(), wall_gap: wall });
        }
        let ds: Vec<f64> = self.sites.iter().map(|s| dist(s, x)).collect();
        let min = ds.iter().copied().fold(wall, f64::min);
        if min == 0.0 {
            return Err(AxisError::Domain { point: x.to_vec(), wall_gap: wall });
        }
        let cut = (1.0 + self.tie_tolerance) * min;
        let mut witnesses: Vec<Witness> = ds
            .iter()
            .enumerate()
            .filter(|(_, &d)| d <= cut)
            .map(|(i, _)| Witness { kind: WitnessKind::Site(i), point: self.sites[i].clone() })
            .collect();
        if wall <= cut {
            witnesses.push(Witness { kind: WitnessKind::Wall, point: self.wall_point(x) });
        }
        Ok(Nearest { distance: min, witnesses })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let scene: SiteScene = serde_json::from_str(s)?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn to_json_string(&self) -> String {
        // serde_json prints the shortest decimal that round-trips each f64
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    /// Sites `(±1, 0)` in the ball of radius 10.
    pub fn two_site() -> Self {
        SiteScene::new(vec![vec![1.0, 0.0], vec![-1.0, 0.0]], 10.0).expect("valid")
    }

    /// `n` sites drawn uniformly in the disk of radius `0.8 R`, pairwise at
    /// least `min_sep` apart.
    pub fn random_planar(n: usize, bounding_radius: f64, min_sep: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sites: Vec<Point> = Vec::with_capacity(n);
        let r = 0.8 * bounding_radius;
        let mut attempts = 0usize;
        while sites.len() < n {
            attempts += 1;
            if attempts > 100_000 {
                return Err(AxisError::InvalidInput("could not place random sites".into()));
            }
            let p = vec![rng.gen_range(-r..r), rng.gen_range(-r..r)];
            if norm(&p) < r && sites.iter().all(|s| dist(s, &p) >= min_sep) {
                sites.push(p);
            }
        }
        SiteScene::new(sites, bounding_radius)
    }

    /// `pairs` close pairs of sites: centers uniform in the disk of radius
    /// `0.7 R` and at least `0.4 R` apart, each pair at half-distance drawn
    /// from `[0.02 R, 0.04 R]` with a random orientation.
    pub fn random_pairs(pairs: usize, bounding_radius: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = 0.7 * bounding_radius;
        let mut centers: Vec<Point> = Vec::with_capacity(pairs);
        let mut sites = Vec::with_capacity(2 * pairs);
        let mut attempts = 0usize;
        while centers.len() < pairs {
            attempts += 1;
            if attempts > 100_000 {
                return Err(AxisError::InvalidInput("could not place random pairs".into()));
            }
            let c = vec![rng.gen_range(-r..r), rng.gen_range(-r..r)];
            if norm(&c) > r || centers.iter().any(|d| dist(d, &c) < 0.4 * bounding_radius) {
                continue;
            }
            let h = bounding_radius * rng.gen_range(0.02..0.04);
            let th: f64 = rng.gen_range(0.0..std::f64::consts::PI);
            let (dx, dy) = (h * th.cos(), h * th.sin());
            sites.push(vec![c[0] + dx, c[1] + dy]);
            sites.push(vec![c[0] - dx, c[1] - dy]);
            centers.push(c);
        }
        SiteScene::new(sites, bounding_radius)
    }

    /// Boundary of the square `[-side/2, side/2]^2 × {0}` in space, sampled
    /// with `per_side` points on each edge at cell midpoints.
    pub fn square_3d(side: f64, per_side: usize, bounding_radius: f64) -> Result<Self> {
        let h = side / 2.0;
        let mut sites = Vec::with_capacity(4 * per_side);
        for k in 0..per_side {
            let u = -h + side * (k as f64 + 0.5) / per_side as f64;
            sites.push(vec![u, -h, 0.0]);
            sites.push(vec![h, u, 0.0]);
            sites.push(vec![-u, h, 0.0]);
            sites.push(vec![-h, -u, 0.0]);
        }
        SiteScene::new(sites, bounding_radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_site_midpoint_tie() {
        let s = SiteScene::two_site();
        let n = s.nearest_sites(&[0.0, 0.0]).unwrap();
        assert_eq!(n.distance, 1.0);
        assert_eq!(n.kinds(), vec![WitnessKind::Site(0), WitnessKind::Site(1)]);
        let n = s.nearest_sites(&[0.0, 2.0]).unwrap();
        assert!((n.distance - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(n.witnesses.len(), 2);
    }

    #[test]
    fn site_wall_tie() {
        let s = SiteScene::new(vec![vec![0.0, 0.0]], 10.0).unwrap();
        let n = s.nearest_sites(&[5.0, 0.0]).unwrap();
        assert_eq!(n.distance, 5.0);
        assert_eq!(n.points(), vec![vec![0.0, 0.0], vec![10.0, 0.0]]);
    }

    #[test]
    fn wall_witness_at_origin_uses_first_axis() {
        let s = SiteScene::new(vec![vec![4.0, 0.0]], 8.0).unwrap();
        assert_eq!(s.wall_point(&[0.0, 0.0]), vec![8.0, 0.0]);
    }

    #[test]
    fn domain_and_validation_errors() {
        let s = SiteScene::two_site();
        assert!(matches!(s.nearest_sites(&[10.0, 0.0]), Err(AxisError::Domain { .. })));
        assert!(matches!(s.nearest_sites(&[1.0, 0.0]), Err(AxisError::Domain { .. })));
        assert!(SiteScene::new(vec![vec![11.0, 0.0]], 10.0).is_err());
        assert!(SiteScene::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]], 10.0).is_err());
        assert!(SiteScene::new(vec![], 10.0).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let s = SiteScene::random_planar(7, 3.0, 0.1, 11).unwrap();
        let back = SiteScene::from_json_str(&s.to_json_string()).unwrap();
        assert_eq!(s, back);
        let t = SiteScene::from_json_str(r#"{"sites": [[0.5, 0.25]], "bounding_radius": 2}"#).unwrap();
        assert_eq!(t.tie_tolerance, DEFAULT_TIE_TOLERANCE);
    }

    #[test]
    fn symmetric_scene_has_symmetric_witnesses() {
        let s = SiteScene::new(vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]], 10.0).unwrap();
        let n = s.nearest_sites(&[0.0, 0.0]).unwrap();
        assert_eq!(n.witnesses.len(), 4);
        let n = s.nearest_sites(&[3.0, 3.0]).unwrap();
        assert_eq!(n.kinds(), vec![WitnessKind::Site(0), WitnessKind::Site(2)]);
    }

    proptest! {
        #[test]
        fn distance_matches_brute_force(seed in 0u64..200, x in -6.0f64..6.0, y in -6.0f64..6.0) {
            let s = SiteScene::random_planar(9, 10.0, 0.05, seed).unwrap();
            let q = [x, y];
            let n = s.nearest_sites(&q).unwrap();
            let brute = s.sites.iter().map(|p| ((p[0]-x).powi(2) + (p[1]-y).powi(2)).sqrt())
                .fold(10.0 - (x*x + y*y).sqrt(), f64::min);
            prop_assert_eq!(n.distance, brute);
            prop_assert!(!n.witnesses.is_empty());
        }
    }
}
