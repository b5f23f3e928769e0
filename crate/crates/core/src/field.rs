//! Pointwise evaluation of the distance-function calculus: `R_K`, the
//! closest-point set `Θ_K`, `F_K`, the generalized gradient and `F_K^α`.

use serde::Serialize;

use crate::error::{AxisError, Result};
use crate::geom::{norm, Point};
use crate::scene::{SiteScene, Witness, WitnessKind};
use crate::seb::smallest_enclosing_ball;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub point: Point,
    /// `R_K(x)`
    pub r: f64,
    /// `Θ_K(x)` within the tie band
    pub theta: Vec<Witness>,
    /// center of the smallest ball enclosing `theta`
    pub center: Point,
    /// `F_K(x)`, the radius of that ball
    pub f: f64,
    /// `∇_K(x) = (x - center) / R_K(x)`
    pub grad: Point,
    pub f_alpha: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldSummary {
    pub r: f64,
    pub f: f64,
    pub grad: Point,
    pub grad_norm: f64,
    pub f_alpha: Option<f64>,
}

impl FieldSample {
    pub fn grad_norm(&self) -> f64 {
        norm(&self.grad)
    }

    pub fn has_wall(&self) -> bool {
        self.theta.iter().any(|w| w.kind == WitnessKind::Wall)
    }

    pub fn kinds(&self) -> Vec<WitnessKind> {
        self.theta.iter().map(|w| w.kind).collect()
    }

    pub fn summary(&self) -> FieldSummary {
        FieldSummary {
            r: self.r,
            f: self.f,
            grad: self.grad.clone(),
            grad_norm: self.grad_norm(),
            f_alpha: self.f_alpha,
        }
    }
}

/// `F_K^α = (R - α) / R · F`, defined for `R > α`.
pub fn f_alpha(r: f64, f: f64, alpha: f64) -> f64 {
    (r - alpha) / r * f
}

pub fn eval_field(scene: &SiteScene, x: &[f64], alpha: Option<f64>) -> Result<FieldSample> {
    let near = scene.nearest_sites(x)?;
    let r = near.distance;
    if let Some(a) = alpha {
        if !(a >= 0.0) {
            return Err(AxisError::InvalidInput(format!("alpha must be >= 0, got {a}")));
        }
        if r <= a {
            return Err(AxisError::OutsideOffsetComplement { r, alpha: a });
        }
    }
    let ball = smallest_enclosing_ball(&near.points())?;
    let grad: Point = x.iter().zip(&ball.center).map(|(xi, ci)| (xi - ci) / r).collect();
    let f = ball.radius;
    Ok(FieldSample {
        point: x.to_vec(),
        r,
        theta: near.witnesses,
        center: ball.center,
        f,
        grad,
        f_alpha: alpha.map(|a| f_alpha(r, f, a)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::dist;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn bisector_closed_form() {
        let s = SiteScene::two_site();
        let e = eval_field(&s, &[0.0, 2.0], Some(0.5)).unwrap();
        let r5 = 5f64.sqrt();
        assert!((e.r - r5).abs() < 1e-15);
        assert!((e.f - 1.0).abs() < 1e-15);
        assert!(e.grad[0].abs() < 1e-15);
        assert!((e.grad[1] - 2.0 / r5).abs() < 1e-15);
        assert!((e.f_alpha.unwrap() - (r5 - 0.5) / r5).abs() < 1e-15);
        assert!((e.f_alpha.unwrap() - 0.7763932).abs() < 1e-7);
    }

    #[test]
    fn single_site_regular_and_critical() {
        let s = SiteScene::new(vec![vec![0.0, 0.0]], 10.0).unwrap();
        let e = eval_field(&s, &[2.0, 0.0], None).unwrap();
        assert_eq!((e.r, e.f), (2.0, 0.0));
        assert_eq!(e.grad, vec![1.0, 0.0]);
        assert_eq!(e.theta.len(), 1);
        let e = eval_field(&s, &[5.0, 0.0], None).unwrap();
        assert_eq!((e.r, e.f), (5.0, 5.0));
        assert_eq!(e.grad, vec![0.0, 0.0]);
        assert_eq!(e.theta.len(), 2);
    }

    #[test]
    fn alpha_domain_error() {
        let s = SiteScene::two_site();
        assert!(matches!(eval_field(&s, &[0.5, 0.0], Some(0.5)), Err(AxisError::OutsideOffsetComplement { .. })));
        assert!(matches!(eval_field(&s, &[0.0, 11.0], None), Err(AxisError::Domain { .. })));
    }

    #[test]
    fn pythagoras_identity_on_random_and_tied_points() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for seed in 0..10 {
            let s = SiteScene::random_planar(12, 5.0, 0.05, seed).unwrap();
            for _ in 0..300 {
                let x = [rng.gen_range(-4.9..4.9), rng.gen_range(-4.9..4.9)];
                if norm(&x) >= 4.99 {
                    continue;
                }
                let e = eval_field(&s, &x, None).unwrap();
                let lhs = e.grad_norm().powi(2);
                assert!((lhs - (1.0 - (e.f / e.r).powi(2))).abs() < 1e-9);
                // F = 0 iff a single witness iff unit gradient
                assert_eq!(e.theta.len() == 1, e.f == 0.0);
                if e.f == 0.0 {
                    assert!((e.grad_norm() - 1.0).abs() < 1e-9);
                }
            }
            // a point on the bisector of two sites, nearest to both
            let (p, q) = (&s.sites[0], &s.sites[1]);
            let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
            let e = eval_field(&s, &m, None).unwrap();
            if e.theta.len() == 2 {
                assert!((e.f - 0.5 * dist(p, q)).abs() < 1e-12);
                assert!(e.grad_norm() < 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn r_is_one_lipschitz(seed in 0u64..50, a in (-3.0f64..3.0, -3.0f64..3.0), b in (-3.0f64..3.0, -3.0f64..3.0)) {
            let s = SiteScene::random_planar(8, 5.0, 0.05, seed).unwrap();
            let (x, y) = ([a.0, a.1], [b.0, b.1]);
            prop_assert!((s.distance(&x) - s.distance(&y)).abs() <= dist(&x, &y) * (1.0 + 1e-15) + 1e-15);
        }

        #[test]
        fn f_alpha_decreases_in_alpha(r in 0.5f64..5.0, f in 0.0f64..5.0, a1 in 0.0f64..0.49, da in 0.0f64..0.49) {
            let f = f.min(r);
            let a2 = (a1 + da).min(0.49);
            prop_assert!(f_alpha(r, f, a1) >= f_alpha(r, f, a2));
        }

        #[test]
        fn perturbed_sites_move_r_by_at_most_eps(seed in 0u64..50, eps in 1e-6f64..1e-1, x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let s = SiteScene::random_planar(8, 5.0, 0.5, seed).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed + 1000);
            let moved: Vec<Vec<f64>> = s.sites.iter().map(|p| {
                let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let rad: f64 = eps * rng.gen::<f64>();
                vec![p[0] + rad * th.cos(), p[1] + rad * th.sin()]
            }).collect();
            let t = SiteScene::new(moved, 5.0).unwrap();
            prop_assert!((s.distance(&[x, y]) - t.distance(&[x, y])).abs() <= eps * (1.0 + 1e-12));
        }
    }
}
