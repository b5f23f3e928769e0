//! Filtered medial axes of point sites in a ball.
//!
//! The set `K` is the complement of an open ball together with finitely many
//! sites. This crate evaluates the distance function to `K` and its
//! generalized gradient, integrates the gradient flow, extracts the
//! `(λ, α)`-medial axis of planar scenes from the Voronoi skeleton and
//! measures how that axis moves when `λ`, `α` or the sites change.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod axis;
pub mod critical;
pub mod error;
pub mod experiments;
pub mod field;
pub mod flow;
pub mod geom;
pub mod metric;
pub mod scene;
pub mod seb;
pub mod svg;

pub use error::{AxisError, Result};
pub use field::{eval_field, FieldSample};
pub use scene::SiteScene;
pub use seb::{smallest_enclosing_ball, Ball};
