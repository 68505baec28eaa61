//! Boundary curves, direction sets, sampling grids, rigid motions and the
//! test/approximation domains used by the probing methods.

mod curve;
mod directions;
mod domain;
mod grid;
mod motion;

pub use curve::{BoundaryCurve, CurvePoint, Obstacle, Shape};
pub use directions::{make_direction_set, Aperture, Direction, DirectionSet};
pub use domain::{make_needle_domains, NeedleSpec, TestDomain};
pub use grid::SamplingGrid;
pub use motion::{apply_rigid_motion, RigidMotion};

pub type Point = nalgebra::Vector2<f64>;

/// Quarter turn `(x, y) ↦ (y, -x)`.
#[inline]
pub fn perp(v: &Point) -> Point {
    Point::new(v.y, -v.x)
}

/// Containment classification with a tolerance band around the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Inside,
    Outside,
    Boundary,
}
