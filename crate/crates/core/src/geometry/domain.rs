use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{BoundaryCurve, CurvePoint, Point, RigidMotion};
use crate::error::{Error, Result};

/// A reference domain `G_0` placed by a rigid motion, `G = M G_0 + z_0`,
/// with trapezoid nodes on `∂G` that are the images of the reference nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TestDomain {
    base: BoundaryCurve,
    motion: RigidMotion,
    curve: BoundaryCurve,
    nodes: Vec<CurvePoint>,
    weights: Vec<f64>,
}

impl TestDomain {
    pub fn new(base: BoundaryCurve, motion: RigidMotion, node_count: usize) -> Result<Self> {
        if node_count < 8 {
            return Err(Error::InvalidArgument(format!(
                "test domain needs at least 8 boundary nodes, got {node_count}"
            )));
        }
        let curve = base.transformed(&motion);
        let h = TAU / node_count as f64;
        let nodes = (0..node_count)
            .map(|i| curve.curve_geometry(i as f64 * h))
            .collect::<Result<Vec<_>>>()?;
        let weights = nodes.iter().map(|n| n.jacobian * h).collect();
        Ok(Self {
            base,
            motion,
            curve,
            nodes,
            weights,
        })
    }

    /// A domain given directly in world coordinates.
    pub fn from_curve(curve: BoundaryCurve, node_count: usize) -> Result<Self> {
        Self::new(curve, RigidMotion::identity(), node_count)
    }

    pub fn base(&self) -> &BoundaryCurve {
        &self.base
    }

    pub fn motion(&self) -> &RigidMotion {
        &self.motion
    }

    /// `∂G` in world coordinates.
    pub fn curve(&self) -> &BoundaryCurve {
        &self.curve
    }

    pub fn nodes(&self) -> &[CurvePoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The same reference domain under a different motion.
    pub fn moved(&self, motion: RigidMotion) -> Result<TestDomain> {
        TestDomain::new(self.base.clone(), motion, self.nodes.len())
    }

    pub fn contains(&self, z: &Point) -> bool {
        self.curve.contains(z)
    }
}

/// Disc-shaped needle domain: radius and the gap between the source point
/// and the disc boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NeedleSpec {
    pub radius: f64,
    pub offset: f64,
    pub nodes: usize,
}

impl Default for NeedleSpec {
    fn default() -> Self {
        Self {
            radius: 0.4,
            offset: 0.05,
            nodes: 64,
        }
    }
}

impl NeedleSpec {
    /// Reference domain `G_0`: the disc centred at `(radius + offset, 0)`, so
    /// the origin lies at distance `offset` outside it.
    pub fn reference(&self) -> Result<BoundaryCurve> {
        if !(self.offset > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "needle offset must be positive, got {}",
                self.offset
            )));
        }
        BoundaryCurve::circle(Point::new(self.radius + self.offset, 0.0), self.radius)
    }
}

/// One needle domain per probe direction `θ_j = 2πj / count`: the reference
/// domain rotated by `θ_j` and translated to `z`.
pub fn make_needle_domains(z: &Point, count: usize, spec: &NeedleSpec) -> Result<Vec<TestDomain>> {
    if count < 1 {
        return Err(Error::InvalidArgument("needs at least one probe direction".into()));
    }
    let base = spec.reference()?;
    (0..count)
        .map(|j| {
            let theta = TAU * j as f64 / count as f64;
            TestDomain::new(base.clone(), RigidMotion::new(theta, *z), spec.nodes)
        })
        .collect()
}
