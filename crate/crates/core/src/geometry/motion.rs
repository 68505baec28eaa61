use nalgebra::Matrix2;

use super::Point;

/// `x ↦ M x + z_0` with `M` a proper rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion {
    rotation: Matrix2<f64>,
    angle: f64,
    translation: Point,
}

impl Default for RigidMotion {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidMotion {
    pub fn identity() -> Self {
        Self::new(0.0, Point::zeros())
    }

    /// Rotation by `angle` (counterclockwise) followed by translation.
    pub fn new(angle: f64, translation: Point) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            rotation: Matrix2::new(c, -s, s, c),
            angle,
            translation,
        }
    }

    pub fn translation_only(t: Point) -> Self {
        Self::new(0.0, t)
    }

    pub fn rotation(&self) -> &Matrix2<f64> {
        &self.rotation
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn translation(&self) -> Point {
        self.translation
    }

    #[inline]
    pub fn apply(&self, x: &Point) -> Point {
        self.rotation * x + self.translation
    }

    /// Rotation part only, for tangents and normals.
    #[inline]
    pub fn rotate(&self, v: &Point) -> Point {
        self.rotation * v
    }

    /// `M^T v`.
    #[inline]
    pub fn rotate_back(&self, v: &Point) -> Point {
        self.rotation.transpose() * v
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &RigidMotion) -> RigidMotion {
        RigidMotion::new(self.angle + other.angle, self.apply(&other.translation))
    }

    pub fn inverse(&self) -> RigidMotion {
        RigidMotion::new(-self.angle, -(self.rotate_back(&self.translation)))
    }
}

pub fn apply_rigid_motion(m: &RigidMotion, x: &Point) -> Point {
    m.apply(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn identity_and_quarter_turn() {
        let x = Point::new(0.3, -1.2);
        assert_eq!(apply_rigid_motion(&RigidMotion::identity(), &x), x);
        let m = RigidMotion::new(FRAC_PI_2, Point::zeros());
        let y = m.apply(&Point::new(1.0, 0.0));
        assert!((y - Point::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn orthogonality() {
        for a in [0.1, 1.0, 2.7, -4.0] {
            let m = RigidMotion::new(a, Point::new(1.0, 2.0));
            let r = m.rotation().transpose() * m.rotation() - Matrix2::identity();
            assert!(r.norm() <= 1e-14);
            assert!((m.rotation().determinant() - 1.0).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn preserves_distances(
            a in -7.0f64..7.0, tx in -5.0f64..5.0, ty in -5.0f64..5.0,
            px in -3.0f64..3.0, py in -3.0f64..3.0, qx in -3.0f64..3.0, qy in -3.0f64..3.0,
        ) {
            let m = RigidMotion::new(a, Point::new(tx, ty));
            let p = Point::new(px, py);
            let q = Point::new(qx, qy);
            let d0 = (p - q).norm();
            let d1 = (m.apply(&p) - m.apply(&q)).norm();
            prop_assert!((d0 - d1).abs() <= 1e-13 * (1.0 + d0));
            let back = m.inverse().apply(&m.apply(&p));
            prop_assert!((back - p).norm() <= 1e-13);
        }
    }
}
