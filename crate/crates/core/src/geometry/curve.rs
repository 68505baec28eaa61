use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{perp, Containment, Direction, Point, RigidMotion};
use crate::error::{Error, Result};

/// Shape catalogue, in local coordinates centred at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Shape {
    Circle {
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// `scale · (cos t + 0.65 cos 2t - 0.65, 1.5 sin t)`.
    Kite {
        scale: f64,
    },
    /// Superellipse `|x|^4 + |y|^4 = h^4`.
    RoundedSquare {
        half_width: f64,
    },
    /// Convex polygon, vertices counterclockwise.
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
}

impl Shape {
    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            Shape::Circle { radius } => positive("radius", *radius),
            Shape::Ellipse { a, b } => positive("a", *a).and(positive("b", *b)),
            Shape::Kite { scale } => positive("scale", *scale),
            Shape::RoundedSquare { half_width } => positive("half_width", *half_width),
            Shape::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::InvalidArgument("polygon needs 3 vertices".into()));
                }
                let n = vertices.len();
                for i in 0..n {
                    let a = Point::from(vertices[i]);
                    let b = Point::from(vertices[(i + 1) % n]);
                    let c = Point::from(vertices[(i + 2) % n]);
                    let e1 = b - a;
                    let e2 = c - b;
                    if e1.x * e2.y - e1.y * e2.x <= 0.0 {
                        return Err(Error::InvalidArgument(
                            "polygon must be convex and counterclockwise".into(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Point, outward unit normal and speed `|p'(t)|` at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub point: Point,
    pub normal: Point,
    pub jacobian: f64,
}

/// A closed counterclockwise boundary curve `p(t)`, `t ∈ [0, 2π)`: a catalogue
/// shape placed by a rigid motion.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    shape: Shape,
    placement: RigidMotion,
}

const WINDING_SEGMENTS: usize = 512;
const SEARCH_SAMPLES: usize = 2048;

impl BoundaryCurve {
    pub fn new(shape: Shape, placement: RigidMotion) -> Result<Self> {
        shape.validate()?;
        Ok(Self { shape, placement })
    }

    pub fn circle(center: Point, radius: f64) -> Result<Self> {
        Self::new(Shape::Circle { radius }, RigidMotion::translation_only(center))
    }

    pub fn ellipse(center: Point, a: f64, b: f64) -> Result<Self> {
        Self::new(Shape::Ellipse { a, b }, RigidMotion::translation_only(center))
    }

    pub fn kite(center: Point, scale: f64) -> Result<Self> {
        Self::new(Shape::Kite { scale }, RigidMotion::translation_only(center))
    }

    pub fn rounded_square(center: Point, half_width: f64) -> Result<Self> {
        Self::new(
            Shape::RoundedSquare { half_width },
            RigidMotion::translation_only(center),
        )
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(Shape::Polygon { vertices }, RigidMotion::identity())
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn placement(&self) -> &RigidMotion {
        &self.placement
    }

    /// The same curve moved by `motion` (applied after the current placement).
    pub fn transformed(&self, motion: &RigidMotion) -> BoundaryCurve {
        BoundaryCurve {
            shape: self.shape.clone(),
            placement: motion.compose(&self.placement),
        }
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self.shape, Shape::Polygon { .. })
    }

    pub fn center(&self) -> Point {
        self.placement.translation()
    }

    fn polygon_vertices(&self) -> Option<Vec<Point>> {
        match &self.shape {
            Shape::Polygon { vertices } => Some(
                vertices
                    .iter()
                    .map(|v| self.placement.apply(&Point::from(*v)))
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Local `(p, p', p'')`; polygons are traversed at uniform speed per edge.
    fn local_derivatives(&self, t: f64) -> (Point, Point, Point) {
        let (s, c) = t.sin_cos();
        match &self.shape {
            Shape::Circle { radius: r } => (
                Point::new(r * c, r * s),
                Point::new(-r * s, r * c),
                Point::new(-r * c, -r * s),
            ),
            Shape::Ellipse { a, b } => (
                Point::new(a * c, b * s),
                Point::new(-a * s, b * c),
                Point::new(-a * c, -b * s),
            ),
            Shape::Kite { scale } => {
                let (s2, c2) = (2.0 * t).sin_cos();
                (
                    *scale * Point::new(c + 0.65 * c2 - 0.65, 1.5 * s),
                    *scale * Point::new(-s - 1.3 * s2, 1.5 * c),
                    *scale * Point::new(-c - 2.6 * c2, -1.5 * s),
                )
            }
            Shape::RoundedSquare { half_width: h } => {
                let (s4, c4) = (4.0 * t).sin_cos();
                let q = 0.25 * (3.0 + c4);
                let dq = -s4;
                let ddq = -4.0 * c4;
                let r = h * q.powf(-0.25);
                let dr = -0.25 * h * q.powf(-1.25) * dq;
                let ddr = 0.3125 * h * q.powf(-2.25) * dq * dq - 0.25 * h * q.powf(-1.25) * ddq;
                let e = Point::new(c, s);
                let ep = Point::new(-s, c);
                (r * e, dr * e + r * ep, ddr * e + 2.0 * dr * ep - r * e)
            }
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let u = t.rem_euclid(TAU) / TAU * n as f64;
                let i = (u as usize).min(n - 1);
                let f = u - i as f64;
                let a = Point::from(vertices[i]);
                let b = Point::from(vertices[(i + 1) % n]);
                (a + f * (b - a), (b - a) * (n as f64 / TAU), Point::zeros())
            }
        }
    }

    /// `(p(t), p'(t), p''(t))` in world coordinates.
    pub fn derivatives(&self, t: f64) -> (Point, Point, Point) {
        let (p, d1, d2) = self.local_derivatives(t);
        (
            self.placement.apply(&p),
            self.placement.rotate(&d1),
            self.placement.rotate(&d2),
        )
    }

    pub fn point(&self, t: f64) -> Point {
        self.derivatives(t).0
    }

    /// Point, outward normal and jacobian; rejected for polygons.
    pub fn curve_geometry(&self, t: f64) -> Result<CurvePoint> {
        if !self.is_smooth() {
            return Err(Error::InvalidArgument(
                "polygon boundaries have no smooth normal".into(),
            ));
        }
        let (p, d1, _) = self.derivatives(t);
        let jacobian = d1.norm();
        Ok(CurvePoint {
            point: p,
            normal: perp(&d1) / jacobian,
            jacobian,
        })
    }

    /// `½ ∮ (x dy - y dx)`, positive for counterclockwise curves.
    pub fn signed_area(&self) -> f64 {
        if let Some(v) = self.polygon_vertices() {
            let n = v.len();
            return 0.5
                * (0..n)
                    .map(|i| {
                        let a = v[i];
                        let b = v[(i + 1) % n];
                        a.x * b.y - a.y * b.x
                    })
                    .sum::<f64>();
        }
        let m = 1024;
        let h = TAU / m as f64;
        0.5 * h
            * (0..m)
                .map(|i| {
                    let (p, d, _) = self.derivatives(i as f64 * h);
                    p.x * d.y - p.y * d.x
                })
                .sum::<f64>()
    }

    pub fn polyline(&self, segments: usize) -> Vec<Point> {
        if let Some(v) = self.polygon_vertices() {
            return v;
        }
        (0..segments)
            .map(|i| self.point(i as f64 * TAU / segments as f64))
            .collect()
    }

    /// Winding number of the discretised curve around `z`.
    pub fn winding_number(&self, z: &Point) -> i32 {
        let poly = self.polyline(WINDING_SEGMENTS);
        let n = poly.len();
        let mut total = 0.0;
        for i in 0..n {
            let a = poly[i] - z;
            let b = poly[(i + 1) % n] - z;
            total += (a.x * b.y - a.y * b.x).atan2(a.dot(&b));
        }
        (total / TAU).round() as i32
    }

    pub fn contains(&self, z: &Point) -> bool {
        self.winding_number(z) != 0
    }

    /// Winding-number containment with a `1e-9` boundary band.
    pub fn classify(&self, z: &Point) -> Containment {
        if self.nearest(z).1 < 1e-9 {
            Containment::Boundary
        } else if self.contains(z) {
            Containment::Inside
        } else {
            Containment::Outside
        }
    }

    /// Parameter of the nearest boundary point and the distance to it.
    fn nearest(&self, z: &Point) -> (f64, f64) {
        if let Some(v) = self.polygon_vertices() {
            let n = v.len();
            let mut best = (0.0, f64::INFINITY);
            for i in 0..n {
                let a = v[i];
                let e = v[(i + 1) % n] - a;
                let f = ((z - a).dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
                let d = (a + f * e - z).norm();
                if d < best.1 {
                    best = ((i as f64 + f) * TAU / n as f64, d);
                }
            }
            return best;
        }
        let dist2 = |t: f64| (self.point(t) - z).norm_squared();
        let (t, d2) = refine_extremum(dist2, SEARCH_SAMPLES, false);
        (t, d2.max(0.0).sqrt())
    }

    /// Signed distance to the boundary: negative inside, positive outside.
    pub fn distance_to_boundary(&self, z: &Point) -> f64 {
        let (t, d) = self.nearest(z);
        let inside = if self.is_smooth() {
            let (p, d1, _) = self.derivatives(t);
            if d > 1e-3 {
                self.contains(z)
            } else {
                (z - p).dot(&perp(&d1)) < 0.0
            }
        } else {
            self.contains(z)
        };
        if inside {
            -d
        } else {
            d
        }
    }

    /// `h(ω) = sup_{x ∈ D} x·ω`.
    pub fn support_function(&self, omega: &Direction) -> f64 {
        let w = omega.vector();
        if let Some(v) = self.polygon_vertices() {
            return v.iter().map(|p| p.dot(&w)).fold(f64::NEG_INFINITY, f64::max);
        }
        refine_extremum(|t| self.point(t).dot(&w), SEARCH_SAMPLES, true).1
    }

    /// Largest distance from `center` to the boundary.
    pub fn circumradius(&self, center: &Point) -> f64 {
        if let Some(v) = self.polygon_vertices() {
            return v.iter().map(|p| (p - center).norm()).fold(0.0, f64::max);
        }
        refine_extremum(|t| (self.point(t) - center).norm(), SEARCH_SAMPLES, true).1
    }

    /// Axis-aligned bounding box `[x_min, x_max, y_min, y_max]`.
    pub fn bounding_box(&self) -> [f64; 4] {
        let h = |a: f64| self.support_function(&Direction::from_angle(a));
        use std::f64::consts::{FRAC_PI_2, PI};
        [-h(PI), h(0.0), -h(3.0 * FRAC_PI_2), h(FRAC_PI_2)]
    }
}

/// Global extremum of a smooth periodic function: dense sampling followed
/// by golden-section refinement around the best few samples.
fn refine_extremum<F: Fn(f64) -> f64>(f: F, samples: usize, maximize: bool) -> (f64, f64) {
    let sign = if maximize { -1.0 } else { 1.0 };
    let g = |t: f64| sign * f(t);
    let h = TAU / samples as f64;
    let values: Vec<f64> = (0..samples).map(|i| g(i as f64 * h)).collect();
    let mut order: Vec<usize> = (0..samples).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut best = (0.0, f64::INFINITY);
    for &i in order.iter().take(3) {
        let (t, v) = golden_section(&g, (i as f64 - 1.0) * h, (i as f64 + 1.0) * h);
        if v < best.1 {
            best = (t, v);
        }
    }
    (best.0.rem_euclid(TAU), sign * best.1)
}

fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..90 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-15 {
            break;
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

/// One or more disjoint boundary components.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    components: Vec<BoundaryCurve>,
}

impl Obstacle {
    pub fn new(components: Vec<BoundaryCurve>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("obstacle has no components".into()));
        }
        Ok(Self { components })
    }

    pub fn single(curve: BoundaryCurve) -> Self {
        Self {
            components: vec![curve],
        }
    }

    pub fn components(&self) -> &[BoundaryCurve] {
        &self.components
    }

    pub fn contains(&self, z: &Point) -> bool {
        self.components.iter().any(|c| c.contains(z))
    }

    pub fn classify(&self, z: &Point) -> Containment {
        let mut result = Containment::Outside;
        for c in &self.components {
            match c.classify(z) {
                Containment::Boundary => return Containment::Boundary,
                Containment::Inside => result = Containment::Inside,
                Containment::Outside => {}
            }
        }
        result
    }

    /// Signed distance to the union of the components.
    pub fn distance_to_boundary(&self, z: &Point) -> f64 {
        let d: Vec<f64> = self.components.iter().map(|c| c.distance_to_boundary(z)).collect();
        if let Some(inside) = d.iter().copied().find(|v| *v < 0.0) {
            inside
        } else {
            d.into_iter().fold(f64::INFINITY, f64::min)
        }
    }

    pub fn support_function(&self, omega: &Direction) -> f64 {
        self.components
            .iter()
            .map(|c| c.support_function(omega))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn transformed(&self, motion: &RigidMotion) -> Obstacle {
        Obstacle {
            components: self.components.iter().map(|c| c.transformed(motion)).collect(),
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.components.iter().all(BoundaryCurve::is_smooth)
    }
}
