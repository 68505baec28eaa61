use nalgebra::{DMatrix, DVector, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{DirectionSet, Point, RigidMotion, TestDomain};
use crate::specialfun::{fundamental_solution, WaveContext};

/// A density `g` on a direction set; `v_g(x) = Σ_j w_j e^{ik x·d_j} g(d_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HerglotzDensity {
    directions: DirectionSet,
    values: DVector<Complex64>,
}

impl HerglotzDensity {
    pub fn new(directions: DirectionSet, values: DVector<Complex64>) -> Self {
        assert_eq!(directions.len(), values.len(), "density length mismatch");
        Self { directions, values }
    }

    pub fn zero(directions: DirectionSet) -> Self {
        let n = directions.len();
        Self::new(directions, DVector::zeros(n))
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.directions
    }

    pub fn values(&self) -> &DVector<Complex64> {
        &self.values
    }

    /// `L²` norm with the quadrature weights.
    pub fn norm(&self) -> f64 {
        self.values
            .iter()
            .zip(self.directions.weights())
            .map(|(g, w)| w * g.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, c: Complex64) -> HerglotzDensity {
        Self::new(self.directions.clone(), &self.values * c)
    }

    pub fn evaluate(&self, x: &Point, ctx: &WaveContext) -> Complex64 {
        let k = ctx.k();
        self.directions
            .nodes()
            .iter()
            .zip(self.directions.weights())
            .zip(self.values.iter())
            .map(|((d, w), g)| g * Complex64::from_polar(*w, k * d.vector().dot(x)))
            .sum()
    }

    pub fn evaluate_with_gradient(&self, x: &Point, ctx: &WaveContext) -> (Complex64, Vector2<Complex64>) {
        let k = ctx.k();
        let mut v = Complex64::default();
        let mut grad = Vector2::<Complex64>::zeros();
        for ((d, w), g) in self
            .directions
            .nodes()
            .iter()
            .zip(self.directions.weights())
            .zip(self.values.iter())
        {
            let dv = d.vector();
            let term = g * Complex64::from_polar(*w, k * dv.dot(x));
            v += term;
            let ik = Complex64::new(0.0, k);
            grad.x += ik * dv.x * term;
            grad.y += ik * dv.y * term;
        }
        (v, grad)
    }
}

pub fn herglotz_evaluate(g: &HerglotzDensity, points: &[Point], ctx: &WaveContext) -> Vec<Complex64> {
    points.iter().map(|x| g.evaluate(x, ctx)).collect()
}

pub fn herglotz_evaluate_with_gradient(
    g: &HerglotzDensity,
    points: &[Point],
    ctx: &WaveContext,
) -> Vec<(Complex64, Vector2<Complex64>)> {
    points.iter().map(|x| g.evaluate_with_gradient(x, ctx)).collect()
}

/// `f = v_g` on the nodes of an outer curve.
pub fn runge_boundary_function(g: &HerglotzDensity, boundary: &[Point], ctx: &WaveContext) -> Vec<Complex64> {
    herglotz_evaluate(g, boundary, ctx)
}

/// Regularised solution of the point-source equation `H g = Φ(·, z)` on `∂G`
/// with its achieved `L²(∂G)` misfit.
#[derive(Debug, Clone)]
pub struct PointSourceDensity {
    pub density: HerglotzDensity,
    pub misfit: f64,
    pub alpha: f64,
}

/// The point-source equation `H g = Φ(·, z)` on a fixed test domain, with the
/// SVD of `H` (in orthonormal coordinates) computed once and reused for
/// every source point.
#[derive(Debug, Clone)]
pub struct PointSourceSolver {
    domain: TestDomain,
    directions: DirectionSet,
    ctx: WaveContext,
    sqrt_s: Vec<f64>,
    sqrt_w: Vec<f64>,
    sigma: Vec<f64>,
    u: DMatrix<Complex64>,
    v: DMatrix<Complex64>,
}

struct Projected {
    beta: DVector<Complex64>,
    perp: f64,
}

impl PointSourceSolver {
    pub fn new(domain: &TestDomain, directions: &DirectionSet, ctx: &WaveContext) -> Result<Self> {
        let k = ctx.k();
        let nodes = domain.nodes();
        let sqrt_s: Vec<f64> = domain.weights().iter().map(|w| w.sqrt()).collect();
        let sqrt_w: Vec<f64> = directions.weights().iter().map(|w| w.sqrt()).collect();
        let dirs = directions.vectors();
        let b = DMatrix::from_fn(nodes.len(), directions.len(), |i, j| {
            Complex64::from_polar(sqrt_s[i] * sqrt_w[j], k * dirs[j].dot(&nodes[i].point))
        });
        let svd = nalgebra::SVD::try_new(b, true, true, 1e-15, 10_000)
            .ok_or_else(|| Error::Decomposition("point-source SVD did not converge".into()))?;
        let u = svd
            .u
            .ok_or_else(|| Error::Decomposition("missing left vectors".into()))?;
        let vt = svd
            .v_t
            .ok_or_else(|| Error::Decomposition("missing right vectors".into()))?;
        Ok(Self {
            domain: domain.clone(),
            directions: directions.clone(),
            ctx: *ctx,
            sqrt_s,
            sqrt_w,
            sigma: svd.singular_values.iter().copied().collect(),
            u,
            v: vt.adjoint(),
        })
    }

    pub fn domain(&self) -> &TestDomain {
        &self.domain
    }

    fn project(&self, z: &Point) -> Result<Projected> {
        if self.domain.contains(z) || self.domain.curve().distance_to_boundary(z).abs() < 1e-12 {
            return Err(Error::Domain(format!(
                "source point {z:?} is not outside the test domain"
            )));
        }
        let rhs = self
            .domain
            .nodes()
            .iter()
            .zip(&self.sqrt_s)
            .map(|(n, s)| Ok(fundamental_solution(&n.point, z, &self.ctx)? * *s))
            .collect::<Result<Vec<_>>>()?;
        let rhs = DVector::from_vec(rhs);
        let beta = self.u.adjoint() * &rhs;
        let perp = (rhs.norm_squared() - beta.norm_squared()).max(0.0);
        Ok(Projected { beta, perp })
    }

    fn misfit(&self, p: &Projected, alpha: f64) -> f64 {
        let s: f64 = self
            .sigma
            .iter()
            .zip(p.beta.iter())
            .map(|(s, b)| (alpha / (alpha + s * s)).powi(2) * b.norm_sqr())
            .sum();
        (s + p.perp).sqrt()
    }

    fn density(&self, p: &Projected, alpha: f64) -> PointSourceDensity {
        let c = DVector::from_iterator(
            self.sigma.len(),
            self.sigma
                .iter()
                .zip(p.beta.iter())
                .map(|(s, b)| b * (s / (alpha + s * s))),
        );
        let g = &self.v * c;
        let values = DVector::from_iterator(g.len(), g.iter().zip(&self.sqrt_w).map(|(v, s)| v / *s));
        PointSourceDensity {
            density: HerglotzDensity::new(self.directions.clone(), values),
            misfit: self.misfit(p, alpha),
            alpha,
        }
    }

    /// `g_{α,z} = (αI + H*H)^{-1} H* Φ(·, z)`.
    pub fn solve(&self, z: &Point, alpha: f64) -> Result<PointSourceDensity> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "regularization parameter must be positive, got {alpha}"
            )));
        }
        Ok(self.density(&self.project(z)?, alpha))
    }

    /// The density whose boundary misfit equals `target`, with `α` found by
    /// bisection on `log α`.
    pub fn solve_for_misfit(&self, z: &Point, target: f64) -> Result<PointSourceDensity> {
        let p = self.project(z)?;
        let s1 = self.sigma.iter().copied().fold(0.0, f64::max);
        let mut lo = (1e-16 * s1 * s1).ln();
        let mut hi = (1e4 * s1 * s1).ln();
        let (m_lo, m_hi) = (self.misfit(&p, lo.exp()), self.misfit(&p, hi.exp()));
        if !(m_lo < target && m_hi > target) {
            return Err(Error::NoSignChange {
                alpha_lo: lo.exp(),
                alpha_hi: hi.exp(),
                f_lo: m_lo - target,
                f_hi: m_hi - target,
            });
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.misfit(&p, mid.exp()) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(self.density(&p, (0.5 * (lo + hi)).exp()))
    }
}

/// `g_{α,z} = (αI + H*H)^{-1} H* Φ(·, z)` with `H g = v_g|_{∂G}`.
pub fn point_source_density(
    domain: &TestDomain,
    z: &Point,
    ctx: &WaveContext,
    alpha: f64,
    directions: &DirectionSet,
) -> Result<PointSourceDensity> {
    PointSourceSolver::new(domain, directions, ctx)?.solve(z, alpha)
}

/// The point-source density whose boundary misfit equals `target`.
pub fn point_source_density_for_misfit(
    domain: &TestDomain,
    z: &Point,
    ctx: &WaveContext,
    target: f64,
    directions: &DirectionSet,
) -> Result<PointSourceDensity> {
    PointSourceSolver::new(domain, directions, ctx)?.solve_for_misfit(z, target)
}

/// `‖v_g - Φ(·, z)‖_{L²(∂G)}`.
pub fn boundary_misfit(g: &HerglotzDensity, domain: &TestDomain, z: &Point, ctx: &WaveContext) -> Result<f64> {
    let mut acc = 0.0;
    for (n, w) in domain.nodes().iter().zip(domain.weights()) {
        let r = g.evaluate(&n.point, ctx) - fundamental_solution(&n.point, z, ctx)?;
        acc += w * r.norm_sqr();
    }
    Ok(acc.sqrt())
}

/// Density for the moved configuration `G = M G_0 + z_0`:
/// `g(d) = e^{-ik z_0·d} g_0(M^T d)`. The rotation must map the direction
/// lattice onto itself.
pub fn transform_density(g: &HerglotzDensity, motion: &RigidMotion, ctx: &WaveContext) -> Result<HerglotzDensity> {
    let set = g.directions();
    let steps = set.rotation_steps(motion.angle()).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "rotation by {} is not a multiple of the node spacing of a full direction set",
            motion.angle()
        ))
    })?;
    let n = set.len();
    let z0 = motion.translation();
    let k = ctx.k();
    let values = DVector::from_iterator(
        n,
        set.nodes()
            .iter()
            .enumerate()
            .map(|(i, d)| g.values()[(i + n - steps) % n] * Complex64::from_polar(1.0, -k * z0.dot(&d.vector()))),
    );
    Ok(HerglotzDensity::new(set.clone(), values))
}
