use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{perp, Direction, Obstacle, Point};
use crate::specialfun::{grad_fundamental_solution, hankel01, WaveContext, EULER_GAMMA};

/// Incident field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Incident {
    /// `e^{ik d·x}`.
    PlaneWave(Direction),
    /// `Φ(x, z)`.
    PointSource(Point),
}

impl Incident {
    pub fn value(&self, x: &Point, ctx: &WaveContext) -> Result<Complex64> {
        match self {
            Incident::PlaneWave(d) => Ok(Complex64::from_polar(1.0, ctx.k() * d.vector().dot(x))),
            Incident::PointSource(z) => crate::specialfun::fundamental_solution(x, z, ctx),
        }
    }

    pub fn gradient(&self, x: &Point, ctx: &WaveContext) -> Result<Vector2<Complex64>> {
        match self {
            Incident::PlaneWave(d) => {
                let u = self.value(x, ctx)?;
                let ik = Complex64::new(0.0, ctx.k());
                Ok(Vector2::new(ik * d.vector().x * u, ik * d.vector().y * u))
            }
            Incident::PointSource(z) => grad_fundamental_solution(x, z, ctx),
        }
    }
}

/// Quadrature node on one boundary component.
#[derive(Debug, Clone, Copy)]
struct Node {
    t: f64,
    x: Point,
    d1: Point,
    d2: Point,
    component: usize,
}

/// Nodes `t_j = πj/n`, `j = 0..2n`, on every component of an obstacle.
#[derive(Debug)]
pub struct Discretization {
    obstacle: Obstacle,
    ctx: WaveContext,
    half: usize,
    nodes: Vec<Node>,
}

impl Discretization {
    fn new(obstacle: &Obstacle, ctx: &WaveContext, per_component: usize) -> Result<Self> {
        if per_component < 16 || !per_component.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "node count must be even and at least 16, got {per_component}"
            )));
        }
        if !obstacle.is_smooth() {
            return Err(Error::InvalidArgument(
                "the boundary integral solver needs smooth curves".into(),
            ));
        }
        let half = per_component / 2;
        let mut nodes = Vec::with_capacity(per_component * obstacle.components().len());
        for (c, curve) in obstacle.components().iter().enumerate() {
            for j in 0..per_component {
                let t = PI * j as f64 / half as f64;
                let (x, d1, d2) = curve.derivatives(t);
                nodes.push(Node {
                    t,
                    x,
                    d1,
                    d2,
                    component: c,
                });
            }
        }
        Ok(Self {
            obstacle: obstacle.clone(),
            ctx: *ctx,
            half,
            nodes,
        })
    }

    pub fn obstacle(&self) -> &Obstacle {
        &self.obstacle
    }

    pub fn ctx(&self) -> &WaveContext {
        &self.ctx
    }

    /// Nodes per component.
    pub fn nodes_per_component(&self) -> usize {
        2 * self.half
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn coupling(&self) -> f64 {
        self.ctx.k()
    }

    /// Logarithmic quadrature weights `R_j` indexed by `(i - j) mod 2n`.
    fn log_weights(&self) -> Vec<f64> {
        let n = self.half;
        (0..2 * n)
            .map(|d| {
                let s = PI * d as f64 / n as f64;
                let mut acc = 0.0;
                for m in 1..n {
                    acc += (m as f64 * s).cos() / m as f64;
                }
                -TAU / n as f64 * acc - PI / (n * n) as f64 * (n as f64 * s).cos()
            })
            .collect()
    }

    /// Row `i` of `I + (discretised 2K - 2iηS)`.
    fn matrix_row(&self, i: usize, log_w: &[f64]) -> Vec<Complex64> {
        let k = self.ctx.k();
        let eta = self.coupling();
        let n = self.half;
        let h = PI / n as f64;
        let ni = &self.nodes[i];
        let mut row = vec![Complex64::default(); self.nodes.len()];
        for (j, nj) in self.nodes.iter().enumerate() {
            let normal = perp(&nj.d1);
            let speed = nj.d1.norm();
            let value = if nj.component != ni.component {
                let diff = ni.x - nj.x;
                let r = diff.norm();
                let (h0, h1) = hankel01(k * r);
                let l = Complex64::new(0.0, 0.5 * k) * normal.dot(&diff) * h1 / r;
                let m = Complex64::new(0.0, 0.5) * h0 * speed;
                h * (l - Complex64::new(0.0, eta) * m)
            } else {
                let local_i = i % (2 * n);
                let local_j = j % (2 * n);
                let w = log_w[(local_i + 2 * n - local_j) % (2 * n)];
                let (k1, k2) = if i == j {
                    let d1 = nj.d1;
                    let d2 = nj.d2;
                    let l2 = (d1.y * d2.x - d1.x * d2.y) / (TAU * speed * speed);
                    let m1 = -speed / TAU;
                    let m2 = Complex64::new(-EULER_GAMMA / PI - (0.5 * k * speed).ln() / PI, 0.5) * speed;
                    (-Complex64::new(0.0, eta) * m1, l2 - Complex64::new(0.0, eta) * m2)
                } else {
                    let diff = ni.x - nj.x;
                    let r = diff.norm();
                    let (h0, h1) = hankel01(k * r);
                    let nd = normal.dot(&diff);
                    let l = Complex64::new(0.0, 0.5 * k) * nd * h1 / r;
                    let l1 = -k / TAU * nd * h1.re / r;
                    let m = Complex64::new(0.0, 0.5) * h0 * speed;
                    let m1 = -h0.re * speed / TAU;
                    let log_term = (4.0 * (0.5 * (ni.t - nj.t)).sin().powi(2)).ln();
                    let l2 = l - l1 * log_term;
                    let m2 = m - m1 * log_term;
                    (
                        Complex64::from(l1) - Complex64::new(0.0, eta) * m1,
                        l2 - Complex64::new(0.0, eta) * m2,
                    )
                };
                w * k1 + h * k2
            };
            row[j] = value;
        }
        row[i] += 1.0;
        row
    }

    fn assemble(&self) -> DMatrix<Complex64> {
        let log_w = self.log_weights();
        let rows: Vec<Vec<Complex64>> = (0..self.nodes.len())
            .into_par_iter()
            .map(|i| self.matrix_row(i, &log_w))
            .collect();
        let n = self.nodes.len();
        DMatrix::from_fn(n, n, |i, j| rows[i][j])
    }

    /// Far-field kernel row: `u_∞(x̂) = Σ_j e_j(x̂) φ_j`.
    fn farfield_row(&self, xhat: &Direction) -> Vec<Complex64> {
        let k = self.ctx.k();
        let eta = self.coupling();
        let h = PI / self.half as f64;
        let g = self.ctx.gamma();
        let v = xhat.vector();
        self.nodes
            .iter()
            .map(|nj| {
                let normal = perp(&nj.d1);
                let phase = Complex64::from_polar(1.0, -k * v.dot(&nj.x));
                g * h * Complex64::new(0.0, -k * normal.dot(&v) - eta * nj.d1.norm()) * phase
            })
            .collect()
    }
}

/// Combined-field boundary integral solver for the sound-soft problem: the
/// factorised system for one obstacle, reusable across incident fields.
pub struct NystromSolver {
    disc: Arc<Discretization>,
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    condition: f64,
}

impl std::fmt::Debug for NystromSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NystromSolver")
            .field("nodes", &self.disc.len())
            .field("condition", &self.condition)
            .finish()
    }
}

impl NystromSolver {
    /// `nodes` quadrature points per component (even, `≥ 16`).
    pub fn new(obstacle: &Obstacle, ctx: &WaveContext, nodes: usize) -> Result<Self> {
        let disc = Discretization::new(obstacle, ctx, nodes)?;
        let a = disc.assemble();
        let lu = a.lu();
        let u = lu.u();
        let diag: Vec<f64> = u.diagonal().iter().map(|v| v.norm()).collect();
        let max = diag.iter().copied().fold(0.0, f64::max);
        let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if !condition.is_finite() || condition > 1e14 {
            return Err(Error::LinearSolve {
                reason: "boundary integral system is singular".into(),
                condition,
            });
        }
        Ok(Self {
            disc: Arc::new(disc),
            lu,
            condition,
        })
    }

    /// Rough condition estimate from the pivots of the factorisation.
    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    fn rhs(&self, incident: &Incident) -> Result<DVector<Complex64>> {
        let ctx = self.disc.ctx;
        let values = self
            .disc
            .nodes
            .iter()
            .map(|n| Ok(-2.0 * incident.value(&n.x, &ctx)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(values))
    }

    pub fn solve(&self, incident: Incident) -> Result<BoundaryDensity> {
        let b = self.rhs(&incident)?;
        let values = self.lu.solve(&b).ok_or_else(|| Error::LinearSolve {
            reason: "factorisation is singular".into(),
            condition: self.condition,
        })?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolve {
                reason: "non-finite density".into(),
                condition: self.condition,
            });
        }
        Ok(BoundaryDensity {
            disc: Arc::clone(&self.disc),
            values,
            incident,
        })
    }

    /// Far-field matrix `u_∞(x̂_i, d_j)` for plane-wave incidence.
    pub fn farfield_matrix(&self, obs: &[Direction], inc: &[Direction]) -> Result<DMatrix<Complex64>> {
        let mut b = DMatrix::zeros(self.disc.len(), inc.len());
        for (j, d) in inc.iter().enumerate() {
            b.set_column(j, &self.rhs(&Incident::PlaneWave(*d))?);
        }
        let phi = self.lu.solve(&b).ok_or_else(|| Error::LinearSolve {
            reason: "factorisation is singular".into(),
            condition: self.condition,
        })?;
        let rows: Vec<Vec<Complex64>> = obs.iter().map(|x| self.disc.farfield_row(x)).collect();
        let e = DMatrix::from_fn(obs.len(), self.disc.len(), |i, j| rows[i][j]);
        Ok(e * phi)
    }
}

/// Solution of the boundary integral equation for one incident field.
#[derive(Debug, Clone)]
pub struct BoundaryDensity {
    disc: Arc<Discretization>,
    values: DVector<Complex64>,
    incident: Incident,
}

/// Solve the exterior Dirichlet problem `u^s = -u^i` on `∂D`.
pub fn solve_dirichlet(
    obstacle: &Obstacle,
    ctx: &WaveContext,
    incident: Incident,
    nodes: usize,
) -> Result<BoundaryDensity> {
    NystromSolver::new(obstacle, ctx, nodes)?.solve(incident)
}

impl BoundaryDensity {
    pub fn values(&self) -> &DVector<Complex64> {
        &self.values
    }

    pub fn incident(&self) -> &Incident {
        &self.incident
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.disc.nodes.iter().map(|n| n.t).collect()
    }

    pub fn evaluate_farfield(&self, xhat: &Direction) -> Complex64 {
        self.disc
            .farfield_row(xhat)
            .iter()
            .zip(self.values.iter())
            .map(|(e, v)| e * v)
            .sum()
    }

    /// Smallest distance from `x` to a quadrature node.
    pub fn node_distance(&self, x: &Point) -> f64 {
        self.disc
            .nodes
            .iter()
            .map(|n| (n.x - x).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether `x` is closer to the boundary than two node spacings, where
    /// the trapezoid rule loses accuracy.
    pub fn near_boundary(&self, x: &Point) -> bool {
        let spacing = self.disc.nodes.iter().map(|n| n.d1.norm()).fold(0.0, f64::max) * PI / self.disc.half as f64;
        self.disc.obstacle.distance_to_boundary(x) < 2.0 * spacing
    }

    fn check_exterior(&self, x: &Point) -> Result<()> {
        if self.disc.obstacle.contains(x) {
            return Err(Error::Domain(format!("point {x:?} lies inside the obstacle")));
        }
        if self.node_distance(x) < 1e-12 {
            return Err(Error::CoincidentPoints(self.node_distance(x)));
        }
        Ok(())
    }

    pub fn evaluate_scattered(&self, x: &Point) -> Result<Complex64> {
        Ok(self.scattered_with_gradient(x)?.0)
    }

    /// Scattered field and gradient at an exterior point.
    pub fn scattered_with_gradient(&self, x: &Point) -> Result<(Complex64, Vector2<Complex64>)> {
        self.check_exterior(x)?;
        let k = self.disc.ctx.k();
        let eta = self.disc.coupling();
        let h = PI / self.disc.half as f64;
        let ik4 = Complex64::new(0.0, 0.25 * k);
        let mut u = Complex64::default();
        let mut g = Vector2::<Complex64>::zeros();
        for (n, phi) in self.disc.nodes.iter().zip(self.values.iter()) {
            let normal = perp(&n.d1);
            let speed = n.d1.norm();
            let diff = x - n.x;
            let r = diff.norm();
            let (h0, h1) = hankel01(k * r);
            let nd = normal.dot(&diff);
            let f = h1 / r;
            let fp = (k * r * h0 - 2.0 * h1) / (r * r);
            let w = h * phi;
            u += w * (ik4 * nd * f + 0.25 * eta * speed * h0);
            for c in 0..2 {
                let dl = ik4 * (f * normal[c] + fp * nd * diff[c] / r);
                let ds = -0.25 * eta * speed * k * h1 * diff[c] / r;
                g[c] += w * (dl + ds);
            }
        }
        Ok((u, g))
    }

    /// Largest `|u^s + u^i|` over `count` boundary points lying between the
    /// quadrature nodes, relative to the largest `|u^i|` there.
    ///
    /// The density is interpolated trigonometrically to a grid twice as fine
    /// and the boundary trace is evaluated with the fine-grid quadrature.
    pub fn boundary_residual(&self, count: usize) -> Result<f64> {
        let coarse = &self.disc;
        let per = coarse.nodes_per_component();
        let fine = Discretization::new(&coarse.obstacle, &coarse.ctx, 2 * per)?;
        let m = coarse.obstacle.components().len();
        let mut fine_values = Vec::with_capacity(2 * per * m);
        for c in 0..m {
            let block: Vec<Complex64> = self.values.iter().skip(c * per).take(per).copied().collect();
            for l in 0..2 * per {
                let s = PI * l as f64 / per as f64;
                fine_values.push(if l % 2 == 0 {
                    block[l / 2]
                } else {
                    trig_interpolate(&block, s)
                });
            }
        }
        let log_w = fine.log_weights();
        let total_odd = fine.len() / 2;
        let count = count.clamp(1, total_odd);
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for q in 0..count {
            let i = 2 * ((q * total_odd) / count) + 1;
            let row = fine.matrix_row(i, &log_w);
            let trace: Complex64 = 0.5 * row.iter().zip(&fine_values).map(|(a, b)| a * b).sum::<Complex64>();
            let ui = self.incident.value(&fine.nodes[i].x, &coarse.ctx)?;
            worst = worst.max((trace + ui).norm());
            scale = scale.max(ui.norm());
        }
        Ok(worst / scale)
    }
}

/// Trigonometric interpolant of equispaced samples on `[0, 2π)`, even count.
fn trig_interpolate(values: &[Complex64], t: f64) -> Complex64 {
    let n2 = values.len();
    let n = n2 / 2;
    let mut acc = Complex64::default();
    for m in -(n as i64 - 1)..=(n as i64 - 1) {
        let mut c = Complex64::default();
        for (j, v) in values.iter().enumerate() {
            let tj = TAU * j as f64 / n2 as f64;
            c += v * Complex64::from_polar(1.0, -(m as f64) * tj);
        }
        acc += c * Complex64::from_polar(1.0, m as f64 * t);
    }
    let nyquist: Complex64 = values
        .iter()
        .enumerate()
        .map(|(j, v)| if j % 2 == 0 { *v } else { -*v })
        .sum();
    (acc + nyquist * (n as f64 * t).cos()) / n2 as f64
}
