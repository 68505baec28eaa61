use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{DiscSeries, Incident, NystromSolver};
use crate::error::{Error, Result};
use crate::geometry::{Direction, DirectionSet, Obstacle, Point};
use crate::specialfun::WaveContext;

/// How a far-field matrix was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    DiscSeries,
    Nystrom,
    External,
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::DiscSeries => "disc-series",
            Provenance::Nystrom => "nystrom",
            Provenance::External => "external",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "disc-series" => Some(Provenance::DiscSeries),
            "nystrom" => Some(Provenance::Nystrom),
            "external" => Some(Provenance::External),
            _ => None,
        }
    }
}

/// Multi-static far-field data `u_∞(x̂_i, d_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldData {
    pub k: f64,
    pub observation: DirectionSet,
    pub incidence: DirectionSet,
    pub matrix: DMatrix<Complex64>,
    pub noise_level: f64,
    pub seed: u64,
    pub provenance: Provenance,
}

impl FarFieldData {
    pub fn ctx(&self) -> Result<WaveContext> {
        WaveContext::new(self.k)
    }

    /// `max |u_∞(x̂_i, -d_j) - u_∞(d_j, -x̂_i)|` relative to `max |u_∞|`, for
    /// data on one full, even direction set.
    pub fn reciprocity_residual(&self) -> Result<f64> {
        let n = self.observation.len();
        if !self.observation.same_as(&self.incidence) || self.observation.index_of_negation(0).is_none() {
            return Err(Error::InvalidArgument(
                "reciprocity needs one full direction set with an even node count".into(),
            ));
        }
        let neg = |i: usize| self.observation.index_of_negation(i).unwrap_or(i);
        let scale = self.matrix.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = self.matrix[(i, neg(j))];
                let b = self.matrix[(j, neg(i))];
                worst = worst.max((a - b).norm());
            }
        }
        Ok(worst / scale)
    }
}

/// Far-field matrix of an obstacle: one factorisation, one solve per
/// incidence direction.
pub fn synthesize_multistatic(
    obstacle: &Obstacle,
    ctx: &WaveContext,
    obs: &DirectionSet,
    inc: &DirectionSet,
    nodes: usize,
) -> Result<FarFieldData> {
    let solver = NystromSolver::new(obstacle, ctx, nodes)?;
    let matrix = solver.farfield_matrix(obs.nodes(), inc.nodes())?;
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::LinearSolve {
            reason: "non-finite far field".into(),
            condition: solver.condition_estimate(),
        });
    }
    Ok(FarFieldData {
        k: ctx.k(),
        observation: obs.clone(),
        incidence: inc.clone(),
        matrix,
        noise_level: 0.0,
        seed: 0,
        provenance: Provenance::Nystrom,
    })
}

/// Far-field matrix of a sound-soft disc from its series solution.
pub fn synthesize_disc(
    radius: f64,
    center: Point,
    ctx: &WaveContext,
    obs: &DirectionSet,
    inc: &DirectionSet,
) -> Result<FarFieldData> {
    let series = DiscSeries::new(radius, center, *ctx)?;
    let matrix = DMatrix::from_fn(obs.len(), inc.len(), |i, j| {
        series.farfield(&obs.nodes()[i], &inc.nodes()[j])
    });
    Ok(FarFieldData {
        k: ctx.k(),
        observation: obs.clone(),
        incidence: inc.clone(),
        matrix,
        noise_level: 0.0,
        seed: 0,
        provenance: Provenance::DiscSeries,
    })
}

/// Adds complex Gaussian noise rescaled so that the spectral norm of the
/// perturbation is exactly `δ ‖U‖`.
pub fn add_noise(data: &FarFieldData, delta: f64, seed: u64) -> Result<FarFieldData> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise level must be non-negative, got {delta}"
        )));
    }
    let mut out = data.clone();
    out.noise_level = delta;
    out.seed = seed;
    if delta == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (r, c) = data.matrix.shape();
    let mut noise = DMatrix::from_fn(r, c, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    let target = delta * spectral_norm(&data.matrix);
    noise *= Complex64::from(target / spectral_norm(&noise));
    out.matrix += noise;
    Ok(out)
}

pub(crate) fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Total field and its normal derivative on a measurement circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData {
    pub k: f64,
    pub center: Point,
    pub radius: f64,
    pub angles: Vec<f64>,
    pub u: Vec<Complex64>,
    pub du_dnu: Vec<Complex64>,
    pub direction: Direction,
}

impl CauchyData {
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn nodes(&self) -> Vec<Point> {
        self.angles
            .iter()
            .map(|t| self.center + self.radius * Point::new(t.cos(), t.sin()))
            .collect()
    }

    pub fn normals(&self) -> Vec<Point> {
        self.angles.iter().map(|t| Point::new(t.cos(), t.sin())).collect()
    }

    /// Trapezoid weight `2πR / M`.
    pub fn weight(&self) -> f64 {
        TAU * self.radius / self.len() as f64
    }
}

/// Cauchy data of `u = e^{ikd·x} + u^s` on the circle of radius `radius`
/// about the origin at `m` equispaced nodes. `None` means no scatterer.
pub fn synthesize_cauchy(
    obstacle: Option<&Obstacle>,
    ctx: &WaveContext,
    d: Direction,
    radius: f64,
    m: usize,
    nodes: usize,
) -> Result<CauchyData> {
    if m < 64 {
        return Err(Error::InvalidArgument(format!(
            "measurement circle needs at least 64 nodes, got {m}"
        )));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidArgument(format!("invalid radius {radius}")));
    }
    let center = Point::zeros();
    let density = match obstacle {
        Some(o) => {
            let reach = o
                .components()
                .iter()
                .map(|c| c.circumradius(&center))
                .fold(0.0, f64::max);
            if reach > 0.9 * radius {
                return Err(Error::InvalidArgument(format!(
                    "obstacle reaches radius {reach:.4}, clearance to the measurement circle of radius {radius} is below 10%"
                )));
            }
            Some(NystromSolver::new(o, ctx, nodes)?.solve(Incident::PlaneWave(d))?)
        }
        None => None,
    };
    let incident = Incident::PlaneWave(d);
    let angles: Vec<f64> = (0..m).map(|j| TAU * j as f64 / m as f64).collect();
    let mut u = Vec::with_capacity(m);
    let mut du = Vec::with_capacity(m);
    for t in &angles {
        let nu = Point::new(t.cos(), t.sin());
        let x = center + radius * nu;
        let mut val = incident.value(&x, ctx)?;
        let mut grad = incident.gradient(&x, ctx)?;
        if let Some(dens) = &density {
            let (us, gs) = dens.scattered_with_gradient(&x)?;
            val += us;
            grad += gs;
        }
        u.push(val);
        du.push(grad.x * nu.x + grad.y * nu.y);
    }
    Ok(CauchyData {
        k: ctx.k(),
        center,
        radius,
        angles,
        u,
        du_dnu: du,
        direction: d,
    })
}
