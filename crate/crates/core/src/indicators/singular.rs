use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::sampling::evaluate_grid;
use super::{IndicatorField, Method};
use crate::error::{Error, Result};
use crate::farfield_op::{transform_density, HerglotzDensity, PointSourceSolver};
use crate::forward::FarFieldData;
use crate::geometry::{NeedleSpec, Point, RigidMotion, SamplingGrid, TestDomain};
use crate::specialfun::WaveContext;

fn default_directions() -> usize {
    16
}

fn default_alpha() -> f64 {
    1e-10
}

fn default_domain() -> NeedleSpec {
    NeedleSpec {
        radius: 3.0,
        offset: 0.02,
        nodes: 256,
    }
}

/// Settings of the singular-sources backprojection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingularSourcesParams {
    /// Number of approximation-domain orientations per sampling point.
    #[serde(default = "default_directions")]
    pub directions: usize,
    /// Tikhonov parameter of the point-source density.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Template approximation domain.
    #[serde(default = "default_domain")]
    pub domain: NeedleSpec,
}

impl Default for SingularSourcesParams {
    fn default() -> Self {
        Self {
            directions: default_directions(),
            alpha: default_alpha(),
            domain: default_domain(),
        }
    }
}

/// Backprojection of multi-static data onto point sources: for a density `g`
/// with `v_g ≈ Φ(·, z)` near the scatterer,
/// `Φ^s(z, z) ≈ (1/γ) Σ_i Σ_j w_i w_j u_∞(-x̂_i, d_j) g(d_j) g(x̂_i)`.
#[derive(Debug, Clone)]
pub struct SingularSources {
    ctx: WaveContext,
    /// `P_ij = w_i u_∞(-x̂_i, d_j) w_j / γ`.
    kernel: DMatrix<Complex64>,
    reference: HerglotzDensity,
    reference_misfit: f64,
    params: SingularSourcesParams,
}

impl SingularSources {
    pub fn new(data: &FarFieldData, params: &SingularSourcesParams) -> Result<Self> {
        let set = &data.incidence;
        if !data.observation.same_as(set) || !set.aperture().is_full() {
            return Err(Error::InvalidArgument(
                "singular sources need full-aperture multi-static data on one direction set".into(),
            ));
        }
        if params.directions < 4 {
            return Err(Error::InvalidArgument(format!(
                "at least 4 probe directions are needed, got {}",
                params.directions
            )));
        }
        let n = set.len();
        if !n.is_multiple_of(params.directions) || !n.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "probe directions ({}) must divide the even direction count ({n})",
                params.directions
            )));
        }
        let ctx = data.ctx()?;
        let w = set.weights();
        let inv_gamma = 1.0 / ctx.gamma();
        let kernel = DMatrix::from_fn(n, n, |i, j| {
            let ni = set.index_of_negation(i).expect("even full set");
            data.matrix[(ni, j)] * (w[i] * w[j]) * inv_gamma
        });
        let base = TestDomain::from_curve(params.domain.reference()?, params.domain.nodes)?;
        let g0 = PointSourceSolver::new(&base, set, &ctx)?.solve(&Point::zeros(), params.alpha)?;
        Ok(Self {
            ctx,
            kernel,
            reference: g0.density,
            reference_misfit: g0.misfit,
            params: *params,
        })
    }

    /// Boundary misfit of the reference density on the template domain.
    pub fn reference_misfit(&self) -> f64 {
        self.reference_misfit
    }

    pub fn backproject(&self, g: &HerglotzDensity) -> Complex64 {
        let v = g.values();
        (v.transpose() * &self.kernel * v)[(0, 0)]
    }

    /// Density for the approximation domain of orientation `j` at `z`.
    pub fn density(&self, z: &Point, j: usize) -> Result<HerglotzDensity> {
        let angle = std::f64::consts::TAU * j as f64 / self.params.directions as f64;
        transform_density(&self.reference, &RigidMotion::new(angle, *z), &self.ctx)
    }

    /// `Φ^s(z, z)` estimates for every orientation.
    pub fn estimates(&self, z: &Point) -> Result<Vec<Complex64>> {
        (0..self.params.directions)
            .map(|j| Ok(self.backproject(&self.density(z, j)?)))
            .collect()
    }

    /// `min_j |Φ^s_j(z, z)|`.
    pub fn value(&self, z: &Point) -> Result<f64> {
        Ok(self
            .estimates(z)?
            .iter()
            .map(|v| v.norm())
            .fold(f64::INFINITY, f64::min))
    }
}

pub fn singular_sources(
    data: &FarFieldData,
    grid: &SamplingGrid,
    params: &SingularSourcesParams,
) -> Result<IndicatorField> {
    let s = SingularSources::new(data, params)?;
    let values = evaluate_grid(grid, |z| s.value(z))?;
    Ok(
        IndicatorField::new(grid.clone(), values, Method::SingularSources, false)?
            .with_parameter("directions", params.directions)
            .with_parameter("alpha", params.alpha)
            .with_parameter("domain_radius", params.domain.radius)
            .with_parameter("domain_offset", params.domain.offset)
            .with_parameter("domain_nodes", params.domain.nodes),
    )
}

/// Whether the approximation domain of orientation `j` at `z` contains a
/// set of points.
pub fn domain_contains(params: &SingularSourcesParams, z: &Point, j: usize, points: &[Point]) -> Result<bool> {
    let angle = std::f64::consts::TAU * j as f64 / params.directions as f64;
    let curve = params.domain.reference()?.transformed(&RigidMotion::new(angle, *z));
    Ok(points.iter().all(|p| curve.contains(p)))
}
