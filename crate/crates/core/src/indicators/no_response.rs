use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farfield_op::{HerglotzDensity, PointSourceSolver};
use crate::geometry::{DirectionSet, Point, SamplingGrid, TestDomain};
use crate::specialfun::WaveContext;

fn default_probes() -> usize {
    16
}

fn default_probe_factor() -> f64 {
    1.5
}

fn default_alpha() -> f64 {
    1e-12
}

fn default_epsilon() -> f64 {
    1e-3
}

fn default_samples() -> usize {
    32
}

/// Settings of the no-response test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoResponseParams {
    /// Bound on the `C¹` norm of every probing wave on the test domain.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Point sources per test domain.
    #[serde(default = "default_probes")]
    pub probes: usize,
    /// Probe ring radius as a multiple of the domain circumradius.
    #[serde(default = "default_probe_factor")]
    pub probe_factor: f64,
    /// Tikhonov parameter of the point-source densities.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Sub-grid resolution for the sampled `C¹` norm.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for NoResponseParams {
    fn default() -> Self {
        Self {
            epsilon: default_epsilon(),
            probes: default_probes(),
            probe_factor: default_probe_factor(),
            alpha: default_alpha(),
            samples: default_samples(),
        }
    }
}

/// How positive test domains are separated from the others.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Cutoff {
    /// `I_ε ≤ c_0`.
    Fixed(f64),
    /// Two-means clustering of `log I_ε`; `c_0` is the geometric mean of the
    /// two cluster centres.
    TwoMeans,
}

/// Responses of all test domains and the resulting classification.
#[derive(Debug, Clone, PartialEq)]
pub struct NoResponseResult {
    pub responses: Vec<f64>,
    pub positive: Vec<bool>,
    pub cutoff: f64,
}

impl NoResponseResult {
    /// Intersection of all positive test domains on a grid; empty when no
    /// domain is positive.
    pub fn mask(&self, domains: &[TestDomain], grid: &SamplingGrid) -> Vec<bool> {
        let chosen: Vec<&TestDomain> = domains
            .iter()
            .zip(&self.positive)
            .filter(|(_, p)| **p)
            .map(|(d, _)| d)
            .collect();
        grid.points()
            .iter()
            .map(|z| !chosen.is_empty() && chosen.iter().all(|d| d.contains(z)))
            .collect()
    }
}

/// Node of `observation.negated()` at `-x̂_i`.
fn negated_index(observation: &DirectionSet, i: usize) -> Result<usize> {
    if observation.aperture().is_full() {
        observation
            .index_of_negation(i)
            .ok_or_else(|| Error::InvalidArgument("a full observation set needs an even node count".into()))
    } else {
        Ok(i)
    }
}

/// One-wave response `I(g) = Σ_i w_i u_∞(x̂_i) g(-x̂_i)`; `g` lives on
/// `observation.negated()`.
pub fn response(column: &DVector<Complex64>, observation: &DirectionSet, g: &HerglotzDensity) -> Result<Complex64> {
    let mut acc = Complex64::default();
    for (i, (u, w)) in column.iter().zip(observation.weights()).enumerate() {
        acc += u * g.values()[negated_index(observation, i)?] * *w;
    }
    Ok(acc)
}

/// Points of `Ḡ` where the `C¹` norm is sampled: a square sub-grid over the
/// bounding box restricted to the domain, plus the boundary nodes.
fn norm_samples(domain: &TestDomain, n: usize) -> Vec<Point> {
    let [x0, x1, y0, y1] = domain.curve().bounding_box();
    let mut pts: Vec<Point> = domain.nodes().iter().map(|p| p.point).collect();
    for iy in 0..n {
        for ix in 0..n {
            let p = Point::new(
                x0 + (ix as f64 + 0.5) * (x1 - x0) / n as f64,
                y0 + (iy as f64 + 0.5) * (y1 - y0) / n as f64,
            );
            if domain.contains(&p) {
                pts.push(p);
            }
        }
    }
    pts
}

/// `sup |v_g| + sup |∇v_g|` over the samples.
fn sampled_c1_norm(g: &HerglotzDensity, samples: &[Point], ctx: &WaveContext) -> f64 {
    let (mut v_max, mut d_max) = (0.0f64, 0.0f64);
    for p in samples {
        let (v, grad) = g.evaluate_with_gradient(p, ctx);
        v_max = v_max.max(v.norm());
        d_max = d_max.max((grad.x.norm_sqr() + grad.y.norm_sqr()).sqrt());
    }
    v_max + d_max
}

/// Scattering test response `I_ε(G) = max_l |I(g_l)|` over point-source
/// densities for probes ringed around `G`, each scaled to `‖v_g‖_{C¹(Ḡ)} = ε`.
pub fn test_response(
    column: &DVector<Complex64>,
    observation: &DirectionSet,
    ctx: &WaveContext,
    domain: &TestDomain,
    params: &NoResponseParams,
) -> Result<f64> {
    let density_set = observation.negated();
    let solver = PointSourceSolver::new(domain, &density_set, ctx)?;
    let center = domain.curve().center();
    let reach = domain.curve().circumradius(&center) * params.probe_factor;
    let samples = norm_samples(domain, params.samples);
    let mut best: f64 = 0.0;
    for l in 0..params.probes {
        let t = std::f64::consts::TAU * l as f64 / params.probes as f64;
        let z = center + reach * Point::new(t.cos(), t.sin());
        let g = solver.solve(&z, params.alpha)?.density;
        let norm = sampled_c1_norm(&g, &samples, ctx);
        if !(norm > 0.0) {
            continue;
        }
        let g = g.scaled(Complex64::from(params.epsilon / norm));
        best = best.max(response(column, observation, &g)?.norm());
    }
    Ok(best)
}

/// Two-means split of `log` responses; the cutoff is the geometric mean of
/// the two centres.
fn two_means_cutoff(responses: &[f64]) -> f64 {
    let logs: Vec<f64> = responses.iter().filter(|r| **r > 0.0).map(|r| r.ln()).collect();
    if logs.is_empty() {
        return 0.0;
    }
    let (mut lo, mut hi) = logs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if hi - lo < 1e-12 {
        return hi.exp();
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let (a, b): (Vec<f64>, Vec<f64>) = logs.iter().partition(|v| **v <= mid);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (nlo, nhi) = (mean(&a), mean(&b));
        if nlo == lo && nhi == hi {
            break;
        }
        lo = nlo;
        hi = nhi;
    }
    (0.5 * (lo + hi)).exp()
}

/// Runs the no-response test on every test domain for one incident wave.
pub fn no_response(
    column: &DVector<Complex64>,
    observation: &DirectionSet,
    ctx: &WaveContext,
    domains: &[TestDomain],
    params: &NoResponseParams,
    cutoff: Cutoff,
) -> Result<NoResponseResult> {
    if domains.is_empty() {
        return Err(Error::InvalidArgument("no test domains given".into()));
    }
    if !(params.epsilon.is_finite() && params.epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {}",
            params.epsilon
        )));
    }
    if params.probes == 0 || params.samples == 0 {
        return Err(Error::InvalidArgument(
            "probe and sample counts must be positive".into(),
        ));
    }
    if column.len() != observation.len() {
        return Err(Error::InvalidArgument(format!(
            "far-field column has {} entries for {} observation directions",
            column.len(),
            observation.len()
        )));
    }
    let responses = domains
        .par_iter()
        .map(|d| test_response(column, observation, ctx, d, params))
        .collect::<Result<Vec<_>>>()?;
    let c0 = match cutoff {
        Cutoff::Fixed(c) => c,
        Cutoff::TwoMeans => two_means_cutoff(&responses),
    };
    let positive = responses.iter().map(|r| *r <= c0).collect();
    Ok(NoResponseResult {
        responses,
        positive,
        cutoff: c0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::synthesize_disc;
    use crate::geometry::{make_direction_set, Aperture, BoundaryCurve};
    use std::f64::consts::PI;

    fn setup() -> (WaveContext, DirectionSet, DVector<Complex64>) {
        let ctx = WaveContext::new(4.0).unwrap();
        let obs = make_direction_set(64, Aperture::Arc { start: 0.0, end: PI }).unwrap();
        let inc = make_direction_set(4, Aperture::Full).unwrap();
        let data = synthesize_disc(0.5, Point::zeros(), &ctx, &obs, &inc).unwrap();
        (ctx, obs, data.matrix.column(1).into_owned())
    }

    fn disc_domain(c: Point) -> TestDomain {
        TestDomain::from_curve(BoundaryCurve::circle(c, 1.2).unwrap(), 128).unwrap()
    }

    #[test]
    fn containing_domain_is_quiet() {
        let (ctx, obs, col) = setup();
        let params = NoResponseParams::default();
        let inside = test_response(&col, &obs, &ctx, &disc_domain(Point::new(0.1, 0.2)), &params).unwrap();
        let outside = test_response(&col, &obs, &ctx, &disc_domain(Point::new(2.0, 0.3)), &params).unwrap();
        assert!(outside >= 10.0 * inside, "{inside} {outside}");
    }

    #[test]
    fn zero_data_gives_zero_response() {
        let (ctx, obs, col) = setup();
        let zero = DVector::zeros(col.len());
        let domains = [disc_domain(Point::zeros()), disc_domain(Point::new(0.5, 0.0))];
        let r = no_response(
            &zero,
            &obs,
            &ctx,
            &domains,
            &NoResponseParams::default(),
            Cutoff::TwoMeans,
        )
        .unwrap();
        assert!(r.responses.iter().all(|v| *v == 0.0));
        assert!(r.positive.iter().all(|p| *p));
        let grid = SamplingGrid::new([-2.0, 2.0, -2.0, 2.0], 20, 20).unwrap();
        let mask = r.mask(&domains, &grid);
        for (z, m) in grid.points().iter().zip(&mask) {
            assert_eq!(*m, domains.iter().all(|d| d.contains(z)));
        }
    }

    #[test]
    fn response_scales_with_epsilon() {
        let (ctx, obs, col) = setup();
        let d = disc_domain(Point::new(1.5, 0.0));
        let a = test_response(&col, &obs, &ctx, &d, &NoResponseParams::default()).unwrap();
        let p = NoResponseParams {
            epsilon: 2e-3,
            ..NoResponseParams::default()
        };
        let b = test_response(&col, &obs, &ctx, &d, &p).unwrap();
        assert!((b / a - 2.0).abs() < 1e-10);
    }

    #[test]
    fn two_means_splits_clusters() {
        let c = two_means_cutoff(&[1e-6, 2e-6, 1.5e-6, 1.0, 3.0]);
        assert!(c > 2e-6 && c < 1.0);
        assert_eq!(two_means_cutoff(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let (ctx, obs, col) = setup();
        let p = NoResponseParams::default();
        assert!(no_response(&col, &obs, &ctx, &[], &p, Cutoff::TwoMeans).is_err());
        let bad = NoResponseParams { epsilon: 0.0, ..p };
        assert!(no_response(&col, &obs, &ctx, &[disc_domain(Point::zeros())], &bad, Cutoff::TwoMeans).is_err());
    }
}
