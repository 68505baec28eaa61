use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::CauchyData;
use crate::geometry::{Direction, SamplingGrid};

/// `mantissa · e^{exponent}`, for quantities that overflow at large `τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled<T> {
    pub mantissa: T,
    pub exponent: f64,
}

impl Scaled<Complex64> {
    /// `ln |value|`, or `None` if the mantissa vanished or is not finite.
    pub fn ln_abs(&self) -> Option<f64> {
        let m = self.mantissa.norm();
        (m > 0.0 && m.is_finite()).then(|| m.ln() + self.exponent)
    }
}

/// Reference level `t_ref = c·ω + R`: the largest `x·ω` on the measurement
/// circle, so that `e^{τ(x·ω - t_ref)} ≤ 1` there.
fn reference_level(cauchy: &CauchyData, omega: &Direction) -> f64 {
    cauchy.center.dot(&omega.vector()) + cauchy.radius
}

/// `v_τ(x) e^{-τ t_ref}` and its normal derivative on the measurement nodes,
/// with `v_τ(x) = exp(x·(τω + i√(τ²+k²) ω^⊥))`.
fn cgo_on_circle(cauchy: &CauchyData, omega: &Direction, tau: f64) -> Vec<(Complex64, Complex64)> {
    let k = cauchy.k;
    let s = (tau * tau + k * k).sqrt();
    let w = omega.vector();
    let wp = omega.perp();
    let t_ref = reference_level(cauchy, omega);
    cauchy
        .nodes()
        .iter()
        .zip(cauchy.normals())
        .map(|(x, nu)| {
            let v = Complex64::new(tau * (x.dot(&w) - t_ref), s * x.dot(&wp)).exp();
            let z_nu = Complex64::new(tau * nu.dot(&w), s * nu.dot(&wp));
            (v, z_nu * v)
        })
        .collect()
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidArgument(format!("τ must be positive, got {tau}")));
    }
    Ok(())
}

/// `I(τ) = ∫_{∂B_R} (∂_ν u v_τ - ∂_ν v_τ u) ds` by the trapezoid rule.
pub fn enclosure_functional(cauchy: &CauchyData, omega: &Direction, tau: f64) -> Result<Scaled<Complex64>> {
    check_tau(tau)?;
    let h = cauchy.weight();
    let sum: Complex64 = cgo_on_circle(cauchy, omega, tau)
        .iter()
        .zip(cauchy.u.iter().zip(&cauchy.du_dnu))
        .map(|((v, dv), (u, du))| du * v - dv * u)
        .sum();
    Ok(Scaled {
        mantissa: sum * h,
        exponent: tau * reference_level(cauchy, omega),
    })
}

/// `‖v_τ‖_{L²(∂B_R)}` on the same scale as [`enclosure_functional`].
pub fn cgo_norm(cauchy: &CauchyData, omega: &Direction, tau: f64) -> Result<Scaled<f64>> {
    check_tau(tau)?;
    let h = cauchy.weight();
    let sum: f64 = cgo_on_circle(cauchy, omega, tau)
        .iter()
        .map(|(v, _)| v.norm_sqr())
        .sum();
    Ok(Scaled {
        mantissa: (sum * h).sqrt(),
        exponent: tau * reference_level(cauchy, omega),
    })
}

/// Support estimate for one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionEstimate {
    pub omega: Direction,
    /// Least-squares slope of `ln |I(τ)|` against `τ` over the upper half of
    /// the `τ` grid; `None` if the direction was dropped.
    pub support: Option<f64>,
    pub r_squared: Option<f64>,
    /// `ln |I(τ)|` per grid value (`None` where it underflowed).
    pub log_values: Vec<Option<f64>>,
    pub diagnostic: Option<String>,
}

/// Support-function estimates `ĥ_D(ω_j)` from one set of Cauchy data.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportEstimate {
    pub taus: Vec<f64>,
    pub directions: Vec<DirectionEstimate>,
}

impl SupportEstimate {
    /// `(ω, ĥ(ω))` for accepted directions.
    pub fn accepted(&self) -> Vec<(Direction, f64)> {
        self.directions
            .iter()
            .filter_map(|d| d.support.map(|h| (d.omega, h)))
            .collect()
    }

    /// `ĥ(ω) + ĥ(-ω) ≥ 0` for every accepted antipodal pair.
    pub fn widths_consistent(&self) -> bool {
        let acc = self.accepted();
        acc.iter().all(|(a, ha)| {
            acc.iter()
                .filter(|(b, _)| (a.vector() + b.vector()).norm() < 1e-9)
                .all(|(_, hb)| ha + hb >= 0.0)
        })
    }

    /// Intersection of the half planes `{x·ω_j < ĥ(ω_j)}`; empty when no
    /// direction was accepted.
    pub fn half_plane_mask(&self, grid: &SamplingGrid) -> Vec<bool> {
        let acc = self.accepted();
        grid.points()
            .iter()
            .map(|x| !acc.is_empty() && acc.iter().all(|(w, h)| x.dot(&w.vector()) < *h))
            .collect()
    }
}

/// `(slope, R²)` of the least-squares line through `(x_i, y_i)`.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, r2)
}

/// Enclosure method: `ĥ_D(ω) = lim (1/τ) ln |I(τ)|`, estimated by the slope
/// over the upper half of an increasing `τ` grid.
pub fn enclosure(cauchy: &CauchyData, omegas: &[Direction], taus: &[f64]) -> Result<SupportEstimate> {
    if cauchy.is_empty() {
        return Err(Error::InvalidArgument("empty Cauchy data".into()));
    }
    if taus.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "τ grid needs at least 4 values, got {}",
            taus.len()
        )));
    }
    for t in taus {
        check_tau(*t)?;
    }
    if taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("τ grid must be strictly increasing".into()));
    }
    let upper = taus.len() / 2;
    let mut directions = Vec::with_capacity(omegas.len());
    for omega in omegas {
        let log_values = taus
            .iter()
            .map(|t| Ok(enclosure_functional(cauchy, omega, *t)?.ln_abs()))
            .collect::<Result<Vec<_>>>()?;
        let (xs, ys): (Vec<f64>, Vec<f64>) = taus[upper..]
            .iter()
            .zip(&log_values[upper..])
            .filter_map(|(t, l)| l.map(|l| (*t, l)))
            .unzip();
        let est = if xs.len() >= 2 {
            let (slope, r2) = linear_fit(&xs, &ys);
            DirectionEstimate {
                omega: *omega,
                support: Some(slope),
                r_squared: Some(r2),
                log_values,
                diagnostic: None,
            }
        } else {
            DirectionEstimate {
                omega: *omega,
                support: None,
                r_squared: None,
                log_values,
                diagnostic: Some(format!(
                    "functional underflowed on the upper τ grid for ω at angle {:.6}",
                    omega.angle()
                )),
            }
        };
        directions.push(est);
    }
    Ok(SupportEstimate {
        taus: taus.to_vec(),
        directions,
    })
}

/// `n` equispaced values on `[lo, hi]`.
pub fn tau_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::synthesize_cauchy;
    use crate::geometry::{BoundaryCurve, Obstacle, Point};
    use crate::specialfun::WaveContext;
    use std::f64::consts::TAU;

    fn omegas(n: usize) -> Vec<Direction> {
        (0..n)
            .map(|j| Direction::from_angle(TAU * j as f64 / n as f64 + 0.1))
            .collect()
    }

    #[test]
    fn empty_scatterer_null_functional() {
        let ctx = WaveContext::new(2.0).unwrap();
        let data = synthesize_cauchy(None, &ctx, Direction::from_angle(0.3), 3.0, 512, 0).unwrap();
        for omega in omegas(8) {
            for tau in tau_grid(2.0, 12.0, 11) {
                let i = enclosure_functional(&data, &omega, tau).unwrap();
                let n = cgo_norm(&data, &omega, tau).unwrap();
                assert_eq!(i.exponent, n.exponent);
                assert!(
                    i.mantissa.norm() <= 1e-8 * n.mantissa,
                    "{} {}",
                    i.mantissa.norm(),
                    n.mantissa
                );
            }
        }
    }

    #[test]
    fn estimates_do_not_overshoot_support() {
        let ctx = WaveContext::new(2.0).unwrap();
        let obstacle = Obstacle::single(BoundaryCurve::rounded_square(Point::new(0.3, -0.2), 0.8).unwrap());
        let data = synthesize_cauchy(Some(&obstacle), &ctx, Direction::from_angle(0.7), 3.0, 512, 256).unwrap();
        let est = enclosure(&data, &omegas(8), &tau_grid(2.0, 12.0, 21)).unwrap();
        for d in &est.directions {
            let h = d.support.unwrap();
            assert!(h <= obstacle.support_function(&d.omega) + 0.1, "{h}");
        }
        assert!(est.widths_consistent());
    }

    #[test]
    fn mask_is_intersection_of_half_planes() {
        let est = SupportEstimate {
            taus: vec![1.0],
            directions: [0.0, TAU / 4.0, TAU / 2.0, 3.0 * TAU / 4.0]
                .iter()
                .map(|a| DirectionEstimate {
                    omega: Direction::from_angle(*a),
                    support: Some(1.0),
                    r_squared: Some(1.0),
                    log_values: vec![],
                    diagnostic: None,
                })
                .collect(),
        };
        let grid = SamplingGrid::new([-2.0, 2.0, -2.0, 2.0], 8, 8).unwrap();
        let mask = est.half_plane_mask(&grid);
        for (p, m) in grid.points().iter().zip(&mask) {
            assert_eq!(*m, p.x.abs() < 1.0 && p.y.abs() < 1.0);
        }
        assert!(est.widths_consistent());
    }

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (s, r2) = linear_fit(&x, &y);
        assert!((s - 2.5).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        let ctx = WaveContext::new(2.0).unwrap();
        let data = synthesize_cauchy(None, &ctx, Direction::from_angle(0.0), 3.0, 64, 0).unwrap();
        let w = omegas(2);
        assert!(enclosure(&data, &w, &[1.0, 2.0]).is_err());
        assert!(enclosure(&data, &w, &[1.0, 3.0, 2.0, 4.0]).is_err());
        assert!(enclosure(&data, &w, &[-1.0, 1.0, 2.0, 3.0]).is_err());
    }
}
