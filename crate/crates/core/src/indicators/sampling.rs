use rayon::prelude::*;

use super::{IndicatorField, Method};
use crate::error::{Error, Result};
use crate::farfield_op::{morozov_alpha, rhs_point_source, Regularization, SpectralSystem, TikhonovProblem};
use crate::geometry::{Point, SamplingGrid};

pub(crate) fn evaluate_grid<F>(grid: &SamplingGrid, f: F) -> Result<Vec<f64>>
where
    F: Fn(&Point) -> Result<f64> + Sync,
{
    (0..grid.len()).into_par_iter().map(|i| f(&grid.point_at(i))).collect()
}

fn check_spectrum(sys: &SpectralSystem) -> Result<f64> {
    let s1 = sys.singular_values().first().copied().unwrap_or(0.0);
    if !(s1 > 0.0 && s1.is_finite()) {
        return Err(Error::DegenerateSpectrum(1e-14));
    }
    Ok(s1)
}

fn reciprocal(norm: f64) -> f64 {
    if norm > 0.0 {
        (1.0 / norm).min(f64::MAX)
    } else {
        f64::MAX
    }
}

fn record(field: IndicatorField, reg: Regularization) -> IndicatorField {
    match reg {
        Regularization::Fixed(a) => field
            .with_parameter("regularization", "fixed")
            .with_parameter("alpha", a),
        Regularization::Morozov(d) => field
            .with_parameter("regularization", "morozov")
            .with_parameter("delta", d),
    }
}

/// `α` for one sampling point. Morozov compares the discrepancy against
/// `level(δ)·‖g‖`.
fn select_alpha(problem: &TikhonovProblem, reg: Regularization, level: impl Fn(f64) -> f64) -> Result<f64> {
    match reg {
        Regularization::Fixed(a) => {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "regularization parameter must be positive, got {a}"
                )));
            }
            Ok(a)
        }
        Regularization::Morozov(delta) => morozov_alpha(problem, level(delta)),
    }
}

/// Linear sampling: `1/‖g_{z,α}‖` with `g_{z,α}` the Tikhonov solution of
/// `F g = Φ_∞(·, z)`. Under Morozov the operator noise level is taken as
/// `δ σ_1`.
pub fn lsm(sys: &SpectralSystem, grid: &SamplingGrid, reg: Regularization) -> Result<IndicatorField> {
    let s1 = check_spectrum(sys)?;
    let ctx = *sys.ctx();
    let values = evaluate_grid(grid, |z| {
        let f = rhs_point_source(z, sys.directions(), &ctx);
        let p = TikhonovProblem::linear_sampling(sys, &f);
        let alpha = select_alpha(&p, reg, |d| d * s1)?;
        Ok(reciprocal(p.solution_norm(alpha)))
    })?;
    Ok(record(
        IndicatorField::new(grid.clone(), values, Method::Lsm, true)?,
        reg,
    ))
}

/// Regularised factorization: `1/‖g_{z,α}‖` with
/// `g_{z,α} = (αI + (F*F)^{1/2})^{-1} (F*F)^{1/4} Φ_∞(·, z)`, so that
/// `‖g‖² = Σ σ_j/(α+σ_j)² |ρ_j|²`. Under Morozov the operator noise level
/// of `(F*F)^{1/4}` is taken as `√(δ σ_1)`.
pub fn factorization_regularized(
    sys: &SpectralSystem,
    grid: &SamplingGrid,
    reg: Regularization,
) -> Result<IndicatorField> {
    let s1 = check_spectrum(sys)?;
    let ctx = *sys.ctx();
    let values = evaluate_grid(grid, |z| {
        let f = rhs_point_source(z, sys.directions(), &ctx);
        let p = TikhonovProblem::factorization(sys, &f);
        let alpha = select_alpha(&p, reg, |d| (d * s1).sqrt())?;
        Ok(reciprocal(p.solution_norm(alpha)))
    })?;
    Ok(record(
        IndicatorField::new(grid.clone(), values, Method::FactorizationRegularized, true)?,
        reg,
    ))
}

/// Default Picard truncation: the number of `σ_n > max(1e-12, δ) σ_1`.
pub fn default_truncation(sys: &SpectralSystem) -> usize {
    sys.rank(sys.noise_level().max(1e-12))
}

/// Truncated Picard sum `Σ_{n<N_t} |ρ_n|²/σ_n` with
/// `ρ_n = (Φ_∞(·, z), v_n)`.
pub fn picard_sum(sys: &SpectralSystem, z: &Point, truncation: usize) -> f64 {
    let f = rhs_point_source(z, sys.directions(), sys.ctx());
    let rho = sys.right_coefficients(&f);
    sys.singular_values()
        .iter()
        .zip(rho.iter())
        .take(truncation)
        .map(|(s, r)| r.norm_sqr() / s)
        .sum()
}

/// Picard-criterion factorization: the inverse of the truncated Picard sum.
/// A truncation beyond the numerical rank is lowered to it and flagged in
/// the parameters.
pub fn factorization_picard(
    sys: &SpectralSystem,
    grid: &SamplingGrid,
    truncation: Option<usize>,
) -> Result<IndicatorField> {
    check_spectrum(sys)?;
    let rank = default_truncation(sys);
    let requested = truncation.unwrap_or(rank);
    if requested == 0 {
        return Err(Error::InvalidArgument("Picard truncation must be positive".into()));
    }
    let nt = requested.min(rank);
    let values = evaluate_grid(grid, |z| Ok(reciprocal(picard_sum(sys, z, nt))))?;
    Ok(
        IndicatorField::new(grid.clone(), values, Method::FactorizationPicard, true)?
            .with_parameter("truncation", nt)
            .with_parameter("truncated", requested > rank),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farfield_op::{assemble, factorization_solve, spectral_decompose};
    use crate::forward::synthesize_disc;
    use crate::geometry::{make_direction_set, Aperture};
    use crate::specialfun::WaveContext;

    fn disc_system(n: usize) -> SpectralSystem {
        let ctx = WaveContext::new(2.0).unwrap();
        let set = make_direction_set(n, Aperture::Full).unwrap();
        let data = synthesize_disc(1.0, Point::zeros(), &ctx, &set, &set).unwrap();
        spectral_decompose(&assemble(&data).unwrap()).unwrap()
    }

    fn ray_grid() -> SamplingGrid {
        SamplingGrid::new([-4.0, 4.0, -0.1, 0.1], 40, 2).unwrap()
    }

    #[test]
    fn lsm_centre_beats_far_outside() {
        let sys = disc_system(64);
        let grid = SamplingGrid::new([-3.5, 3.5, -0.5, 0.5], 7, 2).unwrap();
        let f = lsm(&sys, &grid, Regularization::Fixed(1e-8)).unwrap();
        let centre = f.value(3, 0);
        let outside = f.value(0, 0);
        assert!(centre / outside >= 10.0, "{centre} {outside}");
        assert_eq!(f.parameter("regularization"), Some("fixed"));
    }

    #[test]
    fn huge_alpha_limit() {
        // ‖g_α‖ → ‖F* f‖/α: the field grows without bound at every point
        let sys = disc_system(32);
        let grid = ray_grid();
        let a = lsm(&sys, &grid, Regularization::Fixed(1e10)).unwrap();
        let b = lsm(&sys, &grid, Regularization::Fixed(1e12)).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((y / x / 100.0 - 1.0).abs() < 1e-6);
        }
        assert!(b.min() > 1e10);
    }

    #[test]
    fn regularized_factorization_matches_dense_norm() {
        let sys = disc_system(32);
        let grid = SamplingGrid::new([-2.0, 2.0, -2.0, 2.0], 3, 3).unwrap();
        let alpha = 1e-3;
        let f = factorization_regularized(&sys, &grid, Regularization::Fixed(alpha)).unwrap();
        for (i, z) in grid.points().iter().enumerate() {
            let g = factorization_solve(&sys, &rhs_point_source(z, sys.directions(), sys.ctx()), alpha).unwrap();
            assert!((f.values()[i] * g.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn regularized_factorization_converges_inside() {
        let sys = disc_system(64);
        let z = Point::new(0.2, -0.1);
        let f = rhs_point_source(&z, sys.directions(), sys.ctx());
        let p = TikhonovProblem::factorization(&sys, &f);
        let norms: Vec<f64> = [1e-4, 1e-6, 1e-8, 1e-10].iter().map(|a| p.solution_norm(*a)).collect();
        for w in norms.windows(2) {
            assert!((w[1] - w[0]).abs() <= 0.05 * w[0]);
        }
    }

    #[test]
    fn picard_sum_diverges_only_outside() {
        let sys = disc_system(64);
        let rank = default_truncation(&sys);
        let inside = Point::new(0.3, 0.0);
        let outside = Point::new(1.8, 0.0);
        let growth = |z: &Point| picard_sum(&sys, z, rank) / picard_sum(&sys, z, rank / 2);
        assert!(growth(&inside) < 1.1);
        assert!(growth(&outside) > 3.0 * growth(&inside));
    }

    #[test]
    fn picard_truncation_is_capped() {
        let sys = disc_system(32);
        let f = factorization_picard(&sys, &ray_grid(), Some(1000)).unwrap();
        assert_eq!(f.parameter("truncated"), Some("true"));
        assert_eq!(
            f.parameter("truncation").unwrap().parse::<usize>().unwrap(),
            default_truncation(&sys)
        );
        assert!(factorization_picard(&sys, &ray_grid(), Some(0)).is_err());
    }

    #[test]
    fn morozov_needs_positive_delta() {
        let sys = disc_system(16);
        assert!(lsm(&sys, &ray_grid(), Regularization::Morozov(0.0)).is_err());
        assert!(lsm(&sys, &ray_grid(), Regularization::Fixed(-1.0)).is_err());
    }
}
