use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Algebraic least-squares circle through points of the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFit {
    pub center: Complex64,
    pub radius: f64,
    /// `max_i | |p_i - c| - r |`.
    pub max_deviation: f64,
    /// `| |c| - r |`: distance of the circle from the origin.
    pub origin_gap: f64,
}

pub fn fit_circle(points: &[Complex64]) -> Result<CircleFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument("circle fit needs 3 points".into()));
    }
    // x² + y² + D x + E y + F = 0
    let mut m = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for p in points {
        let row = Vector3::new(p.re, p.im, 1.0);
        let b = -(p.re * p.re + p.im * p.im);
        m += row * row.transpose();
        rhs += row * b;
    }
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Decomposition("collinear points in circle fit".into()))?;
    let center = Complex64::new(-0.5 * sol[0], -0.5 * sol[1]);
    let radius = (center.norm_sqr() - sol[2]).max(0.0).sqrt();
    let max_deviation = points
        .iter()
        .map(|p| ((p - center).norm() - radius).abs())
        .fold(0.0, f64::max);
    Ok(CircleFit {
        center,
        radius,
        max_deviation,
        origin_gap: (center.norm() - radius).abs(),
    })
}

/// Least-squares scalar `c` in `F - F* ≈ c F*F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityFit {
    pub coefficient: Complex64,
    /// `‖F - F* - c F*F‖_F / ‖F - F*‖_F`.
    pub relative_residual: f64,
}

pub fn scattering_identity_fit(f: &DMatrix<Complex64>) -> IdentityFit {
    let lhs = f - f.adjoint();
    let ff = f.adjoint() * f;
    let num: Complex64 = ff.iter().zip(lhs.iter()).map(|(a, b)| a.conj() * b).sum();
    let den: f64 = ff.iter().map(|a| a.norm_sqr()).sum();
    let c = num / den;
    let res = (&lhs - &ff * c).norm() / lhs.norm();
    IdentityFit {
        coefficient: c,
        relative_residual: res,
    }
}
