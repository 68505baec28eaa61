use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{HerglotzDensity, SpectralSystem};
use crate::error::{Error, Result};

/// Choice of the Tikhonov parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Regularization {
    /// Fixed `α`.
    Fixed(f64),
    /// Morozov discrepancy principle at relative noise level `δ`.
    Morozov(f64),
}

/// A Tikhonov problem in diagonal form: minimise
/// `Σ_j |s_j c_j - β_j|² + perp + α Σ_j |c_j|²`.
///
/// Then `‖g_α‖² = Σ s_j²/(α+s_j²)² |β_j|²` and the squared discrepancy is
/// `Σ α²/(α+s_j²)² |β_j|² + perp`.
#[derive(Debug, Clone, PartialEq)]
pub struct TikhonovProblem {
    s: Vec<f64>,
    beta: Vec<f64>,
    perp: f64,
}

impl TikhonovProblem {
    /// `s_j ≥ 0`, `|β_j|²` given as magnitudes `|β_j|`.
    pub fn new(s: Vec<f64>, beta: Vec<f64>, perp: f64) -> Self {
        Self { s, beta, perp }
    }

    /// `F g = f`: `s = σ_j`, `β = (f, u_j)`.
    pub fn linear_sampling(sys: &SpectralSystem, f: &DVector<Complex64>) -> Self {
        let b = sys.to_orthonormal(f);
        let beta = sys.left_coefficients(f);
        Self::from_parts(sys.singular_values().to_vec(), &beta, b.norm_squared())
    }

    /// `(F*F)^{1/4} g = f`: `s = √σ_j`, `β = (f, v_j)`.
    pub fn factorization(sys: &SpectralSystem, f: &DVector<Complex64>) -> Self {
        let b = sys.to_orthonormal(f);
        let beta = sys.right_coefficients(f);
        let s = sys.singular_values().iter().map(|v| v.sqrt()).collect();
        Self::from_parts(s, &beta, b.norm_squared())
    }

    fn from_parts(s: Vec<f64>, beta: &DVector<Complex64>, total: f64) -> Self {
        let beta: Vec<f64> = beta.iter().map(|b| b.norm()).collect();
        let captured: f64 = beta.iter().map(|b| b * b).sum();
        Self {
            s,
            beta,
            perp: (total - captured).max(0.0),
        }
    }

    pub fn leading(&self) -> f64 {
        self.s.iter().copied().fold(0.0, f64::max)
    }

    pub fn solution_norm_squared(&self, alpha: f64) -> f64 {
        self.s
            .iter()
            .zip(&self.beta)
            .map(|(s, b)| {
                let d = alpha + s * s;
                s * s / (d * d) * b * b
            })
            .sum()
    }

    pub fn solution_norm(&self, alpha: f64) -> f64 {
        self.solution_norm_squared(alpha).sqrt()
    }

    pub fn discrepancy(&self, alpha: f64) -> f64 {
        let sum: f64 = self
            .s
            .iter()
            .zip(&self.beta)
            .map(|(s, b)| {
                let r = alpha / (alpha + s * s);
                r * r * b * b
            })
            .sum();
        (sum + self.perp).sqrt()
    }
}

/// LSM density `g_{z,α} = (αI + F*F)^{-1} F* f`, computed from the singular
/// system (equal to the eigen formula `Σ conj(λ)/(α+|λ|²) (f, φ) φ` for
/// normal operators).
pub fn tikhonov_solve(sys: &SpectralSystem, f: &DVector<Complex64>, alpha: f64) -> Result<HerglotzDensity> {
    check_alpha(alpha)?;
    let beta = sys.left_coefficients(f);
    let coeff = DVector::from_iterator(
        sys.len(),
        sys.singular_values()
            .iter()
            .zip(beta.iter())
            .map(|(s, b)| b * (s / (alpha + s * s))),
    );
    Ok(density_from(sys, &coeff))
}

/// Factorization density `(αI + (F*F)^{1/2})^{-1} (F*F)^{1/4} f`.
pub fn factorization_solve(sys: &SpectralSystem, f: &DVector<Complex64>, alpha: f64) -> Result<HerglotzDensity> {
    check_alpha(alpha)?;
    let beta = sys.right_coefficients(f);
    let coeff = DVector::from_iterator(
        sys.len(),
        sys.singular_values()
            .iter()
            .zip(beta.iter())
            .map(|(s, b)| b * (s.sqrt() / (alpha + s))),
    );
    Ok(density_from(sys, &coeff))
}

fn density_from(sys: &SpectralSystem, coeff: &DVector<Complex64>) -> HerglotzDensity {
    let n = sys.len();
    let v = DMatrix::from_fn(n, n, |r, c| sys.right_singular_vector(c)[r]);
    HerglotzDensity::new(sys.directions().clone(), v * coeff)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "regularization parameter must be positive, got {alpha}"
        )));
    }
    Ok(())
}

/// The `α` with `discrepancy(α) = δ ‖g_α‖`, by bisection on `log α` over
/// `[1e-16, 1e4]·s_1²`.
pub fn morozov_alpha(problem: &TikhonovProblem, delta: f64) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise level must be positive, got {delta}"
        )));
    }
    let s1 = problem.leading();
    if !(s1 > 0.0) {
        return Err(Error::DegenerateSpectrum(s1));
    }
    let f = |a: f64| problem.discrepancy(a) - delta * problem.solution_norm(a);
    let mut lo = (1e-16 * s1 * s1).ln();
    let mut hi = (1e4 * s1 * s1).ln();
    let (f_lo, f_hi) = (f(lo.exp()), f(hi.exp()));
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::NoSignChange {
            alpha_lo: lo.exp(),
            alpha_hi: hi.exp(),
            f_lo,
            f_hi,
        });
    }
    let mut d_lo = problem.discrepancy(lo.exp());
    let mut d_hi = problem.discrepancy(hi.exp());
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let d = problem.discrepancy(mid.exp());
        let slack = 1e-12 * d_hi;
        if d < d_lo - slack || d > d_hi + slack {
            return Err(Error::Decomposition("discrepancy is not monotone in alpha".into()));
        }
        if f(mid.exp()) < 0.0 {
            lo = mid;
            d_lo = d;
        } else {
            hi = mid;
            d_hi = d;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}
