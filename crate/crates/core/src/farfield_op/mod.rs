//! The discrete far-field operator and its spectral machinery.
//!
//! Quadrature weights are folded into the matrix, `F = U W` with
//! `U_ij = u_∞(x̂_i, d_j)`, so that eigenvalues approximate those of the
//! integral operator. All decompositions are carried out on the congruent
//! matrix `A = W^{1/2} U W^{1/2}`, which represents `F` in coordinates that
//! are orthonormal for the weighted inner product `(f, g) = Σ w_i f_i conj(g_i)`.

mod fits;
mod herglotz;
mod tikhonov;

pub use fits::{fit_circle, scattering_identity_fit, CircleFit, IdentityFit};
pub use herglotz::{
    boundary_misfit, herglotz_evaluate, herglotz_evaluate_with_gradient, point_source_density,
    point_source_density_for_misfit, runge_boundary_function, transform_density, HerglotzDensity, PointSourceDensity,
    PointSourceSolver,
};
pub use tikhonov::{factorization_solve, morozov_alpha, tikhonov_solve, Regularization, TikhonovProblem};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::FarFieldData;
use crate::geometry::{DirectionSet, Point};
use crate::specialfun::WaveContext;

/// `F = U W` on a single direction set.
#[derive(Debug, Clone)]
pub struct DiscreteFarFieldOperator {
    matrix: DMatrix<Complex64>,
    directions: DirectionSet,
    ctx: WaveContext,
    noise_level: f64,
}

/// Weighted far-field operator from square data on one direction set.
pub fn assemble(data: &FarFieldData) -> Result<DiscreteFarFieldOperator> {
    if !data.observation.same_as(&data.incidence) {
        return Err(Error::InvalidArgument(
            "operator work needs identical observation and incidence sets".into(),
        ));
    }
    let w = data.incidence.weights();
    let matrix = DMatrix::from_fn(data.matrix.nrows(), data.matrix.ncols(), |i, j| {
        data.matrix[(i, j)] * w[j]
    });
    Ok(DiscreteFarFieldOperator {
        matrix,
        directions: data.incidence.clone(),
        ctx: data.ctx()?,
        noise_level: data.noise_level,
    })
}

impl DiscreteFarFieldOperator {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.directions
    }

    pub fn ctx(&self) -> &WaveContext {
        &self.ctx
    }

    pub fn noise_level(&self) -> f64 {
        self.noise_level
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn apply(&self, g: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * g
    }

    fn sqrt_weights(&self) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.directions.weights().iter().map(|w| w.sqrt()))
    }

    /// `A = W^{1/2} U W^{1/2}`.
    pub fn orthonormal_matrix(&self) -> DMatrix<Complex64> {
        let s = self.sqrt_weights();
        DMatrix::from_fn(self.len(), self.len(), |i, j| {
            // F_ij = U_ij w_j, so A_ij = s_i F_ij / s_j
            self.matrix[(i, j)] * s[i] / s[j]
        })
    }

    /// `‖A A* - A* A‖_F / σ_1²`.
    pub fn normality_defect(&self) -> f64 {
        let a = self.orthonormal_matrix();
        let ah = a.adjoint();
        let s1 = crate::forward::spectral_norm(&a);
        (&a * &ah - &ah * &a).norm() / (s1 * s1)
    }
}

/// Eigen- and singular systems of a far-field operator, in orthonormal
/// coordinates.
#[derive(Debug, Clone)]
pub struct SpectralSystem {
    directions: DirectionSet,
    ctx: WaveContext,
    noise_level: f64,
    sqrt_w: DVector<f64>,
    a: DMatrix<Complex64>,
    singular_values: Vec<f64>,
    left: DMatrix<Complex64>,
    right: DMatrix<Complex64>,
    eigen: Option<EigenSystem>,
    eigen_skipped: Option<String>,
}

#[derive(Debug, Clone)]
struct EigenSystem {
    values: Vec<Complex64>,
    vectors: DMatrix<Complex64>,
}

/// Normality tolerance below which the eigen route is taken.
const NORMALITY_TOL: f64 = 1e-6;

/// Singular system always; eigensystem via complex Schur form when the data
/// are noise-free and the operator is numerically normal.
pub fn spectral_decompose(op: &DiscreteFarFieldOperator) -> Result<SpectralSystem> {
    let a = op.orthonormal_matrix();
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Decomposition("operator has non-finite entries".into()));
    }
    let n = a.nrows();
    let svd = nalgebra::SVD::try_new(a.clone(), true, true, 1e-15, 10_000)
        .ok_or_else(|| Error::Decomposition("SVD did not converge".into()))?;
    let u = svd
        .u
        .ok_or_else(|| Error::Decomposition("missing left singular vectors".into()))?;
    let vt = svd
        .v_t
        .ok_or_else(|| Error::Decomposition("missing right singular vectors".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let left = DMatrix::from_fn(n, n, |r, c| u[(r, order[c])]);
    let right = DMatrix::from_fn(n, n, |r, c| vt[(order[c], r)].conj());

    let mut eigen = None;
    let mut eigen_skipped = None;
    if op.noise_level > 0.0 {
        eigen_skipped = Some(format!("noisy data (delta = {})", op.noise_level));
    } else {
        let defect = op.normality_defect();
        if defect > NORMALITY_TOL {
            eigen_skipped = Some(format!("operator not normal (defect {defect:e})"));
        } else {
            let schur = nalgebra::Schur::try_new(a.clone(), 1e-15, 10_000)
                .ok_or_else(|| Error::Decomposition("Schur iteration did not converge".into()))?;
            let (q, t) = schur.unpack();
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&i, &j| t[(j, j)].norm().total_cmp(&t[(i, i)].norm()));
            eigen = Some(EigenSystem {
                values: idx.iter().map(|&i| t[(i, i)]).collect(),
                vectors: DMatrix::from_fn(n, n, |r, c| q[(r, idx[c])]),
            });
        }
    }
    Ok(SpectralSystem {
        directions: op.directions.clone(),
        ctx: op.ctx,
        noise_level: op.noise_level,
        sqrt_w: op.sqrt_weights(),
        a,
        singular_values,
        left,
        right,
        eigen,
        eigen_skipped,
    })
}

impl SpectralSystem {
    pub fn len(&self) -> usize {
        self.singular_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.singular_values.is_empty()
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.directions
    }

    pub fn ctx(&self) -> &WaveContext {
        &self.ctx
    }

    pub fn noise_level(&self) -> f64 {
        self.noise_level
    }

    /// Descending singular values.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Eigenvalues by decreasing magnitude, if the eigen route was taken.
    pub fn eigenvalues(&self) -> Option<&[Complex64]> {
        self.eigen.as_ref().map(|e| e.values.as_slice())
    }

    /// Why the eigensystem was not computed.
    pub fn eigen_skipped(&self) -> Option<&str> {
        self.eigen_skipped.as_deref()
    }

    /// `√λ_n` on the branch with positive imaginary part.
    pub fn sqrt_eigenvalues(&self) -> Option<Vec<Complex64>> {
        self.eigenvalues().map(|v| {
            v.iter()
                .map(|l| {
                    let s = l.sqrt();
                    if s.im < 0.0 {
                        -s
                    } else {
                        s
                    }
                })
                .collect()
        })
    }

    /// Eigenvector `φ_n` as a density (weighted-orthonormal).
    pub fn eigenvector(&self, n: usize) -> Option<DVector<Complex64>> {
        let e = self.eigen.as_ref()?;
        Some(self.to_density(&e.vectors.column(n).into_owned()))
    }

    /// Right singular vector `v_n` as a density.
    pub fn right_singular_vector(&self, n: usize) -> DVector<Complex64> {
        self.to_density(&self.right.column(n).into_owned())
    }

    /// `b = W^{1/2} f`.
    pub fn to_orthonormal(&self, f: &DVector<Complex64>) -> DVector<Complex64> {
        f.component_mul(&self.sqrt_w.map(Complex64::from))
    }

    /// `f = W^{-1/2} b`.
    pub fn to_density(&self, b: &DVector<Complex64>) -> DVector<Complex64> {
        b.component_div(&self.sqrt_w.map(Complex64::from))
    }

    /// `F` itself, reconstructed from the orthonormal representation.
    pub fn operator_matrix(&self) -> DMatrix<Complex64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| self.a[(i, j)] * self.sqrt_w[j] / self.sqrt_w[i])
    }

    #[cfg(test)]
    pub(crate) fn orthonormal_matrix(&self) -> &DMatrix<Complex64> {
        &self.a
    }

    /// Coefficients `(f, v_n)` against the right singular vectors.
    pub fn right_coefficients(&self, f: &DVector<Complex64>) -> DVector<Complex64> {
        self.right.adjoint() * self.to_orthonormal(f)
    }

    /// Coefficients `(f, u_n)` against the left singular vectors.
    pub fn left_coefficients(&self, f: &DVector<Complex64>) -> DVector<Complex64> {
        self.left.adjoint() * self.to_orthonormal(f)
    }

    /// Numerical rank at relative threshold `rel`.
    pub fn rank(&self, rel: f64) -> usize {
        let s1 = self.singular_values.first().copied().unwrap_or(0.0);
        self.singular_values.iter().filter(|s| **s > rel * s1).count()
    }

    /// `‖Σ λ_n φ_n φ_n^* - A‖ / ‖A‖` (Frobenius), if eigen data exist.
    pub fn eigen_reconstruction_error(&self) -> Option<f64> {
        let e = self.eigen.as_ref()?;
        let d = DMatrix::from_diagonal(&DVector::from_vec(e.values.clone()));
        let r = &e.vectors * d * e.vectors.adjoint();
        Some((r - &self.a).norm() / self.a.norm())
    }

    /// `max_n ‖A φ_n - λ_n φ_n‖ / ‖A‖₂`, if eigen data exist.
    pub fn eigen_residual(&self) -> Option<f64> {
        let e = self.eigen.as_ref()?;
        let s1 = self.singular_values[0];
        Some(
            (0..self.len())
                .map(|n| {
                    let v = e.vectors.column(n);
                    (&self.a * v - v * e.values[n]).norm()
                })
                .fold(0.0, f64::max)
                / s1,
        )
    }
}

/// `Φ_∞(x̂_i, z) = γ e^{-ik x̂_i·z}`.
pub fn rhs_point_source(z: &Point, set: &DirectionSet, ctx: &WaveContext) -> DVector<Complex64> {
    test_function(z, set, ctx) * ctx.gamma()
}

/// `φ_z(x̂_i) = e^{-ik x̂_i·z}`.
pub fn test_function(z: &Point, set: &DirectionSet, ctx: &WaveContext) -> DVector<Complex64> {
    DVector::from_iterator(
        set.len(),
        set.nodes()
            .iter()
            .map(|d| Complex64::from_polar(1.0, -ctx.k() * d.vector().dot(z))),
    )
}
