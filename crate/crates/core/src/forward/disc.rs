use std::f64::consts::PI;

use nalgebra::Vector2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Direction, Point};
use crate::specialfun::{bessel_j_orders, hankel1_orders, WaveContext};

/// Separation-of-variables solution for a sound-soft disc.
///
/// Holds the ratios `J_n(ka) / H_n^{(1)}(ka)` for `n = 0..=order`, with
/// `order = ⌈ka⌉ + 40`.
#[derive(Debug, Clone)]
pub struct DiscSeries {
    radius: f64,
    center: Point,
    ctx: WaveContext,
    ratios: Vec<Complex64>,
}

impl DiscSeries {
    pub fn new(radius: f64, center: Point, ctx: WaveContext) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "disc radius must be positive, got {radius}"
            )));
        }
        let ka = ctx.k() * radius;
        let order = ka.ceil() as usize + 40;
        let j = bessel_j_orders(order, ka)?;
        let h = hankel1_orders(order, ka)?;
        let ratios: Vec<Complex64> = j.iter().zip(&h).map(|(j, h)| *j / h).collect();
        let tail = ratios[order].norm();
        if !(tail < 1e-14) {
            return Err(Error::Domain(format!(
                "disc series tail coefficient {tail:e} not below 1e-14"
            )));
        }
        Ok(Self {
            radius,
            center,
            ctx,
            ratios,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn order(&self) -> usize {
        self.ratios.len() - 1
    }

    /// `J_n(ka) / H_n^{(1)}(ka)`; even in `n`.
    pub fn ratio(&self, n: i32) -> Complex64 {
        self.ratios.get(n.unsigned_abs() as usize).copied().unwrap_or_default()
    }

    /// Far-field coefficient prefactor `-√(2/(πk)) e^{-iπ/4}`.
    fn farfield_prefactor(&self) -> Complex64 {
        -(2.0 / (PI * self.ctx.k())).sqrt() * Complex64::from_polar(1.0, -PI / 4.0)
    }

    /// `u_∞(x̂, d)`.
    pub fn farfield(&self, xhat: &Direction, d: &Direction) -> Complex64 {
        let phi = xhat.angle() - d.angle();
        let mut sum = self.ratios[0];
        for (n, r) in self.ratios.iter().enumerate().skip(1) {
            sum += 2.0 * r * (n as f64 * phi).cos();
        }
        let k = self.ctx.k();
        let shift = Complex64::from_polar(1.0, k * (d.vector() - xhat.vector()).dot(&self.center));
        self.farfield_prefactor() * sum * shift
    }

    /// Eigenvalue of the far-field operator `g ↦ ∫ u_∞(·, d) g(d) ds(d)` on
    /// `e^{inθ}` for the centred disc: `2π · prefactor · J_n/H_n`.
    pub fn operator_eigenvalue(&self, n: i32) -> Complex64 {
        2.0 * PI * self.farfield_prefactor() * self.ratio(n)
    }

    fn polar(&self, x: &Point) -> Result<(f64, f64)> {
        let rel = x - self.center;
        let r = rel.norm();
        if r < self.radius {
            return Err(Error::Domain(format!(
                "point at distance {r} from the centre lies inside the disc"
            )));
        }
        Ok((r, rel.y.atan2(rel.x)))
    }

    /// Scattered field and its gradient for the plane wave `e^{ikd·x}`.
    pub fn scattered_with_gradient(&self, x: &Point, d: &Direction) -> Result<(Complex64, Vector2<Complex64>)> {
        let (r, theta) = self.polar(x)?;
        let k = self.ctx.k();
        let n_max = self.order();
        let h = hankel1_orders(n_max + 1, k * r)?;
        let mut u = Complex64::default();
        let mut du_dr = Complex64::default();
        let mut du_dtheta = Complex64::default();
        let i = Complex64::i();
        for n in -(n_max as i32)..=(n_max as i32) {
            let m = n.unsigned_abs() as usize;
            let sign = if n < 0 && m % 2 == 1 { -1.0 } else { 1.0 };
            let hn = sign * h[m];
            let dh = if m == 0 {
                -h[1]
            } else {
                sign * 0.5 * (h[m - 1] - h[m + 1])
            };
            let c = -i.powi(n) * self.ratio(n) * Complex64::from_polar(1.0, n as f64 * (theta - d.angle()));
            u += c * hn;
            du_dr += c * k * dh;
            du_dtheta += c * hn * i * n as f64;
        }
        let phase = Complex64::from_polar(1.0, k * d.vector().dot(&self.center));
        let (s, co) = theta.sin_cos();
        let grad = Vector2::new(
            phase * (du_dr * co - du_dtheta * s / r),
            phase * (du_dr * s + du_dtheta * co / r),
        );
        Ok((phase * u, grad))
    }

    pub fn scattered(&self, x: &Point, d: &Direction) -> Result<Complex64> {
        Ok(self.scattered_with_gradient(x, d)?.0)
    }

    /// Scattered field of the point source `Φ(·, z)`, both `x` and `z`
    /// outside the disc.
    pub fn point_source_scattered(&self, x: &Point, z: &Point) -> Result<Complex64> {
        let (rx, tx) = self.polar(x)?;
        let (rz, tz) = self.polar(z)?;
        let k = self.ctx.k();
        // the series converges like (a² / (|x||z|))^n
        let q = self.radius * self.radius / (rx * rz);
        let extra = if q < 1.0 { (36.0 / -q.ln()).ceil() as usize } else { 0 };
        let n_max = self.order().max(extra).min(400);
        let ka = k * self.radius;
        let jr = bessel_j_orders(n_max, ka)?;
        let hr = hankel1_orders(n_max, ka)?;
        let hx = hankel1_orders(n_max, k * rx)?;
        let hz = hankel1_orders(n_max, k * rz)?;
        let mut sum = jr[0] / hr[0] * hx[0] * hz[0];
        for n in 1..=n_max {
            let term = jr[n] / hr[n] * hx[n] * hz[n];
            if !term.is_finite() {
                break;
            }
            sum += 2.0 * term * (n as f64 * (tx - tz)).cos();
        }
        Ok(Complex64::new(0.0, -0.25) * sum)
    }
}

/// `u_∞(x̂, d)` for a sound-soft disc of radius `a` centred at `center`.
pub fn disc_farfield(a: f64, center: Point, ctx: &WaveContext, xhat: &Direction, d: &Direction) -> Result<Complex64> {
    Ok(DiscSeries::new(a, center, *ctx)?.farfield(xhat, d))
}
