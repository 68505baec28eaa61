//! Integer-order Bessel and Hankel functions of real argument, and the
//! fundamental solution of the 2D Helmholtz equation.
//!
//! `J_n` comes from Miller's downward recurrence normalised by
//! `J_0 + 2 Σ J_2k = 1`. `Y_0` and `Y_1` are then obtained from their Neumann
//! series in even/odd `J`'s, and higher `Y_n` from the upward recurrence,
//! which is stable for the second kind. Everything is computed on the fly;
//! there are no tables.

use nalgebra::Vector2;
use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, PI};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest order the crate promises accuracy for.
pub const MAX_ORDER: usize = 60;

/// Wave number together with the 2D far-field normalisation
/// `γ = e^{iπ/4} / √(8πk)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveContext {
    k: f64,
    gamma: Complex64,
}

impl WaveContext {
    pub fn new(k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "wave number must be positive and finite, got {k}"
            )));
        }
        let gamma = Complex64::from_polar(1.0, PI / 4.0) / (8.0 * PI * k).sqrt();
        Ok(Self { k, gamma })
    }

    #[inline]
    pub fn k(&self) -> f64 {
        self.k
    }

    /// Far-field constant: the far field of `Φ(·, z)` is `γ e^{-ik x̂·z}`.
    #[inline]
    pub fn gamma(&self) -> Complex64 {
        self.gamma
    }
}

fn check_arg(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("non-finite argument {x}")));
    }
    if x < 0.0 {
        return Err(Error::Domain(format!("negative argument {x}")));
    }
    Ok(())
}

/// Miller start order: comfortably above both `nmax` and the turning point `x`.
fn miller_start(nmax: usize, x: f64) -> usize {
    let base = (nmax as f64).max(x).max(1.0);
    let m = (base + 20.0 + 2.0 * (40.0 * base).sqrt()).ceil() as usize;
    m + (m & 1)
}

/// `J_0(x) .. J_m(x)` with `m ≥ nmax` the Miller start order. `x > 0`.
fn miller_j(nmax: usize, x: f64) -> Vec<f64> {
    const BIG: f64 = 1e250;
    let m = miller_start(nmax, x);
    let mut j = vec![0.0; m + 2];
    j[m] = 1e-30;
    for n in (1..=m).rev() {
        j[n - 1] = (2.0 * n as f64 / x) * j[n] - j[n + 1];
        if j[n - 1].abs() > BIG {
            for v in &mut j[n - 1..] {
                *v /= BIG;
            }
        }
    }
    let norm = j[0] + 2.0 * j[2..=m].iter().step_by(2).sum::<f64>();
    j.truncate(m + 1);
    for v in &mut j {
        *v /= norm;
    }
    j
}

/// `Y_0` and `Y_1` from the Neumann series in a full Miller table.
fn y01_from_table(j: &[f64], x: f64) -> (f64, f64) {
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = FRAC_2_PI * (log_term * j[0] - 2.0 * s0);
    let y1 = FRAC_2_PI * (log_term * j[1] - j[0] / x + s1);
    (y0, y1)
}

/// `J_0(x), …, J_nmax(x)` for `x ≥ 0`.
pub fn bessel_j_orders(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    if x == 0.0 {
        let mut out = vec![0.0; nmax + 1];
        out[0] = 1.0;
        return Ok(out);
    }
    let mut j = miller_j(nmax, x);
    j.truncate(nmax + 1);
    Ok(j)
}

/// `Y_0(x), …, Y_nmax(x)` for `x > 0`.
pub fn bessel_y_orders(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    if x == 0.0 {
        return Err(Error::Domain("Y_n is singular at 0".into()));
    }
    let j = miller_j(nmax.max(1), x);
    Ok(y_upward(nmax, x, &j))
}

fn y_upward(nmax: usize, x: f64, j: &[f64]) -> Vec<f64> {
    let (y0, y1) = y01_from_table(j, x);
    let mut y = Vec::with_capacity(nmax + 2);
    y.push(y0);
    y.push(y1);
    for n in 1..nmax {
        let next = (2.0 * n as f64 / x) * y[n] - y[n - 1];
        y.push(next);
    }
    y.truncate(nmax + 1);
    y
}

/// `H_n^{(1)}(x)` for `n = 0..=nmax`, `x > 0`.
pub fn hankel1_orders(nmax: usize, x: f64) -> Result<Vec<Complex64>> {
    check_arg(x)?;
    if x == 0.0 {
        return Err(Error::Domain("H_n^(1) is singular at 0".into()));
    }
    let j = miller_j(nmax.max(1), x);
    let y = y_upward(nmax, x, &j);
    Ok((0..=nmax).map(|n| Complex64::new(j[n], y[n])).collect())
}

fn reflect_sign(n: i32) -> f64 {
    if n < 0 && n % 2 != 0 {
        -1.0
    } else {
        1.0
    }
}

/// Bessel function of the first kind `J_n(x)`, `x ≥ 0`, any integer order.
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    let m = n.unsigned_abs() as usize;
    Ok(reflect_sign(n) * bessel_j_orders(m, x)?[m])
}

/// Bessel function of the second kind `Y_n(x)`, `x > 0`.
pub fn bessel_y(n: i32, x: f64) -> Result<f64> {
    let m = n.unsigned_abs() as usize;
    Ok(reflect_sign(n) * bessel_y_orders(m, x)?[m])
}

/// Hankel function of the first kind `H_n^{(1)}(x) = J_n(x) + i Y_n(x)`.
pub fn hankel1(n: i32, x: f64) -> Result<Complex64> {
    let m = n.unsigned_abs() as usize;
    Ok(reflect_sign(n) * hankel1_orders(m, x)?[m])
}

/// Derivative `d/dx H_n^{(1)}(x)` via `(H_{n-1} - H_{n+1}) / 2`.
pub fn hankel1_derivative(n: i32, x: f64) -> Result<Complex64> {
    let m = n.unsigned_abs() as usize;
    let h = hankel1_orders(m + 1, x)?;
    let d = if m == 0 { -h[1] } else { 0.5 * (h[m - 1] - h[m + 1]) };
    Ok(reflect_sign(n) * d)
}

/// Derivative `d/dx J_n(x)`.
pub fn bessel_j_derivative(n: i32, x: f64) -> Result<f64> {
    let m = n.unsigned_abs() as usize;
    let j = bessel_j_orders(m + 1, x)?;
    let d = if m == 0 { -j[1] } else { 0.5 * (j[m - 1] - j[m + 1]) };
    Ok(reflect_sign(n) * d)
}

/// `(H_0^{(1)}(x), H_1^{(1)}(x))` for kernel assembly. `x > 0`, unchecked.
#[inline]
pub(crate) fn hankel01(x: f64) -> (Complex64, Complex64) {
    let j = miller_j(1, x);
    let (y0, y1) = y01_from_table(&j, x);
    (Complex64::new(j[0], y0), Complex64::new(j[1], y1))
}

/// Fundamental solution `Φ(x, z) = (i/4) H_0^{(1)}(k|x - z|)`.
pub fn fundamental_solution(x: &Point, z: &Point, ctx: &WaveContext) -> Result<Complex64> {
    let r = (x - z).norm();
    if r < 1e-14 {
        return Err(Error::CoincidentPoints(r));
    }
    let (h0, _) = hankel01(ctx.k * r);
    Ok(Complex64::new(0.0, 0.25) * h0)
}

/// Gradient of `Φ(·, z)` at `x`: `-(ik/4) H_1^{(1)}(k|x-z|) (x - z)/|x - z|`.
pub fn grad_fundamental_solution(x: &Point, z: &Point, ctx: &WaveContext) -> Result<Vector2<Complex64>> {
    let diff = x - z;
    let r = diff.norm();
    if r < 1e-14 {
        return Err(Error::CoincidentPoints(r));
    }
    let (_, h1) = hankel01(ctx.k * r);
    let scale = Complex64::new(0.0, -0.25 * ctx.k) * h1 / r;
    Ok(Vector2::new(scale * diff.x, scale * diff.y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// `J_n(x) = (1/π) ∫_0^π cos(nτ - x sin τ) dτ`; the integrand extends to a
    /// smooth periodic function so the trapezoid rule converges spectrally.
    fn j_integral(n: i32, x: f64) -> f64 {
        let m = 4096;
        let h = 2.0 * PI / m as f64;
        (0..m)
            .map(|i| {
                let t = i as f64 * h;
                (n as f64 * t - x * t.sin()).cos()
            })
            .sum::<f64>()
            * h
            / (2.0 * PI)
    }

    fn j0_series(x: f64) -> f64 {
        let q = -0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            term *= q / (k as f64 * k as f64);
            sum += term;
        }
        sum
    }

    /// Log series of `Y_0` with harmonic numbers.
    fn y0_series(x: f64) -> f64 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut harmonic = 0.0;
        let mut tail = 0.0;
        for k in 1..40 {
            term *= q / (k as f64 * k as f64);
            harmonic += 1.0 / k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            tail += sign * harmonic * term;
        }
        FRAC_2_PI * ((0.5 * x).ln() + EULER_GAMMA) * j0_series(x) + FRAC_2_PI * tail
    }

    /// Hankel asymptotic expansion, accurate to machine precision for x ≥ 60.
    fn h_asymptotic(n: i32, x: f64) -> Complex64 {
        let mu = 4.0 * (n as f64).powi(2);
        let mut a = 1.0;
        let mut sum = Complex64::new(1.0, 0.0);
        let mut ik = Complex64::new(1.0, 0.0);
        for k in 1..40 {
            let odd = (2 * k - 1) as f64;
            a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
            ik *= Complex64::i();
            let t = ik * a;
            sum += t;
            if a.abs() < 1e-18 {
                break;
            }
        }
        let phase = x - n as f64 * PI / 2.0 - PI / 4.0;
        (2.0 / (PI * x)).sqrt() * Complex64::from_polar(1.0, phase) * sum
    }

    #[test]
    fn j_at_origin() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(7, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn j0_of_one_matches_series() {
        let oracle = j0_series(1.0);
        assert_relative_eq!(oracle, 0.765_197_686_557_966_6, max_relative = 1e-15);
        assert_relative_eq!(bessel_j(0, 1.0).unwrap(), oracle, max_relative = 1e-14);
    }

    #[test]
    fn hankel_at_one() {
        let h = hankel1(0, 1.0).unwrap();
        assert_relative_eq!(h.re, 0.765_197_686_557_966_6, max_relative = 1e-13);
        assert_relative_eq!(h.im, 0.088_256_964_215_676_96, max_relative = 1e-12);
        assert_relative_eq!(y0_series(1.0), 0.088_256_964_215_676_96, max_relative = 1e-14);
    }

    #[test]
    fn y0_small_argument_log_series() {
        for x in [1e-6, 1e-3, 0.1, 2.0] {
            let got = hankel1(0, x).unwrap().im;
            assert_relative_eq!(got, y0_series(x), max_relative = 1e-12);
        }
    }

    #[test]
    fn j_against_integral_representation() {
        for &x in &[0.3, 1.7, 5.0, 11.9, 12.1, 25.0, 60.0, 100.0] {
            let table = bessel_j_orders(60, x).unwrap();
            for n in [0usize, 1, 2, 5, 10, 30, 60] {
                let oracle = j_integral(n as i32, x);
                let err = (table[n] - oracle).abs();
                // relative where the value is not near a zero, absolute otherwise
                let tol = 1e-12 * oracle.abs().max(1e-3);
                assert!(err <= tol, "J_{n}({x}): {} vs {oracle}", table[n]);
            }
        }
    }

    #[test]
    fn hankel_large_argument_against_asymptotics() {
        for &x in &[60.0, 80.0, 100.0] {
            let table = hankel1_orders(12, x).unwrap();
            for n in 0..=12 {
                let oracle = h_asymptotic(n as i32, x);
                assert!((table[n] - oracle).norm() <= 1e-12 * oracle.norm(), "H_{n}({x})");
            }
        }
    }

    #[test]
    fn negative_orders_reflect() {
        let x = 3.3;
        assert_relative_eq!(bessel_j(-3, x).unwrap(), -bessel_j(3, x).unwrap());
        assert_relative_eq!(bessel_j(-4, x).unwrap(), bessel_j(4, x).unwrap());
        assert_relative_eq!(bessel_y(-3, x).unwrap(), -bessel_y(3, x).unwrap());
    }

    #[test]
    fn domain_errors() {
        assert!(hankel1(0, 0.0).is_err());
        assert!(hankel1(0, -1.0).is_err());
        assert!(bessel_j(0, f64::NAN).is_err());
        assert!(bessel_j(0, f64::INFINITY).is_err());
        assert!(WaveContext::new(0.0).is_err());
    }

    fn wronskian_residual(n: i32, x: f64) -> f64 {
        let m = n as usize;
        let j = bessel_j_orders(m + 1, x).unwrap();
        let y = bessel_y_orders(m + 1, x).unwrap();
        let (jp, yp) = if m == 0 {
            (-j[1], -y[1])
        } else {
            (0.5 * (j[m - 1] - j[m + 1]), 0.5 * (y[m - 1] - y[m + 1]))
        };
        let w = j[m] * yp - jp * y[m];
        let expect = 2.0 / (PI * x);
        ((w - expect) / expect).abs()
    }

    #[test]
    fn wronskian_identity() {
        assert!(wronskian_residual(3, 2.5) <= 1e-12);
        for n in 0..=20 {
            for &x in &[0.1, 0.5, 1.0, 2.5, 7.0, 13.0, 24.0, 37.5, 50.0] {
                let r = wronskian_residual(n, x);
                assert!(r <= 1e-12, "n={n} x={x} residual {r:e}");
            }
        }
    }

    #[test]
    fn j_recurrence_consistency() {
        for &x in &[0.5, 3.0, 9.0, 20.0, 45.0] {
            let j = bessel_j_orders(40, x).unwrap();
            for n in 1..40 {
                let lhs = j[n - 1] + j[n + 1];
                let rhs = 2.0 * n as f64 / x * j[n];
                let scale = lhs.abs().max(rhs.abs()).max(1e-300);
                // skip pairs where both sides are dominated by rounding
                if scale < 1e-250 {
                    continue;
                }
                assert!(((lhs - rhs) / scale).abs() <= 1e-11, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn fundamental_solution_values() {
        let ctx = WaveContext::new(1.0).unwrap();
        let x = Point::new(0.3, 0.4);
        let z = Point::new(0.3, 1.4);
        let phi = fundamental_solution(&x, &z, &ctx).unwrap();
        let expect = Complex64::new(0.0, 0.25) * hankel1(0, 1.0).unwrap();
        assert_relative_eq!(phi.re, expect.re, max_relative = 1e-14);
        assert_relative_eq!(phi.im, expect.im, max_relative = 1e-14);
        assert!(matches!(
            fundamental_solution(&x, &x, &ctx),
            Err(Error::CoincidentPoints(_))
        ));
        assert!(grad_fundamental_solution(&x, &x, &ctx).is_err());
    }

    #[test]
    fn far_field_limit_of_fundamental_solution() {
        let ctx = WaveContext::new(2.0).unwrap();
        let z = Point::new(0.4, -0.7);
        let theta: f64 = 0.9;
        let xhat = Point::new(theta.cos(), theta.sin());
        let r = 1e4;
        let phi = fundamental_solution(&(xhat * r), &z, &ctx).unwrap();
        let scaled = phi * r.sqrt() * Complex64::from_polar(1.0, -ctx.k() * r);
        let expect = ctx.gamma() * Complex64::from_polar(1.0, -ctx.k() * xhat.dot(&z));
        assert!((scaled - expect).norm() <= 1e-3 * expect.norm());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let ctx = WaveContext::new(2.0).unwrap();
        let z = Point::new(0.1, 0.2);
        let x = z + Point::new(0.7 * 0.6, 0.7 * 0.8);
        let g = grad_fundamental_solution(&x, &z, &ctx).unwrap();
        let h = 1e-6;
        for axis in 0..2 {
            let mut e = Point::zeros();
            e[axis] = h;
            let fd = (fundamental_solution(&(x + e), &z, &ctx).unwrap()
                - fundamental_solution(&(x - e), &z, &ctx).unwrap())
                / (2.0 * h);
            assert!((fd - g[axis]).norm() <= 1e-7, "axis {axis}");
        }
    }

    #[test]
    fn gradient_blows_up_like_inverse_distance() {
        let ctx = WaveContext::new(1.0).unwrap();
        let z = Point::zeros();
        for &r in &[1e-3, 1e-4, 1e-5] {
            let g = grad_fundamental_solution(&Point::new(r, 0.0), &z, &ctx).unwrap();
            // small-argument H_1 ≈ -2i/(π k r), so |∇Φ| ≈ 1/(2π r)
            let expect = 1.0 / (2.0 * PI * r);
            assert_relative_eq!(g.x.norm(), expect, max_relative = 1e-4);
        }
    }

    #[test]
    fn discrete_helmholtz_residual() {
        let ctx = WaveContext::new(2.0).unwrap();
        let z = Point::new(0.0, 0.0);
        let h = 1e-3;
        for &(px, py) in &[(0.5, 0.0), (0.3, 0.6), (-1.2, 0.8), (2.0, -2.5)] {
            let x = Point::new(px, py);
            let f = |dx: f64, dy: f64| fundamental_solution(&(x + Point::new(dx, dy)), &z, &ctx).unwrap();
            let lap = (f(h, 0.0) + f(-h, 0.0) + f(0.0, h) + f(0.0, -h) - 4.0 * f(0.0, 0.0)) / (h * h);
            let res = lap + ctx.k() * ctx.k() * f(0.0, 0.0);
            assert!(res.norm() <= 1e-4 * f(0.0, 0.0).norm(), "at {x:?}: {res}");
        }
    }

    proptest! {
        #[test]
        fn fundamental_solution_is_symmetric(
            ax in -3.0f64..3.0, ay in -3.0f64..3.0, bx in -3.0f64..3.0, by in -3.0f64..3.0,
        ) {
            let a = Point::new(ax, ay);
            let b = Point::new(bx, by);
            prop_assume!((a - b).norm() > 1e-3);
            let ctx = WaveContext::new(1.7).unwrap();
            let p = fundamental_solution(&a, &b, &ctx).unwrap();
            let q = fundamental_solution(&b, &a, &ctx).unwrap();
            prop_assert!((p - q).norm() <= 1e-15 * p.norm());
            let ga = grad_fundamental_solution(&a, &b, &ctx).unwrap();
            let gb = grad_fundamental_solution(&b, &a, &ctx).unwrap();
            prop_assert!((ga + gb).norm() <= 1e-14 * ga.norm());
        }

        #[test]
        fn wronskian_holds_on_random_points(n in 0i32..=20, x in 0.1f64..50.0) {
            prop_assert!(wronskian_residual(n, x) <= 1e-12);
        }
    }
}
