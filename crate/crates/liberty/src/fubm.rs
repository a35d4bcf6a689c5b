//! Free unitary Brownian motion: exact moments, the implicit equation
//! for the Herglotz-type transform `kappa_t`, the spectral density on the
//! unit circle, and the support geometry.

use num_complex::Complex64;
use num_rational::BigRational as Rat;
use num_traits::One;
use rayon::prelude::*;
use thiserror::Error;

use crate::exp_poly::{rat, rat_int, ExpPoly, Time};

/// Exact `k`-th moment of the time-`t` law as an exponential polynomial:
/// `e^{-kt/2} * sum_{j=0}^{k-1} (-t)^j / j! * C(k, j+1) * k^{j-1}`.
pub fn moment_poly(k: u32) -> ExpPoly {
    assert!(k >= 1, "moments are defined for k >= 1");
    let kk = i64::from(k);
    let mut coeffs: Vec<Rat> = Vec::with_capacity(k as usize);
    let mut factorial = Rat::one();
    let mut k_power = rat(1, kk); // k^{j-1} starting at j = 0
    for j in 0..k {
        if j > 0 {
            factorial *= rat_int(i64::from(j));
            k_power *= rat_int(kk);
        }
        let sign = if j % 2 == 0 { 1 } else { -1 };
        let binom = binomial(kk, i64::from(j) + 1);
        coeffs.push(rat_int(sign) * binom * &k_power / &factorial);
    }
    ExpPoly::from_term(rat(-kk, 2), coeffs)
}

fn binomial(n: i64, k: i64) -> Rat {
    let mut out = Rat::one();
    for i in 0..k {
        out *= rat_int(n - i);
        out /= rat_int(i + 1);
    }
    out
}

/// Evaluate the `k`-th moment at a time (finite or the Haar limit).
pub fn moment(k: u32, t: &Time) -> f64 {
    moment_poly(k).eval(t).expect("all exponents are negative")
}

#[derive(Debug, Error)]
pub enum KappaError {
    #[error("continuation stalled at z = {z}: residual {residual} after {iterations} iterations, last iterate {last}")]
    NoConvergence {
        z: Complex64,
        last: Complex64,
        residual: f64,
        iterations: usize,
    },
}

const NEWTON_TOL: f64 = 1e-13;

/// One Newton solve, parametrized by `w = kappa - 1` so that precision
/// does not collapse when the solution hugs `kappa = 1` (large times):
/// the equation becomes `w/(w+2) e^{t w / 2} = z e^{-t/2}`.
fn newton_kappa(z: Complex64, t: f64, start: Complex64) -> Option<Complex64> {
    let zs = z * (-0.5 * t).exp();
    let mut w = start - 1.0;
    for _ in 0..60 {
        let denom = w + 2.0;
        if denom.norm() < 1e-14 {
            return None;
        }
        let e = (0.5 * t * w).exp();
        let f = w / denom * e - zs;
        if f.norm() < NEWTON_TOL * z.norm().max(1.0) {
            return Some(w + 1.0);
        }
        let df = e * (2.0 / (denom * denom) + 0.5 * t * w / denom);
        if df.norm() < 1e-300 {
            return None;
        }
        let step = f / df;
        w -= step;
        if !w.re.is_finite() || !w.im.is_finite() {
            return None;
        }
    }
    None
}

/// The branch of the transform with `kappa_t(0) = 1`, continued radially
/// from the origin; its power series at 0 is `1 + 2 sum_k m_k(t) z^k`.
pub fn kappa(z: Complex64, t: f64) -> Result<Complex64, KappaError> {
    if t == 0.0 {
        // all moments are 1: kappa = (1+z)/(1-z)
        return Ok((1.0 + z) / (1.0 - z));
    }
    if t.is_infinite() {
        // all moments vanish in the limit: kappa = 1 (uniform law)
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut current = Complex64::new(1.0, 0.0);
    let mut s = 0.0f64;
    let mut step = 0.25f64;
    let mut stalls = 0usize;
    let mut iterations = 0usize;
    while s < 1.0 {
        let target = (s + step).min(1.0);
        let zs = z * target;
        iterations += 1;
        match newton_kappa(zs, t, current) {
            Some(k) => {
                current = k;
                s = target;
                step = (step * 2.0).min(0.25);
            }
            None => {
                step *= 0.5;
                stalls += 1;
                if step < 1e-9 || stalls > 200 {
                    let e = (0.5 * t * current).exp();
                    let residual = ((current - 1.0) / (current + 1.0) * e - z).norm();
                    return Err(KappaError::NoConvergence {
                        z,
                        last: current,
                        residual,
                        iterations,
                    });
                }
            }
        }
    }
    Ok(current)
}

/// Support half-angle of the law of `u_t` on the circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SupportAngle {
    Angle(f64),
    Full,
}

impl SupportAngle {
    pub fn radians(self) -> f64 {
        match self {
            SupportAngle::Angle(a) => a,
            SupportAngle::Full => std::f64::consts::PI,
        }
    }
}

/// `beta(s) = 2 sqrt(s(1-s)) + arccos(1-2s)` on `[0,1]`: the support
/// half-angle of the time-`4s` law.
pub fn beta(s: f64) -> f64 {
    assert!((0.0..=1.0).contains(&s));
    2.0 * (s * (1.0 - s)).sqrt() + (1.0 - 2.0 * s).acos()
}

/// Support half-angle of the law of `u_t`: the full circle for `t >= 4`,
/// otherwise `beta(t/4)`.
pub fn support_angle(t: f64) -> SupportAngle {
    assert!(t >= 0.0);
    if t >= 4.0 {
        SupportAngle::Full
    } else {
        SupportAngle::Angle(beta(t / 4.0))
    }
}

/// Density against the uniform measure at angle `theta`, i.e. the real
/// boundary part of the transform; exactly 0 outside the support.
pub fn density_at(theta: f64, t: f64) -> f64 {
    let edge = support_angle(t);
    if let SupportAngle::Angle(a) = edge {
        if theta.abs() > a {
            return 0.0;
        }
    }
    let z = Complex64::from_polar(1.0, theta);
    match kappa(z, t) {
        Ok(k) => k.re.max(0.0),
        Err(_) => 0.0,
    }
}

/// The sampled density of the time-`t` law on a uniform angular grid.
#[derive(Clone, Debug)]
pub struct CircleDensity {
    pub t: f64,
    /// Pairs `(theta, rho)` with `theta` in `(-pi, pi]`.
    pub samples: Vec<(f64, f64)>,
    pub support_angle: SupportAngle,
}

/// Sample the density on `grid` uniform angles in `(-pi, pi]`.
pub fn density(t: f64, grid: usize) -> CircleDensity {
    assert!(t > 0.0, "the density requires t > 0");
    let n = grid.max(1) as i64;
    let samples: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            // theta in (-pi, pi], endpoint pi included
            let theta = -std::f64::consts::PI
                + (i + 1) as f64 * (2.0 * std::f64::consts::PI) / n as f64;
            (theta, density_at(theta, t))
        })
        .collect();
    CircleDensity {
        t,
        samples,
        support_angle: support_angle(t),
    }
}

impl CircleDensity {
    /// Numerical `int rho(theta) g(theta) dtheta / 2pi` over the support
    /// by double-exponential quadrature (fresh evaluations, not the grid).
    pub fn integrate_against<G: Fn(f64) -> f64 + Sync>(&self, g: G, tol: f64) -> f64 {
        integrate_density_against(self.t, g, tol)
    }
}

/// `int rho_t(theta) g(theta) dtheta / 2 pi` over the support.
pub fn integrate_density_against<G: Fn(f64) -> f64>(t: f64, g: G, tol: f64) -> f64 {
    let a = support_angle(t).radians();
    let f = |theta: f64| density_at(theta, t) * g(theta);
    let r = crate::quad::tanh_sinh(f, -a, a, tol);
    r.value / (2.0 * std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn moment_polys_match_closed_forms() {
        assert_eq!(moment_poly(1), ExpPoly::from_term(rat(-1, 2), vec![Rat::one()]));
        assert_eq!(
            moment_poly(2),
            ExpPoly::from_term(rat_int(-1), vec![rat_int(1), rat_int(-1)])
        );
        // k=3: e^{-3t/2} (1 - 3t + 3/2 t^2)
        assert_eq!(
            moment_poly(3),
            ExpPoly::from_term(rat(-3, 2), vec![rat_int(1), rat_int(-3), rat(3, 2)])
        );
    }

    #[test]
    fn moment_limits() {
        for k in 1..=6 {
            assert_eq!(moment(k, &Time::Finite(rat_int(0))), 1.0);
            assert_eq!(moment(k, &Time::Infinity), 0.0);
        }
    }

    #[test]
    fn kappa_at_time_zero_is_moebius() {
        let z = Complex64::new(0.3, 0.1);
        let k = kappa(z, 0.0).unwrap();
        let expected = (1.0 + z) / (1.0 - z);
        assert!((k - expected).norm() < 1e-12);
    }

    #[test]
    fn kappa_at_origin_is_one() {
        let k = kappa(Complex64::new(0.0, 0.0), 1.0).unwrap();
        assert!((k - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn kappa_series_matches_moments() {
        // kappa(z) = 1 + 2 sum m_k z^k: recover m_k by discrete Cauchy
        // integrals on a small circle and compare with the exact moments
        let t = 1.3;
        let r = 0.35;
        let n = 256;
        for k in 1..=6u32 {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let theta = 2.0 * PI * j as f64 / n as f64;
                let z = Complex64::from_polar(r, theta);
                let v = kappa(z, t).unwrap() - 1.0;
                acc += v * Complex64::from_polar(r.powi(-(k as i32)), -(k as f64) * theta);
            }
            let coeff = acc / n as f64 / 2.0;
            let exact = moment(k, &Time::finite_f64(t));
            assert!(
                (coeff.re - exact).abs() < 1e-8 && coeff.im.abs() < 1e-8,
                "k={k}: got {coeff}, expected {exact}"
            );
        }
    }

    #[test]
    fn newton_residual_small_on_support() {
        let t = 1.0;
        for &theta in &[0.1, 0.5, 1.0, 1.5] {
            let z = Complex64::from_polar(1.0, theta);
            let k = kappa(z, t).unwrap();
            let resid = ((k - 1.0) / (k + 1.0) * (0.5 * t * k).exp() - z).norm();
            assert!(resid <= 1e-12, "theta={theta}: residual {resid}");
        }
    }

    #[test]
    fn support_angle_values() {
        assert_eq!(support_angle(4.0), SupportAngle::Full);
        assert_eq!(support_angle(5.0), SupportAngle::Full);
        match support_angle(0.0) {
            SupportAngle::Angle(a) => assert!(a.abs() < 1e-15),
            SupportAngle::Full => panic!("support at t=0 is a point"),
        }
        // beta(1/2) = 1 + pi/2
        match support_angle(2.0) {
            SupportAngle::Angle(a) => assert!((a - (1.0 + PI / 2.0)).abs() < 1e-12),
            SupportAngle::Full => panic!("support not yet full at t=2"),
        }
    }

    #[test]
    fn support_angle_monotone() {
        let mut last = -1.0;
        for i in 0..=40 {
            let t = 4.0 * i as f64 / 40.0;
            let a = support_angle(t).radians();
            assert!(a >= last - 1e-12);
            last = a;
        }
        assert!((last - PI).abs() < 1e-9);
    }

    #[test]
    fn density_mass_is_one() {
        for &t in &[0.5, 1.0, 4.0] {
            let mass = integrate_density_against(t, |_| 1.0, 1e-10);
            assert!((mass - 1.0).abs() < 1e-8, "t={t}: mass {mass}");
        }
    }

    #[test]
    fn density_cosine_moments() {
        let t = 1.0;
        for k in 1..=3u32 {
            let got = integrate_density_against(t, |th| (k as f64 * th).cos(), 1e-9);
            let exact = moment(k, &Time::finite_f64(t));
            assert!((got - exact).abs() < 1e-6, "k={k}: {got} vs {exact}");
        }
    }

    #[test]
    fn density_symmetric_and_supported() {
        let d = density(0.5, 64);
        let a = d.support_angle.radians();
        for &(theta, rho) in &d.samples {
            assert!(rho >= 0.0);
            if theta.abs() > a {
                assert_eq!(rho, 0.0);
            }
        }
        // symmetry: compare fresh evaluations
        for &theta in &[0.2, 0.7, 1.1] {
            let p = density_at(theta, 0.5);
            let m = density_at(-theta, 0.5);
            assert!((p - m).abs() < 1e-9);
        }
    }
}
