//! Interpolated additive and multiplicative convolutions.
//!
//! For symmetric Bernoulli inputs the results are in closed form through
//! the circle density of the time-`4t` free unitary Brownian motion:
//! the multiplicative convolution is its pullback under `z -> z^2`, and
//! the additive one transports that law to `[-2, 2]` through
//! `x = 2 cos(theta / 4)`. General compactly supported inputs are
//! handled at the level of moments by expanding words in the exact mixed
//! moment engine.

use num_rational::BigRational as Rat;
use thiserror::Error;

use crate::exp_poly::ExpPoly;
use crate::fubm::{self, SupportAngle};
use crate::moment_engine::MomentEngine;
use crate::word::{Family, Letter, Word};

/// Wrap an angle to `(-pi, pi]`.
fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut th = theta % two_pi;
    if th > std::f64::consts::PI {
        th -= two_pi;
    } else if th <= -std::f64::consts::PI {
        th += two_pi;
    }
    th
}

/// Density at angle `theta` of the multiplicative Bernoulli convolution:
/// the time-`4t` circle density evaluated at `2 theta`.
pub fn bernoulli_mult_density_at(theta: f64, t: f64) -> f64 {
    fubm::density_at(wrap_angle(2.0 * theta), 4.0 * t)
}

/// Sampled multiplicative Bernoulli convolution on the circle. The
/// support is the full circle for `t >= 1`, otherwise the two arcs of
/// half-angle `beta(t)/2` around `1` and around `-1`.
pub fn bernoulli_mult_density(t: f64, grid: usize) -> fubm::CircleDensity {
    assert!(t > 0.0);
    let n = grid.max(1) as i64;
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let theta = -std::f64::consts::PI
                + (i + 1) as f64 * (2.0 * std::f64::consts::PI) / n as f64;
            (theta, bernoulli_mult_density_at(theta, t))
        })
        .collect();
    let support_angle = if t >= 1.0 {
        SupportAngle::Full
    } else {
        SupportAngle::Angle(fubm::beta(t) / 2.0)
    };
    fubm::CircleDensity {
        t,
        samples,
        support_angle,
    }
}

/// A density on a union of closed intervals inside `[-2, 2]`.
#[derive(Clone, Debug)]
pub struct RealDensity {
    pub t: f64,
    pub support: Vec<(f64, f64)>,
    /// Pairs `(x, eta(x))` on a uniform grid over `[-2, 2]`.
    pub samples: Vec<(f64, f64)>,
}

/// Support of the additive Bernoulli convolution: all of `[-2, 2]` for
/// `t >= 1`, otherwise three intervals around `-2`, `0` and `2`.
pub fn bernoulli_add_support(t: f64) -> Vec<(f64, f64)> {
    if t >= 1.0 {
        return vec![(-2.0, 2.0)];
    }
    let b = fubm::beta(t);
    let inner = 2.0 * (b / 4.0).sin();
    let outer = 2.0 * (b / 4.0).cos();
    vec![(-2.0, -outer), (-inner, inner), (outer, 2.0)]
}

/// Density at `x` of the additive Bernoulli convolution:
/// `rho_{4t}(e^{4 i arccos(x/2)}) / (pi sqrt(4 - x^2))`.
pub fn bernoulli_add_density_at(x: f64, t: f64) -> f64 {
    if x.abs() >= 2.0 {
        return 0.0;
    }
    let theta = wrap_angle(4.0 * (x / 2.0).acos());
    let rho = fubm::density_at(theta, 4.0 * t);
    rho / (std::f64::consts::PI * (4.0 - x * x).sqrt())
}

/// Sample the additive Bernoulli convolution density on a uniform grid.
pub fn bernoulli_add_density(t: f64, grid: usize) -> RealDensity {
    assert!(t > 0.0);
    let n = grid.max(2);
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = -2.0 + 4.0 * i as f64 / (n - 1) as f64;
            (x, bernoulli_add_density_at(x, t))
        })
        .collect();
    RealDensity {
        t,
        support: bernoulli_add_support(t),
        samples,
    }
}

/// `int g(x) eta_t(x) dx` over the support, piecewise by
/// double-exponential quadrature (handles the inverse-square-root
/// edges). Intervals are additionally split at the points `+-sqrt(2)`
/// where the density is non-analytic at the transition time `t = 1`.
pub fn integrate_add_density_against<G: Fn(f64) -> f64>(t: f64, g: G, tol: f64) -> f64 {
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut total = 0.0;
    for (a, b) in bernoulli_add_support(t) {
        let mut cuts = vec![a];
        for &p in &[-sqrt2, 0.0, sqrt2] {
            if p > a && p < b {
                cuts.push(p);
            }
        }
        cuts.push(b);
        for w in cuts.windows(2) {
            let r =
                crate::quad::tanh_sinh(|x| bernoulli_add_density_at(x, t) * g(x), w[0], w[1], tol);
            total += r.value;
        }
    }
    total
}

/// `int g(theta) sigma_t(theta) dtheta / 2 pi` over the circle,
/// arc-by-arc so the support edges fall on quadrature endpoints.
pub fn integrate_mult_density_against<G: Fn(f64) -> f64>(t: f64, g: G, tol: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let f = |theta: f64| bernoulli_mult_density_at(theta, t) * g(theta);
    let arcs: Vec<(f64, f64)> = if t >= 1.0 {
        vec![(-pi, 0.0), (0.0, pi)]
    } else {
        let half = fubm::beta(t) / 2.0;
        vec![
            (-half, half),
            (pi - half, pi),
            (-pi, -pi + half),
        ]
    };
    let mut total = 0.0;
    for (a, b) in arcs {
        total += crate::quad::tanh_sinh(&f, a, b, tol).value;
    }
    total / (2.0 * pi)
}

#[derive(Debug, Error)]
pub enum ConvolveError {
    #[error("k_max = {0} exceeds the word-expansion limit of 8")]
    KMaxTooLarge(usize),
    #[error("need at least {needed} input moments, got {got}")]
    NotEnoughMoments { needed: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvolutionKind {
    Additive,
    Multiplicative,
}

/// Moments (orders 1..=k_max) of the interpolated convolution of two
/// compactly supported laws given by their moment sequences.
#[derive(Clone, Debug)]
pub struct MomentSequence {
    pub moments: Vec<ExpPoly>,
}

impl MomentSequence {
    pub fn moment(&self, k: usize) -> &ExpPoly {
        &self.moments[k - 1]
    }
}

/// Exact moments of `a + u_t b u_t^*` (additive) or `a u_t b u_t^*`
/// (multiplicative) where `a` has the first law and `b` the second.
/// `mu_moments[j]` is the `(j+1)`-th moment; index 0 moments are 1.
pub fn tfree_convolve_moments(
    engine: &MomentEngine,
    mu_moments: &[Rat],
    nu_moments: &[Rat],
    kind: ConvolutionKind,
    k_max: usize,
) -> Result<MomentSequence, ConvolveError> {
    if k_max > 8 {
        return Err(ConvolveError::KMaxTooLarge(k_max));
    }
    let needed = match kind {
        ConvolutionKind::Additive => k_max,
        ConvolutionKind::Multiplicative => k_max,
    };
    for (name, m) in [("first", mu_moments), ("second", nu_moments)] {
        let _ = name;
        if m.len() < needed {
            return Err(ConvolveError::NotEnoughMoments {
                needed,
                got: m.len(),
            });
        }
    }
    let assign = |family: Family, gens: &[u32]| -> Rat {
        let power = gens.len();
        let table = match family {
            Family::A => mu_moments,
            Family::B => nu_moments,
        };
        table[power - 1].clone()
    };
    let mut moments = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let value = match kind {
            ConvolutionKind::Multiplicative => {
                // word (a u b u^*)^k
                let mut letters = Vec::with_capacity(2 * k);
                for _ in 0..k {
                    letters.push(Letter::single(Family::A, 1));
                    letters.push(Letter::single(Family::B, 1));
                }
                engine.mixed_moment(&Word::new(letters)).substitute(assign)
            }
            ConvolutionKind::Additive => {
                // (a + u b u^*)^k expanded over 2^k words
                let mut sum = ExpPoly::zero();
                for mask in 0..(1u32 << k) {
                    let letters: Vec<Letter> = (0..k)
                        .map(|j| {
                            if mask >> j & 1 == 0 {
                                Letter::single(Family::A, 1)
                            } else {
                                Letter::single(Family::B, 1)
                            }
                        })
                        .collect();
                    sum = sum.add(&engine.mixed_moment(&Word::new(letters)).substitute(assign));
                }
                sum
            }
        };
        moments.push(value);
    }
    Ok(MomentSequence { moments })
}
