//! Interpolation between classical independence and free independence.
//!
//! The library computes, exactly where possible:
//! * mixed moments of two commutative families coupled by a free unitary
//!   Brownian motion ([`moment_engine`]), with coefficients in an exact
//!   exponential-polynomial ring ([`exp_poly`]);
//! * the interpolating cumulant tables of orders 2 through 6 and the
//!   order-7 obstruction to their existence ([`cumulants`]);
//! * the spectral theory of free unitary Brownian motion — moments,
//!   Herglotz transform, density and support ([`fubm`]);
//! * interpolated multiplicative and additive convolutions, with the
//!   symmetric Bernoulli case in closed form ([`convolutions`]);
//! * a finite-dimensional random-matrix simulation that converges to the
//!   same quantities ([`matrix_model`]).

pub mod combinatorics;
pub mod convolutions;
pub mod cumulants;
pub mod exp_poly;
pub mod fubm;
pub mod matrix_model;
pub mod moment_engine;
pub mod quad;
pub mod word;
