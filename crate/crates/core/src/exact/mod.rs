//! Exact scalars, univariate polynomials, interpolation and piecewise
//! integration. Nothing in here touches floating point.

mod affine;
mod interpolate;
mod piecewise;
mod poly;
mod rational;

pub use affine::{affine_root, Affine2};
pub use interpolate::interpolate_verified;
pub use piecewise::{piecewise_integrate, Piece, PiecewisePoly};
pub use poly::{integrate_poly, Poly, Poly1, Ring};
pub use rational::{
    int, is_integer, one, parse_rational, rat, rational_sqrt, zero, ParseRationalError, Rational,
};
