use num_traits::Zero;

use super::rational::Rational;
use crate::error::{Error, Result};

/// `c0 + cu*u + cv*v`, used for chamber boundary lines and for divisor
/// coefficients that move affinely with the sweep parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Affine2 {
    pub c0: Rational,
    pub cu: Rational,
    pub cv: Rational,
}

impl Affine2 {
    pub fn new(c0: Rational, cu: Rational, cv: Rational) -> Self {
        Affine2 { c0, cu, cv }
    }

    pub fn eval(&self, u: &Rational, v: &Rational) -> Rational {
        &self.c0 + &self.cu * u + &self.cv * v
    }

    /// Solves `self(u, v) = 0` for `v` at a fixed `u`.
    ///
    /// Returns `Ok(None)` when the specialization is a nonzero constant and
    /// [`Error::ConstantZero`] when it vanishes identically.
    pub fn root_at(&self, u: &Rational) -> Result<Option<Rational>> {
        let constant = &self.c0 + &self.cu * u;
        if self.cv.is_zero() {
            return if constant.is_zero() {
                Err(Error::ConstantZero)
            } else {
                Ok(None)
            };
        }
        Ok(Some(-constant / &self.cv))
    }
}

/// Free-function form of [`Affine2::root_at`].
pub fn affine_root(a: &Affine2, u: &Rational) -> Result<Option<Rational>> {
    a.root_at(u)
}
