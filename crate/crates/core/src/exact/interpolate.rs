use num_traits::Zero;

use super::poly::Poly1;
use super::rational::Rational;
use crate::error::{Error, Result};

/// Interpolates `samples` by a polynomial of degree at most `degree` and
/// verifies it against every check point.
///
/// A failed check means the sampled function is not a single polynomial of
/// that degree on the sampled range, which in chamber sweeps signals a
/// breakpoint that was not accounted for.
pub fn interpolate_verified(
    samples: &[(Rational, Rational)],
    degree: usize,
    checks: &[(Rational, Rational)],
) -> Result<Poly1> {
    if samples.len() != degree + 1 {
        return Err(Error::InvalidInput(format!(
            "degree {degree} interpolation needs {} samples, got {}",
            degree + 1,
            samples.len()
        )));
    }
    if checks.is_empty() {
        return Err(Error::InvalidInput(
            "at least one check point is required".into(),
        ));
    }
    for (i, (xi, _)) in samples.iter().enumerate() {
        if samples[..i].iter().any(|(xj, _)| xj == xi) {
            return Err(Error::InvalidInput(format!("repeated abscissa {xi}")));
        }
    }
    let poly = newton(samples);
    for (x, y) in checks {
        let got = poly.eval(x);
        if &got != y {
            return Err(Error::VerificationFailed {
                x: x.clone(),
                expected: y.clone(),
                actual: got,
            });
        }
    }
    Ok(poly)
}

fn newton(samples: &[(Rational, Rational)]) -> Poly1 {
    let n = samples.len();
    let xs: Vec<&Rational> = samples.iter().map(|(x, _)| x).collect();
    let mut table: Vec<Rational> = samples.iter().map(|(_, y)| y.clone()).collect();
    for level in 1..n {
        for i in (level..n).rev() {
            table[i] = (&table[i] - &table[i - 1]) / (xs[i] - xs[i - level]);
        }
    }
    let mut poly = Poly1::zero();
    let mut basis = Poly1::constant(Rational::from_integer(1.into()));
    for (i, c) in table.iter().enumerate() {
        if !c.is_zero() {
            poly = &poly + &basis.scale(c);
        }
        basis = &basis * &Poly1::linear(-xs[i].clone(), Rational::from_integer(1.into()));
    }
    poly
}
