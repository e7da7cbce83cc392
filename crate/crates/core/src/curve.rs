//! The quartic family `u(x^3 + λx^2y) = v(y^3 + λxy^2)` viewed as a triple
//! cover of `P^1_{[u:v]}`: smoothness via a resultant, the branch divisor
//! via the discriminant of the pencil, and the resulting classification of
//! `λ`.
//!
//! Normalizations: the discriminant of `ax^3 + bx^2y + cxy^2 + dy^3` is
//! `b^2c^2 - 4ac^3 - 4b^3d - 27a^2d^2 + 18abcd`, and resultants are the
//! determinant of the Sylvester matrix built from coefficients listed by
//! descending power of `x`.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{int, Poly, Poly1, Rational, Ring};

/// Homogeneous form `sum c_i x^i y^(d-i)`.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryForm<T> {
    coeffs: Vec<T>,
}

impl<T: Ring> BinaryForm<T> {
    /// `coeffs[i]` multiplies `x^i y^(d-i)`; the degree is `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput(
                "binary form needs at least one coefficient".into(),
            ));
        }
        Ok(BinaryForm { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn eval(&self, x: &T, y: &T) -> T {
        let d = self.degree();
        let mut total = T::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            let mut term = c.clone();
            for _ in 0..i {
                term = term * x.clone();
            }
            for _ in 0..d - i {
                term = term * y.clone();
            }
            total = total + term;
        }
        total
    }

    /// Coefficients by descending power of `x`.
    fn descending(&self) -> Vec<T> {
        self.coeffs.iter().rev().cloned().collect()
    }
}

impl<T: fmt::Debug> fmt::Debug for BinaryForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("BinaryForm").field(&self.coeffs).finish()
    }
}

impl fmt::Display for BinaryForm<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_form(f, &self.coeffs, "u", "v")
    }
}

fn write_form(f: &mut fmt::Formatter<'_>, coeffs: &[Rational], x: &str, y: &str) -> fmt::Result {
    let d = coeffs.len() - 1;
    let mut first = true;
    for (i, c) in coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mono = |var: &str, k: usize| match k {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{k}"),
        };
        let m = format!("{}{}", mono(x, i), mono(y, d - i));
        let mag = c.abs();
        let coef = if m.is_empty() || !mag.is_one() {
            if mag.is_integer() {
                mag.to_string()
            } else {
                format!("({mag})")
            }
        } else {
            String::new()
        };
        let sign = match (first, c.is_negative()) {
            (true, true) => "-",
            (true, false) => "",
            (false, true) => " - ",
            (false, false) => " + ",
        };
        write!(f, "{sign}{coef}{m}")?;
        first = false;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

/// Discriminant of a binary cubic; zero iff it has a repeated root in `P^1`.
pub fn cubic_discriminant<T: Ring>(f: &BinaryForm<T>) -> Result<T> {
    if f.degree() != 3 {
        return Err(Error::InvalidInput(format!(
            "cubic discriminant of a degree {} form",
            f.degree()
        )));
    }
    let c = f.coeffs();
    let (a, b, cc, d) = (&c[3], &c[2], &c[1], &c[0]);
    let k = |n: i64| -> T {
        let mut out = T::zero();
        for _ in 0..n.unsigned_abs() {
            out = out + T::one();
        }
        if n < 0 {
            -out
        } else {
            out
        }
    };
    let p = |xs: &[&T]| xs.iter().fold(T::one(), |acc, x| acc * (*x).clone());
    Ok(p(&[b, b, cc, cc])
        - k(4) * p(&[a, cc, cc, cc])
        - k(4) * p(&[b, b, b, d])
        - k(27) * p(&[a, a, d, d])
        + k(18) * p(&[a, b, cc, d]))
}

/// Determinant by cofactor expansion; only ring operations are needed.
fn determinant<T: Ring>(m: &[Vec<T>]) -> T {
    fn go<T: Ring>(m: &[Vec<T>], row: usize, cols: &mut Vec<usize>) -> T {
        if cols.is_empty() {
            return T::one();
        }
        let mut total = T::zero();
        for k in 0..cols.len() {
            let c = cols.remove(k);
            if !m[row][c].is_zero() {
                let minor = go(m, row + 1, cols);
                let term = m[row][c].clone() * minor;
                total = if k % 2 == 0 {
                    total + term
                } else {
                    total - term
                };
            }
            cols.insert(k, c);
        }
        total
    }
    go(m, 0, &mut (0..m.len()).collect())
}

/// Sylvester resultant of two binary forms; vanishes iff they share a root
/// in `P^1` (or both leading coefficients vanish).
pub fn resultant<T: Ring>(f: &BinaryForm<T>, g: &BinaryForm<T>) -> T {
    let (m, n) = (f.degree(), g.degree());
    let size = m + n;
    let fd = f.descending();
    let gd = g.descending();
    let mut rows = Vec::with_capacity(size);
    for shift in 0..n {
        let mut row = vec![T::zero(); size];
        for (j, c) in fd.iter().enumerate() {
            row[shift + j] = c.clone();
        }
        rows.push(row);
    }
    for shift in 0..m {
        let mut row = vec![T::zero(); size];
        for (j, c) in gd.iter().enumerate() {
            row[shift + j] = c.clone();
        }
        rows.push(row);
    }
    determinant(&rows)
}

/// Resultant of two cubics via the 6x6 Sylvester determinant.
pub fn resultant_cubics<T: Ring>(f: &BinaryForm<T>, g: &BinaryForm<T>) -> Result<T> {
    if f.degree() != 3 || g.degree() != 3 {
        return Err(Error::InvalidInput(
            "resultant_cubics expects two cubics".into(),
        ));
    }
    Ok(resultant(f, g))
}

/// `f3 = x^3 + λx^2y` and `g3 = y^3 + λxy^2`.
pub fn quartic_cubics<T: Ring>(lambda: &T) -> (BinaryForm<T>, BinaryForm<T>) {
    let (o, z) = (T::one(), T::zero());
    let f = BinaryForm {
        coeffs: vec![z.clone(), z.clone(), lambda.clone(), o.clone()],
    };
    let g = BinaryForm {
        coeffs: vec![o, lambda.clone(), z.clone(), z],
    };
    (f, g)
}

/// Discriminant in `(x, y)` of `u f3 - v g3`, dehomogenized at `v = 1`,
/// as a polynomial in `u` with coefficients in `T`.
pub fn pencil_discriminant<T: Ring>(lambda: &T) -> Poly<T> {
    let (f, g) = quartic_cubics(lambda);
    let u = Poly::<T>::x();
    let coeffs = f
        .coeffs()
        .iter()
        .zip(g.coeffs())
        .map(|(fc, gc)| u.scale(fc) - Poly::constant(gc.clone()))
        .collect();
    cubic_discriminant(&BinaryForm { coeffs }).expect("pencil members are cubics")
}

/// The pencil discriminant with `λ` left symbolic: a polynomial in `u`
/// whose coefficients are polynomials in `λ`.
pub fn pencil_discriminant_symbolic() -> Poly<Poly1> {
    pencil_discriminant(&Poly1::x())
}

/// `1 - λ^2` up to the documented normalization, from the symbolic
/// Sylvester determinant.
pub fn smoothness_resultant_symbolic() -> Poly1 {
    let (f, g) = quartic_cubics(&Poly1::x());
    resultant(&f, &g)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchDivisor {
    /// `Δ(u, v)`, coefficient `i` on `u^i v^(4-i)`.
    pub form: BinaryForm<Rational>,
    /// Square-free factors with multiplicities; `u` and `v` are split off
    /// first. Their product equals `form` up to the scalar `content`.
    pub factors: Vec<(BinaryForm<Rational>, u32)>,
    pub content: Rational,
    /// Number of distinct branch points in `P^1` over an algebraic closure.
    pub distinct_count: usize,
}

/// Yun's square-free decomposition of a monic-normalizable polynomial.
fn square_free(p: &Poly1) -> Vec<(Poly1, u32)> {
    let mut out = Vec::new();
    if p.degree().unwrap_or(0) == 0 {
        return out;
    }
    let dp = p.derivative();
    let mut a = Poly1::gcd(p, &dp);
    let mut b = p.div_rem(&a).0;
    let mut c = dp.div_rem(&a).0;
    let mut d = c - b.derivative();
    let mut k = 1;
    while b.degree().unwrap_or(0) > 0 {
        a = Poly1::gcd(&b, &d);
        if a.degree().unwrap_or(0) > 0 {
            out.push((a.monic(), k));
        }
        b = b.div_rem(&a).0;
        c = d.div_rem(&a).0;
        d = c - b.derivative();
        k += 1;
    }
    out
}

fn homogenize(p: &Poly1, degree: usize) -> BinaryForm<Rational> {
    BinaryForm {
        coeffs: (0..=degree).map(|i| p.coeff(i)).collect(),
    }
}

/// Branch divisor of the triple cover `[x:y] -> [u:v]` for a given `λ`.
pub fn branch_divisor(lambda: &Rational) -> Result<BranchDivisor> {
    let p = pencil_discriminant(lambda);
    let Some(deg) = p.degree() else {
        return Err(Error::IdenticallyZero);
    };
    let form = homogenize(&p, 4);
    let u_mult = (0..=deg).find(|&i| !p.coeff(i).is_zero()).unwrap_or(0);
    let v_mult = 4 - deg;
    let rest = Poly1::new(p.coeffs()[u_mult..].to_vec());
    let content = rest.leading();
    let mut factors = Vec::new();
    if u_mult > 0 {
        factors.push((homogenize(&Poly1::x(), 1), u_mult as u32));
    }
    if v_mult > 0 {
        factors.push((homogenize(&Poly1::constant(int(1)), 1), v_mult as u32));
    }
    for (q, k) in square_free(&rest) {
        let d = q.degree().unwrap_or(0);
        factors.push((homogenize(&q, d), k));
    }
    let rest_deg = rest.degree().unwrap_or(0);
    let repeated = Poly1::gcd(&rest, &rest.derivative()).degree().unwrap_or(0);
    let distinct_count = usize::from(u_mult > 0) + usize::from(v_mult > 0) + rest_deg - repeated;

    let mut product = Poly1::constant(content.clone());
    for (f, k) in &factors {
        let dehom = Poly1::new(f.coeffs().to_vec());
        product = product * dehom.pow(*k);
    }
    if product != p {
        return Err(Error::FactorizationMismatch(format!(
            "factors of the branch divisor at λ = {lambda} do not multiply back"
        )));
    }
    Ok(BranchDivisor {
        form,
        factors,
        content,
        distinct_count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    /// Smooth curve, four distinct branch points.
    SmoothFourBranch,
    /// `f3` and `g3` share a root.
    SingularCurve,
    /// Smooth curve with fewer than four branch points.
    DegenerateBranch,
    /// The pencil discriminant vanishes identically.
    TotallyDegenerate,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::SmoothFourBranch => "SmoothFourBranch",
            Classification::SingularCurve => "SingularCurve",
            Classification::DegenerateBranch => "DegenerateBranch",
            Classification::TotallyDegenerate => "TotallyDegenerate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaClass {
    pub value: Rational,
    pub classification: Classification,
    pub resultant: Rational,
    pub distinct_count: Option<usize>,
}

pub fn classify_lambda(lambda: &Rational) -> LambdaClass {
    let (f, g) = quartic_cubics(lambda);
    let res = resultant(&f, &g);
    let branch = branch_divisor(lambda);
    let distinct_count = branch.as_ref().ok().map(|b| b.distinct_count);
    let classification = if res.is_zero() {
        Classification::SingularCurve
    } else {
        match distinct_count {
            None => Classification::TotallyDegenerate,
            Some(n) if n < 4 => Classification::DegenerateBranch,
            Some(_) => Classification::SmoothFourBranch,
        }
    };
    LambdaClass {
        value: lambda.clone(),
        classification,
        resultant: res,
        distinct_count,
    }
}

/// Discriminant of the quadratic factor of the branch divisor, as a
/// polynomial in `λ`, with its verified factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchCertificate {
    pub polynomial: Poly1,
    pub factors: Vec<(Poly1, u32)>,
}

impl BranchCertificate {
    /// The certificate is even in `λ`; this is it as a polynomial in `λ^2`.
    pub fn in_lambda_squared(&self) -> Poly1 {
        Poly1::new(
            self.polynomial
                .coeffs()
                .iter()
                .step_by(2)
                .cloned()
                .collect(),
        )
    }
}

/// `(λ^4 + 18λ^2 - 27)^2 - 64λ^6 = (λ^2 - 1)(λ^2 - 9)^3`, with the left side
/// read off the symbolic pencil discriminant and the right side checked by
/// expansion.
pub fn branch_certificate() -> Result<BranchCertificate> {
    let delta = pencil_discriminant_symbolic();
    // Δ(u, 1) = A u^3 + B u^2 + A u with A = 4λ^3.
    if delta.degree() != Some(3) || !delta.coeff(0).is_zero() {
        return Err(Error::FactorizationMismatch(
            "pencil discriminant is not divisible by uv".into(),
        ));
    }
    let a = delta.coeff(3);
    let b = delta.coeff(2);
    if delta.coeff(1) != a {
        return Err(Error::FactorizationMismatch(
            "quadratic factor is not palindromic".into(),
        ));
    }
    let polynomial = &b * &b - (&a * &a).scale(&int(4));
    let factors = vec![
        (Poly1::from_ints(&[-1, 0, 1]), 1),
        (Poly1::from_ints(&[-9, 0, 1]), 3),
    ];
    let product = factors
        .iter()
        .fold(Poly1::constant(int(1)), |acc, (f, k)| acc * f.pow(*k));
    if product != polynomial {
        return Err(Error::FactorizationMismatch(format!(
            "{} differs from {}",
            polynomial.display_in("λ"),
            product.display_in("λ")
        )));
    }
    Ok(BranchCertificate {
        polynomial,
        factors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    fn form(coeffs: &[i64]) -> BinaryForm<Rational> {
        BinaryForm::new(coeffs.iter().map(|&c| int(c)).collect()).unwrap()
    }

    #[test]
    fn discriminants() {
        let lam = rat(5, 3);
        let (f, _) = quartic_cubics(&lam);
        assert_eq!(cubic_discriminant(&f).unwrap(), int(0));
        // x^3 - y^3
        assert_eq!(cubic_discriminant(&form(&[-1, 0, 0, 1])).unwrap(), int(-27));
        // x^2y - xy^2
        assert_eq!(cubic_discriminant(&form(&[0, -1, 1, 0])).unwrap(), int(1));
        assert!(cubic_discriminant(&form(&[1, 2])).is_err());
    }

    #[test]
    fn resultants() {
        assert_eq!(
            smoothness_resultant_symbolic(),
            Poly1::from_ints(&[1, 0, -1])
        );
        for l in [1, -1] {
            let (f, g) = quartic_cubics(&int(l));
            assert_eq!(resultant_cubics(&f, &g).unwrap(), int(0));
        }
        // x^3 and y^3
        assert_eq!(
            resultant(&form(&[0, 0, 0, 1]), &form(&[1, 0, 0, 0])),
            int(1)
        );
        // (x - y)(x + y) and x - y share a root
        assert_eq!(resultant(&form(&[-1, 0, 1]), &form(&[-1, 1])), int(0));
    }

    #[test]
    fn symbolic_pencil_discriminant() {
        let d = pencil_discriminant_symbolic();
        let a = Poly1::from_ints(&[0, 0, 0, 4]);
        let b = Poly1::from_ints(&[-27, 0, 18, 0, 1]);
        assert_eq!(d, Poly::new(vec![Poly1::zero(), a.clone(), b, a]));
    }

    #[test]
    fn branch_examples() {
        let b = branch_divisor(&int(2)).unwrap();
        assert_eq!(b.distinct_count, 4);
        assert_eq!(
            b.form.coeffs(),
            &[int(0), int(32), int(61), int(32), int(0)]
        );

        let b = branch_divisor(&int(3)).unwrap();
        assert_eq!(b.distinct_count, 3);
        assert!(b.factors.contains(&(form(&[1, 1]), 2)));

        let b = branch_divisor(&int(0)).unwrap();
        assert_eq!(b.form.coeffs(), &[int(0), int(0), int(-27), int(0), int(0)]);
        assert_eq!(b.distinct_count, 2);
        assert_eq!(b.form.to_string(), "-27u^2v^2");
    }

    #[test]
    fn branch_always_contains_u_and_v() {
        for n in -6..=6 {
            for d in 1..=4 {
                let b = branch_divisor(&rat(n, d)).unwrap();
                assert!(b.factors.iter().any(|(f, _)| f == &form(&[0, 1])));
                assert!(b.factors.iter().any(|(f, _)| f == &form(&[1, 0])));
            }
        }
    }

    #[test]
    fn classification_examples() {
        assert_eq!(
            classify_lambda(&rat(5, 7)).classification,
            Classification::SmoothFourBranch
        );
        assert_eq!(
            classify_lambda(&int(-1)).classification,
            Classification::SingularCurve
        );
        assert_eq!(
            classify_lambda(&int(1)).classification,
            Classification::SingularCurve
        );
        assert_eq!(
            classify_lambda(&int(-3)).classification,
            Classification::DegenerateBranch
        );
        assert_eq!(
            classify_lambda(&int(0)).classification,
            Classification::DegenerateBranch
        );
    }

    #[test]
    fn certificate() {
        let c = branch_certificate().unwrap();
        assert_eq!(
            c.polynomial,
            Poly1::from_ints(&[729, 0, -972, 0, 270, 0, -28, 0, 1])
        );
        let t = c.in_lambda_squared();
        assert_eq!(t.eval(&int(1)), int(0));
        assert_eq!(t.eval(&int(9)), int(0));
        assert_eq!(t.eval(&int(3)), int(-432));
        assert_eq!(c.polynomial.eval(&int(2)), int(61 * 61 - 64 * 64));
    }

    #[test]
    fn exhaustive_small_lambdas() {
        let special = [int(0), int(1), int(-1), int(3), int(-3)];
        for n in -50i64..=50 {
            for d in 1i64..=50 {
                let lam = rat(n, d);
                if lam.denom() != &num_bigint::BigInt::from(d) {
                    continue;
                }
                let c = classify_lambda(&lam);
                let is_special = special.contains(&lam);
                assert_eq!(c.distinct_count == Some(4), !is_special, "λ = {lam}");
                assert_eq!(
                    c.classification == Classification::SmoothFourBranch,
                    !is_special
                );
                assert_eq!(
                    c.resultant.is_zero(),
                    lam == int(1) || lam == int(-1),
                    "λ = {lam}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn sign_symmetry(n in -200i64..=200, d in 1i64..=200) {
            let lam = rat(n, d);
            prop_assert_eq!(
                classify_lambda(&lam).classification,
                classify_lambda(&-lam.clone()).classification
            );
        }

        #[test]
        fn numeric_matches_symbolic(n in -40i64..=40, d in 1i64..=40) {
            let lam = rat(n, d);
            let sym = pencil_discriminant_symbolic();
            let num = pencil_discriminant(&lam);
            for k in 0..=4 {
                prop_assert_eq!(sym.coeff(k).eval(&lam), num.coeff(k));
            }
            let (f, g) = quartic_cubics(&lam);
            prop_assert_eq!(resultant(&f, &g), smoothness_resultant_symbolic().eval(&lam));
        }

        #[test]
        fn discriminant_detects_repeated_roots(r in -9i64..=9, s in -9i64..=9, t in 1i64..=5) {
            // t(x - ry)^2 (x - sy)
            let a = Poly1::from_ints(&[-r, 1]);
            let b = Poly1::from_ints(&[-s, 1]);
            let p = (&a * &a * b).scale(&int(t));
            let f = BinaryForm::new((0..=3).map(|i| p.coeff(i)).collect()).unwrap();
            prop_assert_eq!(cubic_discriminant(&f).unwrap(), int(0));
        }
    }
}
