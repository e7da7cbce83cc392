//! Small dense exact linear algebra over the rationals.

use num_traits::{One, Signed, Zero};

use crate::exact::Rational;

pub type Matrix = Vec<Vec<Rational>>;

pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Matrix = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let delta = &f * &a[col][c];
                a[r][c] -= delta;
            }
        }
    }
    det
}

/// Gauss–Jordan inverse; `None` when singular.
pub fn inverse(m: &[Vec<Rational>]) -> Option<Matrix> {
    let n = m.len();
    let mut a: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| {
                if i == j {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(pivot, col);
        let p = a[col][col].clone();
        for c in 0..2 * n {
            a[col][c] = &a[col][c] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..2 * n {
                let delta = &f * &a[col][c];
                a[r][c] -= delta;
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn mat_vec(m: &[Vec<Rational>], x: &[Rational]) -> Vec<Rational> {
    m.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// Sylvester's criterion applied to `-m`.
pub fn is_negative_definite(m: &[Vec<Rational>]) -> bool {
    (1..=m.len()).all(|k| {
        let minor: Matrix = m[..k]
            .iter()
            .map(|row| row[..k].iter().map(|x| -x).collect())
            .collect();
        determinant(&minor).is_positive()
    })
}
