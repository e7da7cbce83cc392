//! Direct antiderivative evaluation over hand-entered chamber polynomials.
//! Shares nothing with the engine beyond the rational type.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Polynomial in `u` and `v`, keyed by exponent pair.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bi(BTreeMap<(u32, u32), Q>);

impl Bi {
    pub fn c(x: Q) -> Bi {
        let mut m = BTreeMap::new();
        if !x.is_zero() {
            m.insert((0, 0), x);
        }
        Bi(m)
    }

    pub fn n(x: i64) -> Bi {
        Bi::c(q(x, 1))
    }

    pub fn u() -> Bi {
        Bi(BTreeMap::from([((1, 0), Q::one())]))
    }

    pub fn v() -> Bi {
        Bi(BTreeMap::from([((0, 1), Q::one())]))
    }

    pub fn pow(&self, k: u32) -> Bi {
        (0..k).fold(Bi::n(1), |acc, _| &acc * self)
    }

    fn add_term(&mut self, key: (u32, u32), c: Q) {
        let slot = self.0.entry(key).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&key);
        }
    }

    /// Univariate in `u`, valid when no `v` appears.
    fn u_coeffs(&self) -> Vec<Q> {
        let mut out = Vec::new();
        for (&(i, j), c) in &self.0 {
            assert_eq!(j, 0, "v survived integration");
            let i = i as usize;
            if out.len() <= i {
                out.resize(i + 1, Q::zero());
            }
            out[i] += c;
        }
        out
    }

    /// Replaces `v` by a polynomial in `u`.
    fn subst_v(&self, b: &Bi) -> Bi {
        let mut out = Bi::default();
        for (&(i, j), c) in &self.0 {
            let term = &(&Bi::u().pow(i) * &b.pow(j)) * &Bi::c(c.clone());
            out = &out + &term;
        }
        out
    }

    fn v_antiderivative(&self) -> Bi {
        let mut out = Bi::default();
        for (&(i, j), c) in &self.0 {
            out.add_term((i, j + 1), c / Q::from_integer(BigInt::from(j + 1)));
        }
        out
    }
}

impl Add for &Bi {
    type Output = Bi;
    fn add(self, o: &Bi) -> Bi {
        let mut out = self.clone();
        for (k, c) in &o.0 {
            out.add_term(*k, c.clone());
        }
        out
    }
}

impl Neg for &Bi {
    type Output = Bi;
    fn neg(self) -> Bi {
        Bi(self.0.iter().map(|(k, c)| (*k, -c)).collect())
    }
}

impl Sub for &Bi {
    type Output = Bi;
    fn sub(self, o: &Bi) -> Bi {
        self + &-o
    }
}

impl Mul for &Bi {
    type Output = Bi;
    fn mul(self, o: &Bi) -> Bi {
        let mut out = Bi::default();
        for (&(i, j), a) in &self.0 {
            for (&(k, l), b) in &o.0 {
                out.add_term((i + k, j + l), a * b);
            }
        }
        out
    }
}

/// Region `u0 <= u <= u1`, `lo(u) <= v <= hi(u)` carrying integrand `f`.
pub struct Cell {
    pub u0: Q,
    pub u1: Q,
    pub lo: Bi,
    pub hi: Bi,
    pub f: Bi,
}

fn integrate_u(p: &[Q], a: &Q, b: &Q) -> Q {
    let mut total = Q::zero();
    for (i, c) in p.iter().enumerate() {
        let k = i as i32 + 1;
        total += c * (b.pow(k) - a.pow(k)) / Q::from_integer(BigInt::from(k));
    }
    total
}

pub fn double_integral(cells: &[Cell]) -> Q {
    cells
        .iter()
        .map(|c| {
            let g = c.f.v_antiderivative();
            let inner = &g.subst_v(&c.hi) - &g.subst_v(&c.lo);
            integrate_u(&inner.u_coeffs(), &c.u0, &c.u1)
        })
        .sum()
}

/// Cube of aH + bE, with
/// H^3 = 1, H^2E = 0, HE^2 = -4, E^3 = -14.
pub fn cube(a: &Bi, b: &Bi) -> Bi {
    let t1 = a.pow(3);
    let t2 = &(a * &b.pow(2)) * &Bi::n(-12);
    let t3 = &b.pow(3) * &Bi::n(-14);
    &(&t1 + &t2) + &t3
}

/// (1/30) times the u-integral of the cube of the positive part.
pub fn s_divisor(pieces: &[(Q, Q, Bi, Bi)]) -> Q {
    let total: Q = pieces
        .iter()
        .map(|(a0, a1, h, e)| integrate_u(&cube(h, e).u_coeffs(), a0, a1))
        .sum();
    total / q(30, 1)
}

pub fn lin(c: i64, cu: i64, cv: i64) -> Bi {
    &(&Bi::n(c) + &(&Bi::u() * &Bi::n(cu))) + &(&Bi::v() * &Bi::n(cv))
}

/// Chambers of the line l = L - e1 - e2 on the quintic del Pezzo section,
/// each paired with (volume, P.l, coefficient of l34 in the negative part).
pub fn line_chambers() -> Vec<(Q, Q, Bi, Bi, Bi, Bi, Bi)> {
    let a = lin(2, -1, 0);
    let v = Bi::v();
    let two = Bi::n(2);
    let zero = Bi::n(0);
    vec![
        (
            q(0, 1),
            q(1, 1),
            Bi::n(0),
            Bi::n(1),
            &(&lin(4, -1, -1).pow(2) - &(&two * &lin(1, 0, -1).pow(2))) - &two,
            lin(2, -1, 1),
            zero.clone(),
        ),
        (
            q(0, 1),
            q(1, 1),
            Bi::n(1),
            lin(2, -1, 0),
            &lin(4, -1, -1).pow(2) - &two,
            lin(4, -1, -1),
            zero.clone(),
        ),
        (
            q(0, 1),
            q(1, 1),
            lin(2, -1, 0),
            lin(3, -1, 0),
            &two * &lin(3, -1, -1).pow(2),
            lin(6, -2, -2),
            lin(-2, 1, 1),
        ),
        (
            q(1, 1),
            q(2, 1),
            Bi::n(0),
            a.clone(),
            &(&(&(&a * &Bi::n(3)) - &v).pow(2) - &(&two * &(&a - &v).pow(2))) - &(&two * &a.pow(2)),
            &a + &v,
            zero,
        ),
        (
            q(1, 1),
            q(2, 1),
            a.clone(),
            &a * &two,
            &two * &(&(&a * &two) - &v).pow(2),
            &(&a * &Bi::n(4)) - &(&v * &two),
            &v - &a,
        ),
    ]
}

/// Chambers of the conic class 2L - e1 - e2 - e3 - e4 with their volumes.
pub fn conic_chambers() -> Vec<Cell> {
    let four = Bi::n(4);
    vec![
        Cell {
            u0: q(0, 1),
            u1: q(1, 1),
            lo: Bi::n(0),
            hi: Bi::n(1),
            f: &lin(4, -1, -2).pow(2) - &(&four * &lin(1, 0, -1).pow(2)),
        },
        Cell {
            u0: q(0, 1),
            u1: q(1, 1),
            lo: Bi::n(1),
            hi: &lin(4, -1, 0) * &Bi::c(q(1, 2)),
            f: lin(4, -1, -2).pow(2),
        },
        Cell {
            u0: q(1, 1),
            u1: q(2, 1),
            lo: Bi::n(0),
            hi: lin(2, -1, 0),
            f: &lin(6, -3, -2).pow(2) - &(&four * &lin(2, -1, -1).pow(2)),
        },
        Cell {
            u0: q(1, 1),
            u1: q(2, 1),
            lo: lin(2, -1, 0),
            hi: &lin(6, -3, 0) * &Bi::c(q(1, 2)),
            f: lin(6, -3, -2).pow(2),
        },
    ]
}

pub fn cells(
    chambers: &[(Q, Q, Bi, Bi, Bi, Bi, Bi)],
    pick: impl Fn(&Bi, &Bi, &Bi) -> Bi,
) -> Vec<Cell> {
    chambers
        .iter()
        .map(|(u0, u1, lo, hi, vol, dot, l34)| Cell {
            u0: u0.clone(),
            u1: u1.clone(),
            lo: lo.clone(),
            hi: hi.clone(),
            f: pick(vol, dot, l34),
        })
        .collect()
}

/// Oracle values keyed by name.
pub struct Oracle;

impl Oracle {
    pub fn sx_hyperplane() -> Q {
        s_divisor(&[
            (q(0, 1), q(1, 1), lin(4, -1, 0), Bi::n(-1)),
            (q(1, 1), q(2, 1), lin(6, -3, 0), lin(-2, 1, 0)),
        ])
    }

    pub fn sx_quadric() -> Q {
        s_divisor(&[
            (q(0, 1), q(1, 1), lin(4, -2, 0), lin(-1, 1, 0)),
            (q(1, 1), q(2, 1), lin(4, -2, 0), Bi::n(0)),
        ])
    }

    pub fn sx_exceptional() -> Q {
        s_divisor(&[
            (q(0, 1), q(1, 3), Bi::n(4), lin(-1, -1, 0)),
            (q(1, 3), q(1, 1), lin(6, -6, 0), lin(-2, 2, 0)),
        ])
    }

    /// (3/30) of the volume integral, split at u = 1.
    pub fn line_pieces() -> (Q, Q) {
        let ch = line_chambers();
        let (a, b) = ch.split_at(3);
        let f = |vol: &Bi, _: &Bi, _: &Bi| vol.clone();
        (
            q(3, 30) * double_integral(&cells(a, f)),
            q(3, 30) * double_integral(&cells(b, f)),
        )
    }

    pub fn point_integral_term() -> Q {
        q(3, 30) * double_integral(&cells(&line_chambers(), |_, dot, _| dot.pow(2)))
    }

    pub fn point_f_term() -> Q {
        q(6, 30) * double_integral(&cells(&line_chambers(), |_, dot, l34| dot * l34))
    }

    pub fn conic() -> Q {
        q(3, 30) * double_integral(&conic_chambers())
    }
}
