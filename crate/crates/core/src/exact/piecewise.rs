use super::poly::Poly1;
use super::rational::Rational;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub lo: Rational,
    pub hi: Rational,
    pub poly: Poly1,
}

impl Piece {
    pub fn new(lo: Rational, hi: Rational, poly: Poly1) -> Self {
        Piece { lo, hi, poly }
    }
}

/// Exact piecewise polynomial on a contiguous run of closed intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewisePoly {
    pieces: Vec<Piece>,
}

impl PiecewisePoly {
    /// Builds a continuous piecewise polynomial. Pieces must be ordered,
    /// contiguous and agree at every shared breakpoint.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        Self::build(pieces, true)
    }

    /// Like [`PiecewisePoly::new`] but allows jumps at breakpoints.
    pub fn with_discontinuities(pieces: Vec<Piece>) -> Result<Self> {
        Self::build(pieces, false)
    }

    fn build(pieces: Vec<Piece>, continuous: bool) -> Result<Self> {
        for (i, p) in pieces.iter().enumerate() {
            if p.lo > p.hi {
                return Err(Error::MalformedPiecewise(format!(
                    "piece {i} has lo {} > hi {}",
                    p.lo, p.hi
                )));
            }
        }
        for (i, w) in pieces.windows(2).enumerate() {
            if w[0].hi != w[1].lo {
                return Err(Error::MalformedPiecewise(format!(
                    "pieces {i} and {} are not contiguous ({} vs {})",
                    i + 1,
                    w[0].hi,
                    w[1].lo
                )));
            }
            if continuous {
                let left = w[0].poly.eval(&w[0].hi);
                let right = w[1].poly.eval(&w[1].lo);
                if left != right {
                    return Err(Error::MalformedPiecewise(format!(
                        "jump at breakpoint {}: {left} vs {right}",
                        w[0].hi
                    )));
                }
            }
        }
        Ok(PiecewisePoly { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn support(&self) -> Option<(Rational, Rational)> {
        Some((
            self.pieces.first()?.lo.clone(),
            self.pieces.last()?.hi.clone(),
        ))
    }

    /// Value at `x`; at an interior breakpoint the left piece wins.
    pub fn eval(&self, x: &Rational) -> Option<Rational> {
        self.pieces
            .iter()
            .find(|p| &p.lo <= x && x <= &p.hi)
            .map(|p| p.poly.eval(x))
    }

    /// Sum of the exact piece integrals.
    pub fn integral(&self) -> Rational {
        self.pieces
            .iter()
            .map(|p| p.poly.integrate(&p.lo, &p.hi))
            .sum()
    }
}

pub fn piecewise_integrate(f: &PiecewisePoly) -> Rational {
    f.integral()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    fn vol_minus_u_h() -> PiecewisePoly {
        // (4-u)^3 - 12(4-u) + 14 on [0,1], 5(2-u)^3 on [1,2]
        let a = Poly1::from_ints(&[4, -1]);
        let first = &(&a.pow(3) - &a.scale(&int(12))) + &Poly1::from_ints(&[14]);
        let second = Poly1::from_ints(&[2, -1]).pow(3).scale(&int(5));
        PiecewisePoly::new(vec![
            Piece::new(int(0), int(1), first),
            Piece::new(int(1), int(2), second),
        ])
        .unwrap()
    }

    #[test]
    fn volume_along_plane_direction_integrates_to_17() {
        assert_eq!(piecewise_integrate(&vol_minus_u_h()), int(17));
    }

    #[test]
    fn volume_along_quadric_direction_integrates_to_43_over_2() {
        let a = Poly1::from_ints(&[4, -2]);
        let b = Poly1::from_ints(&[-1, 1]);
        let first = &(&a.pow(3) - &(&a * &b.pow(2)).scale(&int(12))) - &b.pow(3).scale(&int(14));
        let f = PiecewisePoly::new(vec![
            Piece::new(int(0), int(1), first),
            Piece::new(int(1), int(2), a.pow(3)),
        ])
        .unwrap();
        assert_eq!(f.integral(), rat(43, 2));
    }

    #[test]
    fn zero_piece() {
        let f = PiecewisePoly::new(vec![Piece::new(int(0), int(3), Poly1::zero())]).unwrap();
        assert_eq!(f.integral(), int(0));
    }

    #[test]
    fn rejects_gaps_and_jumps() {
        let gap = PiecewisePoly::new(vec![
            Piece::new(int(0), int(1), Poly1::zero()),
            Piece::new(int(2), int(3), Poly1::zero()),
        ]);
        assert!(matches!(gap, Err(Error::MalformedPiecewise(_))));

        let jump = vec![
            Piece::new(int(0), int(1), Poly1::from_ints(&[1])),
            Piece::new(int(1), int(2), Poly1::from_ints(&[2])),
        ];
        assert!(PiecewisePoly::new(jump.clone()).is_err());
        let f = PiecewisePoly::with_discontinuities(jump).unwrap();
        assert_eq!(f.integral(), int(3));
        assert_eq!(f.eval(&int(1)), Some(int(1)));
        assert_eq!(f.eval(&int(5)), None);
    }
}
