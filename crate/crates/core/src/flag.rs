//! Flag invariants `S(W^S; Z)` and `S(W^{S,l}; Z)` computed by sweeping the
//! two-parameter family `P(u)|_S - vZ`.
//!
//! At a fixed rational `u` the Zariski support is constant on intervals of
//! `v` (chambers), and on each chamber every quantity is a polynomial in `v`.
//! Chamber ends are found exactly by running the Zariski loop at `v + eps`
//! and solving the affine event equations. The outer `u` integral is then
//! reconstructed per table piece from verified cubic interpolation.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{int, interpolate_verified, rat, rational_sqrt, Poly1, Rational};
use crate::lattice::{DivisorClass, Lex, SurfaceLattice};
use crate::threefold::{NakayamaTable, RestrictionMap, TablePiece, TripleForm};

/// Bisection depth for locating breakpoints of the inner integrals.
pub const MAX_REFINEMENT_DEPTH: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagCase {
    pub name: String,
    pub table: NakayamaTable,
    pub map: RestrictionMap,
    /// Class of `Z`, or of a comparison curve `C` with `|Z - C|` nonempty.
    pub z_class: DivisorClass,
    /// For curve invariants: multiplicity of `Z` in `D|_S` for each
    /// threefold divisor `D` that appears in `N(u)`. For point invariants:
    /// order of `D|_S` restricted to the flag curve at `Z`.
    pub n_orders: BTreeMap<String, Rational>,
    /// Index of the flag curve among the surface's negative curves.
    pub flag_curve: Option<usize>,
    /// Multiplicity of the point `Z` on each negative curve of the surface;
    /// empty means zero everywhere.
    pub incidence: Vec<Rational>,
}

impl FlagCase {
    pub fn surface(&self) -> &SurfaceLattice {
        &self.map.surface
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| {
            Err(Error::InvalidInput(format!(
                "flag case `{}`: {msg}",
                self.name
            )))
        };
        let s = self.surface();
        if self.map.divisor != self.table.divisor {
            return bad(format!(
                "restriction `{}` is to {}, table `{}` is for {}",
                self.map.name, self.map.divisor, self.table.name, self.table.divisor
            ));
        }
        if self.z_class.lattice() != s.name() {
            return Err(Error::LatticeMismatch {
                expected: s.name().to_string(),
                found: self.z_class.lattice().to_string(),
            });
        }
        if self.z_class.is_zero() {
            return bad("Z class is zero".into());
        }
        if !s.effective_cone_contains(&self.z_class)? {
            return bad(format!("Z class {} is not effective", self.z_class));
        }
        if let Some(l) = self.flag_curve {
            if l >= s.negative_curves().len() {
                return bad(format!("flag curve index {l} out of range"));
            }
        }
        if !self.incidence.is_empty() && self.incidence.len() != s.negative_curves().len() {
            return bad(format!(
                "incidence has {} entries, surface has {} curves",
                self.incidence.len(),
                s.negative_curves().len()
            ));
        }
        if self
            .incidence
            .iter()
            .any(|m| m.is_negative() || !m.is_integer())
        {
            return bad("incidence multiplicities must be nonnegative integers".into());
        }
        if self.n_orders.values().any(Signed::is_negative) {
            return bad("orders along Z must be nonnegative".into());
        }
        Ok(())
    }

    /// `P(u)|_S - vZ`.
    pub fn restricted_class(&self, u: &Rational, v: &Rational) -> Result<DivisorClass> {
        let piece = self.piece_at(u)?;
        let base = self.map.restrict(&piece.positive.at(u));
        Ok(&base - &self.z_class.scaled(v))
    }

    fn piece_at(&self, u: &Rational) -> Result<&TablePiece> {
        self.table.piece_at(u).ok_or_else(|| {
            Error::InvalidInput(format!("u = {u} lies outside table `{}`", self.table.name))
        })
    }

    /// `sum over D of ord(D) * coeff_D(u)` over the negative part at `u`.
    fn n_order_poly(&self, piece: &TablePiece) -> Poly1 {
        piece
            .negative
            .iter()
            .filter_map(|t| self.n_orders.get(&t.divisor).map(|m| t.coeff.scale(m)))
            .fold(Poly1::zero(), |acc, p| acc + p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chamber {
    pub v_lo: Rational,
    pub v_hi: Rational,
    /// Indices of the negative curves in the support of `N(u, v)`.
    pub support: Vec<usize>,
    pub vol_poly: Poly1,
    /// `P(u, v) . l` for the flag curve `l`.
    pub p_dot_poly: Option<Poly1>,
    /// Order at `Z` of `N(u, v)` restricted to `l`, excluding `l` itself.
    pub n_ord_poly: Option<Poly1>,
}

impl Chamber {
    pub fn contains(&self, v: &Rational) -> bool {
        &self.v_lo <= v && v <= &self.v_hi
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChamberSlice {
    pub u: Rational,
    pub chambers: Vec<Chamber>,
}

impl ChamberSlice {
    /// Pseudo-effective threshold in `v`; zero for an empty sweep.
    pub fn v_max(&self) -> Rational {
        self.chambers
            .last()
            .map_or_else(Rational::zero, |c| c.v_hi.clone())
    }

    pub fn volume_integral(&self) -> Rational {
        self.chambers
            .iter()
            .map(|c| c.vol_poly.integrate(&c.v_lo, &c.v_hi))
            .sum()
    }
}

/// Affine function `value + slope * (x - x0)` as a polynomial in `x`.
fn affine_from(value: &Rational, slope: &Rational, x0: &Rational) -> Poly1 {
    Poly1::new(vec![value - slope * x0, slope.clone()])
}

/// First `x > x0` where `value + slope * (x - x0)` reaches zero from above.
fn exit_root(value: &Rational, slope: &Rational, x0: &Rational) -> Option<Rational> {
    if slope.is_negative() && value.is_positive() {
        Some(x0 + value / -slope)
    } else {
        None
    }
}

/// Smallest root of `p` in the open interval `(lo, hi)`.
fn first_root_inside(
    p: &Poly1,
    lo: &Rational,
    hi: &Rational,
    u: &Rational,
) -> Result<Option<Rational>> {
    let roots = match p.degree() {
        None | Some(0) => vec![],
        Some(1) => vec![-p.coeff(0) / p.coeff(1)],
        Some(2) => {
            let (c, b, a) = (p.coeff(0), p.coeff(1), p.coeff(2));
            let disc = &b * &b - int(4) * &a * &c;
            if disc.is_negative() {
                vec![]
            } else {
                let Some(r) = rational_sqrt(&disc) else {
                    let lo_sign = p.eval(lo).signum();
                    let hi_sign = p.eval(hi).signum();
                    if lo_sign != hi_sign && !hi_sign.is_zero() {
                        return Err(Error::IrrationalBoundary {
                            u: u.clone(),
                            detail: format!(
                                "volume {} vanishes at an irrational point of ({lo}, {hi})",
                                p.display_in("v")
                            ),
                        });
                    }
                    return Ok(None);
                };
                let two_a = int(2) * &a;
                vec![(-&b - &r) / &two_a, (-&b + &r) / &two_a]
            }
        }
        Some(d) => {
            return Err(Error::Sweep(format!("volume polynomial of degree {d}")));
        }
    };
    Ok(roots.into_iter().filter(|r| lo < r && r < hi).min())
}

/// Splits `[0, v_max]` into Zariski chambers of `P(u)|_S - vZ`.
pub fn chamber_sweep(case: &FlagCase, u: &Rational) -> Result<ChamberSlice> {
    let s = case.surface();
    let piece = case.piece_at(u)?;
    let base: Vec<Rational> = case.map.restrict(&piece.positive.at(u)).coeffs().to_vec();
    let dir: Vec<Rational> = case.z_class.coeffs().iter().map(|c| -c).collect();
    let gram = s.gram();
    let curves = s.negative_curves();
    let flag_dual = case.flag_curve.map(|l| dual(gram, &curves[l].class));

    let mut chambers = Vec::new();
    let mut v = Rational::zero();
    loop {
        let lex: Vec<Lex> = base
            .iter()
            .zip(&dir)
            .map(|(b, d)| Lex {
                value: b + d * &v,
                slope: d.clone(),
            })
            .collect();
        let raw = match s.zariski_raw(&lex) {
            Ok(raw) => raw,
            Err(Error::NotPseudoEffective(_)) => break,
            Err(e) => return Err(e),
        };

        let mut events: Vec<Rational> = Vec::new();
        for c in &raw.coeffs {
            events.extend(exit_root(&c.value, &c.slope, &v));
        }
        let pairing = |d: &[Rational]| -> (Rational, Rational) {
            let value = raw.positive.iter().zip(d).map(|(p, x)| &p.value * x).sum();
            let slope = raw.positive.iter().zip(d).map(|(p, x)| &p.slope * x).sum();
            (value, slope)
        };
        for (i, c) in curves.iter().enumerate() {
            if !raw.support.contains(&i) {
                let (value, slope) = pairing(&dual(gram, &c.class));
                events.extend(exit_root(&value, &slope, &v));
            }
        }
        for g in s.effective_generators() {
            let (value, slope) = pairing(&dual(gram, g));
            events.extend(exit_root(&value, &slope, &v));
        }
        let Some(mut v_hi) = events.into_iter().min() else {
            return Err(Error::Sweep(format!(
                "at u = {u} the family never leaves the pseudo-effective cone"
            )));
        };

        let positive: Vec<Poly1> = raw
            .positive
            .iter()
            .map(|p| affine_from(&p.value, &p.slope, &v))
            .collect();
        let symbolic_vol = quadratic_form(gram, &positive);
        let mut last = false;
        if let Some(r) = first_root_inside(&symbolic_vol, &v, &v_hi, u)? {
            v_hi = r;
            last = true;
        }

        let width = &v_hi - &v;
        let at = |k: i64, n: i64| &v + &width * rat(k, n);
        let sample = |x: Rational| -> Result<(Rational, Rational)> {
            let d = s.class(base.iter().zip(&dir).map(|(b, d)| b + d * &x).collect())?;
            let vol = s.volume(&d)?;
            Ok((x, vol))
        };
        let samples = vec![sample(at(1, 5))?, sample(at(2, 5))?, sample(at(3, 5))?];
        let vol_poly = interpolate_verified(&samples, 2, &[sample(at(4, 5))?])?;
        if vol_poly != symbolic_vol {
            return Err(Error::Sweep(format!(
                "at u = {u}, chamber [{v}, {v_hi}]: interpolated volume {} differs from P^2 = {}",
                vol_poly.display_in("v"),
                symbolic_vol.display_in("v")
            )));
        }
        for x in [at(1, 3), at(2, 3)] {
            let d = s.class(base.iter().zip(&dir).map(|(b, d)| b + d * &x).collect())?;
            let z = s.zariski(&d)?;
            if z.support() != raw.support {
                return Err(Error::Sweep(format!(
                    "at u = {u}, support changes inside chamber [{v}, {v_hi}] (at v = {x})"
                )));
            }
        }

        let p_dot_poly = flag_dual.as_ref().map(|ld| {
            positive
                .iter()
                .zip(ld)
                .fold(Poly1::zero(), |acc, (p, x)| acc + p.scale(x))
        });
        let n_ord_poly = case.flag_curve.map(|l| {
            raw.support
                .iter()
                .zip(&raw.coeffs)
                .filter(|(i, _)| **i != l)
                .filter_map(|(i, c)| {
                    let m = case.incidence.get(*i)?;
                    Some(affine_from(&c.value, &c.slope, &v).scale(m))
                })
                .fold(Poly1::zero(), |acc, p| acc + p)
        });

        chambers.push(Chamber {
            v_lo: v.clone(),
            v_hi: v_hi.clone(),
            support: raw.support,
            vol_poly,
            p_dot_poly,
            n_ord_poly,
        });
        v = v_hi;
        if last {
            break;
        }
    }

    if let Some(c) = chambers.last() {
        let end = c.vol_poly.eval(&c.v_hi);
        if !end.is_zero() {
            return Err(Error::Sweep(format!(
                "at u = {u} the volume is {end} at the pseudo-effective threshold {}",
                c.v_hi
            )));
        }
    }
    Ok(ChamberSlice {
        u: u.clone(),
        chambers,
    })
}

fn dual(gram: &[Vec<Rational>], class: &[Rational]) -> Vec<Rational> {
    gram.iter()
        .map(|row| row.iter().zip(class).map(|(a, b)| a * b).sum())
        .collect()
}

fn quadratic_form(gram: &[Vec<Rational>], x: &[Poly1]) -> Poly1 {
    let mut total = Poly1::zero();
    for (i, row) in gram.iter().enumerate() {
        for (j, g) in row.iter().enumerate() {
            if !g.is_zero() {
                total = total + (&x[i] * &x[j]).scale(g);
            }
        }
    }
    total
}

/// Integrates each component of `inner` over `[lo, hi]`, assuming each is
/// a polynomial of degree at most 3 there. Samples at `lo + (hi - lo)k/6`
/// for `k = 1..4`, checks at `k = 5`, and bisects on a failed check.
fn integrate_cubic<F>(lo: &Rational, hi: &Rational, depth: u32, inner: &F) -> Result<Vec<Rational>>
where
    F: Fn(&Rational) -> Result<Vec<Rational>>,
{
    let width = hi - lo;
    let xs: Vec<Rational> = (1..=5).map(|k| lo + &width * rat(k, 6)).collect();
    let values = xs.iter().map(inner).collect::<Result<Vec<_>>>()?;
    let components = values[0].len();
    let mut totals = Vec::with_capacity(components);
    for c in 0..components {
        let samples: Vec<(Rational, Rational)> = (0..4)
            .map(|k| (xs[k].clone(), values[k][c].clone()))
            .collect();
        let check = [(xs[4].clone(), values[4][c].clone())];
        match interpolate_verified(&samples, 3, &check) {
            Ok(g) => totals.push(g.integrate(lo, hi)),
            Err(Error::VerificationFailed { .. }) => {
                if depth >= MAX_REFINEMENT_DEPTH {
                    return Err(Error::BreakpointRefinementExceeded {
                        lo: lo.clone(),
                        hi: hi.clone(),
                        depth,
                    });
                }
                let mid = (lo + hi) / int(2);
                let left = integrate_cubic(lo, &mid, depth + 1, inner)?;
                let right = integrate_cubic(&mid, hi, depth + 1, inner)?;
                return Ok(left.into_iter().zip(right).map(|(a, b)| a + b).collect());
            }
            Err(e) => return Err(e),
        }
    }
    Ok(totals)
}

/// Per-piece contributions of the double integral and the `N`-part term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveInvariant {
    pub value: Rational,
    /// `(u_lo, u_hi, 3/(-K)^3 * double integral over the piece)`.
    pub pieces: Vec<(Rational, Rational, Rational)>,
    /// `3/(-K)^3 * integral of (P(u)^2 . S) * ord_Z(N(u)|_S)`.
    pub correction: Rational,
}

/// `S(W^S; Z) = 3/(-K)^3 * [ integral (P^2.S) ord_Z(N|_S) du
///                          + double integral vol(P(u)|_S - vZ) dv du ]`.
pub fn s_curve(form: &TripleForm, case: &FlagCase) -> Result<CurveInvariant> {
    case.validate()?;
    let scale = int(3) / form.anticanonical_degree();
    let mut pieces = Vec::new();
    let mut correction = Rational::zero();
    for piece in &case.table.pieces {
        let inner = |u: &Rational| Ok(vec![chamber_sweep(case, u)?.volume_integral()]);
        let total = integrate_cubic(&piece.lo, &piece.hi, 0, &inner)?;
        pieces.push((piece.lo.clone(), piece.hi.clone(), &scale * &total[0]));

        let ord = case.n_order_poly(piece);
        if !ord.is_zero() {
            let s = crate::threefold::FamilyClass::constant(&case.table.divisor);
            let p2s = form.triple_poly(&piece.positive, &piece.positive, &s);
            correction += (p2s * ord).integrate(&piece.lo, &piece.hi);
        }
    }
    correction *= &scale;
    let value = pieces.iter().map(|(_, _, x)| x).sum::<Rational>() + &correction;
    Ok(CurveInvariant {
        value,
        pieces,
        correction,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointInvariant {
    /// `6/(-K)^3 * double integral (P.l) * ord_Z(N'|_l + N(u,v)|_l)`.
    pub f_term: Rational,
    /// `3/(-K)^3 * double integral (P.l)^2`.
    pub integral_term: Rational,
    pub total: Rational,
}

/// `S(W^{S,l}; Z)` for a point `Z` on the flag curve `l`.
pub fn s_point(form: &TripleForm, case: &FlagCase) -> Result<PointInvariant> {
    case.validate()?;
    if case.flag_curve.is_none() {
        return Err(Error::InvalidInput(format!(
            "flag case `{}` has no flag curve",
            case.name
        )));
    }
    let mut f_sum = Rational::zero();
    let mut sq_sum = Rational::zero();
    for piece in &case.table.pieces {
        let ord_prime = case.n_order_poly(piece);
        let inner = |u: &Rational| -> Result<Vec<Rational>> {
            let slice = chamber_sweep(case, u)?;
            let outer_ord = ord_prime.eval(u);
            let mut f = Rational::zero();
            let mut sq = Rational::zero();
            for c in &slice.chambers {
                let pl = c.p_dot_poly.clone().unwrap_or_else(Poly1::zero);
                let ord = c.n_ord_poly.clone().unwrap_or_else(Poly1::zero)
                    + Poly1::constant(outer_ord.clone());
                f += (&pl * &ord).integrate(&c.v_lo, &c.v_hi);
                sq += (&pl * &pl).integrate(&c.v_lo, &c.v_hi);
            }
            Ok(vec![f, sq])
        };
        let totals = integrate_cubic(&piece.lo, &piece.hi, 0, &inner)?;
        f_sum += &totals[0];
        sq_sum += &totals[1];
    }
    let k3 = form.anticanonical_degree();
    let f_term = int(6) * f_sum / &k3;
    let integral_term = int(3) * sq_sum / &k3;
    let total = &f_term + &integral_term;
    Ok(PointInvariant {
        f_term,
        integral_term,
        total,
    })
}

/// Ready-made flag cases on the built-in geometry.
pub mod builtin {
    use super::*;
    use crate::threefold::{
        del_pezzo_map, exceptional_table, hirzebruch_map, hyperplane_table, quadric_map,
        quadric_table,
    };

    fn case(
        name: &str,
        table: NakayamaTable,
        map: RestrictionMap,
        z: &[i64],
        n_orders: &[(&str, i64)],
    ) -> FlagCase {
        let z_class = map.surface.class_from_ints(z).unwrap();
        FlagCase {
            name: name.to_string(),
            table,
            map,
            z_class,
            n_orders: n_orders
                .iter()
                .map(|(k, m)| (k.to_string(), int(*m)))
                .collect(),
            flag_curve: None,
            incidence: vec![],
        }
    }

    /// `Z = E ∩ Q` on the quadric, class `O(1,3)`, a component of `N(u)|_Q`.
    pub fn quadric_exceptional_curve() -> FlagCase {
        case(
            "Qt/E-curve",
            quadric_table(),
            quadric_map(),
            &[1, 3],
            &[("E", 1)],
        )
    }

    /// Comparison class `O(1,1)` on the quadric.
    pub fn quadric_diagonal() -> FlagCase {
        case("Qt/diagonal", quadric_table(), quadric_map(), &[1, 1], &[])
    }

    /// Comparison class `s` on `E` modelled as `F_n`.
    pub fn exceptional_section(n: u32) -> Result<FlagCase> {
        Ok(case(
            &format!("E/F{n}/s"),
            exceptional_table(),
            hirzebruch_map(n)?,
            &[1, 0],
            &[],
        ))
    }

    /// `Z = l12` on a hyperplane section.
    pub fn hyperplane_line() -> FlagCase {
        case(
            "H/l12",
            hyperplane_table(),
            del_pezzo_map(),
            &[1, -1, -1, 0, 0],
            &[],
        )
    }

    /// `Z = l34` on a hyperplane section.
    pub fn hyperplane_opposite_line() -> FlagCase {
        case(
            "H/l34",
            hyperplane_table(),
            del_pezzo_map(),
            &[1, 0, 0, -1, -1],
            &[],
        )
    }

    /// Conic class `2l - e1 - e2 - e3 - e4` on a hyperplane section.
    pub fn hyperplane_conic() -> FlagCase {
        case(
            "H/conic",
            hyperplane_table(),
            del_pezzo_map(),
            &[2, -1, -1, -1, -1],
            &[],
        )
    }

    /// Point on `l12`, with the given multiplicity on `l34`.
    pub fn hyperplane_point(on_l34: i64) -> FlagCase {
        let mut c = hyperplane_line();
        c.name = if on_l34 > 0 {
            "H/l12∩l34"
        } else {
            "H/l12-general"
        }
        .to_string();
        let s = c.surface().clone();
        let l12 = s.curve_index("l12").unwrap();
        let l34 = s.curve_index("l34").unwrap();
        let mut incidence = vec![Rational::zero(); s.negative_curves().len()];
        incidence[l34] = int(on_l34);
        c.flag_curve = Some(l12);
        c.incidence = incidence;
        c
    }
}
