//! Intersection ring of the blow-up `X` of `P^3` along a twisted quartic,
//! in the basis `(H, E)`.
//!
//! The Nakayama tables describing `-K_X - uS` are input data. They are not
//! derived here; [`validate_table`] certifies every consequence that can be
//! checked exactly.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{int, rat, Poly1, Rational};
use crate::lattice::{DivisorClass, SurfaceKind, SurfaceLattice};

/// Symmetric trilinear form on `span(H, E)`, stored by the number of `E`
/// factors: `[H^3, H^2 E, H E^2, E^3]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleForm {
    pub values: [Rational; 4],
}

impl TripleForm {
    /// `H^3 = 1`, `H^2 E = 0`, `H E^2 = -4`, `E^3 = -14`.
    pub fn standard() -> TripleForm {
        TripleForm {
            values: [int(1), int(0), int(-4), int(-14)],
        }
    }

    pub fn triple(&self, a: &ThreefoldClass, b: &ThreefoldClass, c: &ThreefoldClass) -> Rational {
        let mut total = Rational::zero();
        for (i, x) in [&a.h, &a.e].into_iter().enumerate() {
            for (j, y) in [&b.h, &b.e].into_iter().enumerate() {
                for (k, z) in [&c.h, &c.e].into_iter().enumerate() {
                    total += x * y * z * &self.values[i + j + k];
                }
            }
        }
        total
    }

    /// The triple product of `u`-dependent classes as a polynomial in `u`.
    pub fn triple_poly(&self, a: &FamilyClass, b: &FamilyClass, c: &FamilyClass) -> Poly1 {
        let mut total = Poly1::zero();
        for (i, x) in [&a.h, &a.e].into_iter().enumerate() {
            for (j, y) in [&b.h, &b.e].into_iter().enumerate() {
                for (k, z) in [&c.h, &c.e].into_iter().enumerate() {
                    total = total + (&(x * y) * z).scale(&self.values[i + j + k]);
                }
            }
        }
        total
    }

    pub fn cube(&self, d: &ThreefoldClass) -> Rational {
        self.triple(d, d, d)
    }

    /// `(-K_X)^3`.
    pub fn anticanonical_degree(&self) -> Rational {
        let k = ThreefoldClass::anticanonical();
        self.cube(&k)
    }
}

/// `h H + e E`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ThreefoldClass {
    pub h: Rational,
    pub e: Rational,
}

impl ThreefoldClass {
    pub fn new(h: Rational, e: Rational) -> Self {
        ThreefoldClass { h, e }
    }

    pub fn from_ints(h: i64, e: i64) -> Self {
        ThreefoldClass::new(int(h), int(e))
    }

    pub fn hyperplane() -> Self {
        Self::from_ints(1, 0)
    }

    pub fn exceptional() -> Self {
        Self::from_ints(0, 1)
    }

    /// Strict transform of the quadric through the quartic, `2H - E`.
    pub fn quadric() -> Self {
        Self::from_ints(2, -1)
    }

    /// `-K_X = 4H - E`.
    pub fn anticanonical() -> Self {
        Self::from_ints(4, -1)
    }

    pub fn scaled(&self, t: &Rational) -> Self {
        ThreefoldClass::new(&self.h * t, &self.e * t)
    }

    pub fn is_zero(&self) -> bool {
        self.h.is_zero() && self.e.is_zero()
    }
}

impl Add for &ThreefoldClass {
    type Output = ThreefoldClass;
    fn add(self, rhs: &ThreefoldClass) -> ThreefoldClass {
        ThreefoldClass::new(&self.h + &rhs.h, &self.e + &rhs.e)
    }
}

impl Sub for &ThreefoldClass {
    type Output = ThreefoldClass;
    fn sub(self, rhs: &ThreefoldClass) -> ThreefoldClass {
        ThreefoldClass::new(&self.h - &rhs.h, &self.e - &rhs.e)
    }
}

impl Neg for &ThreefoldClass {
    type Output = ThreefoldClass;
    fn neg(self) -> ThreefoldClass {
        ThreefoldClass::new(-&self.h, -&self.e)
    }
}

impl fmt::Display for ThreefoldClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})H + ({})E", self.h, self.e)
    }
}

/// A class whose coefficients are polynomials in `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyClass {
    pub h: Poly1,
    pub e: Poly1,
}

impl FamilyClass {
    pub fn new(h: Poly1, e: Poly1) -> Self {
        FamilyClass { h, e }
    }

    pub fn constant(d: &ThreefoldClass) -> Self {
        FamilyClass::new(Poly1::constant(d.h.clone()), Poly1::constant(d.e.clone()))
    }

    /// `h0 + h1 u` and `e0 + e1 u`.
    pub fn affine(h0: Rational, h1: Rational, e0: Rational, e1: Rational) -> Self {
        FamilyClass::new(Poly1::new(vec![h0, h1]), Poly1::new(vec![e0, e1]))
    }

    /// `-K_X - u S`.
    pub fn anticanonical_minus(s: &ThreefoldClass) -> Self {
        let k = ThreefoldClass::anticanonical();
        FamilyClass::affine(k.h, -&s.h, k.e, -&s.e)
    }

    pub fn at(&self, u: &Rational) -> ThreefoldClass {
        ThreefoldClass::new(self.h.eval(u), self.e.eval(u))
    }

    pub fn degree(&self) -> usize {
        self.h
            .degree()
            .unwrap_or(0)
            .max(self.e.degree().unwrap_or(0))
    }
}

impl Add for &FamilyClass {
    type Output = FamilyClass;
    fn add(self, rhs: &FamilyClass) -> FamilyClass {
        FamilyClass::new(&self.h + &rhs.h, &self.e + &rhs.e)
    }
}

impl Mul<&ThreefoldClass> for &Poly1 {
    type Output = FamilyClass;
    fn mul(self, d: &ThreefoldClass) -> FamilyClass {
        FamilyClass::new(self.scale(&d.h), self.scale(&d.e))
    }
}

/// The two polyhedral cones of `X`, each spanned by two classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    /// Spanned by `E` and `2H - E`.
    Effective,
    /// Spanned by `H` and `3H - E`.
    Nef,
}

impl Cone {
    /// Coordinates of `d` in the cone's generators.
    pub fn coordinates(self, d: &ThreefoldClass) -> [Rational; 2] {
        match self {
            // d = x E + y (2H - E)
            Cone::Effective => {
                let y = &d.h / int(2);
                [&d.e + &y, y]
            }
            // d = a H + b (3H - E)
            Cone::Nef => [&d.h + &d.e * int(3), -&d.e],
        }
    }

    pub fn contains(self, d: &ThreefoldClass) -> bool {
        self.coordinates(d).iter().all(|c| !c.is_negative())
    }
}

/// Largest `mu` with `-K_X - mu S` in `cone`.
pub fn threshold(cone: Cone, s: &ThreefoldClass) -> Result<Rational> {
    if s.is_zero() {
        return Err(Error::Unbounded);
    }
    let k = cone.coordinates(&ThreefoldClass::anticanonical());
    let c = cone.coordinates(s);
    k.iter()
        .zip(&c)
        .filter(|(_, ci)| ci.is_positive())
        .map(|(ki, ci)| ki / ci)
        .min()
        .ok_or(Error::Unbounded)
}

pub fn pseff_threshold(s: &ThreefoldClass) -> Result<Rational> {
    threshold(Cone::Effective, s)
}

pub fn nef_threshold(s: &ThreefoldClass) -> Result<Rational> {
    threshold(Cone::Nef, s)
}

/// `coeff(u) * divisor` in a negative part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeTerm {
    pub divisor: String,
    pub class: ThreefoldClass,
    pub coeff: Poly1,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TablePiece {
    pub lo: Rational,
    pub hi: Rational,
    pub positive: FamilyClass,
    pub negative: Vec<NegativeTerm>,
}

impl TablePiece {
    pub fn negative_class(&self) -> FamilyClass {
        self.negative
            .iter()
            .fold(FamilyClass::new(Poly1::zero(), Poly1::zero()), |acc, t| {
                &acc + &(&t.coeff * &t.class)
            })
    }

    pub fn contains(&self, u: &Rational) -> bool {
        &self.lo <= u && u <= &self.hi
    }
}

/// Piecewise `P(u)` and `N(u)` for `-K_X - uS`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NakayamaTable {
    pub name: String,
    pub divisor: ThreefoldClass,
    pub pieces: Vec<TablePiece>,
    pub pseff_limit: Rational,
}

impl NakayamaTable {
    pub fn piece_at(&self, u: &Rational) -> Option<&TablePiece> {
        self.pieces.iter().find(|p| p.contains(u))
    }

    /// Splits the piece containing `u` in its interior into two.
    pub fn refine_at(&self, u: &Rational) -> NakayamaTable {
        let mut pieces = Vec::with_capacity(self.pieces.len() + 1);
        for p in &self.pieces {
            if &p.lo < u && u < &p.hi {
                let mut left = p.clone();
                left.hi = u.clone();
                let mut right = p.clone();
                right.lo = u.clone();
                pieces.push(left);
                pieces.push(right);
            } else {
                pieces.push(p.clone());
            }
        }
        NakayamaTable {
            pieces,
            ..self.clone()
        }
    }
}

/// Images of `H` and `E` in the Néron–Severi lattice of a surface `S` in `X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictionMap {
    pub name: String,
    pub surface: SurfaceLattice,
    pub divisor: ThreefoldClass,
    pub h_image: DivisorClass,
    pub e_image: DivisorClass,
}

impl RestrictionMap {
    /// Fails unless `(A|_S).(B|_S) = A.B.S` for `A, B` in `{H, E}`.
    pub fn new(
        name: &str,
        form: &TripleForm,
        surface: SurfaceLattice,
        divisor: ThreefoldClass,
        h_image: DivisorClass,
        e_image: DivisorClass,
    ) -> Result<RestrictionMap> {
        let map = RestrictionMap {
            name: name.to_string(),
            surface,
            divisor,
            h_image,
            e_image,
        };
        map.check_compatibility(form)?;
        Ok(map)
    }

    pub fn check_compatibility(&self, form: &TripleForm) -> Result<()> {
        let basis = [
            ("H", ThreefoldClass::hyperplane(), &self.h_image),
            ("E", ThreefoldClass::exceptional(), &self.e_image),
        ];
        for (na, a, ia) in &basis {
            for (nb, b, ib) in &basis {
                let on_surface = self.surface.intersect(ia, ib)?;
                let on_threefold = form.triple(a, b, &self.divisor);
                if on_surface != on_threefold {
                    return Err(Error::InvalidInput(format!(
                        "restriction `{}`: {na}|.{nb}| = {on_surface} but {na}.{nb}.S = {on_threefold}",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn restrict(&self, d: &ThreefoldClass) -> DivisorClass {
        &self.h_image.scaled(&d.h) + &self.e_image.scaled(&d.e)
    }

    /// Coefficients of `D(u)|_S` as polynomials in `u`.
    pub fn restrict_family(&self, d: &FamilyClass) -> Vec<Poly1> {
        self.h_image
            .coeffs()
            .iter()
            .zip(self.e_image.coeffs())
            .map(|(hc, ec)| d.h.scale(hc) + d.e.scale(ec))
            .collect()
    }
}

/// Outcome of [`validate_table`]. Violations are failures; notes record
/// what the checks could not establish.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TableDiagnostics {
    pub violations: Vec<String>,
    pub notes: Vec<String>,
}

impl TableDiagnostics {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a table against everything that follows from its definition:
/// additivity, contiguity, continuity of `P`, `N` and the volume, signs of
/// the negative part, and nefness of `P(u)` restricted to each surface in
/// `maps` at the ends and midpoint of every piece.
pub fn validate_table(
    form: &TripleForm,
    table: &NakayamaTable,
    maps: &[&RestrictionMap],
) -> TableDiagnostics {
    let mut diag = TableDiagnostics::default();
    let mut bad = |msg: String| diag.violations.push(msg);

    if table.pieces.is_empty() {
        bad("table has no pieces".into());
        return diag;
    }
    if !table.pieces[0].lo.is_zero() {
        bad(format!(
            "first piece starts at {}, not 0",
            table.pieces[0].lo
        ));
    }
    let last_hi = &table.pieces[table.pieces.len() - 1].hi;
    if last_hi != &table.pseff_limit {
        bad(format!(
            "last piece ends at {last_hi}, declared limit is {}",
            table.pseff_limit
        ));
    }
    match pseff_threshold(&table.divisor) {
        Ok(t) if t != table.pseff_limit => bad(format!(
            "declared limit {} differs from the effective-cone threshold {t}",
            table.pseff_limit
        )),
        Ok(_) => {}
        Err(e) => bad(format!("effective-cone threshold: {e}")),
    }

    let target = FamilyClass::anticanonical_minus(&table.divisor);
    for (i, p) in table.pieces.iter().enumerate() {
        if p.lo >= p.hi {
            bad(format!("piece {i} is empty: [{}, {}]", p.lo, p.hi));
        }
        if &p.positive + &p.negative_class() != target {
            bad(format!("piece {i}: P + N differs from -K_X - uS"));
        }
        for t in &p.negative {
            if t.coeff.degree().unwrap_or(0) > 1 {
                bad(format!(
                    "piece {i}: coefficient of {} is not affine",
                    t.divisor
                ));
                continue;
            }
            for u in [&p.lo, &p.hi] {
                let c = t.coeff.eval(u);
                if c.is_negative() {
                    bad(format!(
                        "piece {i}: coefficient of {} is {c} at u = {u}",
                        t.divisor
                    ));
                }
            }
        }
        let mid = (&p.lo + &p.hi) / int(2);
        for u in [&p.lo, &mid, &p.hi] {
            let pu = p.positive.at(u);
            for m in maps {
                let r = m.restrict(&pu);
                if !m.surface.is_nef(&r).unwrap_or(false) {
                    bad(format!(
                        "piece {i}: P({u})|_{} = {r} is not nef",
                        m.surface.name()
                    ));
                }
            }
        }
    }
    for (i, w) in table.pieces.windows(2).enumerate() {
        if w[0].hi != w[1].lo {
            bad(format!("pieces {i} and {} are not contiguous", i + 1));
            continue;
        }
        let u = &w[0].hi;
        let (pl, pr) = (w[0].positive.at(u), w[1].positive.at(u));
        if pl != pr {
            bad(format!("P jumps at u = {u}: {pl} vs {pr}"));
        }
        let (nl, nr) = (w[0].negative_class().at(u), w[1].negative_class().at(u));
        if nl != nr {
            bad(format!("N jumps at u = {u}: {nl} vs {nr}"));
        }
        let (vl, vr) = (form.cube(&pl), form.cube(&pr));
        if vl != vr {
            bad(format!("volume jumps at u = {u}: {vl} vs {vr}"));
        }
    }
    diag.notes.push(
        "nefness of P(u) on X is checked only through restrictions to the registered surfaces"
            .into(),
    );
    diag
}

/// `S_X(S) = (1/(-K_X)^3) * integral of P(u)^3 over [0, limit]`.
pub fn s_divisor(
    form: &TripleForm,
    table: &NakayamaTable,
    maps: &[&RestrictionMap],
) -> Result<Rational> {
    let diag = validate_table(form, table, maps);
    if !diag.is_ok() {
        return Err(Error::TableViolation {
            table: table.name.clone(),
            detail: diag.violations.join("; "),
        });
    }
    Ok(volume_integral(form, table) / form.anticanonical_degree())
}

/// `integral of P(u)^3 du` over the whole table, without validation.
pub fn volume_integral(form: &TripleForm, table: &NakayamaTable) -> Rational {
    table
        .pieces
        .iter()
        .map(|p| {
            form.triple_poly(&p.positive, &p.positive, &p.positive)
                .integrate(&p.lo, &p.hi)
        })
        .sum()
}

/// Data forced on a Hirzebruch model `F_n` of `E`, with `-E|_E = s + k l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HirzebruchChain {
    pub n: u32,
    pub k: Rational,
    /// `Q|_E` in the basis `(s, l)`.
    pub quadric_restriction: [Rational; 2],
    pub quadric_dot_s: Rational,
}

impl HirzebruchChain {
    pub fn new(n: u32) -> HirzebruchChain {
        let n_r = int(n as i64);
        HirzebruchChain {
            n,
            k: (&n_r - int(14)) / int(2),
            quadric_restriction: [int(1), (&n_r + int(2)) / int(2)],
            quadric_dot_s: (int(2) - &n_r) / int(2),
        }
    }

    /// `k` integral and `Q|_E . s >= 0`, since `s` is not a component of
    /// the irreducible curve `Q ∩ E`.
    pub fn is_admissible(&self) -> bool {
        self.k.is_integer() && !self.quadric_dot_s.is_negative()
    }
}

/// All `n <= max_n` passing [`HirzebruchChain::is_admissible`].
pub fn admissible_hirzebruch_indices(max_n: u32) -> Vec<u32> {
    (0..=max_n)
        .filter(|&n| HirzebruchChain::new(n).is_admissible())
        .collect()
}

fn piece(
    lo: Rational,
    hi: Rational,
    positive: FamilyClass,
    negative: Vec<NegativeTerm>,
) -> TablePiece {
    TablePiece {
        lo,
        hi,
        positive,
        negative,
    }
}

fn neg_term(divisor: &str, class: ThreefoldClass, c0: i64, c1: i64) -> NegativeTerm {
    NegativeTerm {
        divisor: divisor.to_string(),
        class,
        coeff: Poly1::from_ints(&[c0, c1]),
    }
}

fn aff(h0: i64, h1: i64, e0: i64, e1: i64) -> FamilyClass {
    FamilyClass::affine(int(h0), int(h1), int(e0), int(e1))
}

/// Built-in table for `S = 2H - E`.
pub fn quadric_table() -> NakayamaTable {
    NakayamaTable {
        name: "Qt".into(),
        divisor: ThreefoldClass::quadric(),
        pieces: vec![
            piece(int(0), int(1), aff(4, -2, -1, 1), vec![]),
            piece(
                int(1),
                int(2),
                aff(4, -2, 0, 0),
                vec![neg_term("E", ThreefoldClass::exceptional(), -1, 1)],
            ),
        ],
        pseff_limit: int(2),
    }
}

/// Built-in table for `S = E`.
pub fn exceptional_table() -> NakayamaTable {
    NakayamaTable {
        name: "E".into(),
        divisor: ThreefoldClass::exceptional(),
        pieces: vec![
            piece(int(0), rat(1, 3), aff(4, 0, -1, -1), vec![]),
            piece(
                rat(1, 3),
                int(1),
                aff(6, -6, -2, 2),
                vec![neg_term("Qt", ThreefoldClass::quadric(), -1, 3)],
            ),
        ],
        pseff_limit: int(1),
    }
}

/// Built-in table for `S = H`, a general hyperplane section.
pub fn hyperplane_table() -> NakayamaTable {
    NakayamaTable {
        name: "H".into(),
        divisor: ThreefoldClass::hyperplane(),
        pieces: vec![
            piece(int(0), int(1), aff(4, -1, -1, 0), vec![]),
            piece(
                int(1),
                int(2),
                aff(6, -3, -2, 1),
                vec![neg_term("Qt", ThreefoldClass::quadric(), -1, 1)],
            ),
        ],
        pseff_limit: int(2),
    }
}

/// `H -> O(1,1)`, `E -> O(1,3)` on the quadric surface `2H - E`.
pub fn quadric_map() -> RestrictionMap {
    let s = SurfaceLattice::builtin(SurfaceKind::Quadric);
    let h = s.class_from_ints(&[1, 1]).unwrap();
    let e = s.class_from_ints(&[1, 3]).unwrap();
    RestrictionMap::new(
        "Qt->quadric",
        &TripleForm::standard(),
        s,
        ThreefoldClass::quadric(),
        h,
        e,
    )
    .expect("quadric restriction is compatible")
}

/// `H -> 4l`, `E -> -(s + k l)` on `E` viewed as `F_n`.
pub fn hirzebruch_map(n: u32) -> Result<RestrictionMap> {
    let chain = HirzebruchChain::new(n);
    if !chain.is_admissible() {
        return Err(Error::InvalidInput(format!(
            "F{n} is not an admissible model of E"
        )));
    }
    let s = SurfaceLattice::builtin(SurfaceKind::Hirzebruch(n));
    let h = s.class_from_ints(&[0, 4]).unwrap();
    let e = s.class(vec![int(-1), -chain.k]).unwrap();
    RestrictionMap::new(
        &format!("E->F{n}"),
        &TripleForm::standard(),
        s,
        ThreefoldClass::exceptional(),
        h,
        e,
    )
}

/// `H -> l`, `E -> e1 + e2 + e3 + e4` on a hyperplane section, a quintic
/// del Pezzo surface.
pub fn del_pezzo_map() -> RestrictionMap {
    let s = SurfaceLattice::builtin(SurfaceKind::DelPezzo5);
    let h = s.class_from_ints(&[1, 0, 0, 0, 0]).unwrap();
    let e = s.class_from_ints(&[0, 1, 1, 1, 1]).unwrap();
    RestrictionMap::new(
        "H->dP5",
        &TripleForm::standard(),
        s,
        ThreefoldClass::hyperplane(),
        h,
        e,
    )
    .expect("del Pezzo restriction is compatible")
}
