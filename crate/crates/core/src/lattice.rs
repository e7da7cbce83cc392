//! Néron–Severi lattices of the surfaces that appear in the computation,
//! with the intersection pairing, cone tests and Zariski decomposition.
//!
//! Each lattice carries a finite list of curves that may appear in negative
//! parts (the Mori-cone generators) and a list of classes spanning the
//! pseudo-effective cone. Both are input data; nothing is discovered.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{int, Rational};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurfaceKind {
    /// `P^1 x P^1`, basis `O(1,0)`, `O(0,1)`.
    Quadric,
    /// Hirzebruch surface `F_n`, basis `(s, l)` with `s^2 = -n`.
    Hirzebruch(u32),
    /// Blow-up of the plane in four general points, basis `(l, e1..e4)`.
    DelPezzo5,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Curve {
    pub label: String,
    pub class: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceLattice {
    name: Arc<str>,
    basis: Vec<String>,
    gram: Vec<Vec<Rational>>,
    negative_curves: Vec<Curve>,
    effective_generators: Vec<Vec<Rational>>,
    // gram * class for every negative curve and generator
    curve_duals: Vec<Vec<Rational>>,
    generator_duals: Vec<Vec<Rational>>,
    // inward facet normals of the effective cone; None if it is not full-dimensional
    effective_facets: Option<Vec<Vec<Rational>>>,
}

/// A divisor class on a named lattice.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DivisorClass {
    lattice: Arc<str>,
    coeffs: Vec<Rational>,
}

impl DivisorClass {
    pub fn lattice(&self) -> &str {
        &self.lattice
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn scaled(&self, t: &Rational) -> DivisorClass {
        DivisorClass {
            lattice: self.lattice.clone(),
            coeffs: self.coeffs.iter().map(|c| c * t).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn zip_with(&self, rhs: &DivisorClass, f: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        assert_eq!(
            self.lattice, rhs.lattice,
            "divisor arithmetic across different lattices"
        );
        DivisorClass {
            lattice: self.lattice.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }
}

/// Panics if the operands live on different lattices.
impl Add for &DivisorClass {
    type Output = DivisorClass;
    fn add(self, rhs: &DivisorClass) -> DivisorClass {
        self.zip_with(rhs, |a, b| a + b)
    }
}

/// Panics if the operands live on different lattices.
impl Sub for &DivisorClass {
    type Output = DivisorClass;
    fn sub(self, rhs: &DivisorClass) -> DivisorClass {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &DivisorClass {
    type Output = DivisorClass;
    fn neg(self) -> DivisorClass {
        self.scaled(&int(-1))
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZariskiDecomposition {
    pub positive: DivisorClass,
    /// `(index into negative_curves, coefficient)`, sorted by index.
    pub negative: Vec<(usize, Rational)>,
}

impl ZariskiDecomposition {
    pub fn support(&self) -> Vec<usize> {
        self.negative.iter().map(|(i, _)| *i).collect()
    }

    pub fn negative_class(&self, lattice: &SurfaceLattice) -> DivisorClass {
        let mut coeffs = vec![Rational::zero(); lattice.rank()];
        for (i, x) in &self.negative {
            for (c, k) in coeffs.iter_mut().zip(&lattice.negative_curves[*i].class) {
                *c += x * k;
            }
        }
        DivisorClass {
            lattice: lattice.name.clone(),
            coeffs,
        }
    }

    /// Checks every defining property against the original class. Returns a
    /// description of the first violated axiom.
    pub fn check_axioms(
        &self,
        lattice: &SurfaceLattice,
        original: &DivisorClass,
    ) -> std::result::Result<(), String> {
        let reassembled = &self.positive + &self.negative_class(lattice);
        if &reassembled != original {
            return Err(format!("P + N = {reassembled} differs from D = {original}"));
        }
        if self.negative.iter().any(|(_, x)| x.is_negative()) {
            return Err("negative part has a negative coefficient".into());
        }
        if !lattice.is_nef_coeffs(&self.positive.coeffs) {
            return Err(format!("positive part {} is not nef", self.positive));
        }
        for (i, _) in &self.negative {
            let dot = lattice.pair(&self.positive.coeffs, &lattice.negative_curves[*i].class);
            if !dot.is_zero() {
                return Err(format!(
                    "P . {} = {dot}, expected 0",
                    lattice.negative_curves[*i].label
                ));
            }
        }
        let support = self.support();
        if !support.is_empty() && !linalg::is_negative_definite(&lattice.support_gram(&support)) {
            return Err("support Gram matrix is not negative definite".into());
        }
        Ok(())
    }
}

/// Ordered scalars the Zariski loop can run over: plain rationals, or
/// rationals perturbed by an infinitesimal (see [`Lex`]).
pub(crate) trait Scalar:
    Clone + Ord + fmt::Debug + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self>
{
    fn origin() -> Self;
    fn scale(&self, q: &Rational) -> Self;
}

impl Scalar for Rational {
    fn origin() -> Self {
        Rational::zero()
    }
    fn scale(&self, q: &Rational) -> Self {
        self * q
    }
}

/// `value + slope * eps` for an infinitesimal `eps > 0`, ordered
/// lexicographically. Running the Zariski loop on `D(v0 + eps)` yields the
/// support that holds on an open interval immediately to the right of `v0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Lex {
    pub value: Rational,
    pub slope: Rational,
}

impl Ord for Lex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .cmp(&other.value)
            .then_with(|| self.slope.cmp(&other.slope))
    }
}

impl PartialOrd for Lex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Lex {
    type Output = Lex;
    fn add(self, rhs: Lex) -> Lex {
        Lex {
            value: self.value + rhs.value,
            slope: self.slope + rhs.slope,
        }
    }
}

impl Sub for Lex {
    type Output = Lex;
    fn sub(self, rhs: Lex) -> Lex {
        Lex {
            value: self.value - rhs.value,
            slope: self.slope - rhs.slope,
        }
    }
}

impl Neg for Lex {
    type Output = Lex;
    fn neg(self) -> Lex {
        Lex {
            value: -self.value,
            slope: -self.slope,
        }
    }
}

impl Scalar for Lex {
    fn origin() -> Self {
        Lex {
            value: Rational::zero(),
            slope: Rational::zero(),
        }
    }
    fn scale(&self, q: &Rational) -> Self {
        Lex {
            value: &self.value * q,
            slope: &self.slope * q,
        }
    }
}

/// Output of the generic Zariski loop.
#[derive(Debug, Clone)]
pub(crate) struct RawZariski<T> {
    pub support: Vec<usize>,
    pub coeffs: Vec<T>,
    pub positive: Vec<T>,
}

impl SurfaceLattice {
    /// Built-in lattices are constructed once per kind and cloned.
    pub fn builtin(kind: SurfaceKind) -> SurfaceLattice {
        static CACHE: OnceLock<Mutex<HashMap<SurfaceKind, SurfaceLattice>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Mutex::default);
        if let Some(s) = cache.lock().expect("lattice cache").get(&kind) {
            return s.clone();
        }
        let s = SurfaceLattice::construct_builtin(kind);
        cache.lock().expect("lattice cache").insert(kind, s.clone());
        s
    }

    fn construct_builtin(kind: SurfaceKind) -> SurfaceLattice {
        let r = |rows: &[&[i64]]| -> Vec<Vec<Rational>> {
            rows.iter()
                .map(|row| row.iter().map(|&x| int(x)).collect())
                .collect()
        };
        let curve = |label: &str, class: &[i64]| Curve {
            label: label.to_string(),
            class: class.iter().map(|&x| int(x)).collect(),
        };
        let (name, basis, gram, curves) = match kind {
            SurfaceKind::Quadric => (
                "quadric".to_string(),
                vec!["O(1,0)".to_string(), "O(0,1)".to_string()],
                r(&[&[0, 1], &[1, 0]]),
                vec![curve("r1", &[1, 0]), curve("r2", &[0, 1])],
            ),
            SurfaceKind::Hirzebruch(n) => (
                format!("F{n}"),
                vec!["s".to_string(), "l".to_string()],
                r(&[&[-(n as i64), 1], &[1, 0]]),
                vec![curve("s", &[1, 0]), curve("l", &[0, 1])],
            ),
            SurfaceKind::DelPezzo5 => {
                let mut curves = Vec::new();
                for i in 1..=4 {
                    let mut c = [0i64; 5];
                    c[i] = 1;
                    curves.push(curve(&format!("e{i}"), &c));
                }
                for i in 1..=4 {
                    for j in i + 1..=4 {
                        let mut c = [1i64, 0, 0, 0, 0];
                        c[i] = -1;
                        c[j] = -1;
                        curves.push(curve(&format!("l{i}{j}"), &c));
                    }
                }
                (
                    "dP5".to_string(),
                    ["l", "e1", "e2", "e3", "e4"].map(String::from).to_vec(),
                    r(&[
                        &[1, 0, 0, 0, 0],
                        &[0, -1, 0, 0, 0],
                        &[0, 0, -1, 0, 0],
                        &[0, 0, 0, -1, 0],
                        &[0, 0, 0, 0, -1],
                    ]),
                    curves,
                )
            }
        };
        let generators = curves.iter().map(|c| c.class.clone()).collect();
        SurfaceLattice::new(&name, basis, gram, curves, generators)
            .expect("built-in lattices are well formed")
    }

    /// A user-supplied lattice. The Gram matrix must be square and symmetric,
    /// every class must have the lattice rank, and every listed curve must
    /// have non-positive self-intersection.
    pub fn new(
        name: &str,
        basis: Vec<String>,
        gram: Vec<Vec<Rational>>,
        negative_curves: Vec<Curve>,
        effective_generators: Vec<Vec<Rational>>,
    ) -> Result<SurfaceLattice> {
        let n = basis.len();
        if n == 0 {
            return Err(Error::InvalidInput(format!(
                "lattice `{name}` has an empty basis"
            )));
        }
        if gram.len() != n || gram.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput(format!(
                "Gram matrix of `{name}` must be {n}x{n}"
            )));
        }
        for i in 0..n {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "Gram matrix of `{name}` is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let dual = |c: &Vec<Rational>| linalg::mat_vec(&gram, c);
        for c in &negative_curves {
            if c.class.len() != n {
                return Err(Error::InvalidInput(format!(
                    "curve `{}` on `{name}` has {} coefficients, expected {n}",
                    c.label,
                    c.class.len()
                )));
            }
            let self_int: Rational = dual(&c.class)
                .iter()
                .zip(&c.class)
                .map(|(a, b)| a * b)
                .sum();
            if self_int.is_positive() {
                return Err(Error::InvalidInput(format!(
                    "curve `{}` on `{name}` has positive self-intersection {self_int}",
                    c.label
                )));
            }
        }
        if let Some(g) = effective_generators.iter().find(|g| g.len() != n) {
            return Err(Error::InvalidInput(format!(
                "effective generator on `{name}` has {} coefficients, expected {n}",
                g.len()
            )));
        }
        let curve_duals = negative_curves.iter().map(|c| dual(&c.class)).collect();
        let generator_duals = effective_generators.iter().map(dual).collect();
        let effective_facets = cone_facets(&effective_generators, n);
        Ok(SurfaceLattice {
            name: Arc::from(name),
            basis,
            gram,
            negative_curves,
            effective_generators,
            curve_duals,
            generator_duals,
            effective_facets,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The same lattice under another name. Classes built on the old name
    /// do not carry over.
    pub fn renamed(&self, name: &str) -> SurfaceLattice {
        SurfaceLattice {
            name: Arc::from(name),
            ..self.clone()
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn gram(&self) -> &[Vec<Rational>] {
        &self.gram
    }

    pub fn negative_curves(&self) -> &[Curve] {
        &self.negative_curves
    }

    pub fn effective_generators(&self) -> &[Vec<Rational>] {
        &self.effective_generators
    }

    pub fn curve_index(&self, label: &str) -> Option<usize> {
        self.negative_curves.iter().position(|c| c.label == label)
    }

    pub fn class(&self, coeffs: Vec<Rational>) -> Result<DivisorClass> {
        if coeffs.len() != self.rank() {
            return Err(Error::InvalidInput(format!(
                "class with {} coefficients on rank {} lattice `{}`",
                coeffs.len(),
                self.rank(),
                self.name
            )));
        }
        Ok(DivisorClass {
            lattice: self.name.clone(),
            coeffs,
        })
    }

    pub fn class_from_ints(&self, coeffs: &[i64]) -> Result<DivisorClass> {
        self.class(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn curve_class(&self, index: usize) -> DivisorClass {
        DivisorClass {
            lattice: self.name.clone(),
            coeffs: self.negative_curves[index].class.clone(),
        }
    }

    fn check(&self, d: &DivisorClass) -> Result<()> {
        if d.lattice != self.name {
            return Err(Error::LatticeMismatch {
                expected: self.name.to_string(),
                found: d.lattice.to_string(),
            });
        }
        Ok(())
    }

    pub(crate) fn pair(&self, a: &[Rational], b: &[Rational]) -> Rational {
        a.iter()
            .zip(linalg::mat_vec(&self.gram, b))
            .map(|(x, y)| x * y)
            .sum()
    }

    fn pair_dual<T: Scalar>(d: &[T], dual: &[Rational]) -> T {
        d.iter()
            .zip(dual)
            .fold(T::origin(), |acc, (x, y)| acc + x.scale(y))
    }

    pub fn intersect(&self, a: &DivisorClass, b: &DivisorClass) -> Result<Rational> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.pair(&a.coeffs, &b.coeffs))
    }

    pub fn self_intersection(&self, d: &DivisorClass) -> Result<Rational> {
        self.intersect(d, d)
    }

    pub(crate) fn is_nef_coeffs(&self, d: &[Rational]) -> bool {
        self.curve_duals
            .iter()
            .chain(&self.generator_duals)
            .all(|dual| !Self::pair_dual(d, dual).is_negative())
    }

    /// Nonnegative against every listed curve and effective generator.
    pub fn is_nef(&self, d: &DivisorClass) -> Result<bool> {
        self.check(d)?;
        Ok(self.is_nef_coeffs(&d.coeffs))
    }

    pub(crate) fn support_gram(&self, support: &[usize]) -> Vec<Vec<Rational>> {
        support
            .iter()
            .map(|&i| {
                support
                    .iter()
                    .map(|&j| Self::pair_dual(&self.negative_curves[i].class, &self.curve_duals[j]))
                    .collect()
            })
            .collect()
    }

    /// Zariski decomposition by growing the negative support: every curve
    /// pairing negatively with the current positive part joins the support,
    /// the coefficients are re-solved from the support Gram system, and the
    /// loop repeats until the positive part is nef.
    pub(crate) fn zariski_raw<T: Scalar>(&self, d: &[T]) -> Result<RawZariski<T>> {
        let mut support: Vec<usize> = Vec::new();
        let mut coeffs: Vec<T> = Vec::new();
        let mut positive: Vec<T> = d.to_vec();
        loop {
            let fresh: Vec<usize> = (0..self.negative_curves.len())
                .filter(|i| !support.contains(i))
                .filter(|&i| Self::pair_dual(&positive, &self.curve_duals[i]) < T::origin())
                .collect();
            if fresh.is_empty() {
                break;
            }
            support.extend(fresh);
            support.sort_unstable();
            let gram = self.support_gram(&support);
            if !linalg::is_negative_definite(&gram) {
                let labels: Vec<&str> = support
                    .iter()
                    .map(|&i| self.negative_curves[i].label.as_str())
                    .collect();
                return Err(Error::NotPseudoEffective(format!(
                    "support {{{}}} is not negative definite",
                    labels.join(", ")
                )));
            }
            let inv = linalg::inverse(&gram).expect("negative definite matrices are invertible");
            let rhs: Vec<T> = support
                .iter()
                .map(|&i| Self::pair_dual(d, &self.curve_duals[i]))
                .collect();
            coeffs = inv.iter().map(|row| Self::pair_dual(&rhs, row)).collect();
            positive = d.to_vec();
            for (x, &i) in coeffs.iter().zip(&support) {
                for (p, c) in positive.iter_mut().zip(&self.negative_curves[i].class) {
                    *p = p.clone() - x.scale(c);
                }
            }
        }
        if let Some(k) = coeffs.iter().position(|x| x < &T::origin()) {
            return Err(Error::NotPseudoEffective(format!(
                "negative coefficient on `{}`",
                self.negative_curves[support[k]].label
            )));
        }
        if let Some(g) = self
            .generator_duals
            .iter()
            .position(|dual| Self::pair_dual(&positive, dual) < T::origin())
        {
            return Err(Error::NotPseudoEffective(format!(
                "positive part pairs negatively with effective generator #{g}"
            )));
        }
        Ok(RawZariski {
            support,
            coeffs,
            positive,
        })
    }

    pub fn zariski(&self, d: &DivisorClass) -> Result<ZariskiDecomposition> {
        self.check(d)?;
        let raw = self.zariski_raw(&d.coeffs)?;
        Ok(ZariskiDecomposition {
            positive: DivisorClass {
                lattice: self.name.clone(),
                coeffs: raw.positive,
            },
            negative: raw.support.into_iter().zip(raw.coeffs).collect(),
        })
    }

    /// Self-intersection of the positive part, or zero when the class is not
    /// pseudo-effective.
    pub fn volume(&self, d: &DivisorClass) -> Result<Rational> {
        match self.zariski(d) {
            Ok(z) => Ok(self.pair(&z.positive.coeffs, &z.positive.coeffs)),
            Err(Error::NotPseudoEffective(_)) => Ok(Rational::zero()),
            Err(e) => Err(e),
        }
    }

    /// Whether `d` is a nonnegative combination of the effective generators,
    /// decided by the facet inequalities of the generated cone. Independent
    /// of the Zariski loop; requires the generators to span the lattice.
    pub fn effective_cone_contains(&self, d: &DivisorClass) -> Result<bool> {
        self.check(d)?;
        let Some(facets) = &self.effective_facets else {
            return Err(Error::InvalidInput(format!(
                "effective generators of `{}` do not span the lattice",
                self.name
            )));
        };
        Ok(facets.iter().all(|w| !dot(w, &d.coeffs).is_negative()))
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Inward normals of the facets of the cone spanned by `gens` in dimension
/// `n`. Every facet is spanned by `n - 1` independent generators, so the
/// candidates are the cofactor normals of all `(n - 1)`-subsets that keep
/// every generator on one side.
fn cone_facets(gens: &[Vec<Rational>], n: usize) -> Option<Vec<Vec<Rational>>> {
    let mut moment = vec![vec![Rational::zero(); n]; n];
    for g in gens {
        for i in 0..n {
            for j in 0..n {
                moment[i][j] += &g[i] * &g[j];
            }
        }
    }
    if linalg::determinant(&moment).is_zero() {
        return None;
    }
    let mut facets: Vec<Vec<Rational>> = Vec::new();
    for subset in combinations(gens.len(), n - 1) {
        let normal: Vec<Rational> = (0..n)
            .map(|skip| {
                let minor: Vec<Vec<Rational>> = subset
                    .iter()
                    .map(|&g| {
                        (0..n)
                            .filter(|&c| c != skip)
                            .map(|c| gens[g][c].clone())
                            .collect()
                    })
                    .collect();
                let det = linalg::determinant(&minor);
                if skip % 2 == 0 {
                    det
                } else {
                    -det
                }
            })
            .collect();
        if normal.iter().all(Zero::is_zero) {
            continue;
        }
        let sides: Vec<Rational> = gens.iter().map(|g| dot(&normal, g)).collect();
        let normal = if sides.iter().all(|x| !x.is_negative()) {
            normal
        } else if sides.iter().all(|x| !x.is_positive()) {
            normal.iter().map(|x| -x).collect()
        } else {
            continue;
        };
        if !facets.contains(&normal) {
            facets.push(normal);
        }
    }
    Some(facets)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Shorthand for [`SurfaceLattice::builtin`].
pub fn make_surface(kind: SurfaceKind) -> SurfaceLattice {
    SurfaceLattice::builtin(kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    fn dp5() -> SurfaceLattice {
        make_surface(SurfaceKind::DelPezzo5)
    }

    /// (4-u-v) l - (1-v)(e1+e2) - e3 - e4
    fn l12_family(s: &SurfaceLattice, u: Rational, v: Rational) -> DivisorClass {
        let one = int(1);
        s.class(vec![
            int(4) - &u - &v,
            &v - &one,
            &v - &one,
            -one.clone(),
            -one,
        ])
        .unwrap()
    }

    #[test]
    fn builtin_shapes() {
        let q = make_surface(SurfaceKind::Quadric);
        assert_eq!(q.rank(), 2);
        assert_eq!(q.gram(), &[vec![int(0), int(1)], vec![int(1), int(0)]]);

        let f2 = make_surface(SurfaceKind::Hirzebruch(2));
        assert_eq!(f2.gram(), &[vec![int(-2), int(1)], vec![int(1), int(0)]]);

        let s = dp5();
        assert_eq!(s.negative_curves().len(), 10);
        let k = s.class_from_ints(&[3, -1, -1, -1, -1]).unwrap();
        assert_eq!(s.self_intersection(&k).unwrap(), int(5));
        for c in s.negative_curves() {
            let cc = s.pair(&c.class, &c.class);
            assert_eq!(cc, int(-1), "{}", c.label);
        }
    }

    #[test]
    fn intersections() {
        for n in 0..6u32 {
            let f = make_surface(SurfaceKind::Hirzebruch(n));
            let q = f.class(vec![int(1), rat(n as i64 + 2, 2)]).unwrap();
            let s = f.curve_class(0);
            assert_eq!(f.intersect(&q, &s).unwrap(), rat(2 - n as i64, 2));
        }
        let s = dp5();
        let l12 = s.curve_class(s.curve_index("l12").unwrap());
        let l34 = s.curve_class(s.curve_index("l34").unwrap());
        assert_eq!(s.intersect(&l12, &l34).unwrap(), int(1));

        let q = make_surface(SurfaceKind::Quadric);
        let o11 = q.class_from_ints(&[1, 1]).unwrap();
        assert_eq!(q.self_intersection(&o11).unwrap(), int(2));
        let a = q.class_from_ints(&[2, -3]).unwrap();
        let b = q.class_from_ints(&[5, 7]).unwrap();
        assert_eq!(q.intersect(&a, &b).unwrap(), int(2 * 7 + (-3) * 5));
    }

    #[test]
    fn lattice_mismatch() {
        let q = make_surface(SurfaceKind::Quadric);
        let f = make_surface(SurfaceKind::Hirzebruch(0));
        let a = q.class_from_ints(&[1, 1]).unwrap();
        let b = f.class_from_ints(&[1, 1]).unwrap();
        assert!(matches!(
            q.intersect(&a, &b),
            Err(Error::LatticeMismatch { .. })
        ));
        assert!(matches!(q.zariski(&b), Err(Error::LatticeMismatch { .. })));
    }

    #[test]
    fn nef_tests() {
        let s = dp5();
        let anti = s.class_from_ints(&[3, -1, -1, -1, -1]).unwrap();
        assert!(s.is_nef(&anti).unwrap());
        for c in 0..10 {
            assert_eq!(s.intersect(&anti, &s.curve_class(c)).unwrap(), int(1));
        }
        let f2 = make_surface(SurfaceKind::Hirzebruch(2));
        assert!(f2.is_nef(&f2.class_from_ints(&[1, 2]).unwrap()).unwrap());
        assert!(!f2.is_nef(&f2.class_from_ints(&[1, 1]).unwrap()).unwrap());
        let q = make_surface(SurfaceKind::Quadric);
        assert!(!q.is_nef(&q.class_from_ints(&[1, -1]).unwrap()).unwrap());
    }

    #[test]
    fn zariski_first_negative_chamber() {
        let s = dp5();
        let d = l12_family(&s, int(0), rat(3, 2));
        let z = s.zariski(&d).unwrap();
        assert_eq!(z.negative, vec![(0, rat(1, 2)), (1, rat(1, 2))]);
        assert_eq!(
            z.positive,
            s.class(vec![rat(5, 2), int(0), int(0), int(-1), int(-1)])
                .unwrap()
        );
        assert_eq!(s.volume(&d).unwrap(), rat(17, 4));
        // u^2 + 2uv + v^2 - 8u - 8v + 14 at (0, 3/2)
        assert_eq!(rat(9, 4) - int(12) + int(14), rat(17, 4));
    }

    #[test]
    fn zariski_second_negative_chamber() {
        let s = dp5();
        let d = l12_family(&s, int(0), rat(9, 4));
        let z = s.zariski(&d).unwrap();
        let l34 = s.curve_index("l34").unwrap();
        assert_eq!(
            z.negative,
            vec![(0, rat(5, 4)), (1, rat(5, 4)), (l34, rat(1, 4))]
        );
        let expected = s
            .class_from_ints(&[2, 0, 0, -1, -1])
            .unwrap()
            .scaled(&rat(3, 4));
        assert_eq!(z.positive, expected);
        z.check_axioms(&s, &d).unwrap();
    }

    #[test]
    fn nef_class_is_its_own_positive_part() {
        let s = dp5();
        let d = s.class_from_ints(&[3, -1, -1, -1, -1]).unwrap();
        let z = s.zariski(&d).unwrap();
        assert!(z.negative.is_empty());
        assert_eq!(z.positive, d);
    }

    #[test]
    fn hirzebruch_zariski() {
        let f2 = make_surface(SurfaceKind::Hirzebruch(2));
        let d = f2.class_from_ints(&[1, 1]).unwrap();
        let z = f2.zariski(&d).unwrap();
        assert_eq!(z.negative, vec![(0, rat(1, 2))]);
        assert_eq!(z.positive, f2.class(vec![rat(1, 2), int(1)]).unwrap());
    }

    #[test]
    fn quadric_volumes() {
        let q = make_surface(SurfaceKind::Quadric);
        assert_eq!(
            q.volume(&q.class_from_ints(&[3, 1]).unwrap()).unwrap(),
            int(6)
        );
        assert_eq!(
            q.volume(&q.class_from_ints(&[-1, 5]).unwrap()).unwrap(),
            int(0)
        );
        for a in -3..=5 {
            for b in -3..=5 {
                let d = q.class_from_ints(&[a, b]).unwrap();
                let expected = if a >= 0 && b >= 0 {
                    int(2 * a * b)
                } else {
                    int(0)
                };
                assert_eq!(q.volume(&d).unwrap(), expected, "O({a},{b})");
            }
        }
    }

    #[test]
    fn rejects_malformed_lattices() {
        let g = vec![vec![int(0), int(1)], vec![int(2), int(0)]];
        assert!(SurfaceLattice::new("x", vec!["a".into(), "b".into()], g, vec![], vec![]).is_err());
        let g = vec![vec![int(1), int(0)], vec![int(0), int(1)]];
        let c = Curve {
            label: "c".into(),
            class: vec![int(1), int(0)],
        };
        assert!(
            SurfaceLattice::new("x", vec!["a".into(), "b".into()], g, vec![c], vec![]).is_err()
        );
    }

    #[test]
    fn effective_cone_facets() {
        // dual to the ten extremal rays of the nef cone
        assert_eq!(dp5().effective_facets.as_ref().unwrap().len(), 10);
        assert_eq!(
            make_surface(SurfaceKind::Hirzebruch(2))
                .effective_facets
                .unwrap()
                .len(),
            2
        );
        let flat = SurfaceLattice::new(
            "flat",
            vec!["a".into(), "b".into()],
            vec![vec![int(0), int(1)], vec![int(1), int(0)]],
            vec![],
            vec![vec![int(1), int(1)]],
        )
        .unwrap();
        let d = flat.class_from_ints(&[1, 1]).unwrap();
        assert!(flat.effective_cone_contains(&d).is_err());
    }

    fn arb_rat() -> impl Strategy<Value = Rational> {
        (-8i64..=8, 1i64..=3).prop_map(|(n, d)| rat(n, d))
    }

    fn arb_surface() -> impl Strategy<Value = SurfaceLattice> {
        prop_oneof![
            Just(make_surface(SurfaceKind::Quadric)),
            (0u32..4).prop_map(|n| make_surface(SurfaceKind::Hirzebruch(n))),
            Just(dp5()),
        ]
    }

    fn arb_class() -> impl Strategy<Value = (SurfaceLattice, DivisorClass)> {
        arb_surface().prop_flat_map(|s| {
            let n = s.rank();
            prop::collection::vec(arb_rat(), n).prop_map(move |c| {
                let d = s.class(c).unwrap();
                (s.clone(), d)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn zariski_axioms_and_cone_agreement((s, d) in arb_class()) {
            let inside = s.effective_cone_contains(&d).unwrap();
            match s.zariski(&d) {
                Ok(z) => {
                    prop_assert!(inside);
                    if let Err(msg) = z.check_axioms(&s, &d) {
                        prop_assert!(false, "{}", msg);
                    }
                }
                Err(Error::NotPseudoEffective(_)) => prop_assert!(!inside),
                Err(e) => prop_assert!(false, "{}", e),
            }
        }

        #[test]
        fn volume_of_nef_is_square((s, d) in arb_class()) {
            if s.is_nef(&d).unwrap() {
                prop_assert_eq!(s.volume(&d).unwrap(), s.self_intersection(&d).unwrap());
            }
        }

        #[test]
        fn volume_is_quadratic_homogeneous((s, d) in arb_class(), t in (0i64..=6, 1i64..=4)) {
            let t = rat(t.0, t.1);
            prop_assert_eq!(s.volume(&d.scaled(&t)).unwrap(), &t * &t * s.volume(&d).unwrap());
        }

        #[test]
        fn volume_decreases_along_effective((s, d) in arb_class(), c in 0usize..10, t in (0i64..=6, 1i64..=4)) {
            let c = c % s.negative_curves().len();
            let t = rat(t.0, t.1);
            let smaller = &d - &s.curve_class(c).scaled(&t);
            prop_assert!(s.volume(&d).unwrap() >= s.volume(&smaller).unwrap());
        }

        #[test]
        fn dp5_permutation_equivariance(
            coeffs in prop::collection::vec(arb_rat(), 5),
            perm in Just([0usize, 1, 2, 3]).prop_shuffle(),
        ) {
            let s = dp5();
            let d = s.class(coeffs.clone()).unwrap();
            let permute = |c: &[Rational]| {
                let mut out = c.to_vec();
                for (i, &p) in perm.iter().enumerate() {
                    out[1 + p] = c[1 + i].clone();
                }
                s.class(out).unwrap()
            };
            let pd = permute(&coeffs);
            prop_assert_eq!(s.volume(&d).unwrap(), s.volume(&pd).unwrap());
            match (s.zariski(&d), s.zariski(&pd)) {
                (Ok(z), Ok(pz)) => {
                    prop_assert_eq!(permute(z.positive.coeffs()), pz.positive.clone());
                    prop_assert_eq!(
                        permute(z.negative_class(&s).coeffs()),
                        pz.negative_class(&s)
                    );
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "pseudo-effectivity not preserved"),
            }
        }
    }
}
