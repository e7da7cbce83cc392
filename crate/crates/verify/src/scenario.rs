//! Declarative scenario files: the geometry, the flag and curve cases, and
//! the expected values checked against them.
//!
//! Every number is a JSON string holding an exact rational, `"p"` or
//! `"p/q"`. Parsing happens in two passes: serde reads the raw schema, then
//! [`Scenario::resolve`] checks cross references and builds engine objects.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use kstab_core::exact::Poly1;
use kstab_core::exact::{parse_rational, ParseRationalError, Rational};
use kstab_core::flag::FlagCase;
use kstab_core::lattice::{Curve, SurfaceKind, SurfaceLattice};
use kstab_core::threefold::{
    FamilyClass, NakayamaTable, NegativeTerm, RestrictionMap, TablePiece, ThreefoldClass,
    TripleForm,
};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Shipped scenario covering the built-in geometry.
pub const BUILTIN_SCENARIO: &str = include_str!("../scenarios/fano222.json");

const VALUE_MARK: &str = "not an exact rational: ";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error at `{path}`{location}: {message}")]
    Schema {
        path: String,
        location: Location,
        message: String,
    },
    #[error("reference error at `{path}`: unknown {what} `{id}`")]
    Reference {
        path: String,
        what: String,
        id: String,
    },
    #[error("value error at `{path}`{location}: {message}")]
    Value {
        path: String,
        location: Location,
        message: String,
    },
}

/// Optional line and column of a parse error.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Location(pub Option<(usize, usize)>);

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some((line, col)) => write!(f, " (line {line}, column {col})"),
            None => Ok(()),
        }
    }
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Schema {
        path: path.into(),
        location: Location::default(),
        message: message.into(),
    }
}

fn reference(path: impl Into<String>, what: &str, id: &str) -> ScenarioError {
    ScenarioError::Reference {
        path: path.into(),
        what: what.to_string(),
        id: id.to_string(),
    }
}

/// An exact rational that reads and writes as a JSON string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Q(pub Rational);

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

/// `"0.25"` -> `1/4`, for error hints.
fn decimal_hint(text: &str) -> Option<Rational> {
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int_part, frac) = body.split_once('.')?;
    if !int_part
        .chars()
        .chain(frac.chars())
        .all(|c| c.is_ascii_digit())
        || frac.is_empty()
    {
        return None;
    }
    let digits = format!("{int_part}{frac}");
    let den = format!("1{}", "0".repeat(frac.len()));
    let q = parse_rational(&format!("{}{digits}/{den}", if neg { "-" } else { "" })).ok()?;
    Some(q)
}

fn value_message(text: &str, err: &ParseRationalError) -> String {
    match (err, decimal_hint(text)) {
        (ParseRationalError::Decimal(_), Some(q)) => {
            format!("{VALUE_MARK}`{text}` is a decimal; write it as \"{q}\"")
        }
        _ => format!("{VALUE_MARK}{err}"),
    }
}

/// Parses a rational inside a scenario, mapping failures to value errors.
pub fn parse_exact(text: &str, path: &str) -> Result<Rational, ScenarioError> {
    parse_rational(text).map_err(|e| ScenarioError::Value {
        path: path.to_string(),
        location: Location::default(),
        message: value_message(text, &e)
            .trim_start_matches(VALUE_MARK)
            .to_string(),
    })
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        struct QVisitor;
        impl Visitor<'_> for QVisitor {
            type Value = Q;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational written as a string, such as \"3/4\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Q, E> {
                parse_rational(v)
                    .map(Q)
                    .map_err(|e| E::custom(value_message(v, &e)))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Q, E> {
                let text = v.to_string();
                let hint = decimal_hint(&text)
                    .map(|q| format!("; write it as \"{q}\""))
                    .unwrap_or_default();
                Err(E::custom(format!(
                    "{VALUE_MARK}number {text} must be a quoted fraction{hint}"
                )))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Q, E> {
                Err(E::custom(format!(
                    "{VALUE_MARK}number {v} must be quoted as \"{v}\""
                )))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Q, E> {
                Err(E::custom(format!(
                    "{VALUE_MARK}number {v} must be quoted as \"{v}\""
                )))
            }
        }
        d.deserialize_any(QVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinSurface {
    Quadric,
    Hirzebruch,
    Delpezzo5,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCurve {
    pub label: String,
    pub class: Vec<Q>,
}

/// Either `builtin` (with `n` for Hirzebruch surfaces) or an explicit
/// `basis`, `gram` and `curves`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSurface {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<BuiltinSurface>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<Q>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curves: Option<Vec<RawCurve>>,
    /// Defaults to the curve classes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effective_generators: Option<Vec<Vec<Q>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTriple {
    #[serde(rename = "HHH")]
    pub hhh: Q,
    #[serde(rename = "HHE")]
    pub hhe: Q,
    #[serde(rename = "HEE")]
    pub hee: Q,
    #[serde(rename = "EEE")]
    pub eee: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawThreefold {
    pub triple: RawTriple,
    /// Named classes as `[h, e]` in the basis `(H, E)`.
    pub divisors: BTreeMap<String, [Q; 2]>,
}

/// Coefficient lists are polynomials in `u`, constant term first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFamily {
    pub h: Vec<Q>,
    pub e: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNegative {
    pub divisor: String,
    pub coeff: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPiece {
    pub lo: Q,
    pub hi: Q,
    pub positive: RawFamily,
    #[serde(default)]
    pub negative: Vec<RawNegative>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTable {
    pub id: String,
    pub divisor: String,
    pub pseff_limit: Q,
    pub pieces: Vec<RawPiece>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRestriction {
    pub id: String,
    pub surface: String,
    pub divisor: String,
    #[serde(rename = "H")]
    pub h: Vec<Q>,
    #[serde(rename = "E")]
    pub e: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFlagCase {
    pub id: String,
    pub table: String,
    pub restriction: String,
    pub z: Vec<Q>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub n_orders: BTreeMap<String, Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag_curve: Option<String>,
    /// Multiplicity of the point on named curves; others are zero.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub incidence: BTreeMap<String, Q>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCurveCase {
    pub id: String,
    pub lambda: Q,
}

/// What an expected entry measures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Quantity {
    /// Triple product of three `[h, e]` classes.
    Triple {
        a: [Q; 2],
        b: [Q; 2],
        c: [Q; 2],
    },
    SDivisor {
        table: String,
    },
    PseffThreshold {
        divisor: String,
    },
    NefThreshold {
        divisor: String,
    },
    /// 1 when the table passes validation, else 0.
    TableValid {
        table: String,
    },
    /// `component`: `total`, `correction` or `piece:<index>`.
    SCurve {
        case: String,
        #[serde(default = "total")]
        component: String,
    },
    /// `component`: `total`, `f_term` or `integral_term`.
    SPoint {
        case: String,
        #[serde(default = "total")]
        component: String,
    },
    SweepVmax {
        case: String,
        u: Q,
    },
    ChamberCount {
        case: String,
        u: Q,
    },
    /// `field`: `k`, `quadric_dot_s` or `quadric_fiber_coeff`.
    Hirzebruch {
        n: u32,
        field: String,
    },
    AdmissibleIndices {
        max_n: u32,
    },
    Resultant {
        curve: String,
    },
    ResultantSymbolic,
    BranchCount {
        curve: String,
    },
    Classification {
        curve: String,
    },
    CertificatePolynomial,
    CertificateAt {
        lambda_squared: Q,
    },
}

fn total() -> String {
    "total".to_string()
}

impl Quantity {
    /// Whether the quantity evaluates to text rather than a rational.
    pub fn is_label(&self) -> bool {
        matches!(
            self,
            Quantity::AdmissibleIndices { .. }
                | Quantity::ResultantSymbolic
                | Quantity::Classification { .. }
                | Quantity::CertificatePolynomial
        )
    }

    pub fn flag_case(&self) -> Option<&str> {
        match self {
            Quantity::SCurve { case, .. }
            | Quantity::SPoint { case, .. }
            | Quantity::SweepVmax { case, .. }
            | Quantity::ChamberCount { case, .. } => Some(case),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawExpected {
    pub id: String,
    pub description: String,
    #[serde(default)]
    pub tags: Vec<String>,
    pub quantity: Quantity,
    pub expect: Vec<String>,
    /// `reference-value` or `derived-oracle:<name>`.
    pub provenance: String,
    pub anchor: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    pub surfaces: Vec<RawSurface>,
    pub threefold: RawThreefold,
    pub tables: Vec<RawTable>,
    pub restrictions: Vec<RawRestriction>,
    #[serde(default)]
    pub flag_cases: Vec<RawFlagCase>,
    #[serde(default)]
    pub curve_cases: Vec<RawCurveCase>,
    pub expected: Vec<RawExpected>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    Compare(Comparison, Rational),
    /// Exact text match for label-valued quantities.
    Is(String),
}

impl Predicate {
    pub fn parse(text: &str, path: &str) -> Result<Predicate, ScenarioError> {
        let t = text.trim();
        if let Some(label) = t.strip_prefix("is ") {
            return Ok(Predicate::Is(label.trim().to_string()));
        }
        let ops = [
            ("<=", Comparison::Le),
            (">=", Comparison::Ge),
            ("!=", Comparison::Ne),
            ("=", Comparison::Eq),
            ("<", Comparison::Lt),
            (">", Comparison::Gt),
        ];
        for (sym, cmp) in ops {
            if let Some(rest) = t.strip_prefix(sym) {
                return Ok(Predicate::Compare(cmp, parse_exact(rest, path)?));
            }
        }
        Err(schema(
            path,
            format!("predicate `{text}` must start with =, !=, <, <=, >, >= or `is`"),
        ))
    }

    pub fn holds(&self, value: &Computed) -> bool {
        match (self, value) {
            (Predicate::Compare(c, rhs), Computed::Value(x)) => match c {
                Comparison::Eq => x == rhs,
                Comparison::Ne => x != rhs,
                Comparison::Lt => x < rhs,
                Comparison::Le => x <= rhs,
                Comparison::Gt => x > rhs,
                Comparison::Ge => x >= rhs,
            },
            (Predicate::Is(label), Computed::Label(s)) => label == s,
            _ => false,
        }
    }

    pub fn is_label(&self) -> bool {
        matches!(self, Predicate::Is(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Computed {
    Value(Rational),
    Label(String),
}

impl fmt::Display for Computed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Computed::Value(q) => write!(f, "{q}"),
            Computed::Label(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseSpec {
    pub id: String,
    pub description: String,
    pub tags: Vec<String>,
    pub quantity: Quantity,
    pub expect_text: Vec<String>,
    pub expect: Vec<Predicate>,
    pub provenance: String,
    pub anchor: String,
    pub notes: Vec<String>,
}

/// A fully resolved scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub raw: RawScenario,
    pub form: TripleForm,
    pub divisors: BTreeMap<String, ThreefoldClass>,
    pub surfaces: BTreeMap<String, SurfaceLattice>,
    pub tables: BTreeMap<String, NakayamaTable>,
    pub restrictions: BTreeMap<String, RestrictionMap>,
    pub flag_cases: BTreeMap<String, FlagCase>,
    pub curve_cases: BTreeMap<String, Rational>,
    pub cases: Vec<CaseSpec>,
}

fn rationals(v: &[Q]) -> Vec<Rational> {
    v.iter().map(|q| q.0.clone()).collect()
}

fn class_of(pair: &[Q; 2]) -> ThreefoldClass {
    ThreefoldClass::new(pair[0].0.clone(), pair[1].0.clone())
}

fn unique_ids<'a>(ids: impl Iterator<Item = &'a str>, section: &str) -> Result<(), ScenarioError> {
    let mut seen = BTreeSet::new();
    for (i, id) in ids.enumerate() {
        if !seen.insert(id) {
            return Err(schema(
                format!("{section}[{i}].id"),
                format!("duplicate id `{id}`"),
            ));
        }
    }
    Ok(())
}

impl Scenario {
    pub fn builtin() -> Scenario {
        Scenario::from_json(BUILTIN_SCENARIO).expect("shipped scenario is valid")
    }

    pub fn from_path(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let raw: RawScenario = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let location = Location(Some((inner.line(), inner.column())));
            let full = inner.to_string();
            // serde_json appends " at line L column C"; the location is kept separately.
            let message = full
                .rsplit_once(" at line ")
                .map_or(full.as_str(), |(m, _)| m)
                .to_string();
            match message.strip_prefix(VALUE_MARK) {
                Some(m) => ScenarioError::Value {
                    path,
                    location,
                    message: m.to_string(),
                },
                None => ScenarioError::Schema {
                    path,
                    location,
                    message,
                },
            }
        })?;
        Scenario::resolve(raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.raw).expect("scenario serializes")
    }

    pub fn resolve(raw: RawScenario) -> Result<Scenario, ScenarioError> {
        unique_ids(raw.surfaces.iter().map(|s| s.id.as_str()), "surfaces")?;
        unique_ids(raw.tables.iter().map(|s| s.id.as_str()), "tables")?;
        unique_ids(
            raw.restrictions.iter().map(|s| s.id.as_str()),
            "restrictions",
        )?;
        unique_ids(raw.flag_cases.iter().map(|s| s.id.as_str()), "flag_cases")?;
        unique_ids(raw.curve_cases.iter().map(|s| s.id.as_str()), "curve_cases")?;
        unique_ids(raw.expected.iter().map(|s| s.id.as_str()), "expected")?;

        let t = &raw.threefold.triple;
        let form = TripleForm {
            values: [
                t.hhh.0.clone(),
                t.hhe.0.clone(),
                t.hee.0.clone(),
                t.eee.0.clone(),
            ],
        };
        let divisors: BTreeMap<String, ThreefoldClass> = raw
            .threefold
            .divisors
            .iter()
            .map(|(k, v)| (k.clone(), class_of(v)))
            .collect();
        let divisor = |name: &str, path: String| {
            divisors
                .get(name)
                .cloned()
                .ok_or_else(|| reference(path, "divisor", name))
        };

        let mut surfaces = BTreeMap::new();
        for (i, s) in raw.surfaces.iter().enumerate() {
            surfaces.insert(s.id.clone(), resolve_surface(s, &format!("surfaces[{i}]"))?);
        }

        let mut restrictions = BTreeMap::new();
        for (i, r) in raw.restrictions.iter().enumerate() {
            let path = format!("restrictions[{i}]");
            let surface = surfaces
                .get(&r.surface)
                .ok_or_else(|| reference(format!("{path}.surface"), "surface", &r.surface))?
                .clone();
            let d = divisor(&r.divisor, format!("{path}.divisor"))?;
            let h = surface
                .class(rationals(&r.h))
                .map_err(|e| schema(format!("{path}.H"), e.to_string()))?;
            let e = surface
                .class(rationals(&r.e))
                .map_err(|e| schema(format!("{path}.E"), e.to_string()))?;
            let map = RestrictionMap::new(&r.id, &form, surface, d, h, e)
                .map_err(|e| schema(path, e.to_string()))?;
            restrictions.insert(r.id.clone(), map);
        }

        let mut tables = BTreeMap::new();
        for (i, t) in raw.tables.iter().enumerate() {
            let path = format!("tables[{i}]");
            let d = divisor(&t.divisor, format!("{path}.divisor"))?;
            let mut pieces = Vec::new();
            for (j, p) in t.pieces.iter().enumerate() {
                let mut negative = Vec::new();
                for (k, n) in p.negative.iter().enumerate() {
                    let class = divisor(
                        &n.divisor,
                        format!("{path}.pieces[{j}].negative[{k}].divisor"),
                    )?;
                    negative.push(NegativeTerm {
                        divisor: n.divisor.clone(),
                        class,
                        coeff: Poly1::new(rationals(&n.coeff)),
                    });
                }
                pieces.push(TablePiece {
                    lo: p.lo.0.clone(),
                    hi: p.hi.0.clone(),
                    positive: FamilyClass::new(
                        Poly1::new(rationals(&p.positive.h)),
                        Poly1::new(rationals(&p.positive.e)),
                    ),
                    negative,
                });
            }
            tables.insert(
                t.id.clone(),
                NakayamaTable {
                    name: t.id.clone(),
                    divisor: d,
                    pieces,
                    pseff_limit: t.pseff_limit.0.clone(),
                },
            );
        }

        let mut flag_cases = BTreeMap::new();
        for (i, c) in raw.flag_cases.iter().enumerate() {
            let path = format!("flag_cases[{i}]");
            let table = tables
                .get(&c.table)
                .ok_or_else(|| reference(format!("{path}.table"), "table", &c.table))?
                .clone();
            let map = restrictions
                .get(&c.restriction)
                .ok_or_else(|| {
                    reference(format!("{path}.restriction"), "restriction", &c.restriction)
                })?
                .clone();
            let s = map.surface.clone();
            let z_class = s
                .class(rationals(&c.z))
                .map_err(|e| schema(format!("{path}.z"), e.to_string()))?;
            for name in c.n_orders.keys() {
                if !divisors.contains_key(name) {
                    return Err(reference(format!("{path}.n_orders"), "divisor", name));
                }
            }
            let flag_curve = match &c.flag_curve {
                Some(label) => Some(
                    s.curve_index(label)
                        .ok_or_else(|| reference(format!("{path}.flag_curve"), "curve", label))?,
                ),
                None => None,
            };
            let mut incidence = Vec::new();
            if !c.incidence.is_empty() {
                incidence = vec![Rational::from_integer(0.into()); s.negative_curves().len()];
                for (label, m) in &c.incidence {
                    let idx = s
                        .curve_index(label)
                        .ok_or_else(|| reference(format!("{path}.incidence"), "curve", label))?;
                    incidence[idx] = m.0.clone();
                }
            }
            let case = FlagCase {
                name: c.id.clone(),
                table,
                map,
                z_class,
                n_orders: c
                    .n_orders
                    .iter()
                    .map(|(k, v)| (k.clone(), v.0.clone()))
                    .collect(),
                flag_curve,
                incidence,
            };
            case.validate().map_err(|e| schema(path, e.to_string()))?;
            flag_cases.insert(c.id.clone(), case);
        }

        let curve_cases: BTreeMap<String, Rational> = raw
            .curve_cases
            .iter()
            .map(|c| (c.id.clone(), c.lambda.0.clone()))
            .collect();

        let mut cases = Vec::new();
        for (i, e) in raw.expected.iter().enumerate() {
            let path = format!("expected[{i}]");
            check_quantity_refs(
                &e.quantity,
                &format!("{path}.quantity"),
                &divisors,
                &tables,
                &flag_cases,
                &curve_cases,
            )?;
            if e.expect.is_empty() {
                return Err(schema(
                    format!("{path}.expect"),
                    "at least one predicate is required",
                ));
            }
            let expect = e
                .expect
                .iter()
                .enumerate()
                .map(|(j, text)| Predicate::parse(text, &format!("{path}.expect[{j}]")))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(j) = expect
                .iter()
                .position(|p| p.is_label() != e.quantity.is_label())
            {
                return Err(schema(
                    format!("{path}.expect[{j}]"),
                    if e.quantity.is_label() {
                        "this quantity is text; use `is <label>`"
                    } else {
                        "this quantity is a rational; use a comparison"
                    },
                ));
            }
            if e.provenance != "reference-value" && !e.provenance.starts_with("derived-oracle:") {
                return Err(schema(
                    format!("{path}.provenance"),
                    "provenance must be `reference-value` or `derived-oracle:<name>`",
                ));
            }
            cases.push(CaseSpec {
                id: e.id.clone(),
                description: e.description.clone(),
                tags: e.tags.clone(),
                quantity: e.quantity.clone(),
                expect_text: e.expect.clone(),
                expect,
                provenance: e.provenance.clone(),
                anchor: e.anchor.clone(),
                notes: e.notes.clone(),
            });
        }
        cases.sort_by(|a, b| a.id.cmp(&b.id));

        Ok(Scenario {
            raw,
            form,
            divisors,
            surfaces,
            tables,
            restrictions,
            flag_cases,
            curve_cases,
            cases,
        })
    }

    pub fn case(&self, id: &str) -> Option<&CaseSpec> {
        self.cases.iter().find(|c| c.id == id)
    }
}

fn resolve_surface(s: &RawSurface, path: &str) -> Result<SurfaceLattice, ScenarioError> {
    let explicit = s.basis.is_some() || s.gram.is_some() || s.curves.is_some();
    match s.builtin {
        Some(kind) => {
            if explicit || s.effective_generators.is_some() {
                return Err(schema(
                    path,
                    "a built-in surface takes no basis, gram or curves",
                ));
            }
            let kind = match (kind, s.n) {
                (BuiltinSurface::Quadric, None) => SurfaceKind::Quadric,
                (BuiltinSurface::Delpezzo5, None) => SurfaceKind::DelPezzo5,
                (BuiltinSurface::Hirzebruch, Some(n)) => SurfaceKind::Hirzebruch(n),
                (BuiltinSurface::Hirzebruch, None) => {
                    return Err(schema(format!("{path}.n"), "Hirzebruch surfaces need `n`"))
                }
                (_, Some(_)) => {
                    return Err(schema(
                        format!("{path}.n"),
                        "`n` applies only to Hirzebruch surfaces",
                    ))
                }
            };
            Ok(SurfaceLattice::builtin(kind).renamed(&s.id))
        }
        None => {
            let (Some(basis), Some(gram), Some(curves)) = (&s.basis, &s.gram, &s.curves) else {
                return Err(schema(
                    path,
                    "a custom surface needs `basis`, `gram` and `curves`",
                ));
            };
            if s.n.is_some() {
                return Err(schema(
                    format!("{path}.n"),
                    "`n` applies only to Hirzebruch surfaces",
                ));
            }
            let gram: Vec<Vec<Rational>> = gram.iter().map(|row| rationals(row)).collect();
            let curves: Vec<Curve> = curves
                .iter()
                .map(|c| Curve {
                    label: c.label.clone(),
                    class: rationals(&c.class),
                })
                .collect();
            let generators = match &s.effective_generators {
                Some(g) => g.iter().map(|row| rationals(row)).collect(),
                None => curves.iter().map(|c| c.class.clone()).collect(),
            };
            SurfaceLattice::new(&s.id, basis.clone(), gram, curves, generators)
                .map_err(|e| schema(format!("{path}.gram"), e.to_string()))
        }
    }
}

fn check_quantity_refs(
    q: &Quantity,
    path: &str,
    divisors: &BTreeMap<String, ThreefoldClass>,
    tables: &BTreeMap<String, NakayamaTable>,
    flag_cases: &BTreeMap<String, FlagCase>,
    curve_cases: &BTreeMap<String, Rational>,
) -> Result<(), ScenarioError> {
    match q {
        Quantity::SDivisor { table } | Quantity::TableValid { table } => {
            if !tables.contains_key(table) {
                return Err(reference(format!("{path}.table"), "table", table));
            }
        }
        Quantity::PseffThreshold { divisor } | Quantity::NefThreshold { divisor } => {
            if !divisors.contains_key(divisor) {
                return Err(reference(format!("{path}.divisor"), "divisor", divisor));
            }
        }
        Quantity::Resultant { curve }
        | Quantity::BranchCount { curve }
        | Quantity::Classification { curve } => {
            if !curve_cases.contains_key(curve) {
                return Err(reference(format!("{path}.curve"), "curve case", curve));
            }
        }
        Quantity::Hirzebruch { field, .. }
            if !["k", "quadric_dot_s", "quadric_fiber_coeff"].contains(&field.as_str()) =>
        {
            return Err(schema(
                format!("{path}.field"),
                format!("unknown field `{field}`"),
            ));
        }
        _ => {}
    }
    if let Some(case) = q.flag_case() {
        let Some(fc) = flag_cases.get(case) else {
            return Err(reference(format!("{path}.case"), "flag case", case));
        };
        match q {
            Quantity::SCurve { component, .. } => {
                let ok = component == "total"
                    || component == "correction"
                    || component
                        .strip_prefix("piece:")
                        .and_then(|n| n.parse::<usize>().ok())
                        .is_some_and(|n| n < fc.table.pieces.len());
                if !ok {
                    return Err(schema(
                        format!("{path}.component"),
                        format!("`{component}` is not total, correction or piece:<index in range>"),
                    ));
                }
            }
            Quantity::SPoint { component, .. } => {
                if !["total", "f_term", "integral_term"].contains(&component.as_str()) {
                    return Err(schema(
                        format!("{path}.component"),
                        format!("`{component}` is not total, f_term or integral_term"),
                    ));
                }
                if fc.flag_curve.is_none() {
                    return Err(schema(
                        format!("{path}.case"),
                        format!("flag case `{case}` has no flag curve"),
                    ));
                }
            }
            _ => {}
        }
    }
    Ok(())
}
