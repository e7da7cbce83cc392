//! Evaluation of scenario cases against the engine.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use kstab_core::curve::{
    branch_certificate, branch_divisor, classify_lambda, quartic_cubics, resultant,
    smoothness_resultant_symbolic,
};
use kstab_core::exact::{int, Rational};
use kstab_core::flag::{chamber_sweep, s_curve, s_point, CurveInvariant, FlagCase, PointInvariant};
use kstab_core::threefold::{
    admissible_hirzebruch_indices, nef_threshold, pseff_threshold, s_divisor, validate_table,
    HirzebruchChain, RestrictionMap, ThreefoldClass,
};
use kstab_core::Error;
use rayon::prelude::*;
use thiserror::Error;

use crate::report::{CaseResult, ChamberDump, Report, SliceDump, Status};
use crate::scenario::{CaseSpec, Computed, Quantity, Scenario};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown case `{0}`")]
pub struct UnknownCase(pub String);

type Shared<T> = Arc<OnceLock<Result<T, Error>>>;

/// Evaluates cases of one scenario, sharing expensive flag integrals
/// between cases that read different components of the same invariant.
pub struct Evaluator<'a> {
    scenario: &'a Scenario,
    curves: Mutex<HashMap<String, Shared<CurveInvariant>>>,
    points: Mutex<HashMap<String, Shared<PointInvariant>>>,
}

fn memo<T: Clone>(
    map: &Mutex<HashMap<String, Shared<T>>>,
    key: &str,
    compute: impl FnOnce() -> Result<T, Error>,
) -> Result<T, Error> {
    let cell = map
        .lock()
        .expect("memo lock")
        .entry(key.to_string())
        .or_default()
        .clone();
    cell.get_or_init(compute).clone()
}

impl<'a> Evaluator<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        Evaluator {
            scenario,
            curves: Mutex::default(),
            points: Mutex::default(),
        }
    }

    fn maps(&self) -> Vec<&RestrictionMap> {
        self.scenario.restrictions.values().collect()
    }

    fn flag(&self, id: &str) -> &FlagCase {
        &self.scenario.flag_cases[id]
    }

    fn curve_invariant(&self, id: &str) -> Result<CurveInvariant, Error> {
        memo(&self.curves, id, || {
            s_curve(&self.scenario.form, self.flag(id))
        })
    }

    fn point_invariant(&self, id: &str) -> Result<PointInvariant, Error> {
        memo(&self.points, id, || {
            s_point(&self.scenario.form, self.flag(id))
        })
    }

    pub fn evaluate(&self, q: &Quantity) -> Result<Computed, Error> {
        let s = self.scenario;
        let value = |x: Rational| Ok(Computed::Value(x));
        match q {
            Quantity::Triple { a, b, c } => {
                let cls = |p: &[crate::scenario::Q; 2]| {
                    ThreefoldClass::new(p[0].0.clone(), p[1].0.clone())
                };
                value(s.form.triple(&cls(a), &cls(b), &cls(c)))
            }
            Quantity::SDivisor { table } => {
                value(s_divisor(&s.form, &s.tables[table], &self.maps())?)
            }
            Quantity::PseffThreshold { divisor } => value(pseff_threshold(&s.divisors[divisor])?),
            Quantity::NefThreshold { divisor } => value(nef_threshold(&s.divisors[divisor])?),
            Quantity::TableValid { table } => {
                let diag = validate_table(&s.form, &s.tables[table], &self.maps());
                value(int(i64::from(diag.is_ok())))
            }
            Quantity::SCurve { case, component } => {
                let r = self.curve_invariant(case)?;
                match component.as_str() {
                    "total" => value(r.value),
                    "correction" => value(r.correction),
                    piece => {
                        let idx: usize = piece
                            .trim_start_matches("piece:")
                            .parse()
                            .expect("validated at parse time");
                        value(r.pieces[idx].2.clone())
                    }
                }
            }
            Quantity::SPoint { case, component } => {
                let r = self.point_invariant(case)?;
                value(match component.as_str() {
                    "f_term" => r.f_term,
                    "integral_term" => r.integral_term,
                    _ => r.total,
                })
            }
            Quantity::SweepVmax { case, u } => value(chamber_sweep(self.flag(case), &u.0)?.v_max()),
            Quantity::ChamberCount { case, u } => {
                let n = chamber_sweep(self.flag(case), &u.0)?.chambers.len();
                value(int(n as i64))
            }
            Quantity::Hirzebruch { n, field } => {
                let c = HirzebruchChain::new(*n);
                value(match field.as_str() {
                    "k" => c.k,
                    "quadric_dot_s" => c.quadric_dot_s,
                    _ => c.quadric_restriction[1].clone(),
                })
            }
            Quantity::AdmissibleIndices { max_n } => Ok(Computed::Label(format!(
                "{:?}",
                admissible_hirzebruch_indices(*max_n)
            ))),
            Quantity::Resultant { curve } => {
                let (f, g) = quartic_cubics(&s.curve_cases[curve]);
                value(resultant(&f, &g))
            }
            Quantity::ResultantSymbolic => Ok(Computed::Label(
                smoothness_resultant_symbolic().display_in("λ"),
            )),
            Quantity::BranchCount { curve } => value(int(
                branch_divisor(&s.curve_cases[curve])?.distinct_count as i64
            )),
            Quantity::Classification { curve } => Ok(Computed::Label(
                classify_lambda(&s.curve_cases[curve])
                    .classification
                    .to_string(),
            )),
            Quantity::CertificatePolynomial => Ok(Computed::Label(
                branch_certificate()?.polynomial.display_in("λ"),
            )),
            Quantity::CertificateAt { lambda_squared } => value(
                branch_certificate()?
                    .in_lambda_squared()
                    .eval(&lambda_squared.0),
            ),
        }
    }

    /// Chamber slices at the left end and midpoint of every table piece.
    pub fn chamber_dump(&self, case_id: &str) -> Result<Vec<SliceDump>, Error> {
        let case = self.flag(case_id);
        let labels = case.surface().negative_curves();
        let mut out = Vec::new();
        for piece in &case.table.pieces {
            for u in [piece.lo.clone(), (&piece.lo + &piece.hi) / int(2)] {
                let slice = chamber_sweep(case, &u)?;
                out.push(SliceDump {
                    u: u.to_string(),
                    chambers: slice
                        .chambers
                        .iter()
                        .map(|c| ChamberDump {
                            v_lo: c.v_lo.to_string(),
                            v_hi: c.v_hi.to_string(),
                            support: c.support.iter().map(|&i| labels[i].label.clone()).collect(),
                            volume: c.vol_poly.display_in("v"),
                            p_dot: c.p_dot_poly.as_ref().map(|p| p.display_in("v")),
                            n_ord: c.n_ord_poly.as_ref().map(|p| p.display_in("v")),
                        })
                        .collect(),
                });
            }
        }
        Ok(out)
    }

    pub fn run_spec(&self, spec: &CaseSpec, dump_chambers: bool) -> CaseResult {
        let (computed, status, detail) = match self.evaluate(&spec.quantity) {
            Ok(c) => {
                let failed: Vec<&str> = spec
                    .expect
                    .iter()
                    .zip(&spec.expect_text)
                    .filter(|(p, _)| !p.holds(&c))
                    .map(|(_, t)| t.as_str())
                    .collect();
                if failed.is_empty() {
                    (Some(c.to_string()), Status::Pass, None)
                } else {
                    let detail = format!("computed {c}, which violates {}", failed.join(", "));
                    (Some(c.to_string()), Status::Fail, Some(detail))
                }
            }
            Err(e) => (None, Status::Error, Some(e.to_string())),
        };
        let chambers = match spec.quantity.flag_case() {
            Some(id) if dump_chambers => self.chamber_dump(id).ok(),
            _ => None,
        };
        CaseResult {
            id: spec.id.clone(),
            description: spec.description.clone(),
            tags: spec.tags.clone(),
            provenance: spec.provenance.clone(),
            anchor: spec.anchor.clone(),
            expected: spec.expect_text.clone(),
            computed,
            status,
            detail,
            notes: spec.notes.clone(),
            chambers,
        }
    }
}

pub fn run_case(
    scenario: &Scenario,
    id: &str,
    dump_chambers: bool,
) -> Result<CaseResult, UnknownCase> {
    let spec = scenario
        .case(id)
        .ok_or_else(|| UnknownCase(id.to_string()))?;
    Ok(Evaluator::new(scenario).run_spec(spec, dump_chambers))
}

/// Runs every case carrying `filter` as a tag, or all cases. Evaluation is
/// parallel; the report is ordered by case id.
pub fn run_all(scenario: &Scenario, filter: Option<&str>) -> Report {
    let eval = Evaluator::new(scenario);
    let selected: Vec<&CaseSpec> = scenario
        .cases
        .iter()
        .filter(|c| filter.is_none_or(|tag| c.tags.iter().any(|t| t == tag)))
        .collect();
    let mut results: Vec<CaseResult> = selected
        .par_iter()
        .map(|spec| eval.run_spec(spec, false))
        .collect();
    results.sort_by(|a, b| a.id.cmp(&b.id));
    Report::new(results)
}
