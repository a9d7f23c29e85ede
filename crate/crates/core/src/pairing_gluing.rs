//! Relative invariants as cycles with series coefficients, the bilinear
//! pairing `⟨x, y⟩ = Σ_a x(a)·y(a)`, and coefficient-wise comparison of a
//! paired series against a table of closed invariants.
//!
//! The orientation-reversed complex is modelled as the same generators with
//! transposed boundary, so pairing needs identical point sets.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::floer_datum::{CriticalPoint, FloerDatum, Mode};
use crate::linalg::Coefficient;
use crate::novikov_floer::{build_novikov, NovikovComplex, NovikovError};
use crate::series::{LaurentSeries, Rational};

pub const FORMAT_VERSION: u64 = 1;

pub type Chain = BTreeMap<String, LaurentSeries>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PairingError {
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("supported points lie in several grades: {0:?}")]
    MixedGrades(Vec<i64>),
    #[error("chain is not a cycle; boundary has {} nonzero coefficient(s)", .image.len())]
    NotACycle { image: Chain },
    #[error("invariants live over different point sets")]
    MismatchedSupport,
    #[error("truncation order {0} is below the minimum {1}")]
    TruncationTooSmall(i64, i64),
    #[error("malformed file: {0}")]
    Parse(String),
    #[error("unsupported file version {0} (expected {FORMAT_VERSION})")]
    UnsupportedVersion(u64),
    #[error(transparent)]
    Novikov(#[from] NovikovError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeInvariant {
    pub chain: Chain,
    /// Common grade of the supported points; `None` for the zero chain.
    pub grade: Option<i64>,
    pub label: String,
    /// Every generator of the ambient complex.
    pub points: BTreeSet<String>,
    pub truncation_order: i64,
}

/// `∂` applied to a chain supported in one grade.
pub fn chain_boundary(n: &NovikovComplex, chain: &Chain) -> Result<Chain, PairingError> {
    apply(n, chain, false)
}

/// `∂ᵀ` (the boundary of the reversed complex) applied to a chain.
pub fn chain_coboundary(n: &NovikovComplex, chain: &Chain) -> Result<Chain, PairingError> {
    apply(n, chain, true)
}

fn apply(n: &NovikovComplex, chain: &Chain, transpose: bool) -> Result<Chain, PairingError> {
    let c = n.laurent();
    let grade = common_grade(n, chain.keys())?;
    let mut out = Chain::new();
    let Some(g) = grade else { return Ok(out) };
    let (m, targets) = if transpose {
        (c.boundary(g + 1).transpose(), c.generators(g + 1))
    } else {
        (c.boundary(g), c.generators(g - 1))
    };
    let sources = c.generators(g);
    for ((i, j), v) in m.entries() {
        if let Some(x) = chain.get(&sources[j]) {
            let term = v.mul(x);
            out.entry(targets[i].clone())
                .and_modify(|acc: &mut LaurentSeries| *acc = acc.add(&term))
                .or_insert(term);
        }
    }
    out.retain(|_, s| !s.vanishes());
    Ok(out)
}

fn common_grade<'a>(
    n: &NovikovComplex,
    ids: impl Iterator<Item = &'a String>,
) -> Result<Option<i64>, PairingError> {
    let mut grades = BTreeSet::new();
    for id in ids {
        let (g, _) = n.locate(id).ok_or_else(|| PairingError::UnknownPoint(id.clone()))?;
        grades.insert(g);
    }
    match grades.len() {
        0 => Ok(None),
        1 => Ok(grades.into_iter().next()),
        _ => Err(PairingError::MixedGrades(grades.into_iter().collect())),
    }
}

/// Builds `Σ_a (Σ_m value·t^m) a` from `(point, m, value)` counts and checks
/// that it is a cycle.
pub fn assemble_relative(
    counts: &[(String, i64, i64)],
    n: &NovikovComplex,
    label: &str,
) -> Result<RelativeInvariant, PairingError> {
    let mut terms: BTreeMap<String, Vec<(i64, i64)>> = BTreeMap::new();
    for (id, m, v) in counts {
        terms.entry(id.clone()).or_default().push((*m, *v));
    }
    let mut chain: Chain = terms
        .into_iter()
        .map(|(id, t)| (id, LaurentSeries::from_int_terms(t, n.truncation_order)))
        .collect();
    chain.retain(|_, s| !s.is_zero());
    // Points with cancelling counts still have to exist.
    for (id, _, _) in counts {
        n.locate(id).ok_or_else(|| PairingError::UnknownPoint(id.clone()))?;
    }
    let grade = common_grade(n, chain.keys())?;
    let image = chain_boundary(n, &chain)?;
    if !image.is_empty() {
        return Err(PairingError::NotACycle { image });
    }
    Ok(RelativeInvariant {
        chain,
        grade,
        label: label.to_string(),
        points: n.laurent().all_generators().values().flatten().cloned().collect(),
        truncation_order: n.truncation_order,
    })
}

/// `⟨x, y⟩ = Σ_a x(a)·y(a)`.
pub fn pair(x: &RelativeInvariant, y: &RelativeInvariant) -> Result<LaurentSeries, PairingError> {
    if x.points != y.points {
        return Err(PairingError::MismatchedSupport);
    }
    Ok(pair_chains(&x.chain, &y.chain)
        .unwrap_or_else(|| LaurentSeries::zero(x.truncation_order.min(y.truncation_order))))
}

/// Pairing of raw chains; `None` when the supports are disjoint.
pub fn pair_chains(x: &Chain, y: &Chain) -> Option<LaurentSeries> {
    x.iter()
        .filter_map(|(id, a)| y.get(id).map(|b| a.mul(b)))
        .reduce(|acc, s| acc.add(&s))
}

/// `Σ_d closed[d] t^d`, finitely many nonzero entries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClosedInvariantTable {
    pub values: BTreeMap<i64, i64>,
}

impl ClosedInvariantTable {
    pub fn get(&self, d: i64) -> i64 {
        self.values.get(&d).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GlueEntry {
    pub exponent: i64,
    pub closed: i64,
    pub paired: String,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GlueReport {
    pub truncation_order: i64,
    pub shift: i64,
    /// Exponents below the truncation where either side is nonzero.
    pub entries: Vec<GlueEntry>,
    /// Closed-table exponents at or beyond the truncation.
    pub unchecked: Vec<i64>,
    pub all_match: bool,
}

/// Compares `t^shift · ⟨x, y⟩` with the closed table coefficient by
/// coefficient below the pairing's truncation order.
pub fn glue_check(
    x: &RelativeInvariant,
    y: &RelativeInvariant,
    closed: &ClosedInvariantTable,
    shift: i64,
) -> Result<GlueReport, PairingError> {
    Ok(compare(&pair(x, y)?.shift(shift), closed, shift))
}

fn compare(paired: &LaurentSeries, closed: &ClosedInvariantTable, shift: i64) -> GlueReport {
    let n = paired.truncation_order();
    let mut exps: BTreeSet<i64> = paired.terms().map(|(e, _)| e).collect();
    exps.extend(closed.values.iter().filter(|(d, v)| **d < n && **v != 0).map(|(d, _)| *d));
    let entries: Vec<GlueEntry> = exps
        .into_iter()
        .map(|e| {
            let p = paired.coeff(e);
            let c = closed.get(e);
            GlueEntry {
                exponent: e,
                closed: c,
                matches: p == Rational::from_integer(BigInt::from(c)),
                paired: crate::series::format_rational(&p),
            }
        })
        .collect();
    let unchecked = closed.values.iter().filter(|(d, v)| **d >= n && **v != 0).map(|(d, _)| *d).collect();
    GlueReport {
        truncation_order: n,
        shift,
        all_match: entries.iter().all(|e| e.matches),
        entries,
        unchecked,
    }
}

// ---------------------------------------------------------------------------
// File formats

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InvariantFile {
    version: u64,
    label: String,
    chain: Vec<(String, Vec<(i64, i64)>)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClosedFile {
    version: u64,
    closed: Vec<(i64, i64)>,
}

fn checked_version(text: &str) -> Result<serde_json::Value, PairingError> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| PairingError::Parse(e.to_string()))?;
    match raw.get("version").and_then(serde_json::Value::as_u64) {
        Some(FORMAT_VERSION) => Ok(raw),
        Some(v) => Err(PairingError::UnsupportedVersion(v)),
        None => Err(PairingError::Parse("missing or non-integer `version`".into())),
    }
}

/// Relative-invariant counts file: `{"version": 1, "label": ..., "chain":
/// [[id, [[m, value], ...]], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsFile {
    pub label: String,
    pub counts: Vec<(String, i64, i64)>,
}

impl CountsFile {
    pub fn from_json(text: &str) -> Result<Self, PairingError> {
        let raw = checked_version(text)?;
        let f: InvariantFile = serde_json::from_value(raw).map_err(|e| PairingError::Parse(e.to_string()))?;
        let counts = f
            .chain
            .into_iter()
            .flat_map(|(id, terms)| terms.into_iter().map(move |(m, v)| (id.clone(), m, v)))
            .collect();
        Ok(CountsFile { label: f.label, counts })
    }

    pub fn to_json(&self) -> String {
        let mut grouped: BTreeMap<&str, Vec<(i64, i64)>> = BTreeMap::new();
        for (id, m, v) in &self.counts {
            grouped.entry(id).or_default().push((*m, *v));
        }
        let f = InvariantFile {
            version: FORMAT_VERSION,
            label: self.label.clone(),
            chain: grouped.into_iter().map(|(id, t)| (id.to_string(), t)).collect(),
        };
        serde_json::to_string_pretty(&f).expect("invariant serializes")
    }
}

impl ClosedInvariantTable {
    /// `{"version": 1, "closed": [[d, value], ...]}`; repeated exponents add.
    pub fn from_json(text: &str) -> Result<Self, PairingError> {
        let raw = checked_version(text)?;
        let f: ClosedFile = serde_json::from_value(raw).map_err(|e| PairingError::Parse(e.to_string()))?;
        let mut values = BTreeMap::new();
        for (d, v) in f.closed {
            let slot: &mut i64 = values.entry(d).or_default();
            *slot = slot.checked_add(v).ok_or_else(|| PairingError::Parse("closed value overflow".into()))?;
        }
        values.retain(|_, v| *v != 0);
        Ok(ClosedInvariantTable { values })
    }

    pub fn to_json(&self) -> String {
        let f = ClosedFile { version: FORMAT_VERSION, closed: self.values.iter().map(|(d, v)| (*d, *v)).collect() };
        serde_json::to_string_pretty(&f).expect("table serializes")
    }
}

// ---------------------------------------------------------------------------
// Worked example: one generator with trivial boundary, invariant
// 1/(t - t⁻¹) = -(t + t³ + t⁵ + ...), paired with itself.

pub const T2D2_MIN_TRUNCATION: i64 = 4;

/// One gamma-laurent generator `u` and no flows, so `HF ≅ Q((t))`.
pub fn t2d2_datum() -> FloerDatum {
    FloerDatum {
        mode: Mode::GammaLaurent,
        ell: 1,
        omega: Rational::zero(),
        e_rho: Rational::from_integer(BigInt::from(1)),
        block_diagonal: false,
        points: vec![CriticalPoint {
            id: "u".into(),
            spinc_label: "trivial".into(),
            grade_mod_ell: 0,
            ind_lift: 0,
            csd_lift: Rational::zero(),
        }],
        flows: Vec::new(),
    }
}

/// `closed[2n] = n` for `2 ≤ 2n < truncation`.
pub fn t2d2_closed_table(truncation: i64) -> ClosedInvariantTable {
    ClosedInvariantTable { values: (1..).map(|n| (2 * n, n)).take_while(|(d, _)| *d < truncation).collect() }
}

#[derive(Debug, Clone)]
pub struct T2d2Example {
    pub complex: NovikovComplex,
    /// `(t - t⁻¹)⁻¹` computed from the exact input at the given order.
    pub inverse: LaurentSeries,
    /// `(t - t⁻¹)·inverse`, which must be `1` to its known precision.
    pub inverse_check: LaurentSeries,
    pub invariant: RelativeInvariant,
    pub pairing: LaurentSeries,
    pub report: GlueReport,
}

pub fn builtin_example_t2d2(truncation: i64) -> Result<T2d2Example, PairingError> {
    t2d2_with_sign(truncation, false)
}

/// As [`builtin_example_t2d2`], optionally with the invariant negated.
pub fn t2d2_with_sign(truncation: i64, negate: bool) -> Result<T2d2Example, PairingError> {
    if truncation < T2D2_MIN_TRUNCATION {
        return Err(PairingError::TruncationTooSmall(truncation, T2D2_MIN_TRUNCATION));
    }
    let denom = LaurentSeries::from_int_terms([(1, 1), (-1, -1)], truncation);
    let inverse = denom.inv().expect("t - 1/t is a unit");
    let inverse_check = denom.mul(&inverse);

    // The invariant is known through t^{truncation-2} so that its square is
    // known through t^{truncation-1}.
    let complex = build_novikov(&t2d2_datum(), truncation - 1)?;
    let sign: i64 = if negate { -1 } else { 1 };
    let counts: Vec<(String, i64, i64)> = inverse
        .truncate(truncation - 1)
        .terms()
        .map(|(e, c)| {
            let v: i64 = c.to_integer().try_into().expect("unit coefficients");
            ("u".to_string(), e, sign * v)
        })
        .collect();
    let invariant = assemble_relative(&counts, &complex, "T2xD2")?;
    let pairing = pair(&invariant, &invariant)?;
    let report = compare(&pairing, &t2d2_closed_table(truncation), 0);
    Ok(T2d2Example { complex, inverse, inverse_check, invariant, pairing, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floer_datum::FlowClass;

    fn gamma(points: &[(&str, i64)], flows: &[(&str, &str, i64, i64)]) -> NovikovComplex {
        let d = FloerDatum {
            points: points
                .iter()
                .map(|(id, g)| CriticalPoint {
                    id: id.to_string(),
                    spinc_label: "s".into(),
                    grade_mod_ell: 0,
                    ind_lift: *g,
                    csd_lift: Rational::from_integer(BigInt::from(10 * g)),
                })
                .collect(),
            flows: flows
                .iter()
                .map(|(a, b, l, c)| FlowClass { from: a.to_string(), to: b.to_string(), level: *l, count: *c })
                .collect(),
            ..t2d2_datum()
        };
        build_novikov(&d, 12).unwrap()
    }

    fn counts(c: &[(&str, i64, i64)]) -> Vec<(String, i64, i64)> {
        c.iter().map(|(a, m, v)| (a.to_string(), *m, *v)).collect()
    }

    #[test]
    fn chain_from_counts() {
        let n = gamma(&[("a", 0)], &[]);
        let x = assemble_relative(&counts(&[("a", 2, 3)]), &n, "x").unwrap();
        assert_eq!(x.chain["a"], LaurentSeries::from_int_terms([(2, 3)], 12));
        assert_eq!(x.grade, Some(0));
    }

    #[test]
    fn non_cycle_rejected() {
        let n = gamma(&[("a", 1), ("b", 0)], &[("a", "b", 0, 1)]);
        match assemble_relative(&counts(&[("a", 0, 1)]), &n, "x") {
            Err(PairingError::NotACycle { image }) => assert!(image.contains_key("b")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            assemble_relative(&counts(&[("a", 0, 1), ("b", 0, 1)]), &n, "x"),
            Err(PairingError::MixedGrades(_))
        ));
        assert!(matches!(
            assemble_relative(&counts(&[("z", 0, 1)]), &n, "x"),
            Err(PairingError::UnknownPoint(_))
        ));
    }

    #[test]
    fn pairing_basics() {
        let n = gamma(&[("a", 0)], &[]);
        let one = assemble_relative(&counts(&[("a", 0, 1)]), &n, "").unwrap();
        assert_eq!(pair(&one, &one).unwrap().coeff(0), Rational::from_integer(1.into()));
        let x = assemble_relative(&counts(&[("a", 1, 2)]), &n, "").unwrap();
        let y = assemble_relative(&counts(&[("a", 2, 3)]), &n, "").unwrap();
        let p = pair(&x, &y).unwrap();
        assert_eq!(p.terms().map(|(e, c)| (e, c.clone())).collect::<Vec<_>>(), vec![(3, Rational::from_integer(6.into()))]);
        let other = gamma(&[("b", 0)], &[]);
        let z = assemble_relative(&[], &other, "").unwrap();
        assert_eq!(pair(&x, &z), Err(PairingError::MismatchedSupport));
    }

    #[test]
    fn zero_invariants_need_zero_table() {
        let n = gamma(&[("a", 0)], &[]);
        let z = assemble_relative(&[], &n, "").unwrap();
        assert!(glue_check(&z, &z, &ClosedInvariantTable::default(), 0).unwrap().all_match);
        let bad = ClosedInvariantTable { values: BTreeMap::from([(2, 1)]) };
        assert!(!glue_check(&z, &z, &bad, 0).unwrap().all_match);
    }

    #[test]
    fn t2d2_through_t8() {
        let ex = builtin_example_t2d2(10).unwrap();
        assert!(ex.report.all_match);
        let got: Vec<(i64, String)> = ex.report.entries.iter().map(|e| (e.exponent, e.paired.clone())).collect();
        assert_eq!(got, vec![(2, "1/1".into()), (4, "2/1".into()), (6, "3/1".into()), (8, "4/1".into())]);
        assert_eq!(ex.pairing.truncation_order(), 10);
        let first: Vec<(i64, String)> =
            ex.inverse.terms().take(3).map(|(e, c)| (e, crate::series::format_rational(c))).collect();
        assert_eq!(first, vec![(1, "-1/1".into()), (3, "-1/1".into()), (5, "-1/1".into())]);
    }

    #[test]
    fn t2d2_smallest() {
        let ex = builtin_example_t2d2(4).unwrap();
        assert_eq!(ex.report.entries.len(), 1);
        assert_eq!(ex.report.entries[0].exponent, 2);
        assert!(builtin_example_t2d2(3).is_err());
    }

    #[test]
    fn sign_flip_keeps_pairing() {
        let a = t2d2_with_sign(12, false).unwrap();
        let b = t2d2_with_sign(12, true).unwrap();
        assert_ne!(a.invariant, b.invariant);
        assert_eq!(a.pairing, b.pairing);
    }

    #[test]
    fn file_round_trips() {
        let c = CountsFile { label: "x".into(), counts: counts(&[("a", -1, 2), ("a", 3, 1), ("b", 0, -4)]) };
        assert_eq!(CountsFile::from_json(&c.to_json()).unwrap(), c);
        let t = t2d2_closed_table(9);
        assert_eq!(ClosedInvariantTable::from_json(&t.to_json()).unwrap(), t);
        assert!(matches!(
            ClosedInvariantTable::from_json(r#"{"version": 2, "closed": []}"#),
            Err(PairingError::UnsupportedVersion(2))
        ));
        assert!(matches!(
            CountsFile::from_json(r#"{"version": 1, "label": "", "chain": [], "extra": 0}"#),
            Err(PairingError::Parse(_))
        ));
    }
}
