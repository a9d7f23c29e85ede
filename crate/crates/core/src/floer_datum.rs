//! The input data model: critical points with their gradings and CSD values,
//! signed flow counts indexed by level, and the validator enforcing the
//! structural constraints such data must satisfy.
//!
//! CSD values are in units of `8π²`, so the deck-transformation period of a
//! nontorsion datum is exactly `ℓ`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::graded_complex::{ComplexError, GradedComplex, Grading};
use crate::linalg::{CoefficientSystem, SparseMatrix};
use crate::series::{format_rational, parse_rational, LaurentSeries, PowerSeries, Rational, SeriesError};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Non-torsion spin-c structure: cyclic grading mod `ℓ` with integer
    /// lifts; `level` is the `k` of `∂_{q,k}`.
    Nontorsion,
    /// Torsion spin-c structure over `Z[[t]]`; `level` is the energy index `n ≥ 0`.
    TorsionNovikov,
    /// The `Γ`-twisted complex over `Q((t))`; `level` is the integer energy index.
    GammaLaurent,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Nontorsion => "nontorsion",
            Mode::TorsionNovikov => "torsion-novikov",
            Mode::GammaLaurent => "gamma-laurent",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalPoint {
    pub id: String,
    pub spinc_label: String,
    pub grade_mod_ell: i64,
    pub ind_lift: i64,
    pub csd_lift: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlowClass {
    pub from: String,
    pub to: String,
    pub level: i64,
    pub count: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FloerDatum {
    pub mode: Mode,
    pub ell: i64,
    pub omega: Rational,
    pub e_rho: Rational,
    pub block_diagonal: bool,
    pub points: Vec<CriticalPoint>,
    pub flows: Vec<FlowClass>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatumError {
    #[error("malformed datum: {0}")]
    Parse(String),
    #[error("unsupported datum version {0} (expected {FORMAT_VERSION})")]
    UnsupportedVersion(u64),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("datum fails validation with {} error(s)", .0.error_count())]
    ValidationFailed(ValidationReport),
    #[error("operation needs a {expected} datum, got {found}")]
    WrongMode { expected: &'static str, found: Mode },
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

// ---------------------------------------------------------------------------
// File format

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatumFile {
    version: u64,
    mode: Mode,
    ell: i64,
    omega: String,
    e_rho: String,
    block_diagonal: bool,
    points: Vec<PointRecord>,
    flows: Vec<FlowRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointRecord {
    id: String,
    spinc_label: String,
    grade_mod_ell: i64,
    ind_lift: i64,
    csd_lift: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowRecord {
    from: String,
    to: String,
    level: i64,
    count: i64,
}

impl FloerDatum {
    pub fn from_json(text: &str) -> Result<Self, DatumError> {
        // Check the version before the full schema so old files get a
        // precise diagnostic.
        let raw: serde_json::Value =
            serde_json::from_str(text).map_err(|e| DatumError::Parse(e.to_string()))?;
        match raw.get("version").and_then(serde_json::Value::as_u64) {
            Some(FORMAT_VERSION) => {}
            Some(v) => return Err(DatumError::UnsupportedVersion(v)),
            None => return Err(DatumError::Parse("missing or non-integer \"version\"".into())),
        }
        let file: DatumFile =
            serde_json::from_value(raw).map_err(|e| DatumError::Parse(e.to_string()))?;
        let points = file
            .points
            .into_iter()
            .map(|p| {
                Ok(CriticalPoint {
                    csd_lift: parse_rational(&p.csd_lift)?,
                    id: p.id,
                    spinc_label: p.spinc_label,
                    grade_mod_ell: p.grade_mod_ell,
                    ind_lift: p.ind_lift,
                })
            })
            .collect::<Result<_, DatumError>>()?;
        Ok(FloerDatum {
            mode: file.mode,
            ell: file.ell,
            omega: parse_rational(&file.omega)?,
            e_rho: parse_rational(&file.e_rho)?,
            block_diagonal: file.block_diagonal,
            points,
            flows: file
                .flows
                .into_iter()
                .map(|f| FlowClass { from: f.from, to: f.to, level: f.level, count: f.count })
                .collect(),
        })
    }

    /// Pretty-printed JSON in the datum file format; byte-stable for equal data.
    pub fn to_json(&self) -> String {
        let file = DatumFile {
            version: FORMAT_VERSION,
            mode: self.mode,
            ell: self.ell,
            omega: format_rational(&self.omega),
            e_rho: format_rational(&self.e_rho),
            block_diagonal: self.block_diagonal,
            points: self
                .points
                .iter()
                .map(|p| PointRecord {
                    id: p.id.clone(),
                    spinc_label: p.spinc_label.clone(),
                    grade_mod_ell: p.grade_mod_ell,
                    ind_lift: p.ind_lift,
                    csd_lift: format_rational(&p.csd_lift),
                })
                .collect(),
            flows: self
                .flows
                .iter()
                .map(|f| FlowRecord { from: f.from.clone(), to: f.to.clone(), level: f.level, count: f.count })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("datum serializes")
    }

    pub fn point(&self, id: &str) -> Option<&CriticalPoint> {
        self.points.iter().find(|p| p.id == id)
    }

    fn require_mode(&self, ok: &[Mode], expected: &'static str) -> Result<(), DatumError> {
        if ok.contains(&self.mode) {
            Ok(())
        } else {
            Err(DatumError::WrongMode { expected, found: self.mode })
        }
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub rule: &'static str,
    pub name: &'static str,
    pub severity: Severity,
    pub location: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn error_count(&self) -> usize {
        self.violations.iter().filter(|v| v.severity == Severity::Error).count()
    }

    /// True when no error-level rule fired; warnings are allowed.
    pub fn passes(&self) -> bool {
        self.error_count() == 0
    }

    pub fn rules(&self) -> BTreeSet<&'static str> {
        self.violations.iter().map(|v| v.rule).collect()
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    fn push(&mut self, rule: &'static str, name: &'static str, location: String, detail: String) {
        self.violations.push(Violation { rule, name, severity: Severity::Error, location, detail });
    }
}

fn flow_loc(f: &FlowClass) -> String {
    format!("flow {} -> {} level {}", f.from, f.to, f.level)
}

/// Checks every structural rule for the datum's mode. Violations are sorted
/// so the report does not depend on input order.
///
/// Rule identifiers:
/// - `S1`..`S6` structural: duplicate ids, unknown endpoints, zero counts,
///   duplicate flow keys, `ℓ < 1`, `e_ρ ≤ 0`
/// - nontorsion `R1` index drop `1 - kℓ` with `k ≥ 0`, `R2` CSD decreases on
///   level-0 flows, `R3` grading and CSD windows, `R4` odd `ℓ` (warning),
///   `R5` `∂² = 0`
/// - Novikov modes `G1` relative index 1, `G2` levels bounded below
///   (non-negative for `torsion-novikov`), `G3` energy positivity,
///   `G4` `∂² = 0` level by level
/// - `B1` block-diagonal flows have level 0 and index drop 1
pub fn validate(d: &FloerDatum) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut points: HashMap<&str, &CriticalPoint> = HashMap::new();
    for p in &d.points {
        if points.insert(p.id.as_str(), p).is_some() {
            report.push("S1", "DuplicatePointId", format!("point {}", p.id), "point id repeated".into());
        }
    }
    match d.mode {
        Mode::Nontorsion if d.ell < 1 => {
            report.push("S5", "InvalidPeriod", "datum".into(), format!("ell = {} < 1", d.ell));
        }
        Mode::TorsionNovikov | Mode::GammaLaurent if !d.e_rho.is_positive() => {
            report.push(
                "S6",
                "NonPositiveEnergyQuantum",
                "datum".into(),
                format!("e_rho = {} is not positive", format_rational(&d.e_rho)),
            );
        }
        _ => {}
    }
    let mut seen = BTreeSet::new();
    let mut usable: Vec<(&FlowClass, &CriticalPoint, &CriticalPoint)> = Vec::new();
    for f in &d.flows {
        if f.count == 0 {
            report.push("S3", "ZeroCount", flow_loc(f), "zero counts must be omitted".into());
        }
        if !seen.insert((&f.from, &f.to, f.level)) {
            report.push("S4", "DuplicateFlow", flow_loc(f), "(from, to, level) repeated".into());
        }
        match (points.get(f.from.as_str()), points.get(f.to.as_str())) {
            (Some(a), Some(b)) => usable.push((f, a, b)),
            _ => report.push("S2", "UnknownPoint", flow_loc(f), "endpoint is not a critical point".into()),
        }
    }

    match d.mode {
        Mode::Nontorsion => validate_nontorsion(d, &usable, &mut report),
        Mode::TorsionNovikov | Mode::GammaLaurent => validate_novikov(d, &usable, &mut report),
    }
    if d.block_diagonal {
        for (f, a, b) in &usable {
            let drop = a.ind_lift - b.ind_lift;
            if f.level != 0 || drop != 1 {
                report.push(
                    "B1",
                    "NotBlockDiagonal",
                    flow_loc(f),
                    format!("block-diagonal flows need level 0 and index drop 1, got drop {drop}"),
                );
            }
        }
    }
    report.violations.sort();
    report.violations.dedup();
    report
}

fn validate_nontorsion(
    d: &FloerDatum,
    flows: &[(&FlowClass, &CriticalPoint, &CriticalPoint)],
    report: &mut ValidationReport,
) {
    let ell = d.ell;
    if ell >= 1 {
        for p in &d.points {
            let loc = format!("point {}", p.id);
            if !(0..ell).contains(&p.grade_mod_ell) || (p.ind_lift - p.grade_mod_ell).rem_euclid(ell) != 0 {
                report.push(
                    "R3",
                    "GradeMismatch",
                    loc.clone(),
                    format!("ind_lift {} is not congruent to grade {} mod {ell}", p.ind_lift, p.grade_mod_ell),
                );
            }
            let hi = &d.omega + Rational::from_integer(BigInt::from(ell));
            if p.csd_lift <= d.omega || p.csd_lift >= hi {
                report.push(
                    "R3",
                    "CsdWindowBreach",
                    loc,
                    format!(
                        "csd_lift {} outside ({}, {})",
                        format_rational(&p.csd_lift),
                        format_rational(&d.omega),
                        format_rational(&hi)
                    ),
                );
            }
        }
        if ell % 2 == 1 {
            report.violations.push(Violation {
                rule: "R4",
                name: "OddPeriodicity",
                severity: Severity::Warning,
                location: "datum".into(),
                detail: format!("ell = {ell} is odd; geometric data always has even period"),
            });
        }
    }
    for (f, a, b) in flows {
        let drop = a.ind_lift - b.ind_lift;
        if f.level < 0 || drop != 1 - f.level * ell {
            report.push(
                "R1",
                "BelowDiagonalFlow",
                flow_loc(f),
                format!("index drop {drop} != 1 - level*ell = {}", 1 - f.level * ell),
            );
        }
        if f.level == 0 && a.csd_lift <= b.csd_lift {
            report.push(
                "R2",
                "CsdIncreasingFlow",
                flow_loc(f),
                format!(
                    "csd {} -> {} does not decrease",
                    format_rational(&a.csd_lift),
                    format_rational(&b.csd_lift)
                ),
            );
        }
    }
    for ((a, c), n) in square_defects(flows, false) {
        report.push(
            "R5",
            "BoundaryNotSquareZero",
            format!("<d^2 {a}, {c}>"),
            format!("total coefficient {n}"),
        );
    }
}

fn validate_novikov(
    d: &FloerDatum,
    flows: &[(&FlowClass, &CriticalPoint, &CriticalPoint)],
    report: &mut ValidationReport,
) {
    for (f, a, b) in flows {
        let drop = a.ind_lift - b.ind_lift;
        if drop != 1 {
            report.push("G1", "RelativeIndexNotOne", flow_loc(f), format!("index drop {drop} != 1"));
        }
        if d.mode == Mode::TorsionNovikov && f.level < 0 {
            report.push("G2", "NegativeLevel", flow_loc(f), "torsion-novikov levels must be >= 0".into());
        }
        let energy = &a.csd_lift - &b.csd_lift + Rational::from_integer(BigInt::from(f.level)) * &d.e_rho;
        if !energy.is_positive() {
            report.push(
                "G3",
                "NonPositiveEnergy",
                flow_loc(f),
                format!("energy {} <= 0", format_rational(&energy)),
            );
        }
    }
    // G2 for Q((t)): each (from, to) pair carries finitely many levels, so
    // its support is bounded below by construction of a finite datum.
    for ((a, c), level_sum) in square_defects(flows, true) {
        report.push(
            "G4",
            "BoundaryNotSquareZero",
            format!("<d^2 {a}, {c}>"),
            format!("coefficient of t^{level_sum} is nonzero"),
        );
    }
}

/// Nonzero coefficients of `∂²`. With `by_level`, the coefficient is split
/// by the total level `i + j` and the key's second component is that level;
/// otherwise levels are summed and the reported value is the total.
fn square_defects(
    flows: &[(&FlowClass, &CriticalPoint, &CriticalPoint)],
    by_level: bool,
) -> Vec<((String, String), i128)> {
    let mut out_of: BTreeMap<&str, Vec<&FlowClass>> = BTreeMap::new();
    for (f, _, _) in flows {
        out_of.entry(f.from.as_str()).or_default().push(f);
    }
    let mut acc: BTreeMap<(&str, &str, i64), i128> = BTreeMap::new();
    for (a, first) in &out_of {
        for f in first {
            if let Some(second) = out_of.get(f.to.as_str()) {
                for g in second {
                    let level = if by_level { f.level + g.level } else { 0 };
                    *acc.entry((a, g.to.as_str(), level)).or_default() +=
                        i128::from(f.count) * i128::from(g.count);
                }
            }
        }
    }
    acc.into_iter()
        .filter(|(_, v)| *v != 0)
        .map(|((a, c, level), v)| {
            let key = (a.to_string(), c.to_string());
            (key, if by_level { i128::from(level) } else { v })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Assembly

fn require_valid(d: &FloerDatum) -> Result<(), DatumError> {
    let report = validate(d);
    if report.passes() {
        Ok(())
    } else {
        Err(DatumError::ValidationFailed(report))
    }
}

/// Generators grouped by `grade(point)`, in datum order, plus each point's
/// `(grade, position)`.
fn layout(
    d: &FloerDatum,
    grade: impl Fn(&CriticalPoint) -> i64,
) -> (BTreeMap<i64, Vec<String>>, HashMap<String, (i64, usize)>) {
    let mut gens: BTreeMap<i64, Vec<String>> = BTreeMap::new();
    let mut pos = HashMap::new();
    for p in &d.points {
        let g = grade(p);
        let slot = gens.entry(g).or_default();
        pos.insert(p.id.clone(), (g, slot.len()));
        slot.push(p.id.clone());
    }
    (gens, pos)
}

fn empty_boundaries<R: crate::linalg::Coefficient>(
    gens: &BTreeMap<i64, Vec<String>>,
    grading: Grading,
) -> BTreeMap<i64, SparseMatrix<R>> {
    gens.iter()
        .map(|(n, g)| {
            let rows = gens.get(&grading.prev(*n)).map_or(0, Vec::len);
            (*n, SparseMatrix::new(rows, g.len()))
        })
        .collect()
}

/// Nontorsion: the `Z_ℓ`-graded total boundary over `Z`, grading by
/// `grade_mod_ell`, entries summing every level.
pub fn assemble_cyclic(d: &FloerDatum) -> Result<GradedComplex<BigInt>, DatumError> {
    d.require_mode(&[Mode::Nontorsion], "nontorsion")?;
    require_valid(d)?;
    let grading = Grading::Cyclic { ell: d.ell as u32 };
    let (gens, pos) = layout(d, |p| p.grade_mod_ell);
    let mut bounds = empty_boundaries(&gens, grading);
    for f in &d.flows {
        let (ga, ia) = pos[&f.from];
        let (_, ib) = pos[&f.to];
        bounds.get_mut(&ga).expect("grade present").accumulate(ib, ia, BigInt::from(f.count));
    }
    Ok(GradedComplex::new(grading, CoefficientSystem::Integers, gens, bounds)?)
}

/// Nontorsion: the `Z`-graded complex on lift grades with the level-0
/// boundary `∂^{(ω)}` (the diagonal blocks of the triangular total
/// boundary).
pub fn assemble_lift_graded(d: &FloerDatum) -> Result<GradedComplex<BigInt>, DatumError> {
    d.require_mode(&[Mode::Nontorsion], "nontorsion")?;
    require_valid(d)?;
    integer_graded_level_zero(d)
}

fn integer_graded_level_zero(d: &FloerDatum) -> Result<GradedComplex<BigInt>, DatumError> {
    let (gens, pos) = layout(d, |p| p.ind_lift);
    let mut bounds = empty_boundaries(&gens, Grading::Integer);
    for f in d.flows.iter().filter(|f| f.level == 0) {
        let (ga, ia) = pos[&f.from];
        let (_, ib) = pos[&f.to];
        bounds.get_mut(&ga).expect("grade present").accumulate(ib, ia, BigInt::from(f.count));
    }
    Ok(GradedComplex::new(Grading::Integer, CoefficientSystem::Integers, gens, bounds)?)
}

/// Nontorsion: the blocks `∂_{q,k} : C_q → C_{q-1+kℓ}` keyed by `(q, k)`,
/// rows and columns in lift-grade generator order.
pub fn level_blocks(d: &FloerDatum) -> Result<BTreeMap<(i64, i64), SparseMatrix<BigInt>>, DatumError> {
    d.require_mode(&[Mode::Nontorsion], "nontorsion")?;
    require_valid(d)?;
    let (gens, pos) = layout(d, |p| p.ind_lift);
    let mut out: BTreeMap<(i64, i64), SparseMatrix<BigInt>> = BTreeMap::new();
    for f in &d.flows {
        let (q, ia) = pos[&f.from];
        let (target, ib) = pos[&f.to];
        let m = out
            .entry((q, f.level))
            .or_insert_with(|| SparseMatrix::new(gens[&target].len(), gens[&q].len()));
        m.accumulate(ib, ia, BigInt::from(f.count));
    }
    out.retain(|_, m| !m.is_zero());
    Ok(out)
}

/// Torsion-novikov: the complex over `Z[[t]]` with `(b, a)` entry
/// `Σ_n count(a, b, n) t^n`, graded by `ind_lift`.
pub fn assemble_power_series(d: &FloerDatum, truncation: i64) -> Result<GradedComplex<PowerSeries>, DatumError> {
    d.require_mode(&[Mode::TorsionNovikov], "torsion-novikov")?;
    require_valid(d)?;
    let (gens, pos) = layout(d, |p| p.ind_lift);
    let mut bounds = empty_boundaries(&gens, Grading::Integer);
    for (key, terms) in series_terms(d) {
        let (ga, ia) = pos[key.0];
        let (_, ib) = pos[key.1];
        let s = PowerSeries::from_int_terms(terms, truncation);
        bounds.get_mut(&ga).expect("grade present").set(ib, ia, s);
    }
    // ∂² = 0 was checked exactly on counts; truncation can only hide terms.
    Ok(GradedComplex::new_unchecked(
        Grading::Integer,
        CoefficientSystem::IntegerPowerSeries,
        gens,
        bounds,
    )?)
}

/// Torsion-novikov or gamma-laurent: the complex over `Q((t))`. For a
/// torsion-novikov datum this is the base change `Z[[t]] → Q((t))`.
pub fn assemble_laurent(d: &FloerDatum, truncation: i64) -> Result<GradedComplex<LaurentSeries>, DatumError> {
    d.require_mode(&[Mode::TorsionNovikov, Mode::GammaLaurent], "torsion-novikov or gamma-laurent")?;
    require_valid(d)?;
    let (gens, pos) = layout(d, |p| p.ind_lift);
    let mut bounds = empty_boundaries(&gens, Grading::Integer);
    for (key, terms) in series_terms(d) {
        let (ga, ia) = pos[key.0];
        let (_, ib) = pos[key.1];
        bounds
            .get_mut(&ga)
            .expect("grade present")
            .set(ib, ia, LaurentSeries::from_int_terms(terms, truncation));
    }
    Ok(GradedComplex::new_unchecked(
        Grading::Integer,
        CoefficientSystem::RationalLaurent,
        gens,
        bounds,
    )?)
}

fn series_terms(d: &FloerDatum) -> BTreeMap<(&str, &str), Vec<(i64, i64)>> {
    let mut out: BTreeMap<(&str, &str), Vec<(i64, i64)>> = BTreeMap::new();
    for f in &d.flows {
        out.entry((f.from.as_str(), f.to.as_str())).or_default().push((f.level, f.count));
    }
    out
}

/// Copy keeping only level-0 flows.
pub fn restrict_min_level(d: &FloerDatum) -> FloerDatum {
    FloerDatum { flows: d.flows.iter().filter(|f| f.level == 0).cloned().collect(), ..d.clone() }
}

/// Energy `csd(from) - csd(to) + k·ℓ` of a nontorsion flow, in units of `8π²`.
pub fn nontorsion_energy(d: &FloerDatum, f: &FlowClass) -> Option<Rational> {
    let a = d.point(&f.from)?;
    let b = d.point(&f.to)?;
    Some(&a.csd_lift - &b.csd_lift + Rational::from_integer(BigInt::from(f.level * d.ell)))
}

/// Integer-graded level-0 complex of any datum, without the mode check.
/// Used to compare `t = 0` evaluation with level restriction.
pub fn assemble_level_zero(d: &FloerDatum) -> Result<GradedComplex<BigInt>, DatumError> {
    require_valid(d)?;
    integer_graded_level_zero(d)
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{} {} [{:?}] {}: {}", v.rule, v.name, v.severity, v.location, v.detail)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    pub(crate) fn point(id: &str, grade: i64, lift: i64, csd: &str) -> CriticalPoint {
        CriticalPoint {
            id: id.into(),
            spinc_label: "s".into(),
            grade_mod_ell: grade,
            ind_lift: lift,
            csd_lift: q(csd),
        }
    }

    fn flow(from: &str, to: &str, level: i64, count: i64) -> FlowClass {
        FlowClass { from: from.into(), to: to.into(), level, count }
    }

    fn nontorsion(ell: i64, points: Vec<CriticalPoint>, flows: Vec<FlowClass>) -> FloerDatum {
        FloerDatum {
            mode: Mode::Nontorsion,
            ell,
            omega: q("0"),
            e_rho: q("1"),
            block_diagonal: false,
            points,
            flows,
        }
    }

    #[test]
    fn below_diagonal_flow_is_r1() {
        let d = nontorsion(
            2,
            vec![point("a", 1, 3, "3/2"), point("b", 0, 4, "1/2")],
            vec![flow("a", "b", -1, 1)],
        );
        let r = validate(&d);
        assert!(r.has_rule("R1"));
        assert_eq!(r.violations.iter().find(|v| v.rule == "R1").unwrap().name, "BelowDiagonalFlow");
    }

    #[test]
    fn increasing_csd_is_r2() {
        let d = nontorsion(
            2,
            vec![point("a", 1, 1, "1/2"), point("b", 0, 0, "3/2")],
            vec![flow("a", "b", 0, 1)],
        );
        assert_eq!(validate(&d).rules(), BTreeSet::from(["R2"]));
    }

    #[test]
    fn two_step_chain_fails_square_zero() {
        let d = nontorsion(
            2,
            vec![point("a", 0, 2, "3/2"), point("b", 1, 1, "1"), point("c", 0, 0, "1/2")],
            vec![flow("a", "b", 0, 1), flow("b", "c", 0, 1)],
        );
        let r = validate(&d);
        assert_eq!(r.rules(), BTreeSet::from(["R5"]));
        assert_eq!(r.violations[0].location, "<d^2 a, c>");
    }

    #[test]
    fn odd_period_is_only_a_warning() {
        let d = nontorsion(3, vec![point("a", 0, 0, "1")], vec![]);
        let r = validate(&d);
        assert!(r.passes());
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].severity, Severity::Warning);
    }

    #[test]
    fn assembly_examples() {
        let d = nontorsion(2, vec![point("a", 1, 1, "1"), point("b", 0, 0, "1/2")], vec![]);
        let c = assemble_cyclic(&d).unwrap();
        assert!(c.boundaries().is_empty());

        let d = nontorsion(
            2,
            vec![point("a", 1, 1, "1"), point("b", 0, 0, "1/2")],
            vec![flow("a", "b", 0, 1)],
        );
        let c = assemble_lift_graded(&d).unwrap();
        assert_eq!(c.boundary(1).get(0, 0), Some(&BigInt::from(1)));

        let g = FloerDatum {
            mode: Mode::GammaLaurent,
            ell: 1,
            flows: vec![flow("a", "b", 2, -3)],
            ..d.clone()
        };
        let c = assemble_laurent(&g, 32).unwrap();
        assert_eq!(c.boundary(1).get(0, 0), Some(&LaurentSeries::from_int_terms([(2, -3)], 32)));
    }

    #[test]
    fn assembly_refuses_invalid_data() {
        let d = nontorsion(2, vec![point("a", 1, 1, "1")], vec![flow("a", "zz", 0, 1)]);
        match assemble_cyclic(&d) {
            Err(DatumError::ValidationFailed(r)) => assert!(r.has_rule("S2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn restriction_is_idempotent() {
        let d = nontorsion(
            2,
            vec![point("a", 1, 1, "1"), point("b", 0, 0, "1/2"), point("c", 0, 2, "1/3")],
            vec![flow("a", "b", 0, 1), flow("a", "c", 1, 2), flow("a", "c", 2, 5)],
        );
        let r = restrict_min_level(&d);
        assert_eq!(r.flows, vec![flow("a", "b", 0, 1)]);
        assert_eq!(restrict_min_level(&r), r);
        let none = FloerDatum { flows: vec![flow("a", "c", 1, 2)], ..d };
        assert!(restrict_min_level(&none).flows.is_empty());
    }

    #[test]
    fn json_round_trip_and_strictness() {
        let d = nontorsion(
            2,
            vec![point("a", 1, 1, "1/3"), point("b", 0, 0, "1/7")],
            vec![flow("a", "b", 0, -2)],
        );
        let text = d.to_json();
        assert_eq!(FloerDatum::from_json(&text).unwrap(), d);
        let bumped = text.replacen("\"version\": 1", "\"version\": 2", 1);
        assert_eq!(FloerDatum::from_json(&bumped), Err(DatumError::UnsupportedVersion(2)));
        let extra = text.replacen("\"version\": 1", "\"version\": 1, \"extra\": 0", 1);
        assert!(matches!(FloerDatum::from_json(&extra), Err(DatumError::Parse(_))));
    }

    #[test]
    fn nontorsion_energy_window() {
        let d = nontorsion(
            2,
            vec![point("a", 1, 3, "1/4"), point("b", 0, 4, "7/4")],
            vec![flow("a", "b", 1, 1)],
        );
        assert!(validate(&d).passes());
        let e = nontorsion_energy(&d, &d.flows[0]).unwrap();
        // 1/4 - 7/4 + 2 = 1/2 in ((k-1)ℓ, (k+1)ℓ) = (0, 4)
        assert_eq!(e, q("1/2"));
    }
}
