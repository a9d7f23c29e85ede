//! Complexes for torsion spin-c data: the boundary over `Z[[t]]` whose
//! `(b, a)` entry is `Σ_n count(a, b, n) t^n`, its `t = 0` evaluation, and
//! the `Q((t))` complex with energy levels as `t`-exponents.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::floer_datum::{assemble_laurent, assemble_power_series, DatumError, FloerDatum, FlowClass, Mode};
use crate::graded_complex::{homology_dvr, homology_laurent, ComplexError, GradedComplex, HomologyGroup};
use crate::linalg::{CoefficientSystem, SparseMatrix};
use crate::series::{LaurentSeries, PowerSeries};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NovikovError {
    #[error(transparent)]
    Datum(#[from] DatumError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("operation needs a {expected} complex, got {found}")]
    WrongMode { expected: &'static str, found: Mode },
}

/// A series complex built from a torsion-novikov or gamma-laurent datum.
/// Torsion-novikov complexes keep both the `Z[[t]]` form and its base
/// change to `Q((t))`.
#[derive(Debug, Clone)]
pub struct NovikovComplex {
    pub mode: Mode,
    pub truncation_order: i64,
    pub level_data: Vec<FlowClass>,
    power: Option<GradedComplex<PowerSeries>>,
    laurent: GradedComplex<LaurentSeries>,
}

pub fn build_novikov(d: &FloerDatum, truncation: i64) -> Result<NovikovComplex, NovikovError> {
    let laurent = assemble_laurent(d, truncation)?;
    let power = match d.mode {
        Mode::TorsionNovikov => Some(assemble_power_series(d, truncation)?),
        _ => None,
    };
    Ok(NovikovComplex {
        mode: d.mode,
        truncation_order: truncation,
        level_data: d.flows.clone(),
        power,
        laurent,
    })
}

impl NovikovComplex {
    pub fn laurent(&self) -> &GradedComplex<LaurentSeries> {
        &self.laurent
    }

    pub fn power(&self) -> Option<&GradedComplex<PowerSeries>> {
        self.power.as_ref()
    }

    /// `(grade, index)` of a generator.
    pub fn locate(&self, id: &str) -> Option<(i64, usize)> {
        self.laurent
            .all_generators()
            .iter()
            .find_map(|(n, g)| g.iter().position(|x| x == id).map(|i| (*n, i)))
    }

    /// The boundary entry `⟨∂a, b⟩`.
    pub fn entry(&self, from: &str, to: &str) -> LaurentSeries {
        let zero = LaurentSeries::zero(self.truncation_order);
        match (self.locate(from), self.locate(to)) {
            (Some((na, ia)), Some((nb, ib))) if nb == na - 1 => {
                self.laurent.boundary(na).get(ib, ia).cloned().unwrap_or(zero)
            }
            _ => zero,
        }
    }

    /// `∂ ∘ ∂ = 0` as an identity of Laurent polynomials: entries are rebuilt
    /// at an order beyond every product's support before multiplying.
    pub fn square_zero_exact(&self) -> bool {
        let m = self.level_data.iter().map(|f| f.level.abs()).max().unwrap_or(0);
        let order = 4 * m + 2;
        let mut entries: BTreeMap<(&str, &str), Vec<(i64, i64)>> = BTreeMap::new();
        for f in &self.level_data {
            entries.entry((f.from.as_str(), f.to.as_str())).or_default().push((f.level, f.count));
        }
        let exact: BTreeMap<i64, SparseMatrix<LaurentSeries>> = self
            .laurent
            .grades()
            .map(|n| {
                let mut b = SparseMatrix::new(self.laurent.rank(n - 1), self.laurent.rank(n));
                for (i, a) in self.laurent.generators(n).iter().enumerate() {
                    for (j, c) in self.laurent.generators(n - 1).iter().enumerate() {
                        if let Some(terms) = entries.get(&(a.as_str(), c.as_str())) {
                            b.set(j, i, LaurentSeries::from_int_terms(terms.iter().copied(), order));
                        }
                    }
                }
                (n, b)
            })
            .collect();
        exact.iter().all(|(n, outer)| match exact.get(&(n - 1)) {
            Some(inner) if inner.rows() > 0 => inner.mul(outer).is_zero(),
            _ => true,
        })
    }
}

/// Per-grade `dim_{Q((t))}` of homology. On a torsion-novikov complex this
/// is the homology after base change.
pub fn hf_gamma(n: &NovikovComplex) -> Result<BTreeMap<i64, usize>, NovikovError> {
    let grades: Vec<i64> = n.laurent.grades().collect();
    let dims: Result<Vec<(i64, usize)>, ComplexError> = grades
        .into_par_iter()
        .map(|g| homology_laurent(&n.laurent, g, n.truncation_order).map(|d| (g, d)))
        .collect();
    Ok(dims?.into_iter().collect())
}

/// Replaces every `Z[[t]]` entry by its constant term.
pub fn evaluate_t0(n: &NovikovComplex) -> Result<GradedComplex<BigInt>, NovikovError> {
    let p = n
        .power
        .as_ref()
        .ok_or(NovikovError::WrongMode { expected: "torsion-novikov", found: n.mode })?;
    Ok(p.map_coefficients(CoefficientSystem::Integers, PowerSeries::eval_t0))
}

/// Homology as a `Q[[t]]`-module per grade: free rank plus the exponents
/// `a` of the torsion factors `Q[[t]]/(t^a)`.
pub fn t_torsion(n: &NovikovComplex) -> Result<BTreeMap<i64, HomologyGroup<i64>>, NovikovError> {
    if n.power.is_none() {
        return Err(NovikovError::WrongMode { expected: "torsion-novikov", found: n.mode });
    }
    let grades: Vec<i64> = n.laurent.grades().collect();
    let groups: Result<Vec<(i64, HomologyGroup<i64>)>, ComplexError> = grades
        .into_par_iter()
        .map(|g| homology_dvr(&n.laurent, g, n.truncation_order).map(|h| (g, h)))
        .collect();
    Ok(groups?.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floer_datum::{assemble_level_zero, restrict_min_level, CriticalPoint};
    use crate::series::parse_rational;

    fn datum(mode: Mode, points: &[(&str, i64, &str)], flows: &[(&str, &str, i64, i64)]) -> FloerDatum {
        FloerDatum {
            mode,
            ell: 1,
            omega: parse_rational("0").unwrap(),
            e_rho: parse_rational("1").unwrap(),
            block_diagonal: false,
            points: points
                .iter()
                .map(|(id, g, csd)| CriticalPoint {
                    id: id.to_string(),
                    spinc_label: "s".into(),
                    grade_mod_ell: 0,
                    ind_lift: *g,
                    csd_lift: parse_rational(csd).unwrap(),
                })
                .collect(),
            flows: flows
                .iter()
                .map(|(a, b, level, count)| FlowClass {
                    from: a.to_string(),
                    to: b.to_string(),
                    level: *level,
                    count: *count,
                })
                .collect(),
        }
    }

    #[test]
    fn entries_collect_levels() {
        let d = datum(
            Mode::TorsionNovikov,
            &[("a", 1, "2"), ("b", 0, "0")],
            &[("a", "b", 0, 1), ("a", "b", 1, -2)],
        );
        let n = build_novikov(&d, 8).unwrap();
        assert_eq!(n.entry("a", "b"), LaurentSeries::from_int_terms([(0, 1), (1, -2)], 8));
        assert_eq!(n.entry("b", "a"), LaurentSeries::zero(8));
        let e = evaluate_t0(&n).unwrap();
        assert_eq!(e.boundary(1).get(0, 0), Some(&BigInt::from(1)));
        assert_eq!(e, assemble_level_zero(&restrict_min_level(&d)).unwrap());
    }

    #[test]
    fn square_zero_witness() {
        let d = datum(
            Mode::TorsionNovikov,
            &[("a", 2, "4"), ("b", 1, "2"), ("b2", 1, "2"), ("c", 0, "0")],
            &[("a", "b", 0, 1), ("b", "c", 1, 1), ("a", "b2", 0, -1), ("b2", "c", 1, 1)],
        );
        let n = build_novikov(&d, 6).unwrap();
        assert!(n.square_zero_exact());
        let e = evaluate_t0(&n).unwrap();
        assert!(e.boundary(1).is_zero());
        assert_eq!(hf_gamma(&n).unwrap(), BTreeMap::from([(0, 0), (1, 0), (2, 0)]));
    }

    #[test]
    fn t_divisible_boundary_vanishes_at_zero() {
        let d = datum(Mode::TorsionNovikov, &[("a", 1, "2"), ("b", 0, "0")], &[("a", "b", 1, 1)]);
        let n = build_novikov(&d, 8).unwrap();
        assert_eq!(evaluate_t0(&n).unwrap().boundaries().len(), 0);
        let tt = t_torsion(&n).unwrap();
        assert_eq!(tt[&0], HomologyGroup { free_rank: 0, torsion: vec![1] });
        assert_eq!(tt[&1], HomologyGroup { free_rank: 0, torsion: vec![] });
        assert_eq!(hf_gamma(&n).unwrap(), BTreeMap::from([(0, 0), (1, 0)]));
    }

    #[test]
    fn diagonal_t_powers() {
        let d = datum(
            Mode::TorsionNovikov,
            &[("a1", 1, "2"), ("a2", 1, "4"), ("b1", 0, "0"), ("b2", 0, "0")],
            &[("a1", "b1", 1, 1), ("a2", "b2", 3, 1)],
        );
        let tt = t_torsion(&build_novikov(&d, 10).unwrap()).unwrap();
        assert_eq!(tt[&0].torsion, vec![1, 3]);
    }

    #[test]
    fn gamma_unit_entry() {
        let d = datum(
            Mode::GammaLaurent,
            &[("a", 1, "2"), ("b", 0, "0")],
            &[("a", "b", 1, 1), ("a", "b", -1, -1)],
        );
        let n = build_novikov(&d, 8).unwrap();
        assert_eq!(hf_gamma(&n).unwrap(), BTreeMap::from([(0, 0), (1, 0)]));
        assert!(matches!(evaluate_t0(&n), Err(NovikovError::WrongMode { .. })));
        assert!(matches!(t_torsion(&n), Err(NovikovError::WrongMode { .. })));
    }

    #[test]
    fn zero_boundary_dims() {
        let d = datum(Mode::GammaLaurent, &[("a", 0, "0"), ("b", 0, "0"), ("c", 3, "5")], &[]);
        let n = build_novikov(&d, 4).unwrap();
        assert_eq!(hf_gamma(&n).unwrap(), BTreeMap::from([(0, 2), (3, 1)]));
    }
}
