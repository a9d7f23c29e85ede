//! Finitely generated graded chain complexes and their homology.
//!
//! The boundary at grade `n` is a matrix whose rows are the generators of
//! grade `n - 1` and whose columns are the generators of grade `n`; entry
//! `(b, a)` is `⟨∂a, b⟩`. Cyclic gradings store residues `0..ℓ` and the
//! boundary has degree `-1 mod ℓ`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::linalg::{
    self, dvr_smith_form, smith_normal_form, valuation_elimination, Coefficient,
    CoefficientSystem, EliminationError, SparseMatrix,
};
use crate::series::{LaurentSeries, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Grading {
    Integer,
    Cyclic { ell: u32 },
}

impl Grading {
    /// Grade of the target of the boundary out of grade `n`.
    pub fn prev(&self, n: i64) -> i64 {
        match self {
            Grading::Integer => n - 1,
            Grading::Cyclic { ell } => (n - 1).rem_euclid(i64::from(*ell)),
        }
    }

    /// Grade whose boundary lands in grade `n`.
    pub fn next(&self, n: i64) -> i64 {
        match self {
            Grading::Integer => n + 1,
            Grading::Cyclic { ell } => (n + 1).rem_euclid(i64::from(*ell)),
        }
    }

    pub fn contains(&self, n: i64) -> bool {
        match self {
            Grading::Integer => true,
            Grading::Cyclic { ell } => (0..i64::from(*ell)).contains(&n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ComplexError {
    #[error("boundary composition at grade {grade} is nonzero")]
    NotAComplex { grade: i64 },
    #[error("boundary at grade {grade} is {rows}x{cols}, expected {want_rows}x{want_cols}")]
    DimensionMismatch { grade: i64, rows: usize, cols: usize, want_rows: usize, want_cols: usize },
    #[error("grade {0} is not a residue of the cyclic grading")]
    GradeOutOfRange(i64),
    #[error("cyclic grading needs ell >= 1")]
    ZeroPeriod,
    #[error(transparent)]
    Elimination(#[from] EliminationError),
}

/// `free_rank ⊕ ⊕ torsion` with torsion in invariant-factor form. Over `Z`
/// the torsion entries are the factors `d_i > 1`; over `Q[[t]]` they are the
/// exponents `a_i ≥ 1` of the factors `t^{a_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomologyGroup<T = BigInt> {
    pub free_rank: usize,
    pub torsion: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradedComplex<R> {
    grading: Grading,
    coefficients: CoefficientSystem,
    generators: BTreeMap<i64, Vec<String>>,
    boundaries: BTreeMap<i64, SparseMatrix<R>>,
}

impl<R: Coefficient> GradedComplex<R> {
    /// Validates shapes and `∂ ∘ ∂ = 0`. Grades absent from `boundaries`
    /// have zero boundary.
    pub fn new(
        grading: Grading,
        coefficients: CoefficientSystem,
        generators: BTreeMap<i64, Vec<String>>,
        boundaries: BTreeMap<i64, SparseMatrix<R>>,
    ) -> Result<Self, ComplexError> {
        let c = Self::new_unchecked(grading, coefficients, generators, boundaries)?;
        c.check_square_zero()?;
        Ok(c)
    }

    /// Validates shapes only; the caller vouches for `∂ ∘ ∂ = 0` or wants to
    /// inspect a candidate that may violate it.
    pub fn new_unchecked(
        grading: Grading,
        coefficients: CoefficientSystem,
        mut generators: BTreeMap<i64, Vec<String>>,
        mut boundaries: BTreeMap<i64, SparseMatrix<R>>,
    ) -> Result<Self, ComplexError> {
        if grading == (Grading::Cyclic { ell: 0 }) {
            return Err(ComplexError::ZeroPeriod);
        }
        generators.retain(|_, g| !g.is_empty());
        for &n in generators.keys().chain(boundaries.keys()) {
            if !grading.contains(n) {
                return Err(ComplexError::GradeOutOfRange(n));
            }
        }
        let dim = |n: i64| generators.get(&n).map_or(0, Vec::len);
        for (&n, m) in &boundaries {
            let (want_rows, want_cols) = (dim(grading.prev(n)), dim(n));
            if m.rows() != want_rows || m.cols() != want_cols {
                return Err(ComplexError::DimensionMismatch {
                    grade: n,
                    rows: m.rows(),
                    cols: m.cols(),
                    want_rows,
                    want_cols,
                });
            }
        }
        boundaries.retain(|_, m| !m.is_zero());
        Ok(GradedComplex { grading, coefficients, generators, boundaries })
    }

    pub fn check_square_zero(&self) -> Result<(), ComplexError> {
        for (&n, d) in &self.boundaries {
            if let Some(prev) = self.boundaries.get(&self.grading.prev(n)) {
                if !prev.mul(d).is_zero() {
                    return Err(ComplexError::NotAComplex { grade: n });
                }
            }
        }
        Ok(())
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn coefficients(&self) -> CoefficientSystem {
        self.coefficients
    }

    /// Grades with at least one generator, ascending.
    pub fn grades(&self) -> impl Iterator<Item = i64> + '_ {
        self.generators.keys().copied()
    }

    pub fn generators(&self, n: i64) -> &[String] {
        self.generators.get(&n).map_or(&[], Vec::as_slice)
    }

    pub fn all_generators(&self) -> &BTreeMap<i64, Vec<String>> {
        &self.generators
    }

    pub fn rank(&self, n: i64) -> usize {
        self.generators(n).len()
    }

    pub fn total_rank(&self) -> usize {
        self.generators.values().map(Vec::len).sum()
    }

    /// `∂_n : C_n → C_{n-1}`, zero-filled when absent.
    pub fn boundary(&self, n: i64) -> SparseMatrix<R> {
        self.boundaries
            .get(&n)
            .cloned()
            .unwrap_or_else(|| SparseMatrix::new(self.rank(self.grading.prev(n)), self.rank(n)))
    }

    pub fn boundaries(&self) -> &BTreeMap<i64, SparseMatrix<R>> {
        &self.boundaries
    }

    /// Same complex with entries mapped through a ring homomorphism.
    pub fn map_coefficients<U: Coefficient>(
        &self,
        coefficients: CoefficientSystem,
        mut f: impl FnMut(&R) -> U,
    ) -> GradedComplex<U> {
        let mut boundaries: BTreeMap<i64, SparseMatrix<U>> =
            self.boundaries.iter().map(|(n, m)| (*n, m.map(&mut f))).collect();
        boundaries.retain(|_, m| !m.is_zero());
        GradedComplex {
            grading: self.grading,
            coefficients,
            generators: self.generators.clone(),
            boundaries,
        }
    }

    /// Reorders generators within each grade; `perms[n][i]` is the new
    /// position of the old `i`-th generator of grade `n`. Boundaries are
    /// conjugated accordingly.
    pub fn permuted(&self, perms: &BTreeMap<i64, Vec<usize>>) -> Self {
        let ident = |n: i64| -> Vec<usize> { (0..self.rank(n)).collect() };
        let perm = |n: i64| perms.get(&n).cloned().unwrap_or_else(|| ident(n));
        let generators = self
            .generators
            .iter()
            .map(|(n, gens)| {
                let p = perm(*n);
                let mut out = vec![String::new(); gens.len()];
                for (i, g) in gens.iter().enumerate() {
                    out[p[i]] = g.clone();
                }
                (*n, out)
            })
            .collect();
        let boundaries = self
            .boundaries
            .iter()
            .map(|(n, m)| (*n, m.permute(&perm(self.grading.prev(*n)), &perm(*n))))
            .collect();
        GradedComplex { grading: self.grading, coefficients: self.coefficients, generators, boundaries }
    }
}

fn to_rational_dense<R, F>(m: &SparseMatrix<R>, f: F) -> Vec<Vec<Rational>>
where
    R: Coefficient,
    F: Fn(&R) -> Rational,
{
    m.map(|x| f(x)).to_dense(&Rational::zero())
}

/// Rank over `Q` of a matrix with rational-valued entries.
pub fn rational_rank<R: Coefficient>(m: &SparseMatrix<R>, f: impl Fn(&R) -> Rational) -> usize {
    if m.is_zero() {
        return 0;
    }
    linalg::rank_q(&to_rational_dense(m, f))
}

/// Smith normal form of an integer matrix.
pub fn smith_normal_form_of(m: &SparseMatrix<BigInt>) -> linalg::SmithForm {
    smith_normal_form(&m.to_dense(&BigInt::zero()), m.cols())
}

/// `H_n` over `Z` via Smith normal form.
pub fn homology_z(c: &GradedComplex<BigInt>, n: i64) -> HomologyGroup {
    let out_rank = smith_normal_form_of(&c.boundary(n)).rank();
    let incoming = smith_normal_form_of(&c.boundary(c.grading().next(n)));
    let factors = incoming.invariant_factors();
    HomologyGroup {
        free_rank: c.rank(n) - out_rank - factors.len(),
        torsion: factors.into_iter().filter(|d| !d.is_one()).collect(),
    }
}

/// `dim_Q H_n` for a complex whose entries embed in `Q`.
pub fn homology_q<R: Coefficient>(c: &GradedComplex<R>, n: i64, to_q: impl Fn(&R) -> Rational) -> usize {
    let out_rank = rational_rank(&c.boundary(n), &to_q);
    let in_rank = rational_rank(&c.boundary(c.grading().next(n)), &to_q);
    c.rank(n) - out_rank - in_rank
}

pub fn int_to_rational(x: &BigInt) -> Rational {
    Rational::from_integer(x.clone())
}

fn series_dense(m: &SparseMatrix<LaurentSeries>, truncation: i64) -> Vec<Vec<LaurentSeries>> {
    m.to_dense(&LaurentSeries::zero(truncation))
}

/// Working precision of a series complex: the least truncation order among
/// its entries, or `fallback` when every boundary is zero.
pub fn working_truncation(c: &GradedComplex<LaurentSeries>, fallback: i64) -> i64 {
    c.boundaries()
        .values()
        .flat_map(|m| m.entries().map(|(_, x)| x.truncation_order()))
        .min()
        .unwrap_or(fallback)
}

/// `dim_{Q((t))} H_n` by valuation-pivot elimination.
pub fn homology_laurent(
    c: &GradedComplex<LaurentSeries>,
    n: i64,
    truncation: i64,
) -> Result<usize, ComplexError> {
    let rank = |m: &SparseMatrix<LaurentSeries>| -> Result<usize, ComplexError> {
        if m.is_zero() {
            return Ok(0);
        }
        Ok(valuation_elimination(&series_dense(m, truncation))?.len())
    };
    let out_rank = rank(&c.boundary(n))?;
    let in_rank = rank(&c.boundary(c.grading().next(n)))?;
    Ok(c.rank(n) - out_rank - in_rank)
}

/// `H_n` as a `Q[[t]]`-module; torsion entries are the exponents `a` of
/// the factors `t^a`.
pub fn homology_dvr(
    c: &GradedComplex<LaurentSeries>,
    n: i64,
    truncation: i64,
) -> Result<HomologyGroup<i64>, ComplexError> {
    let invariants = |m: &SparseMatrix<LaurentSeries>| -> Result<Vec<i64>, ComplexError> {
        if m.is_zero() {
            return Ok(Vec::new());
        }
        Ok(dvr_smith_form(&series_dense(m, truncation))?)
    };
    let out_rank = invariants(&c.boundary(n))?.len();
    let incoming = invariants(&c.boundary(c.grading().next(n)))?;
    Ok(HomologyGroup {
        free_rank: c.rank(n) - out_rank - incoming.len(),
        torsion: incoming.into_iter().filter(|a| *a > 0).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gens(layout: &[(i64, &[&str])]) -> BTreeMap<i64, Vec<String>> {
        layout.iter().map(|(n, g)| (*n, g.iter().map(|s| s.to_string()).collect())).collect()
    }

    fn zmat(rows: usize, cols: usize, entries: &[(usize, usize, i64)]) -> SparseMatrix<BigInt> {
        let mut m = SparseMatrix::new(rows, cols);
        for &(i, j, v) in entries {
            m.set(i, j, BigInt::from(v));
        }
        m
    }

    #[test]
    fn zero_boundary_is_free() {
        let c: GradedComplex<BigInt> = GradedComplex::new(
            Grading::Integer,
            CoefficientSystem::Integers,
            gens(&[(3, &["a", "b", "c"])]),
            BTreeMap::new(),
        )
        .unwrap();
        assert_eq!(homology_z(&c, 3), HomologyGroup { free_rank: 3, torsion: vec![] });
        assert_eq!(homology_q(&c, 3, int_to_rational), 3);
    }

    #[test]
    fn multiplication_by_two() {
        let c = GradedComplex::new(
            Grading::Integer,
            CoefficientSystem::Integers,
            gens(&[(0, &["b"]), (1, &["a"])]),
            BTreeMap::from([(1, zmat(1, 1, &[(0, 0, 2)]))]),
        )
        .unwrap();
        assert_eq!(homology_z(&c, 0), HomologyGroup { free_rank: 0, torsion: vec![BigInt::from(2)] });
        assert_eq!(homology_z(&c, 1), HomologyGroup { free_rank: 0, torsion: vec![] });
        assert_eq!(homology_q(&c, 0, int_to_rational), 0);
    }

    #[test]
    fn diag_two_three_normalizes_to_six() {
        let c = GradedComplex::new(
            Grading::Integer,
            CoefficientSystem::Integers,
            gens(&[(0, &["x", "y"]), (1, &["a", "b"])]),
            BTreeMap::from([(1, zmat(2, 2, &[(0, 0, 2), (1, 1, 3)]))]),
        )
        .unwrap();
        assert_eq!(homology_z(&c, 0), HomologyGroup { free_rank: 0, torsion: vec![BigInt::from(6)] });
    }

    #[test]
    fn rejects_non_complex_and_bad_shapes() {
        let g = gens(&[(0, &["c"]), (1, &["b"]), (2, &["a"])]);
        let b = BTreeMap::from([(2, zmat(1, 1, &[(0, 0, 1)])), (1, zmat(1, 1, &[(0, 0, 1)]))]);
        assert_eq!(
            GradedComplex::new(Grading::Integer, CoefficientSystem::Integers, g.clone(), b).unwrap_err(),
            ComplexError::NotAComplex { grade: 2 }
        );
        let b = BTreeMap::from([(2, zmat(2, 1, &[]))]);
        assert!(matches!(
            GradedComplex::new(Grading::Integer, CoefficientSystem::Integers, g, b),
            Err(ComplexError::DimensionMismatch { grade: 2, .. })
        ));
    }

    #[test]
    fn cyclic_period_one_complex() {
        // C_0 = Z<a, b>, ∂a = 2b, ∂b = 0 (all grades collapse to residue 0)
        let c = GradedComplex::new(
            Grading::Cyclic { ell: 1 },
            CoefficientSystem::Integers,
            gens(&[(0, &["a", "b"])]),
            BTreeMap::from([(0, zmat(2, 2, &[(1, 0, 2)]))]),
        )
        .unwrap();
        assert_eq!(homology_z(&c, 0), HomologyGroup { free_rank: 0, torsion: vec![BigInt::from(2)] });
        assert!(GradedComplex::<BigInt>::new(
            Grading::Cyclic { ell: 2 },
            CoefficientSystem::Integers,
            gens(&[(2, &["a"])]),
            BTreeMap::new()
        )
        .is_err());
    }

    #[test]
    fn laurent_and_dvr_homology() {
        let t = |terms: &[(i64, i64)]| LaurentSeries::from_int_terms(terms.iter().copied(), 20);
        let mut m = SparseMatrix::new(1, 1);
        m.set(0, 0, t(&[(-1, -1), (1, 1)]));
        let c = GradedComplex::new(
            Grading::Integer,
            CoefficientSystem::RationalLaurent,
            gens(&[(0, &["b"]), (1, &["a"])]),
            BTreeMap::from([(1, m)]),
        )
        .unwrap();
        assert_eq!(homology_laurent(&c, 0, 20).unwrap(), 0);
        assert_eq!(homology_laurent(&c, 1, 20).unwrap(), 0);

        let mut m = SparseMatrix::new(1, 1);
        m.set(0, 0, t(&[(1, 1)]));
        let c = GradedComplex::new(
            Grading::Integer,
            CoefficientSystem::RationalPowerSeries,
            gens(&[(0, &["b"]), (1, &["a"])]),
            BTreeMap::from([(1, m)]),
        )
        .unwrap();
        assert_eq!(homology_dvr(&c, 0, 20).unwrap(), HomologyGroup { free_rank: 0, torsion: vec![1] });
        assert_eq!(homology_dvr(&c, 1, 20).unwrap(), HomologyGroup { free_rank: 0, torsion: vec![] });
    }
}
