//! Matrices over the coefficient rings and the elimination kernels shared by
//! the homology, spectral and Novikov engines.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::series::{LaurentSeries, PowerSeries, Rational};

/// Which ring the entries of a complex live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoefficientSystem {
    /// `Z`
    Integers,
    /// `Q`
    Rationals,
    /// `Z[[t]]`
    IntegerPowerSeries,
    /// `Q[[t]]`, stored as Laurent series of non-negative valuation
    RationalPowerSeries,
    /// `Q((t))`
    RationalLaurent,
}

/// Ring operations needed to assemble and compose boundary matrices.
pub trait Coefficient: Clone + Debug + PartialEq + Send + Sync {
    fn vanishes(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
}

impl Coefficient for BigInt {
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
}

impl Coefficient for Rational {
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
}

impl Coefficient for PowerSeries {
    fn vanishes(&self) -> bool {
        PowerSeries::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        PowerSeries::add(self, other)
    }
    fn times(&self, other: &Self) -> Self {
        PowerSeries::mul(self, other)
    }
    fn negated(&self) -> Self {
        PowerSeries::neg(self)
    }
}

impl Coefficient for LaurentSeries {
    fn vanishes(&self) -> bool {
        LaurentSeries::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        LaurentSeries::add(self, other)
    }
    fn times(&self, other: &Self) -> Self {
        LaurentSeries::mul(self, other)
    }
    fn negated(&self) -> Self {
        LaurentSeries::neg(self)
    }
}

/// A matrix storing only its nonzero entries. Absent entries are exact zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), T>,
}

impl<T: Coefficient> SparseMatrix<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, entries: BTreeMap::new() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&T> {
        self.entries.get(&(i, j))
    }

    /// Stores `v` at `(i, j)`, removing the slot when `v` is zero.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(i < self.rows && j < self.cols, "({i}, {j}) outside {}x{}", self.rows, self.cols);
        if v.vanishes() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), v);
        }
    }

    /// Adds `v` to the entry at `(i, j)`.
    pub fn accumulate(&mut self, i: usize, j: usize, v: T) {
        let next = match self.entries.get(&(i, j)) {
            Some(cur) => cur.plus(&v),
            None => v,
        };
        self.set(i, j, next);
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &T)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn transpose(&self) -> Self {
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            entries: self.entries.iter().map(|((i, j), v)| ((*j, *i), v.clone())).collect(),
        }
    }

    /// `self · other`; panics on mismatched inner dimensions.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut by_row: BTreeMap<usize, Vec<(usize, &T)>> = BTreeMap::new();
        for ((k, j), v) in &other.entries {
            by_row.entry(*k).or_default().push((*j, v));
        }
        let mut out = SparseMatrix::new(self.rows, other.cols);
        for ((i, k), a) in &self.entries {
            if let Some(row) = by_row.get(k) {
                for (j, b) in row {
                    out.accumulate(*i, *j, a.times(b));
                }
            }
        }
        out
    }

    pub fn map<U: Coefficient>(&self, mut f: impl FnMut(&T) -> U) -> SparseMatrix<U> {
        let mut out = SparseMatrix::new(self.rows, self.cols);
        for ((i, j), v) in &self.entries {
            out.set(*i, *j, f(v));
        }
        out
    }

    /// Relabels rows and columns: entry `(i, j)` moves to
    /// `(row_perm[i], col_perm[j])`.
    pub fn permute(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|((i, j), v)| ((row_perm[*i], col_perm[*j]), v.clone()))
                .collect(),
        }
    }

    /// Dense copy with `zero` in the empty slots.
    pub fn to_dense(&self, zero: &T) -> Vec<Vec<T>> {
        let mut out = vec![vec![zero.clone(); self.cols]; self.rows];
        for ((i, j), v) in &self.entries {
            out[*i][*j] = v.clone();
        }
        out
    }

    pub fn from_dense(rows: Vec<Vec<T>>, cols: usize) -> Self {
        let mut m = SparseMatrix::new(rows.len(), cols);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), cols);
            for (j, v) in row.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }
}

// ---------------------------------------------------------------------------
// Linear algebra over Q

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(rows: &mut [Vec<Rational>]) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        if !inv.is_one() {
            for v in rows[r].iter_mut().skip(c) {
                *v *= &inv;
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_q(rows: &[Vec<Rational>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Basis of `{x : A x = 0}` for `A` given by rows with `ncols` columns.
pub fn kernel_basis(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    let mut is_pivot = vec![None; ncols];
    for (r, &c) in pivots.iter().enumerate() {
        is_pivot[c] = Some(r);
    }
    let mut basis = Vec::new();
    for free in 0..ncols {
        if is_pivot[free].is_some() {
            continue;
        }
        let mut v = vec![Rational::zero(); ncols];
        v[free] = Rational::one();
        for (r, &c) in pivots.iter().enumerate() {
            v[c] = -m[r][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// A subspace of `Q^n` held as the nonzero rows of a reduced echelon basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vec<Rational>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn span(ambient: usize, vectors: impl IntoIterator<Item = Vec<Rational>>) -> Self {
        let mut rows: Vec<Vec<Rational>> = vectors.into_iter().collect();
        for v in &rows {
            assert_eq!(v.len(), ambient);
        }
        let pivots = rref(&mut rows);
        rows.truncate(pivots.len());
        Subspace { ambient, basis: rows, pivots }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    /// Reduces `v` against the echelon basis; the result is zero iff
    /// `v` lies in the subspace.
    pub fn reduce(&self, v: &[Rational]) -> Vec<Rational> {
        let mut out = v.to_vec();
        for (row, &c) in self.basis.iter().zip(&self.pivots) {
            if out[c].is_zero() {
                continue;
            }
            let f = out[c].clone();
            for (o, b) in out.iter_mut().zip(row) {
                if !b.is_zero() {
                    *o -= &f * b;
                }
            }
        }
        out
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        Subspace::span(self.ambient, self.basis.iter().chain(&other.basis).cloned())
    }

    /// Vectors from `candidates`, in order, that extend `self` to a basis of
    /// `self + span(candidates)`.
    pub fn complement_in(&self, candidates: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
        let mut acc = self.clone();
        let mut picked = Vec::new();
        for v in candidates {
            if !acc.contains(v) {
                acc = Subspace::span(self.ambient, acc.basis.iter().cloned().chain([v.clone()]));
                picked.push(v.clone());
            }
        }
        picked
    }
}

/// Solves `v = Σ c_i e_i + Σ d_j b_j` for the `c` part, where `e` and `b`
/// together are linearly independent and `v` lies in their span.
/// Returns `None` when `v` is outside the span.
pub fn coordinates_modulo(
    e: &[Vec<Rational>],
    b: &[Vec<Rational>],
    v: &[Rational],
) -> Option<Vec<Rational>> {
    let n = v.len();
    let k = e.len() + b.len();
    // Solve M x = v with M columns = e ++ b. Rows of the augmented system
    // are indexed by ambient coordinates.
    let mut rows: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row: Vec<Rational> = e.iter().chain(b).map(|col| col[i].clone()).collect();
            row.push(v[i].clone());
            row
        })
        .collect();
    let pivots = rref(&mut rows);
    if pivots.last() == Some(&k) {
        return None;
    }
    let mut x = vec![Rational::zero(); k];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = rows[r][k].clone();
    }
    x.truncate(e.len());
    Some(x)
}

// ---------------------------------------------------------------------------
// Smith normal form over Z

/// `U·M·V = D` with `U`, `V` unimodular and `D` diagonal, `d_i | d_{i+1}`,
/// `d_i ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub u: Vec<Vec<BigInt>>,
    pub d: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
}

impl SmithForm {
    /// Nonzero diagonal entries, in order.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let k = self.d.len().min(self.d.first().map_or(0, Vec::len));
        (0..k).map(|i| self.d[i][i].clone()).filter(|x| !x.is_zero()).collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

/// Smith normal form with smallest-absolute-value pivoting.
pub fn smith_normal_form(m: &[Vec<BigInt>], cols: usize) -> SmithForm {
    let rows = m.len();
    let mut d: Vec<Vec<BigInt>> = m.to_vec();
    let mut u = identity(rows);
    let mut v = identity(cols);

    // row_i -= q·row_k on D and U
    fn row_axpy(a: &mut [Vec<BigInt>], i: usize, k: usize, q: &BigInt) {
        let (src, dst) = if i < k {
            let (lo, hi) = a.split_at_mut(k);
            (&hi[0], &mut lo[i])
        } else {
            let (lo, hi) = a.split_at_mut(i);
            (&lo[k], &mut hi[0])
        };
        for (x, y) in dst.iter_mut().zip(src.iter()) {
            if !y.is_zero() {
                *x -= q * y;
            }
        }
    }
    fn col_axpy(a: &mut [Vec<BigInt>], j: usize, k: usize, q: &BigInt) {
        for row in a.iter_mut() {
            if !row[k].is_zero() {
                let y = row[k].clone();
                row[j] -= q * y;
            }
        }
    }
    fn swap_cols(a: &mut [Vec<BigInt>], i: usize, j: usize) {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
    }

    let steps = rows.min(cols);
    for t in 0..steps {
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let x = &d[i][j];
                if !x.is_zero() && best.map_or(true, |(bi, bj)| x.abs() < d[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        d.swap(t, pi);
        u.swap(t, pi);
        swap_cols(&mut d, t, pj);
        swap_cols(&mut v, t, pj);

        loop {
            let p = d[t][t].clone();
            let mut clean = true;
            for i in t + 1..rows {
                if d[i][t].is_zero() {
                    continue;
                }
                let q = floor_div(&d[i][t], &p);
                row_axpy(&mut d, i, t, &q);
                row_axpy(&mut u, i, t, &q);
                clean &= d[i][t].is_zero();
            }
            for j in t + 1..cols {
                if d[t][j].is_zero() {
                    continue;
                }
                let q = floor_div(&d[t][j], &p);
                col_axpy(&mut d, j, t, &q);
                col_axpy(&mut v, j, t, &q);
                clean &= d[t][j].is_zero();
            }
            if !clean {
                // a remainder smaller than the pivot survived; move it in
                let mut best = (t, t);
                for i in t..rows {
                    let x = &d[i][t];
                    if !x.is_zero() && x.abs() < d[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t..cols {
                    let x = &d[t][j];
                    if !x.is_zero() && x.abs() < d[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                if best.0 != t {
                    d.swap(t, best.0);
                    u.swap(t, best.0);
                } else if best.1 != t {
                    swap_cols(&mut d, t, best.1);
                    swap_cols(&mut v, t, best.1);
                }
                continue;
            }
            // pivot must divide the rest of the block
            let bad = (t + 1..rows)
                .find(|&i| (t + 1..cols).any(|j| !(&d[i][j] % &p).is_zero()));
            match bad {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    row_axpy(&mut d, t, i, &minus_one);
                    row_axpy(&mut u, t, i, &minus_one);
                }
                None => break,
            }
        }
        if d[t][t].is_negative() {
            for x in d[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
    }
    SmithForm { u, d, v }
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer::Integer;
    a.div_floor(b)
}

// ---------------------------------------------------------------------------
// Valuation-pivot elimination over Q[[t]] / Q((t))

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EliminationError {
    #[error("pivot valuation {valuation} is not determined below truncation order {truncation_order}")]
    InsufficientTruncation { valuation: i64, truncation_order: i64 },
    #[error("entry ({row}, {col}) has negative valuation {valuation}; not a power series")]
    NotPowerSeries { row: usize, col: usize, valuation: i64 },
}

/// Gaussian elimination pivoting on the entry of least valuation. Returns
/// the pivot valuations in the order found (non-decreasing).
///
/// A residual entry with no known nonzero coefficient is treated as zero to
/// working precision. A pivot is accepted only when its valuation is below
/// the truncation order of every residual entry, so no undetermined entry
/// could have smaller valuation.
pub fn valuation_elimination(m: &[Vec<LaurentSeries>]) -> Result<Vec<i64>, EliminationError> {
    let mut a: Vec<Vec<LaurentSeries>> = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let mut best: Option<(usize, usize, i64)> = None;
        let mut min_trunc = i64::MAX;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, x) in row.iter().enumerate().skip(t) {
                min_trunc = min_trunc.min(x.truncation_order());
                if let Some(val) = x.valuation() {
                    if best.map_or(true, |(_, _, bv)| val < bv) {
                        best = Some((i, j, val));
                    }
                }
            }
        }
        let Some((pi, pj, val)) = best else { break };
        if val >= min_trunc {
            return Err(EliminationError::InsufficientTruncation {
                valuation: val,
                truncation_order: min_trunc,
            });
        }
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        let pinv = a[t][t].inv().expect("pivot is nonzero");
        let pivot_row = a[t].clone();
        for row in a.iter_mut().skip(t + 1) {
            if row[t].is_zero() {
                continue;
            }
            let f = row[t].mul(&pinv);
            for j in t..cols {
                if pivot_row[j].is_zero() {
                    continue;
                }
                row[j] = row[j].sub(&f.mul(&pivot_row[j]));
            }
            // exact cancellation in the pivot column
            row[t] = LaurentSeries::zero(row[t].truncation_order());
        }
        // the pivot column is now clear below t; the pivot divides the rest
        // of row t, so column operations only clear row t
        out.push(val);
        t += 1;
    }
    Ok(out)
}

/// Invariant factors `t^{a_1}, …, t^{a_r}` (as exponents) of a matrix over
/// `Q[[t]]`.
pub fn dvr_smith_form(m: &[Vec<LaurentSeries>]) -> Result<Vec<i64>, EliminationError> {
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if let Some(v) = x.valuation() {
                if v < 0 {
                    return Err(EliminationError::NotPowerSeries { row: i, col: j, valuation: v });
                }
            }
        }
    }
    valuation_elimination(m)
}
