//! The filtration of the cyclic complex by lift grades and its spectral
//! sequence.
//!
//! For a generator of lift grade `q` the boundary only reaches lift grades
//! `q - 1 + kℓ` with `k ≥ 0`, so
//!
//! ```text
//! F_q C_n = span{ a : lift(a) ∈ {q, q+ℓ, q+2ℓ, …} }
//! ```
//!
//! is a decreasing filtration preserved by `∂ : F_q C_n → F_{q-1} C_{n-1}`.
//! Pages are computed directly from
//!
//! ```text
//! Z^k_{q,n} = { a ∈ F_q C_n : ∂a ∈ F_{q-1+kℓ} C_{n-1} }
//! E^k_{q,n} = Z^k_{q,n} / ( Z^{k-1}_{q+ℓ,n} + ∂ Z^{k-1}_{q+1-(k-1)ℓ,n+1} )
//! ```
//!
//! over `Q`, with `d^k : E^k_{q,n} → E^k_{q-1+kℓ,n-1}` induced by `∂`. The
//! page index follows this convention: each page step moves the filtration
//! by `ℓ`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::floer_datum::{assemble_cyclic, DatumError, FloerDatum, Mode, ValidationReport, Violation, Severity};
use crate::graded_complex::{homology_q, int_to_rational, GradedComplex, Grading};
use crate::linalg::{coordinates_modulo, kernel_basis, CoefficientSystem, SparseMatrix, Subspace};
use crate::series::Rational;

/// The cyclic complex together with each generator's lift grade.
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    base: GradedComplex<BigInt>,
    ell: i64,
    ids: Vec<String>,
    lifts: Vec<i64>,
    /// `∂` on all generators; rows are targets, columns sources.
    boundary: Vec<Vec<Rational>>,
}

impl FilteredComplex {
    /// Builds from generators `(id, lift)` in ambient order and a global
    /// boundary matrix (`(b, a)` entry `⟨∂a, b⟩`). Rejects boundaries that are
    /// not triangular for the filtration or do not square to zero.
    pub fn new(
        ell: i64,
        generators: Vec<(String, i64)>,
        boundary: &SparseMatrix<BigInt>,
    ) -> Result<Self, DatumError> {
        assert!(ell >= 1, "period must be positive");
        let n = generators.len();
        assert_eq!((boundary.rows(), boundary.cols()), (n, n));
        let (ids, lifts): (Vec<String>, Vec<i64>) = generators.into_iter().unzip();
        let mut bad = ValidationReport::default();
        for ((b, a), _) in boundary.entries() {
            let jump = lifts[b] - (lifts[a] - 1);
            if jump < 0 || jump % ell != 0 {
                bad.violations.push(Violation {
                    rule: "R1",
                    name: "BelowDiagonalFlow",
                    severity: Severity::Error,
                    location: format!("<d {}, {}>", ids[a], ids[b]),
                    detail: format!("lift {} -> {} is not q-1+kl with k >= 0", lifts[a], lifts[b]),
                });
            }
        }
        if !bad.passes() {
            return Err(DatumError::ValidationFailed(bad));
        }

        // regroup into the cyclic complex, preserving ambient order
        let grading = Grading::Cyclic { ell: ell as u32 };
        let residue = |i: usize| lifts[i].rem_euclid(ell);
        let mut gens: BTreeMap<i64, Vec<String>> = BTreeMap::new();
        let mut pos = vec![0usize; n];
        for i in 0..n {
            let slot = gens.entry(residue(i)).or_default();
            pos[i] = slot.len();
            slot.push(ids[i].clone());
        }
        let mut bounds: BTreeMap<i64, SparseMatrix<BigInt>> = BTreeMap::new();
        for ((b, a), v) in boundary.entries() {
            let r = residue(a);
            let rows = gens.get(&grading.prev(r)).map_or(0, Vec::len);
            bounds
                .entry(r)
                .or_insert_with(|| SparseMatrix::new(rows, gens[&r].len()))
                .set(pos[b], pos[a], v.clone());
        }
        let base = GradedComplex::new(grading, CoefficientSystem::Integers, gens, bounds)?;
        let dense = boundary.map(int_to_rational).to_dense(&Rational::zero());
        Ok(FilteredComplex { base, ell, ids, lifts, boundary: dense })
    }

    pub fn ell(&self) -> i64 {
        self.ell
    }

    pub fn base(&self) -> &GradedComplex<BigInt> {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Filtration index of each generator (its lift grade).
    pub fn filtration_index(&self) -> &[i64] {
        &self.lifts
    }

    pub fn residue(&self, q: i64) -> i64 {
        q.rem_euclid(self.ell)
    }

    /// Occupied lift grades, ascending.
    pub fn occupied(&self) -> Vec<i64> {
        let mut qs = self.lifts.clone();
        qs.sort_unstable();
        qs.dedup();
        qs
    }

    /// `max lift - min lift`, or 0 when empty.
    pub fn width(&self) -> i64 {
        match (self.lifts.iter().min(), self.lifts.iter().max()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0,
        }
    }

    pub fn boundary_dense(&self) -> &[Vec<Rational>] {
        &self.boundary
    }

    /// Coordinates spanning `F_q` (generators with lift `≡ q` and `≥ q`).
    pub fn filtration_coords(&self, q: i64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.lifts[i] >= q && (self.lifts[i] - q).rem_euclid(self.ell) == 0)
            .collect()
    }

    pub fn apply_boundary(&self, x: &[Rational]) -> Vec<Rational> {
        let mut y = vec![Rational::zero(); self.len()];
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, row) in self.boundary.iter().enumerate() {
                if !row[a].is_zero() {
                    y[b] += &row[a] * xa;
                }
            }
        }
        y
    }

    /// Vectors `x` supported on `domain` whose boundary vanishes on every
    /// coordinate in `rows`, embedded in the ambient space.
    pub fn restricted_kernel(&self, domain: &[usize], rows: &[usize]) -> Vec<Vec<Rational>> {
        let sub: Vec<Vec<Rational>> = rows
            .iter()
            .map(|&b| domain.iter().map(|&a| self.boundary[b][a].clone()).collect())
            .collect();
        let basis = if sub.is_empty() {
            (0..domain.len())
                .map(|i| {
                    let mut v = vec![Rational::zero(); domain.len()];
                    v[i] = Rational::from_integer(1.into());
                    v
                })
                .collect()
        } else {
            kernel_basis(&sub, domain.len())
        };
        basis
            .into_iter()
            .map(|v| {
                let mut full = vec![Rational::zero(); self.len()];
                for (c, &a) in v.into_iter().zip(domain) {
                    full[a] = c;
                }
                full
            })
            .collect()
    }

    /// `Z^k_q`. For `k ≤ 0` this is all of `F_q`.
    pub fn cycles_to_page(&self, q: i64, k: i64) -> Subspace {
        let domain = self.filtration_coords(q);
        let bound = q - 1 + k * self.ell;
        let target_residue = self.residue(q - 1);
        let rows: Vec<usize> = (0..self.len())
            .filter(|&b| self.residue(self.lifts[b]) == target_residue && self.lifts[b] < bound)
            .collect();
        Subspace::span(self.len(), self.restricted_kernel(&domain, &rows))
    }
}

/// Validates a nontorsion datum and builds its filtered complex.
pub fn build_filtered(d: &FloerDatum) -> Result<FilteredComplex, DatumError> {
    if d.mode != Mode::Nontorsion {
        return Err(DatumError::WrongMode { expected: "nontorsion", found: d.mode });
    }
    // validation (including ∂² = 0) happens in assemble_cyclic
    assemble_cyclic(d)?;
    let index: BTreeMap<&str, usize> =
        d.points.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect();
    let mut m = SparseMatrix::new(d.points.len(), d.points.len());
    for f in &d.flows {
        m.accumulate(index[f.to.as_str()], index[f.from.as_str()], BigInt::from(f.count));
    }
    FilteredComplex::new(d.ell, d.points.iter().map(|p| (p.id.clone(), p.ind_lift)).collect(), &m)
}

/// One cell `E^k_{q,n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageCell {
    pub n: i64,
    /// Representatives in `Z^k_q` of a basis of the quotient.
    pub basis: Vec<Vec<Rational>>,
    /// `Z^{k-1}_{q+ℓ} + ∂ Z^{k-1}_{q+1-(k-1)ℓ}`.
    pub denominator: Subspace,
}

impl PageCell {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// `d^k` out of one cell: a `dim(target) × dim(source)` matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferentialBlock {
    pub target_q: i64,
    pub matrix: Vec<Vec<Rational>>,
}

impl DifferentialBlock {
    pub fn is_zero(&self) -> bool {
        self.matrix.iter().flatten().all(Zero::is_zero)
    }

    pub fn rank(&self) -> usize {
        crate::linalg::rank_q(&self.matrix)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralPage {
    pub page_index: i64,
    pub ell: i64,
    /// Nonzero cells keyed by lift grade `q`.
    pub entries: BTreeMap<i64, PageCell>,
    /// Nonzero differentials keyed by source `q`.
    pub differential: BTreeMap<i64, DifferentialBlock>,
}

impl SpectralPage {
    pub fn dim(&self, q: i64) -> usize {
        self.entries.get(&q).map_or(0, PageCell::dim)
    }

    /// `(q, n) → dim E^k_{q,n}` over nonzero cells.
    pub fn dims(&self) -> BTreeMap<(i64, i64), usize> {
        self.entries.iter().map(|(q, c)| ((*q, c.n), c.dim())).collect()
    }

    /// `Σ_q dim E_{q,n}` for each residue `n`.
    pub fn totals(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for c in self.entries.values() {
            *out.entry(c.n).or_insert(0) += c.dim();
        }
        out
    }

    /// `Σ_n (-1)^n Σ_q dim E_{q,n}`; only meaningful for even `ℓ`.
    pub fn euler_characteristic(&self) -> Option<i64> {
        if self.ell % 2 != 0 {
            return None;
        }
        Some(
            self.totals()
                .iter()
                .map(|(n, d)| if n % 2 == 0 { *d as i64 } else { -(*d as i64) })
                .sum(),
        )
    }
}

/// Computes `E^k` with its differential. Cells are evaluated in parallel and
/// merged by lift grade.
pub fn page(f: &FilteredComplex, k: i64) -> SpectralPage {
    assert!(k >= 1, "pages start at 1");
    let ell = f.ell;
    let cells: Vec<(i64, PageCell)> = f
        .occupied()
        .into_par_iter()
        .filter_map(|q| {
            let z = f.cycles_to_page(q, k);
            let lower = f.cycles_to_page(q + ell, k - 1);
            let src = f.cycles_to_page(q + 1 - (k - 1) * ell, k - 1);
            let image = Subspace::span(f.len(), src.basis().iter().map(|x| f.apply_boundary(x)));
            let denominator = lower.sum(&image);
            debug_assert!(z.contains_subspace(&denominator));
            let basis = denominator.complement_in(z.basis());
            (!basis.is_empty()).then(|| (q, PageCell { n: f.residue(q), basis, denominator }))
        })
        .collect();
    let entries: BTreeMap<i64, PageCell> = cells.into_iter().collect();

    let blocks: Vec<(i64, DifferentialBlock)> = entries
        .par_iter()
        .filter_map(|(q, cell)| {
            let target_q = q - 1 + k * ell;
            let target = entries.get(&target_q)?;
            let cols: Vec<Vec<Rational>> = cell
                .basis
                .iter()
                .map(|x| {
                    let y = f.apply_boundary(x);
                    coordinates_modulo(&target.basis, target.denominator.basis(), &y)
                        .expect("boundary of a page cycle lies in the target cycles")
                })
                .collect();
            let matrix: Vec<Vec<Rational>> = (0..target.dim())
                .map(|r| cols.iter().map(|c| c[r].clone()).collect())
                .collect();
            let block = DifferentialBlock { target_q, matrix };
            (!block.is_zero()).then_some((*q, block))
        })
        .collect();
    SpectralPage { page_index: k, ell, entries, differential: blocks.into_iter().collect() }
}

/// First page index from which every later page is equal to `E^∞`.
pub fn stable_page_index(f: &FilteredComplex) -> i64 {
    (f.width() + 1) / f.ell + 2
}

#[derive(Debug, Clone)]
pub struct Convergence {
    pub pages: Vec<SpectralPage>,
    pub e_infinity: SpectralPage,
    /// Per residue `n`: `(Σ_q dim E^∞_{q,n}, dim_Q HF_n ⊗ Q)`.
    pub comparison: BTreeMap<i64, (usize, usize)>,
}

impl Convergence {
    pub fn agrees(&self) -> bool {
        self.comparison.values().all(|(a, b)| a == b)
    }
}

/// Runs the pages until they stabilize (the filtration has finite length) and
/// compares `E^∞` with the homology of the cyclic complex over `Q`.
pub fn converge(f: &FilteredComplex, max_page: Option<i64>) -> Convergence {
    let last = max_page.map_or_else(|| stable_page_index(f), |m| m.max(1));
    let pages: Vec<SpectralPage> = (1..=last).map(|k| page(f, k)).collect();
    let e_infinity = page(f, last.max(stable_page_index(f)));
    let totals = e_infinity.totals();
    let comparison = (0..f.ell)
        .map(|n| {
            let hf = homology_q(&f.base, n, int_to_rational);
            (n, (totals.get(&n).copied().unwrap_or(0), hf))
        })
        .collect();
    Convergence { pages, e_infinity, comparison }
}
