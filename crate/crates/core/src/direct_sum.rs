//! Block-diagonal data: when every flow has level 0 and drops the lift by
//! exactly one, the cyclic boundary splits as a direct sum over lift grades
//! and `HF_n = ⊕_k HF_{(n+kℓ)}` holds integrally.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::floer_datum::{assemble_cyclic, validate, DatumError, FloerDatum, Mode, ValidationReport};
use crate::graded_complex::{homology_z, GradedComplex, HomologyGroup};
use crate::linalg::SparseMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DirectSumError {
    #[error("datum is not block diagonal")]
    NotBlockDiagonal(ValidationReport),
    #[error(transparent)]
    Datum(#[from] DatumError),
}

/// The lift-graded slices `C_{(q)}` (as one integer-graded complex whose
/// grade `q` piece is the slice) together with the cyclic total complex.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub ell: i64,
    pub blocks: GradedComplex<BigInt>,
    pub total: GradedComplex<BigInt>,
}

/// Splits a block-diagonal datum. Flows must satisfy rule `B1` whether or
/// not the datum's flag is set.
pub fn decompose(d: &FloerDatum) -> Result<BlockDecomposition, DirectSumError> {
    if d.mode != Mode::Nontorsion {
        return Err(DatumError::WrongMode { expected: "nontorsion", found: d.mode }.into());
    }
    let flagged = FloerDatum { block_diagonal: true, ..d.clone() };
    let report = validate(&flagged);
    if report.has_rule("B1") {
        let only_b1 = ValidationReport {
            violations: report.violations.into_iter().filter(|v| v.rule == "B1").collect(),
        };
        return Err(DirectSumError::NotBlockDiagonal(only_b1));
    }
    let total = assemble_cyclic(d)?;
    let blocks = crate::floer_datum::assemble_lift_graded(d)?;

    // The collapse of the block boundaries must reproduce the total
    // boundary entry for entry.
    let mut collapsed: BTreeMap<i64, SparseMatrix<BigInt>> = BTreeMap::new();
    let position = |c: &GradedComplex<BigInt>, id: &str| -> (i64, usize) {
        c.all_generators()
            .iter()
            .find_map(|(n, g)| g.iter().position(|x| x == id).map(|i| (*n, i)))
            .expect("generator present")
    };
    for (q, m) in blocks.boundaries() {
        for ((b, a), v) in m.entries() {
            let (na, ia) = position(&total, &blocks.generators(*q)[a]);
            let (nb, ib) = position(&total, &blocks.generators(q - 1)[b]);
            collapsed
                .entry(na)
                .or_insert_with(|| SparseMatrix::new(total.rank(nb), total.rank(na)))
                .accumulate(ib, ia, v.clone());
        }
    }
    collapsed.retain(|_, m| !m.is_zero());
    if &collapsed != total.boundaries() {
        return Err(DirectSumError::NotBlockDiagonal(ValidationReport::default()));
    }
    Ok(BlockDecomposition { ell: d.ell, blocks, total })
}

/// Prime-power components of a list of invariant factors, sorted.
pub fn prime_power_components(factors: &[BigInt]) -> Vec<BigInt> {
    let mut out = Vec::new();
    for f in factors {
        let mut n = f.clone();
        let mut p = BigInt::from(2);
        while &p * &p <= n {
            if n.is_multiple_of(&p) {
                let mut pk = BigInt::one();
                while n.is_multiple_of(&p) {
                    n /= &p;
                    pk *= &p;
                }
                out.push(pk);
            }
            p += 1;
        }
        if n > BigInt::one() {
            out.push(n);
        }
    }
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueComparison {
    pub n: i64,
    pub total: HomologyGroup,
    pub blocks: BTreeMap<i64, HomologyGroup>,
    pub total_prime_powers: Vec<String>,
    pub block_prime_powers: Vec<String>,
    pub matches: bool,
}

/// Compares `HF_n` of the total complex with `⊕_k HF_{(q+kℓ)}` for every
/// residue, integrally.
pub fn direct_sum_homology(b: &BlockDecomposition) -> Vec<ResidueComparison> {
    let block_groups: BTreeMap<i64, HomologyGroup> = b
        .blocks
        .grades()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|q| (q, homology_z(&b.blocks, q)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    (0..b.ell)
        .map(|n| {
            let total = homology_z(&b.total, n);
            let blocks: BTreeMap<i64, HomologyGroup> = block_groups
                .iter()
                .filter(|(q, _)| q.rem_euclid(b.ell) == n)
                .map(|(q, h)| (*q, h.clone()))
                .collect();
            let free: usize = blocks.values().map(|h| h.free_rank).sum();
            let all_block_torsion: Vec<BigInt> =
                blocks.values().flat_map(|h| h.torsion.iter().cloned()).collect();
            let tp = prime_power_components(&total.torsion);
            let bp = prime_power_components(&all_block_torsion);
            ResidueComparison {
                n,
                matches: free == total.free_rank && tp == bp,
                total_prime_powers: tp.iter().map(BigInt::to_string).collect(),
                block_prime_powers: bp.iter().map(BigInt::to_string).collect(),
                total,
                blocks,
            }
        })
        .collect()
}

/// `p`-part decomposition helper for callers that want small integers.
pub fn small_prime_powers(factors: &[i64]) -> Vec<i64> {
    prime_power_components(&factors.iter().map(|&f| BigInt::from(f)).collect::<Vec<_>>())
        .into_iter()
        .filter_map(|x| x.to_i64())
        .filter(|x| !x.is_zero())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floer_datum::{CriticalPoint, FlowClass};
    use crate::series::parse_rational;

    fn datum(points: &[(&str, i64, &str)], flows: &[(&str, &str, i64, i64)]) -> FloerDatum {
        FloerDatum {
            mode: Mode::Nontorsion,
            ell: 2,
            omega: parse_rational("0").unwrap(),
            e_rho: parse_rational("1").unwrap(),
            block_diagonal: true,
            points: points
                .iter()
                .map(|(id, lift, csd)| CriticalPoint {
                    id: id.to_string(),
                    spinc_label: "s".into(),
                    grade_mod_ell: lift.rem_euclid(2),
                    ind_lift: *lift,
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
    fn empty_datum() {
        let b = decompose(&datum(&[], &[])).unwrap();
        assert_eq!(b.blocks.total_rank(), 0);
        let rows = direct_sum_homology(&b);
        assert!(rows.iter().all(|r| r.matches && r.total.free_rank == 0));
    }

    #[test]
    fn multiplication_by_two_block() {
        let b = decompose(&datum(&[("a", 2, "3/2"), ("b", 1, "1/2")], &[("a", "b", 0, 2)])).unwrap();
        let rows = direct_sum_homology(&b);
        let r1 = &rows[1];
        assert_eq!(r1.blocks[&1], HomologyGroup { free_rank: 0, torsion: vec![BigInt::from(2)] });
        assert_eq!(r1.total.torsion, vec![BigInt::from(2)]);
        assert_eq!(rows[0].blocks[&2], HomologyGroup { free_rank: 0, torsion: vec![] });
        assert!(rows.iter().all(|r| r.matches));
    }

    #[test]
    fn level_one_flow_is_rejected() {
        let d = datum(&[("a", 3, "1/4"), ("b", 4, "7/4")], &[("a", "b", 1, 1)]);
        assert!(matches!(decompose(&d), Err(DirectSumError::NotBlockDiagonal(_))));
    }

    #[test]
    fn torsion_merges_across_blocks() {
        // Z/2 at lift 1 and Z/3 at lift 3: same residue, total torsion Z/6
        let d = datum(
            &[("a", 2, "1/2"), ("b", 1, "1/3"), ("c", 4, "3/2"), ("e", 3, "1")],
            &[("a", "b", 0, 2), ("c", "e", 0, 3)],
        );
        let rows = direct_sum_homology(&decompose(&d).unwrap());
        assert_eq!(rows[1].total.torsion, vec![BigInt::from(6)]);
        assert_eq!(rows[1].total_prime_powers, vec!["2", "3"]);
        assert!(rows[1].matches);
    }

    #[test]
    fn prime_powers() {
        assert_eq!(small_prime_powers(&[12, 5, 8]), vec![3, 4, 5, 8]);
    }
}
