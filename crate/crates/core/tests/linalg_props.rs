use floer_core::linalg::{dvr_smith_form, rank_q, smith_normal_form, Subspace};
use floer_core::oracle::bareiss_rank;
use floer_core::series::{LaurentSeries, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn matmul(a: &[Vec<BigInt>], b: &[Vec<BigInt>], inner: usize, cols: usize) -> Vec<Vec<BigInt>> {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(BigInt::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

/// Determinant by fraction-free elimination with sign tracking.
fn det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else { return BigInt::zero() };
        if p != c {
            m.swap(p, c);
            sign = -sign;
        }
        for r in c + 1..n {
            for j in c + 1..n {
                m[r][j] = (&m[c][c] * &m[r][j] - &m[r][c] * &m[c][j]) / &prev;
            }
            m[r][c] = BigInt::zero();
        }
        prev = m[c][c].clone();
    }
    if n == 0 {
        BigInt::one()
    } else {
        sign * &m[n - 1][n - 1]
    }
}

fn matrix() -> impl Strategy<Value = Vec<Vec<BigInt>>> {
    (1usize..9, 1usize..9).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop::collection::vec(-6i64..7, c), r)
            .prop_map(|rows| rows.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn smith_form_is_a_factorization(m in matrix()) {
        let (rows, cols) = (m.len(), m[0].len());
        let s = smith_normal_form(&m, cols);
        prop_assert_eq!(matmul(&matmul(&s.u, &m, rows, cols), &s.v, cols, cols), s.d.clone());
        prop_assert_eq!(det(s.u.clone()).abs(), BigInt::one());
        prop_assert_eq!(det(s.v.clone()).abs(), BigInt::one());
        for i in 0..rows {
            for j in 0..cols {
                prop_assert!(i == j || s.d[i][j].is_zero());
            }
        }
        let f = s.invariant_factors();
        prop_assert!(f.iter().all(|x| x.is_positive()));
        prop_assert!(f.windows(2).all(|w| w[1].is_multiple_of(&w[0])));
        prop_assert_eq!(s.rank(), bareiss_rank(m.clone()));
        let q: Vec<Vec<Rational>> = m.iter().map(|r| r.iter().map(|x| Rational::from_integer(x.clone())).collect()).collect();
        prop_assert_eq!(rank_q(&q), s.rank());
    }

    #[test]
    fn subspace_sum_dimension(a in matrix(), b in matrix()) {
        let width = a[0].len().min(b[0].len());
        let to_q = |m: &Vec<Vec<BigInt>>| -> Vec<Vec<Rational>> {
            m.iter().map(|r| r[..width].iter().map(|x| Rational::from_integer(x.clone())).collect()).collect()
        };
        let (qa, qb) = (to_q(&a), to_q(&b));
        let sa = Subspace::span(width, qa.clone());
        let sb = Subspace::span(width, qb.clone());
        let both: Vec<Vec<Rational>> = qa.iter().chain(qb.iter()).cloned().collect();
        prop_assert_eq!(sa.sum(&sb).dim(), rank_q(&both));
        prop_assert!(sa.sum(&sb).contains_subspace(&sa));
        for v in &qa {
            prop_assert!(sa.contains(v));
        }
    }

    #[test]
    fn dvr_invariants_match_minor_valuations(d in prop::collection::vec(0i64..5, 1..4), mix in -3i64..4) {
        // diag(t^{d_i}) conjugated by an elementary operation keeps its
        // invariants (the t-adic valuations of the diagonal, sorted)
        let n = d.len();
        let mut m: Vec<Vec<LaurentSeries>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j {
                LaurentSeries::from_int_terms([(d[i], 1)], 30)
            } else {
                LaurentSeries::zero(30)
            }).collect())
            .collect();
        if n > 1 {
            let row0 = m[0].clone();
            for (x, y) in m[1].iter_mut().zip(row0.iter()) {
                *x = x.add(&y.scale(&Rational::from_integer(BigInt::from(mix))));
            }
        }
        let mut want = d.clone();
        want.sort();
        prop_assert_eq!(dvr_smith_form(&m).unwrap(), want);
    }
}

#[test]
fn zero_matrix_has_no_invariants() {
    let m = vec![vec![LaurentSeries::zero(2), LaurentSeries::zero(5)]];
    assert_eq!(dvr_smith_form(&m), Ok(vec![]));
}
