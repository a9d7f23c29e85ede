use std::collections::BTreeMap;

use floer_core::floer_datum::{CriticalPoint, FloerDatum, FlowClass, Mode};
use floer_core::novikov_floer::{build_novikov, NovikovComplex};
use floer_core::pairing_gluing::{
    assemble_relative, chain_boundary, chain_coboundary, glue_check, pair, pair_chains, Chain,
    ClosedInvariantTable, RelativeInvariant,
};
use floer_core::series::{LaurentSeries, Rational};
use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

const N: i64 = 40;

/// `a` in grade 2, `b1, b2` in grade 1, `c1, c2` in grade 0, with
/// `∂a = b1 - b2` and `∂b1 = ∂b2 = t·c1 + 2t⁻¹·c2`.
fn ambient() -> NovikovComplex {
    let point = |id: &str, g: i64| CriticalPoint {
        id: id.into(),
        spinc_label: "s".into(),
        grade_mod_ell: 0,
        ind_lift: g,
        csd_lift: Rational::from_integer(BigInt::from(10 * g)),
    };
    let flow = |a: &str, b: &str, level: i64, count: i64| FlowClass { from: a.into(), to: b.into(), level, count };
    let d = FloerDatum {
        mode: Mode::GammaLaurent,
        ell: 1,
        omega: Rational::zero(),
        e_rho: Rational::from_integer(BigInt::from(1)),
        block_diagonal: false,
        points: vec![point("a", 2), point("b1", 1), point("b2", 1), point("c1", 0), point("c2", 0)],
        flows: vec![
            flow("a", "b1", 0, 1),
            flow("a", "b2", 0, -1),
            flow("b1", "c1", 1, 1),
            flow("b2", "c1", 1, 1),
            flow("b1", "c2", -1, 2),
            flow("b2", "c2", -1, 2),
        ],
    };
    build_novikov(&d, N).unwrap()
}

fn series() -> impl Strategy<Value = LaurentSeries> {
    prop::collection::vec((-3i64..6, -4i64..5), 0..4).prop_map(|t| LaurentSeries::from_int_terms(t, N))
}

fn chain_on(ids: &'static [&'static str]) -> impl Strategy<Value = Chain> {
    prop::collection::vec(series(), ids.len()).prop_map(move |s| {
        ids.iter().zip(s).filter(|(_, x)| !x.is_zero()).map(|(id, x)| (id.to_string(), x)).collect()
    })
}

fn invariant(chain: Chain) -> RelativeInvariant {
    let n = ambient();
    RelativeInvariant {
        grade: None,
        label: String::new(),
        points: n.laurent().all_generators().values().flatten().cloned().collect(),
        truncation_order: N,
        chain,
    }
}

fn agree(a: &LaurentSeries, b: &LaurentSeries) -> bool {
    let n = a.truncation_order().min(b.truncation_order());
    a.truncate(n).terms().eq(b.truncate(n).terms())
}

fn or_zero(s: Option<LaurentSeries>) -> LaurentSeries {
    s.unwrap_or_else(|| LaurentSeries::zero(N))
}

proptest! {
    #[test]
    fn pairing_is_bilinear(x in chain_on(&["b1", "b2"]), y in chain_on(&["b1", "b2"]), z in chain_on(&["b1", "b2"]), s in series()) {
        let mut sum = x.clone();
        for (k, v) in &y {
            let e = sum.entry(k.clone()).or_insert_with(|| LaurentSeries::zero(N));
            *e = e.add(v);
        }
        let lhs = or_zero(pair_chains(&sum, &z));
        let rhs = or_zero(pair_chains(&x, &z)).add(&or_zero(pair_chains(&y, &z)));
        prop_assert!(agree(&lhs, &rhs));
        let scaled: Chain = x.iter().map(|(k, v)| (k.clone(), v.mul(&s))).collect();
        prop_assert!(agree(&or_zero(pair_chains(&scaled, &z)), &or_zero(pair_chains(&x, &z)).mul(&s)));
        prop_assert!(agree(&or_zero(pair_chains(&x, &z)), &or_zero(pair_chains(&z, &x))));
    }

    #[test]
    fn boundary_is_adjoint_to_transpose(u in chain_on(&["b1", "b2"]), v in chain_on(&["c1", "c2"])) {
        let n = ambient();
        let du = chain_boundary(&n, &u).unwrap();
        let dtv = chain_coboundary(&n, &v).unwrap();
        prop_assert!(agree(&or_zero(pair_chains(&du, &v)), &or_zero(pair_chains(&u, &dtv))));
    }

    #[test]
    fn glue_against_direct_convolution(x in chain_on(&["a"]), y in chain_on(&["a"]), shift in -3i64..4) {
        // independent convolution of the single coefficients
        let (xa, ya) = (x.get("a").cloned(), y.get("a").cloned());
        let mut table = BTreeMap::new();
        if let (Some(p), Some(q)) = (&xa, &ya) {
            for (e1, c1) in p.terms() {
                for (e2, c2) in q.terms() {
                    *table.entry(e1 + e2 + shift).or_insert(0i64) +=
                        i64::try_from((c1 * c2).to_integer()).unwrap();
                }
            }
        }
        table.retain(|_, v| *v != 0);
        let closed = ClosedInvariantTable { values: table };
        let report = glue_check(&invariant(x), &invariant(y), &closed, shift).unwrap();
        prop_assert!(report.all_match, "{:?}", report);
    }
}

#[test]
fn boundary_pairs_to_zero_with_cocycle() {
    // ∂a = b1 - b2 and v = b1 + b2 has ∂ᵀv = 0
    let n = ambient();
    let a: Chain = [("a".to_string(), LaurentSeries::one(N))].into();
    let v: Chain = [("b1".to_string(), LaurentSeries::one(N)), ("b2".to_string(), LaurentSeries::one(N))].into();
    let da = chain_boundary(&n, &a).unwrap();
    assert!(or_zero(pair_chains(&da, &v)).is_zero());
    let rel = assemble_relative(&[("b1".into(), 0, 1), ("b2".into(), 0, -1)], &n, "boundary").unwrap();
    assert_eq!(rel.grade, Some(1));
    assert!(pair(&rel, &invariant(v)).unwrap().is_zero());
}
