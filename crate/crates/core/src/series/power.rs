use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use super::laurent::LaurentSeries;
use super::rational::Rational;

/// A truncated power series `Σ c_e t^e + O(t^N)` with integer coefficients
/// and non-negative exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PowerSeries {
    coefficients: BTreeMap<i64, BigInt>,
    truncation_order: i64,
}

impl PowerSeries {
    pub fn zero(truncation_order: i64) -> Self {
        debug_assert!(truncation_order > 0);
        PowerSeries { coefficients: BTreeMap::new(), truncation_order }
    }

    /// Builds from `(exponent, coefficient)` pairs; negative exponents are
    /// rejected with a panic, exponents at or past `N` are dropped.
    pub fn from_terms<I>(terms: I, truncation_order: i64) -> Self
    where
        I: IntoIterator<Item = (i64, BigInt)>,
    {
        let mut coefficients: BTreeMap<i64, BigInt> = BTreeMap::new();
        for (e, c) in terms {
            assert!(e >= 0, "power series exponent {e} is negative");
            if e < truncation_order {
                *coefficients.entry(e).or_insert_with(BigInt::zero) += c;
            }
        }
        coefficients.retain(|_, c| !c.is_zero());
        PowerSeries { coefficients, truncation_order }
    }

    pub fn from_int_terms<I>(terms: I, truncation_order: i64) -> Self
    where
        I: IntoIterator<Item = (i64, i64)>,
    {
        Self::from_terms(terms.into_iter().map(|(e, c)| (e, BigInt::from(c))), truncation_order)
    }

    pub fn truncation_order(&self) -> i64 {
        self.truncation_order
    }

    pub fn valuation(&self) -> Option<i64> {
        self.coefficients.keys().next().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coeff(&self, e: i64) -> BigInt {
        self.coefficients.get(&e).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> + '_ {
        self.coefficients.iter().map(|(e, c)| (*e, c))
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.truncation_order.min(other.truncation_order);
        Self::from_terms(
            self.terms().chain(other.terms()).map(|(e, c)| (e, c.clone())),
            n,
        )
    }

    pub fn neg(&self) -> Self {
        PowerSeries {
            coefficients: self.coefficients.iter().map(|(e, c)| (*e, -c)).collect(),
            truncation_order: self.truncation_order,
        }
    }

    /// Cauchy product known below `min(N_a + v_b, N_b + v_a)`.
    pub fn mul(&self, other: &Self) -> Self {
        let va = self.valuation().unwrap_or(self.truncation_order);
        let vb = other.valuation().unwrap_or(other.truncation_order);
        let n = (self.truncation_order + vb).min(other.truncation_order + va);
        let mut out: BTreeMap<i64, BigInt> = BTreeMap::new();
        for (ea, ca) in &self.coefficients {
            for (eb, cb) in &other.coefficients {
                if ea + eb >= n {
                    break;
                }
                *out.entry(ea + eb).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        out.retain(|_, c| !c.is_zero());
        PowerSeries { coefficients: out, truncation_order: n }
    }

    /// The constant term: the image under `Z[[t]] → Z`, `t ↦ 0`.
    pub fn eval_t0(&self) -> BigInt {
        self.coeff(0)
    }

    /// Base change to `Q((t))`.
    pub fn to_laurent(&self) -> LaurentSeries {
        LaurentSeries::from_terms(
            self.terms().map(|(e, c)| (e, Rational::from_integer(c.clone()))),
            self.truncation_order,
        )
    }
}

impl fmt::Display for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_laurent(), f)
    }
}
