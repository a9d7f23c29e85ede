use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::rational::{rational_from_int, Rational};
use super::{SeriesError, DEFAULT_TRUNCATION};

/// A truncated formal Laurent series `Σ c_e t^e + O(t^N)` over the rationals.
///
/// Invariants:
/// - no stored zero coefficients
/// - every stored exponent is `< truncation_order`
///
/// The valuation is the smallest stored exponent; a series with nothing
/// stored is zero to the known precision and reports `None` (the `+∞`
/// sentinel).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LaurentSeries {
    coefficients: BTreeMap<i64, Rational>,
    truncation_order: i64,
}

impl LaurentSeries {
    pub fn zero(truncation_order: i64) -> Self {
        LaurentSeries { coefficients: BTreeMap::new(), truncation_order }
    }

    pub fn one(truncation_order: i64) -> Self {
        Self::monomial(Rational::one(), 0, truncation_order)
    }

    /// `c·t^e`, or zero when `e` is not below the truncation order.
    pub fn monomial(c: Rational, e: i64, truncation_order: i64) -> Self {
        Self::from_terms([(e, c)], truncation_order)
    }

    /// Builds a series from `(exponent, coefficient)` pairs. Repeated
    /// exponents are summed; terms at or above the truncation order are
    /// dropped.
    pub fn from_terms<I>(terms: I, truncation_order: i64) -> Self
    where
        I: IntoIterator<Item = (i64, Rational)>,
    {
        let mut coefficients: BTreeMap<i64, Rational> = BTreeMap::new();
        for (e, c) in terms {
            if e >= truncation_order || c.is_zero() {
                continue;
            }
            *coefficients.entry(e).or_insert_with(Rational::zero) += c;
        }
        coefficients.retain(|_, c| !c.is_zero());
        LaurentSeries { coefficients, truncation_order }
    }

    /// Integer counts indexed by exponent, as they arise from flow data.
    pub fn from_int_terms<I>(terms: I, truncation_order: i64) -> Self
    where
        I: IntoIterator<Item = (i64, i64)>,
    {
        Self::from_terms(
            terms.into_iter().map(|(e, c)| (e, rational_from_int(c))),
            truncation_order,
        )
    }

    pub fn truncation_order(&self) -> i64 {
        self.truncation_order
    }

    /// Smallest exponent with a nonzero coefficient; `None` for zero.
    pub fn valuation(&self) -> Option<i64> {
        self.coefficients.keys().next().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coeff(&self, e: i64) -> Rational {
        self.coefficients.get(&e).cloned().unwrap_or_else(Rational::zero)
    }

    /// Nonzero terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rational)> + '_ {
        self.coefficients.iter().map(|(e, c)| (*e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coefficients.len()
    }

    /// Lowers the truncation order to `min(self, n)`.
    pub fn truncate(&self, n: i64) -> Self {
        let n = n.min(self.truncation_order);
        LaurentSeries {
            coefficients: self.coefficients.range(..n).map(|(e, c)| (*e, c.clone())).collect(),
            truncation_order: n,
        }
    }

    /// Multiplies by `t^k`, shifting the truncation order with it.
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries {
            coefficients: self.coefficients.iter().map(|(e, c)| (e + k, c.clone())).collect(),
            truncation_order: self.truncation_order + k,
        }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zero(self.truncation_order);
        }
        LaurentSeries {
            coefficients: self.coefficients.iter().map(|(e, c)| (*e, c * s)).collect(),
            truncation_order: self.truncation_order,
        }
    }

    /// Lower bound on the exponents that could carry a nonzero coefficient:
    /// the valuation, or the truncation order when nothing is known to be
    /// nonzero.
    fn order_bound(&self) -> i64 {
        self.valuation().unwrap_or(self.truncation_order)
    }

    /// Coefficient-wise sum; truncation order is the minimum of the inputs.
    pub fn add(&self, other: &Self) -> Self {
        let n = self.truncation_order.min(other.truncation_order);
        let mut out = self.truncate(n).coefficients;
        for (e, c) in other.coefficients.range(..n) {
            let slot = out.entry(*e).or_insert_with(Rational::zero);
            *slot += c;
            if slot.is_zero() {
                out.remove(e);
            }
        }
        LaurentSeries { coefficients: out, truncation_order: n }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        LaurentSeries {
            coefficients: self.coefficients.iter().map(|(e, c)| (*e, -c)).collect(),
            truncation_order: self.truncation_order,
        }
    }

    /// Cauchy product. The result is known below
    /// `min(N_a + v_b, N_b + v_a)`, where `v` is the valuation (or the
    /// truncation order of a series known only to be zero).
    pub fn mul(&self, other: &Self) -> Self {
        let n = (self.truncation_order + other.order_bound())
            .min(other.truncation_order + self.order_bound());
        let mut out: BTreeMap<i64, Rational> = BTreeMap::new();
        for (ea, ca) in &self.coefficients {
            for (eb, cb) in &other.coefficients {
                let e = ea + eb;
                if e >= n {
                    break;
                }
                *out.entry(e).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        out.retain(|_, c| !c.is_zero());
        LaurentSeries { coefficients: out, truncation_order: n }
    }

    /// Multiplicative inverse. Writes `a = c·t^v·(1 + w)` and expands
    /// `1/(1 + w)` as a geometric series to the relative precision of `a`;
    /// the result is known below `N - 2v`.
    pub fn inv(&self) -> Result<Self, SeriesError> {
        let v = self.valuation().ok_or(SeriesError::ZeroInverse)?;
        let lead = self.coeff(v);
        let rel = self.truncation_order - v;
        let lead_inv = lead.recip();
        // w_k = a_{v+k} / a_v for k >= 1
        let w: Vec<(i64, Rational)> = self
            .coefficients
            .range(v + 1..)
            .map(|(e, c)| (e - v, c * &lead_inv))
            .collect();
        // b_0 = 1, b_n = -Σ_{k=1..n} w_k b_{n-k}
        let mut b: Vec<Rational> = Vec::with_capacity(rel.max(0) as usize);
        for n in 0..rel {
            if n == 0 {
                b.push(Rational::one());
                continue;
            }
            let mut acc = Rational::zero();
            for (k, wk) in &w {
                if *k > n {
                    break;
                }
                let prev = &b[(n - k) as usize];
                if !prev.is_zero() {
                    acc -= wk * prev;
                }
            }
            b.push(acc);
        }
        Ok(LaurentSeries::from_terms(
            b.into_iter().enumerate().map(|(i, c)| (i as i64 - v, c * &lead_inv)),
            self.truncation_order - 2 * v,
        ))
    }

    /// True when `self` and `other` agree on every exponent below both
    /// truncation orders.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let n = self.truncation_order.min(other.truncation_order);
        self.truncate(n).coefficients == other.truncate(n).coefficients
    }
}

impl Default for LaurentSeries {
    fn default() -> Self {
        Self::zero(DEFAULT_TRUNCATION)
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms() {
            let (sign, mag) = if c < &Rational::zero() { ("-", -c) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let show_coeff = !mag.is_one() || e == 0;
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match e {
                0 => {}
                1 => write!(f, "t")?,
                _ => write!(f, "t^{e}")?,
            }
        }
        if first {
            write!(f, "O(t^{})", self.truncation_order)
        } else {
            write!(f, " + O(t^{})", self.truncation_order)
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&LaurentSeries> for &LaurentSeries {
            type Output = LaurentSeries;
            fn $method(self, rhs: &LaurentSeries) -> LaurentSeries {
                LaurentSeries::$method(self, rhs)
            }
        }
        impl $tr for LaurentSeries {
            type Output = LaurentSeries;
            fn $method(self, rhs: LaurentSeries) -> LaurentSeries {
                LaurentSeries::$method(&self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        LaurentSeries::neg(self)
    }
}

impl Neg for LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        LaurentSeries::neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        rational_from_int(n)
    }

    fn lp(terms: &[(i64, i64)], n: i64) -> LaurentSeries {
        LaurentSeries::from_int_terms(terms.iter().copied(), n)
    }

    #[test]
    fn additive_inverse_is_zero_with_infinite_valuation() {
        let t = lp(&[(1, 1)], 32);
        let z = &t + &(-&t);
        assert!(z.is_zero());
        assert_eq!(z.valuation(), None);
    }

    #[test]
    fn add_examples() {
        let s = &lp(&[(-1, 1)], 32) + &lp(&[(1, 1)], 32);
        assert_eq!(s, lp(&[(-1, 1), (1, 1)], 32));
        assert_eq!(s.valuation(), Some(-1));
        let s = &lp(&[(0, 1), (1, 2)], 32) + &lp(&[(0, 3), (2, 1)], 32);
        assert_eq!(s, lp(&[(0, 4), (1, 2), (2, 1)], 32));
    }

    #[test]
    fn add_takes_min_truncation() {
        let s = &lp(&[(0, 1), (7, 1)], 10) + &lp(&[(5, 1)], 6);
        assert_eq!(s.truncation_order(), 6);
        assert_eq!(s, lp(&[(0, 1), (5, 1)], 6));
    }

    #[test]
    fn monomials_multiply_by_adding_exponents() {
        for (a, b) in [(-3, 5), (0, 0), (2, -7), (4, 4)] {
            let p = &lp(&[(a, 1)], 40) * &lp(&[(b, 1)], 40);
            assert_eq!(p.terms().collect::<Vec<_>>(), vec![(a + b, &q(1))]);
        }
    }

    #[test]
    fn multiplicative_identity() {
        let x = lp(&[(0, 3), (2, -1), (9, 4)], 20);
        assert_eq!(&x * &LaurentSeries::one(20), x);
        // negative valuation loses precision against an inexact one
        let y = lp(&[(-2, 5), (3, 1)], 20);
        let p = &y * &LaurentSeries::one(20);
        assert_eq!(p.truncation_order(), 18);
        assert!(p.agrees_with(&y));
    }

    #[test]
    fn odd_geometric_series_squares_to_triangular_numbers() {
        // -(t + t^3 + t^5 + ...) squared is Σ n t^{2n}
        let x = LaurentSeries::from_int_terms((0..20).map(|k| (2 * k + 1, -1)), 41);
        let sq = &x * &x;
        assert_eq!(sq.truncation_order(), 42);
        for e in 0..42 {
            let want = if e % 2 == 0 && e > 0 { e / 2 } else { 0 };
            assert_eq!(sq.coeff(e), q(want), "t^{e}");
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(LaurentSeries::one(32).inv().unwrap(), LaurentSeries::one(32));
        let t = lp(&[(1, 1)], 32);
        let ti = t.inv().unwrap();
        assert_eq!(ti.terms().collect::<Vec<_>>(), vec![(-1, &q(1))]);
        assert_eq!(ti.truncation_order(), 30);
        assert_eq!(LaurentSeries::zero(8).inv(), Err(SeriesError::ZeroInverse));
    }

    #[test]
    fn inverse_of_t_minus_t_inverse() {
        let a = lp(&[(-1, -1), (1, 1)], 40);
        let b = a.inv().unwrap();
        assert_eq!(b.truncation_order(), 42);
        for e in -5..42 {
            let want = if e > 0 && e % 2 == 1 { -1 } else { 0 };
            assert_eq!(b.coeff(e), q(want), "t^{e}");
        }
        // multiplying back gives 1 through degree 40
        let one = &b * &lp(&[(-1, -1), (1, 1)], 60);
        assert!(one.truncation_order() > 40);
        for e in -5..=40 {
            assert_eq!(one.coeff(e), q(i64::from(e == 0)), "t^{e}");
        }
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(lp(&[(-1, 1), (0, -2), (3, 1)], 5).to_string(), "t^-1 - 2 + t^3 + O(t^5)");
        assert_eq!(LaurentSeries::zero(4).to_string(), "O(t^4)");
    }
}
