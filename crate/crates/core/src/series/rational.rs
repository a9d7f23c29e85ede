use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::SeriesError;

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Parses `"p/q"` or a bare integer `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational, SeriesError> {
    let bad = || SeriesError::BadRational(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let valid = |part: &str, signed: bool| {
        let digits = if signed { part.strip_prefix('-').unwrap_or(part) } else { part };
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(num, true) || !valid(den, false) {
        return Err(bad());
    }
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Renders as `"p/q"` with no whitespace, including `"n/1"` for integers.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub(crate) fn rational_from_int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_reduces_and_normalizes_sign() {
        let r = parse_rational("4/-6");
        assert!(r.is_err(), "sign belongs on the numerator");
        let r = parse_rational("-4/6").unwrap();
        assert_eq!(format_rational(&r), "-2/3");
        assert_eq!(format_rational(&parse_rational("0/7").unwrap()), "0/1");
        assert_eq!(format_rational(&parse_rational("12").unwrap()), "12/1");
    }

    #[test]
    fn parse_rejects_garbage() {
        for s in ["", "1/0", "a/2", "1 /2", "1/2/3", "+1/2", "--1"] {
            assert!(parse_rational(s).is_err(), "{s:?} accepted");
        }
    }
}
