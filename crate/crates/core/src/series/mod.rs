//! Exact coefficient arithmetic: rationals, truncated power series over the
//! integers (`Z[[t]]`) and truncated Laurent series over the rationals
//! (`Q((t))`).
//!
//! Every series carries an explicit truncation order `N`: coefficients are
//! known for exponents `< N` and nothing is claimed beyond that. Binary
//! operations propagate the tightest order their inputs justify.

mod laurent;
mod power;
mod rational;

pub use laurent::LaurentSeries;
pub use power::PowerSeries;
pub use rational::{format_rational, parse_rational, Rational};

use serde::{Deserialize, Serialize};

/// Truncation order used when a caller does not ask for one.
pub const DEFAULT_TRUNCATION: i64 = 32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("cannot invert the zero series")]
    ZeroInverse,
    #[error("malformed rational {0:?}")]
    BadRational(String),
    #[error("exponent {exponent} is not below truncation order {truncation_order}")]
    ExponentOutOfRange { exponent: i64, truncation_order: i64 },
}

/// Wire form of a series: `{"terms": [[e, "p/q"], ...], "truncation_order": N}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesRecord {
    pub terms: Vec<(i64, String)>,
    pub truncation_order: i64,
}

impl From<&LaurentSeries> for SeriesRecord {
    fn from(s: &LaurentSeries) -> Self {
        SeriesRecord {
            terms: s.terms().map(|(e, c)| (e, format_rational(c))).collect(),
            truncation_order: s.truncation_order(),
        }
    }
}

impl TryFrom<&SeriesRecord> for LaurentSeries {
    type Error = SeriesError;

    fn try_from(r: &SeriesRecord) -> Result<Self, SeriesError> {
        let mut terms = Vec::with_capacity(r.terms.len());
        for (e, c) in &r.terms {
            if *e >= r.truncation_order {
                return Err(SeriesError::ExponentOutOfRange {
                    exponent: *e,
                    truncation_order: r.truncation_order,
                });
            }
            terms.push((*e, parse_rational(c)?));
        }
        Ok(LaurentSeries::from_terms(terms, r.truncation_order))
    }
}
