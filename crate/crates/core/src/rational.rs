//! Exact rational numbers and their string encoding.
//!
//! Every probability in this crate is a [`Rational`]: an arbitrary-precision
//! fraction kept in lowest terms with a positive denominator. On the wire a
//! rational is always a string, `"p/q"` or a bare integer `"p"`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Arbitrary-precision rational, always normalized.
pub type Rational = num_rational::BigRational;

/// Build `num/den` from machine integers. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parse `"p/q"`, `"p"` or `"-p/q"` into a normalized rational.
pub fn parse(text: &str) -> Result<Rational, Error> {
    let s = text.trim();
    let bad = |why: &str| Error::Parse(format!("invalid rational {text:?}: {why}"));
    if s.is_empty() {
        return Err(bad("empty"));
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| bad("numerator is not an integer"))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| bad("denominator is not an integer"))?;
    if den.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

/// Canonical string form: `"p/q"` in lowest terms, or `"p"` for integers.
pub fn format(r: &Rational) -> String {
    r.to_string()
}

/// Approximate decimal rendering. Never authoritative.
pub fn approx(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}

/// Strictly inside the open unit interval.
pub fn in_open_unit(r: &Rational) -> bool {
    r.is_positive() && *r < Rational::one()
}

/// Inside the closed unit interval.
pub fn in_closed_unit(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}

/// Serde adapters that encode rationals as strings.
pub mod serde_str {
    use serde::{de, Deserialize, Deserializer, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        super::parse(&text).map_err(de::Error::custom)
    }

    pub mod vec {
        use serde::ser::SerializeSeq;
        use serde::{de, Deserialize, Deserializer, Serializer};

        use crate::rational::Rational;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&crate::rational::format(r))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let items = Vec::<String>::deserialize(d)?;
            items
                .iter()
                .map(|t| crate::rational::parse(t).map_err(de::Error::custom))
                .collect()
        }
    }

    pub mod option {
        use serde::{de, Deserialize, Deserializer, Serializer};

        use crate::rational::Rational;

        pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(r) => s.serialize_some(&crate::rational::format(r)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|t| crate::rational::parse(&t).map_err(de::Error::custom))
                .transpose()
        }
    }

    pub mod option_vec {
        use serde::ser::SerializeSeq;
        use serde::Serializer;

        use crate::rational::Rational;

        pub fn serialize<S: Serializer>(v: &[Option<Rational>], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&r.as_ref().map(crate::rational::format))?;
            }
            seq.end()
        }
    }
}
