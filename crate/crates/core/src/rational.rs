//! Exact rational helpers. Everything in the crate is a [`Rational`]; floats
//! only show up when a value is rendered for display or a root is taken.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p/q"`, `"-p/q"` or a bare integer. Decimal points are rejected.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational `p/q` or integer: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Canonical `p/q` rendering; integers render as `p`.
pub fn format(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerators/denominators: scale both down to the same bit width.
        let n = r.numer().bits() as i64;
        let d = r.denom().bits() as i64;
        let shift = (n.max(d) - 1000).max(0) as usize;
        let num = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let den = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        num / den
    })
}

pub fn pow(r: &Rational, exp: u32) -> Rational {
    num_traits::pow(r.clone(), exp as usize)
}

/// The real `degree`-th root of a nonnegative rational, for display.
/// Negative inputs (only possible for non-commuting systems) return the
/// signed root of the absolute value.
pub fn root(r: &Rational, degree: u32) -> f64 {
    let v = to_f64(r);
    if degree == 1 {
        return v;
    }
    v.signum() * v.abs().powf(1.0 / degree as f64)
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a, I: IntoIterator<Item = &'a Rational>>(values: I) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn max_abs<'a, I: IntoIterator<Item = &'a Rational>>(values: I) -> Rational {
    values
        .into_iter()
        .map(|v| v.abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Rationals rescaled to one common denominator so hot loops stay in
/// integer arithmetic.
#[derive(Debug, Clone)]
pub(crate) struct Scaled {
    pub nums: Vec<BigInt>,
    pub den: BigInt,
}

impl Scaled {
    pub fn new(values: &[Rational]) -> Self {
        let den = common_denominator(values);
        let nums = values
            .iter()
            .map(|v| v.numer() * (&den / v.denom()))
            .collect();
        Self { nums, den }
    }
}

pub mod serde_str {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = RationalRepr::deserialize(d)?;
        raw.into_rational().map_err(serde::de::Error::custom)
    }

    /// Config files may write `1` or `"1/3"`.
    #[derive(Deserialize)]
    #[serde(untagged)]
    pub enum RationalRepr {
        Int(i64),
        Str(String),
    }

    impl RationalRepr {
        pub fn into_rational(self) -> crate::error::Result<Rational> {
            match self {
                RationalRepr::Int(n) => Ok(super::int(n)),
                RationalRepr::Str(s) => super::parse(&s),
            }
        }
    }
}

/// `Vec<Rational>` as a list of `"p/q"` strings (integers accepted on input).
pub mod serde_vec {
    use super::serde_str::RationalRepr;
    use super::Rational;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&super::format(v))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<RationalRepr>::deserialize(d)?
            .into_iter()
            .map(|r| r.into_rational().map_err(serde::de::Error::custom))
            .collect()
    }
}
