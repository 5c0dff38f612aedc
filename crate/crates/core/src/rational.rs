//! Exact rationals and their JSON form `{"num": "...", "den": "..."}`.

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary precision rational, always reduced with a positive denominator.
pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_counts(num: &BigUint, den: &BigUint) -> Rational {
    Rational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

pub fn to_f64(q: &Rational) -> f64 {
    // Both parts may overflow f64 for huge values; fall back to a scaled division.
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            let shift = q.denom().bits().max(q.numer().bits()).saturating_sub(1000);
            let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Parses `"a/b"`, `"a"`, or a plain decimal like `"0.25"`.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((int_part, frac)) = s.split_once('.') {
        if s.contains('/') {
            return Err(Error::Parse(format!("bad rational {s:?}")));
        }
        let neg = int_part.starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac);
        let num: BigInt = digits
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let q = Rational::new(num, den);
        return Ok(if neg { -q } else { q });
    }
    s.parse::<Rational>()
        .map_err(|_| Error::Parse(format!("bad rational {s:?}")))
}

/// Wire form of a rational.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
}

impl From<&Rational> for RationalJson {
    fn from(q: &Rational) -> Self {
        RationalJson {
            num: q.numer().to_string(),
            den: q.denom().to_string(),
        }
    }
}

impl TryFrom<&RationalJson> for Rational {
    type Error = Error;

    fn try_from(j: &RationalJson) -> Result<Rational> {
        let num: BigInt = j
            .num
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator {:?}", j.num)))?;
        let den: BigInt = j
            .den
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator {:?}", j.den)))?;
        if den.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Rational::new(num, den))
    }
}

pub fn to_json(q: &Rational) -> serde_json::Value {
    serde_json::to_value(RationalJson::from(q)).expect("plain struct serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse("3").unwrap(), int(3));
        assert_eq!(parse("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse("-1.5").unwrap(), ratio(-3, 2));
        assert_eq!(parse(" 4/8 ").unwrap(), ratio(1, 2));
        assert!(parse("x").is_err());
        assert!(parse("1/0").is_err());
    }

    #[test]
    fn json_shape() {
        let v = to_json(&ratio(27, 24));
        assert_eq!(v.to_string(), r#"{"num":"9","den":"8"}"#);
        let back: RationalJson = serde_json::from_value(v).unwrap();
        assert_eq!(Rational::try_from(&back).unwrap(), ratio(9, 8));
    }

    #[test]
    fn huge_to_f64() {
        let big = Rational::new(
            num_traits::pow(BigInt::from(10), 400) + 1,
            num_traits::pow(BigInt::from(10), 400) * 4,
        );
        assert!((to_f64(&big) - 0.25).abs() < 1e-15);
    }
}
