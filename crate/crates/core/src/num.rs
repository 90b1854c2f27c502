//! Scalar abstraction shared by the exact (rational) and floating-point code paths.
//!
//! Geometry runs over [`Rat`]; the symplectic matrices of the quaternionic frames
//! run over `f64`. The small linear-algebra layer in [`crate::linalg`] is written
//! once against [`Scalar`] and instantiated for both.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserializer, Serializer};

/// Arbitrary-precision rational, always stored reduced with a positive denominator.
pub type Rat = BigRational;

/// Field-like scalar usable by the generic linear algebra.
pub trait Scalar:
    Clone + PartialEq + PartialOrd + fmt::Debug + Num + Signed + FromPrimitive + Send + Sync
{
    /// Lossy conversion used when exact data feeds the floating-point frames.
    fn to_f64_lossy(&self) -> f64;
}

impl Scalar for f64 {
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn to_f64_lossy(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for Rat {
    fn to_f64_lossy(&self) -> f64 {
        rat_to_f64(self)
    }
}

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        // Huge numerator/denominator: shift both down before dividing.
        _ => {
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(900);
            let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

/// `"p/q"` or `"n"`; the format used in every JSON document this crate writes.
pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRatError(pub String);

/// Accepts `"p/q"`, integers, and finite decimals such as `"-0.125"`.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let t = s.trim();
    let err = || ParseRatError(s.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let neg = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let digits = format!("{whole_digits}{frac}");
        let mut n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| err())?;
        if neg {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10u32), frac.len());
        return Ok(Rat::new(n, d));
    }
    BigInt::from_str(t).map(Rat::from_integer).map_err(|_| err())
}

/// Smallest positive rational multiple `s` such that `s * v` is a primitive integer vector.
pub fn primitive_scale(v: &[Rat]) -> Option<Rat> {
    if v.iter().all(Zero::is_zero) {
        return None;
    }
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let gcd = v
        .iter()
        .map(|x| (x.numer() * &lcm / x.denom()).abs())
        .fold(BigInt::zero(), |acc, x| acc.gcd(&x));
    Some(Rat::new(lcm, gcd))
}

/// Rational nearest to `x` with denominator at most `max_den` (continued fractions).
pub fn rat_approx(x: f64, max_den: u64) -> Rat {
    if !x.is_finite() {
        return Rat::zero();
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        let ai = a as i128;
        let p2 = ai * p1 + p0;
        let q2 = ai * q1 + q0;
        if q2 > max_den as i128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let f = v - a;
        if f.abs() < 1e-15 {
            break;
        }
        v = 1.0 / f;
    }
    if q1 == 0 {
        return Rat::from_integer(BigInt::from(x.round() as i64));
    }
    Rat::new(BigInt::from(p1), BigInt::from(q1))
}

pub mod serde_rat {
    //! Serde adapter: rationals as `"p/q"` strings, accepting bare JSON integers on input.
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        d.deserialize_any(RatVisitor)
    }

    struct RatVisitor;

    impl Visitor<'_> for RatVisitor {
        type Value = Rat;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a rational as \"p/q\" or an integer")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rat, E> {
            Ok(int(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rat, E> {
            Ok(Rat::from_integer(BigInt::from(v)))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rat, E> {
            Rat::from_f64(v)
                .filter(|_| v.fract() == 0.0)
                .ok_or_else(|| E::custom(format!("non-integer JSON number {v}; write it as \"p/q\"")))
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Rat, E> {
            parse_rat(v).map_err(E::custom)
        }
    }
}

pub mod serde_rat_vec {
    use super::*;
    use serde::de::SeqAccess;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&format_rat(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Vec<Rat>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a list of rationals")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Vec<Rat>, A::Error> {
                let mut out = Vec::new();
                while let Some(w) = seq.next_element::<RatWrap>()? {
                    out.push(w.0);
                }
                Ok(out)
            }
        }
        d.deserialize_seq(V)
    }

    struct RatWrap(Rat);

    impl<'de> serde::Deserialize<'de> for RatWrap {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            super::serde_rat::deserialize(d).map(RatWrap)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_literal_forms() {
        assert_eq!(parse_rat("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rat("-2/3").unwrap(), rat(-2, 3));
        assert_eq!(parse_rat(" 7 ").unwrap(), int(7));
        assert_eq!(parse_rat("-0.125").unwrap(), rat(-1, 8));
        assert_eq!(parse_rat("0.5").unwrap(), rat(1, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
        assert!(parse_rat("1.").is_err());
    }

    #[test]
    fn formats_reduced() {
        assert_eq!(format_rat(&rat(4, -6)), "-2/3");
        assert_eq!(format_rat(&int(5)), "5");
    }

    #[test]
    fn primitive_scale_clears_denominators_and_gcd() {
        let v = [rat(1, 2), rat(3, 4), int(0), rat(-1, 4)];
        let s = primitive_scale(&v).unwrap();
        let scaled: Vec<Rat> = v.iter().map(|x| x * &s).collect();
        assert_eq!(scaled, vec![int(2), int(3), int(0), int(-1)]);
        assert!(primitive_scale(&[int(0), int(0)]).is_none());
    }

    #[test]
    fn approximates_simple_fractions() {
        assert_eq!(rat_approx(0.3333333333, 100), rat(1, 3));
        assert_eq!(rat_approx(-1.25, 100), rat(-5, 4));
        assert_eq!(rat_approx(2.0, 10), int(2));
    }

    #[test]
    fn huge_rationals_convert() {
        let big = Rat::new(num_traits::pow(BigInt::from(10), 400), num_traits::pow(BigInt::from(10), 399) * 4);
        assert!((rat_to_f64(&big) - 2.5).abs() < 1e-12);
    }
}
