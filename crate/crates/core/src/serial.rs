//! Serde helpers: exact rationals as `"p/q"` strings, floats rounded to
//! twelve significant digits.

use num_rational::BigRational;
use serde::Serializer;

pub fn rational<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

pub fn opt_rational<S: Serializer>(q: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_str(&q.to_string()),
        None => s.serialize_none(),
    }
}

pub fn rationals<S: Serializer>(qs: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(qs.iter().map(|q| q.to_string()))
}

/// Rounds to twelve significant digits so output is stable across platforms.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn float<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(round12(*x))
    } else {
        s.serialize_str(&x.to_string())
    }
}

pub fn floats<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|&x| round12(x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round12(0.1 + 0.2), 0.3);
        assert_eq!(round12(1.754_877_666_246_692_7), 1.75487766625);
        assert_eq!(round12(0.0), 0.0);
        assert!(round12(f64::NAN).is_nan());
    }

    #[test]
    fn rational_strings() {
        #[derive(serde::Serialize)]
        struct T {
            #[serde(serialize_with = "rational")]
            q: BigRational,
        }
        let t = T { q: BigRational::new(3.into(), 40.into()) };
        assert_eq!(serde_json::to_string(&t).unwrap(), r#"{"q":"3/40"}"#);
    }
}
