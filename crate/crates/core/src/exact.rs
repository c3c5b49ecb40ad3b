//! Exact rational values and their decimal renderings.
//!
//! Every score in the engine is a [`Rational`]. Floating point only shows up
//! when a value is rendered for people or exported to a chart.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Signed;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = Ratio<i128>;

/// Fractional digits used for machine-readable decimal strings.
pub const EXACT_DECIMAL_DIGITS: u32 = 12;

pub fn int(n: i128) -> Rational {
    Rational::from_integer(n)
}

pub fn ratio(numer: i128, denom: i128) -> Rational {
    Rational::new(numer, denom)
}

/// `p/q` in lowest terms, or just `p` for integers.
pub fn to_fraction_string(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn parse_fraction(text: &str) -> Option<Rational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().ok()?;
            let d: i128 = d.trim().parse().ok()?;
            if d == 0 {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => text.parse::<i128>().ok().map(Rational::from_integer),
    }
}

/// Round half away from zero to `digits` decimals and print, trimming
/// trailing zeros when `trim` is set.
pub fn to_decimal_string(value: &Rational, digits: u32, trim: bool) -> String {
    let negative = value.is_negative();
    let magnitude = value.abs();
    let scale = 10i128.pow(digits);
    let scaled = magnitude * int(scale) + ratio(1, 2);
    let units = scaled.floor().to_integer();
    let (whole, frac) = units.div_rem(&scale);

    let mut out = String::new();
    if negative && units != 0 {
        out.push('-');
    }
    out.push_str(&whole.to_string());
    if digits > 0 {
        let mut frac_digits = format!("{:0width$}", frac, width = digits as usize);
        if trim {
            while frac_digits.ends_with('0') {
                frac_digits.pop();
            }
        }
        if !frac_digits.is_empty() {
            out.push('.');
            out.push_str(&frac_digits);
        }
    }
    out
}

/// Machine-readable decimal: twelve places, half-up, trailing zeros trimmed.
pub fn exact_decimal(value: &Rational) -> String {
    to_decimal_string(value, EXACT_DECIMAL_DIGITS, true)
}

/// Two-decimal presentation, half-up (`0.125` renders as `0.13`).
pub fn display_2dp(value: &Rational) -> String {
    to_decimal_string(value, 2, false)
}

pub fn to_f64(value: &Rational) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}

#[derive(Serialize, Deserialize)]
struct Wire {
    value: String,
    rational: String,
}

/// Serde adapter: `{"value": "0.643939393939", "rational": "85/132"}`.
///
/// Deserialization trusts the `rational` field; `value` is informational.
pub mod wire {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        Wire {
            value: exact_decimal(value),
            rational: to_fraction_string(value),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let wire = Wire::deserialize(d)?;
        parse_fraction(&wire.rational)
            .ok_or_else(|| serde::de::Error::custom(format!("bad rational {:?}", wire.rational)))
    }
}

/// Same encoding as [`wire`] for map values.
pub mod wire_map {
    use super::*;
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<String, Rational>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let out: BTreeMap<&String, Wire> = map
            .iter()
            .map(|(k, v)| {
                (
                    k,
                    Wire {
                        value: exact_decimal(v),
                        rational: to_fraction_string(v),
                    },
                )
            })
            .collect();
        out.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<String, Rational>, D::Error> {
        let raw = BTreeMap::<String, Wire>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, w)| {
                parse_fraction(&w.rational)
                    .map(|r| (k, r))
                    .ok_or_else(|| serde::de::Error::custom("bad rational"))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_rendering() {
        assert_eq!(exact_decimal(&ratio(85, 132)), "0.643939393939");
        assert_eq!(exact_decimal(&ratio(7, 10)), "0.7");
        assert_eq!(exact_decimal(&int(0)), "0");
        assert_eq!(exact_decimal(&int(1)), "1");
        assert_eq!(exact_decimal(&ratio(-4, 45)), "-0.088888888889");
        assert_eq!(display_2dp(&ratio(1, 8)), "0.13");
        assert_eq!(display_2dp(&ratio(29, 42)), "0.69");
        assert_eq!(display_2dp(&ratio(1, 3)), "0.33");
        assert_eq!(display_2dp(&int(1)), "1.00");
        assert_eq!(display_2dp(&ratio(-1, 1000)), "0.00");
    }

    #[test]
    fn fraction_strings() {
        assert_eq!(to_fraction_string(&ratio(10, 4)), "5/2");
        assert_eq!(to_fraction_string(&int(3)), "3");
        assert_eq!(parse_fraction(" 85/132 "), Some(ratio(85, 132)));
        assert_eq!(parse_fraction("-2"), Some(int(-2)));
        assert_eq!(parse_fraction("1/0"), None);
        assert_eq!(parse_fraction("x"), None);
    }

    #[test]
    fn wire_round_trip() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct Holder {
            #[serde(with = "wire")]
            v: Rational,
        }
        let h = Holder { v: ratio(43, 90) };
        let text = serde_json::to_string(&h).unwrap();
        assert_eq!(
            text,
            r#"{"v":{"value":"0.477777777778","rational":"43/90"}}"#
        );
        assert_eq!(serde_json::from_str::<Holder>(&text).unwrap(), h);
    }
}
