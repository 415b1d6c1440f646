//! Exact rational probabilities and the epsilon comparison rules.
//!
//! All spend probabilities are kept as `BigRational` until they cross the API
//! boundary. The indistinguishability level is the one place where exactness
//! is conditional: when the caller supplies `e^epsilon` as a rational the
//! predicate `e^eps * a >= b` is decided exactly, otherwise it is evaluated in
//! f64 with a 1e-12 relative comparison margin.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Prob = BigRational;

/// Margin used for float-mode epsilon comparisons.
pub const EPS_MARGIN: f64 = 1e-12;

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn ratio_u64(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact conversion; every finite f64 is a dyadic rational.
pub fn from_f64(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite float")
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Render as `p/q` in lowest terms.
pub fn fmt_ratio(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parse `p/q` or a bare integer.
pub fn parse_ratio(s: &str) -> Option<BigRational> {
    let mut parts = s.splitn(2, '/');
    let num: BigInt = parts.next()?.trim().parse().ok()?;
    let den: BigInt = match parts.next() {
        Some(d) => d.trim().parse().ok()?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return None;
    }
    Some(BigRational::new(num, den))
}

/// Format with 12 significant digits, the default for numeric CLI output.
pub fn fmt_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.*e}", 11, x);
    // Normalize exponent formatting so output is stable across platforms.
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let exp: i32 = exp.parse().unwrap_or(0);
            if (-4..12).contains(&exp) {
                let decimals = (11 - exp).max(0) as usize;
                let t = format!("{:.*}", decimals, x);
                trim_zeros(&t)
            } else {
                format!("{}e{}", trim_zeros(mantissa), exp)
            }
        }
        None => s,
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// A required coin-indistinguishability level.
///
/// Holds `epsilon` itself for reporting plus, when available, the exact value
/// of `e^epsilon` as a rational.
#[derive(Debug, Clone, PartialEq)]
pub struct CiLevel {
    epsilon: f64,
    exp_exact: Option<BigRational>,
}

impl CiLevel {
    /// Level from a plain epsilon; comparisons use f64 with [`EPS_MARGIN`].
    pub fn from_epsilon(epsilon: f64) -> Self {
        CiLevel {
            epsilon,
            exp_exact: None,
        }
    }

    /// Level with `e^epsilon` given exactly as a rational `q >= 1`;
    /// all comparisons become exact.
    pub fn from_exp(exp_epsilon: BigRational) -> Self {
        assert!(
            exp_epsilon >= BigRational::one(),
            "e^epsilon must be at least 1"
        );
        CiLevel {
            epsilon: to_f64(&exp_epsilon).ln(),
            exp_exact: Some(exp_epsilon),
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn exp_exact(&self) -> Option<&BigRational> {
        self.exp_exact.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.exp_exact.is_some()
    }

    /// Decide `e^epsilon * a >= b`.
    pub fn scaled_ge(&self, a: &BigRational, b: &BigRational) -> bool {
        match &self.exp_exact {
            Some(q) => q * a >= *b,
            None => {
                let lhs = self.epsilon.exp() * to_f64(a);
                let rhs = to_f64(b);
                lhs >= rhs - EPS_MARGIN * rhs.abs().max(1.0)
            }
        }
    }

    /// Decide `ratio <= e^epsilon` for a conditional-probability ratio.
    pub fn admits_ratio(&self, ratio: &BigRational) -> bool {
        self.scaled_ge(&BigRational::one(), ratio)
    }

    /// `e^epsilon` as f64.
    pub fn exp_f64(&self) -> f64 {
        match &self.exp_exact {
            Some(q) => to_f64(q),
            None => self.epsilon.exp(),
        }
    }

    /// `e^epsilon - 1` as an exact rational when available.
    pub fn exp_minus_one(&self) -> Option<BigRational> {
        self.exp_exact.as_ref().map(|q| q - BigRational::one())
    }
}

/// Serialized form: either `{"epsilon": 1.8}` or `{"exp_epsilon": "7/1"}`.
#[derive(Serialize, Deserialize)]
struct CiLevelRepr {
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exp_epsilon: Option<String>,
}

impl Serialize for CiLevel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match &self.exp_exact {
            Some(q) => CiLevelRepr {
                epsilon: None,
                exp_epsilon: Some(fmt_ratio(q)),
            },
            None => CiLevelRepr {
                epsilon: Some(self.epsilon),
                exp_epsilon: None,
            },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CiLevel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = CiLevelRepr::deserialize(d)?;
        if let Some(q) = repr.exp_epsilon {
            let q = parse_ratio(&q)
                .ok_or_else(|| serde::de::Error::custom("invalid exp_epsilon rational"))?;
            Ok(CiLevel::from_exp(q))
        } else if let Some(e) = repr.epsilon {
            Ok(CiLevel::from_epsilon(e))
        } else {
            Err(serde::de::Error::custom(
                "ci level needs epsilon or exp_epsilon",
            ))
        }
    }
}

/// Serde helpers for `BigRational` fields rendered as `"p/q"`.
pub mod ratio_serde {
    use super::*;

    pub fn serialize<S: serde::Serializer>(
        x: &BigRational,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_ratio(x))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratio(&s).ok_or_else(|| serde::de::Error::custom("invalid rational"))
    }
}

/// Floor of a non-negative rational into u64, saturating.
pub fn floor_u64(x: &BigRational) -> u64 {
    debug_assert!(!x.is_negative());
    x.floor().to_integer().to_u64().unwrap_or(u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_scaled_ge_boundary() {
        // e^eps = 7 exactly, a = 1/7, b = 1: equality holds.
        let level = CiLevel::from_exp(ratio(7, 1));
        assert!(level.scaled_ge(&ratio(1, 7), &ratio(1, 1)));
        assert!(!level.scaled_ge(&ratio(1, 8), &ratio(1, 1)));
    }

    #[test]
    fn float_margin_behaviour() {
        let level = CiLevel::from_epsilon(7f64.ln());
        // Exactly at the boundary up to float noise.
        assert!(level.scaled_ge(&ratio(1, 7), &ratio(1, 1)));
        let below = CiLevel::from_epsilon(7f64.ln() - 0.01);
        assert!(!below.scaled_ge(&ratio(1, 7), &ratio(1, 1)));
    }

    #[test]
    fn ratio_round_trip() {
        let x = ratio(-3, 12);
        let s = fmt_ratio(&x);
        assert_eq!(s, "-1/4");
        assert_eq!(parse_ratio(&s).unwrap(), x);
        assert_eq!(parse_ratio("5").unwrap(), ratio(5, 1));
        assert!(parse_ratio("1/0").is_none());
    }

    #[test]
    fn sig12_formatting() {
        assert_eq!(fmt_sig12(0.75), "0.75");
        assert_eq!(fmt_sig12(7f64.ln()), "1.94591014906");
        assert_eq!(fmt_sig12(0.0), "0");
        assert_eq!(fmt_sig12(1234.0), "1234");
    }

    #[test]
    fn f64_conversion_is_exact() {
        let x = from_f64(0.1);
        // 0.1 as an f64 is the dyadic 3602879701896397 / 2^55.
        assert_eq!(
            x,
            BigRational::new(
                BigInt::from(3602879701896397u64),
                BigInt::from(1u64 << 55) * BigInt::from(1)
            )
        );
    }
}
