//! Continued fractions and ψ-approximability of the torus ratio ω.
//!
//! ω is given either exactly (a rational or a quadratic surd `(a + b√d)/c`)
//! or as a high-precision decimal whose value is known to lie in a rational
//! interval. All decisions downstream (quotients, error brackets, ψ tests)
//! are made with exact or interval-certified comparisons.

mod approx;
mod cf;

pub use approx::{
    is_psi_convergent, liouville_guard, liouville_guard_from, psi_value, select_convergent, ApproxProfile, LiouvilleEvidence, PsiTest,
    PsiValue, LIOUVILLE_MIN_Q,
};
pub use cf::{convergents, expand_continued_fraction, verify_bracket, Convergent, Expansion};

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{is_square, ratio_to_f64, QuadSurd};

/// The torus ratio ω ≥ 1.
#[derive(Clone, PartialEq, Eq)]
pub enum OmegaSpec {
    Rational(BigRational),
    /// `(a + b·√d) / c`
    QuadraticSurd {
        a: BigInt,
        b: BigInt,
        d: u64,
        c: BigInt,
    },
    /// A decimal expansion known to within `10^-precision`.
    Decimal {
        digits: String,
        precision: u32,
    },
}

impl OmegaSpec {
    pub fn sqrt(d: u64) -> Result<Self> {
        Self::surd(0, 1, d, 1)
    }

    pub fn golden() -> Self {
        Self::surd(1, 1, 5, 2).expect("golden ratio is valid")
    }

    pub fn rational(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        Self::Rational(BigRational::new(p.into(), q.into())).validated()
    }

    pub fn surd(a: i64, b: i64, d: u64, c: i64) -> Result<Self> {
        Self::QuadraticSurd {
            a: a.into(),
            b: b.into(),
            d,
            c: c.into(),
        }
        .validated()
    }

    pub fn decimal(digits: &str) -> Result<Self> {
        let precision = digits.split_once('.').map_or(0, |(_, f)| f.len()) as u32;
        Self::Decimal {
            digits: digits.to_string(),
            precision,
        }
        .validated()
    }

    fn validated(self) -> Result<Self> {
        match &self {
            OmegaSpec::QuadraticSurd { b, d, c, .. } => {
                if c.is_zero() {
                    return Err(Error::InvalidInput("surd denominator c = 0".into()));
                }
                if b.is_zero() {
                    return Err(Error::InvalidInput("surd with b = 0 is rational; use rat:".into()));
                }
                if *d < 2 || is_square(*d) {
                    return Err(Error::InvalidInput(format!("radicand {d} is a perfect square")));
                }
            }
            OmegaSpec::Decimal { digits, .. } => {
                parse_decimal(digits)?;
            }
            OmegaSpec::Rational(_) => {}
        }
        let (lo, _) = self.interval(64);
        if lo < BigRational::one() - BigRational::new(1.into(), BigInt::from(10).pow(12)) {
            return Err(Error::InvalidInput(format!("omega = {self} must lie in [1, inf)")));
        }
        Ok(self)
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, OmegaSpec::Rational(_))
    }

    /// ω as an exact element of ℚ(√d), when available.
    pub fn exact(&self) -> Option<QuadSurd> {
        match self {
            OmegaSpec::Rational(r) => Some(QuadSurd::rational(r.clone())),
            OmegaSpec::QuadraticSurd { a, b, d, c } => {
                let cq = BigRational::from_integer(c.clone());
                Some(QuadSurd::new(
                    BigRational::from_integer(a.clone()) / cq.clone(),
                    BigRational::from_integer(b.clone()) / cq,
                    *d,
                ))
            }
            OmegaSpec::Decimal { .. } => None,
        }
    }

    /// ω² exactly, when available.
    pub fn omega_squared_exact(&self) -> Option<QuadSurd> {
        self.exact().map(|w| w.clone() * w)
    }

    /// A rational interval containing ω. For exact inputs the width is at
    /// most `2^-bits` (times the surd coefficient).
    pub fn interval(&self, bits: u32) -> (BigRational, BigRational) {
        match self {
            OmegaSpec::Decimal { digits, precision } => {
                let x = parse_decimal(digits).expect("validated decimal");
                let eps = BigRational::new(BigInt::one(), BigInt::from(10).pow(*precision));
                (&x - &eps, x + eps)
            }
            _ => self.exact().expect("exact omega").bracket(bits),
        }
    }

    /// Rational interval containing ω².
    pub fn squared_interval(&self, bits: u32) -> (BigRational, BigRational) {
        let (lo, hi) = self.interval(bits);
        let lo = if lo.is_negative() { BigRational::zero() } else { lo };
        (&lo * &lo, &hi * &hi)
    }

    pub fn to_f64(&self) -> f64 {
        match self.exact() {
            Some(w) => crate::scalar::Scalar::to_f64(&w),
            None => {
                let (lo, hi) = self.interval(0);
                ratio_to_f64(&((lo + hi) / BigRational::from_integer(2.into())))
            }
        }
    }

    pub fn squared_f64(&self) -> f64 {
        match self.omega_squared_exact() {
            Some(w2) => crate::scalar::Scalar::to_f64(&w2),
            None => self.to_f64().powi(2),
        }
    }
}

fn parse_decimal(digits: &str) -> Result<BigRational> {
    let bad = || Error::InvalidInput(format!("malformed decimal {digits:?}"));
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() || !int.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    if !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let num: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    Ok(BigRational::new(num, BigInt::from(10).pow(frac.len() as u32)))
}

impl fmt::Display for OmegaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmegaSpec::Rational(r) => write!(f, "rat:{}/{}", r.numer(), r.denom()),
            OmegaSpec::QuadraticSurd { a, b, d, c } => {
                if a.is_zero() && b.is_one() && c.is_one() {
                    write!(f, "sqrt:{d}")
                } else {
                    write!(f, "surd:{a},{b},{d},{c}")
                }
            }
            OmegaSpec::Decimal { digits, .. } => write!(f, "dec:{digits}"),
        }
    }
}

impl fmt::Debug for OmegaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for OmegaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidInput(format!("omega {s:?}: {why}"));
        let (kind, body) = s.split_once(':').ok_or_else(|| bad("missing kind prefix"))?;
        match kind {
            "sqrt" => OmegaSpec::sqrt(body.trim().parse().map_err(|_| bad("radicand"))?),
            "surd" => {
                let parts: Vec<&str> = body.split(',').map(str::trim).collect();
                if parts.len() != 4 {
                    return Err(bad("expected a,b,d,c"));
                }
                let int = |t: &str| t.parse::<BigInt>().map_err(|_| bad("integer field"));
                let d = parts[2].parse::<u64>().map_err(|_| bad("radicand"))?;
                OmegaSpec::QuadraticSurd {
                    a: int(parts[0])?,
                    b: int(parts[1])?,
                    d,
                    c: int(parts[3])?,
                }
                .validated()
            }
            "rat" => {
                let (p, q) = body.split_once('/').unwrap_or((body, "1"));
                let p: BigInt = p.trim().parse().map_err(|_| bad("numerator"))?;
                let q: BigInt = q.trim().parse().map_err(|_| bad("denominator"))?;
                if q.is_zero() {
                    return Err(bad("zero denominator"));
                }
                OmegaSpec::Rational(BigRational::new(p, q)).validated()
            }
            "dec" => OmegaSpec::decimal(body.trim()),
            _ => Err(bad("unknown kind")),
        }
    }
}

impl Serialize for OmegaSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OmegaSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn string_forms_round_trip() {
        for s in ["sqrt:2", "surd:1,1,5,2", "rat:7/5", "dec:1.41421356237"] {
            let w: OmegaSpec = s.parse().unwrap();
            assert_eq!(w.to_string(), s);
        }
    }

    #[test]
    fn rejects_values_below_one_and_square_radicands() {
        assert!("rat:1/2".parse::<OmegaSpec>().is_err());
        assert!("sqrt:4".parse::<OmegaSpec>().is_err());
        assert!("surd:0,1,2,0".parse::<OmegaSpec>().is_err());
        assert!("dec:0.5".parse::<OmegaSpec>().is_err());
        assert!("cube:2".parse::<OmegaSpec>().is_err());
    }

    #[test]
    fn negative_surd_coefficient_is_handled() {
        // (3 − √2)/1 ≈ 1.5858
        let w: OmegaSpec = "surd:3,-1,2,1".parse().unwrap();
        assert!((w.to_f64() - (3.0 - 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn exact_square_of_sqrt_two() {
        let w = OmegaSpec::sqrt(2).unwrap();
        assert_eq!(w.omega_squared_exact().unwrap(), QuadSurd::rational(crate::scalar::rat(2, 1)));
    }
}
