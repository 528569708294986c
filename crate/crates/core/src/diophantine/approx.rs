use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::cf::{convergents, Convergent};
use super::OmegaSpec;
use crate::error::{Error, Result};
use crate::scalar::{ln_bigint, ln_ratio, ratio_to_f64};

/// The approximation function ψ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ApproxProfile {
    /// ψ(q) = c / (q·ln q)
    Log {
        #[serde(with = "ratio_str")]
        c: BigRational,
    },
    /// ψ(q) = c / q^(1+τ)
    Power {
        #[serde(with = "ratio_str")]
        c: BigRational,
        #[serde(with = "ratio_str")]
        tau: BigRational,
    },
}

impl ApproxProfile {
    pub fn log(c: i64) -> Self {
        ApproxProfile::Log {
            c: BigRational::from_integer(c.into()),
        }
    }

    pub fn power(c: i64, tau: BigRational) -> Self {
        ApproxProfile::Power {
            c: BigRational::from_integer(c.into()),
            tau,
        }
    }

    fn validate(&self) -> Result<()> {
        let one = BigRational::one();
        match self {
            ApproxProfile::Log { c } if *c >= one => Ok(()),
            ApproxProfile::Power { c, tau } if *c >= one && tau.is_positive() => Ok(()),
            _ => Err(Error::InvalidInput(format!("profile {self:?} needs c ≥ 1 and τ > 0"))),
        }
    }
}

pub(crate) mod ratio_str {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let text = match v {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            _ => return Err(serde::de::Error::custom("expected a rational as string or number")),
        };
        crate::params::parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// ψ(q), carried in log form so that astronomically large q never under- or overflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiValue {
    pub ln: f64,
}

impl PsiValue {
    pub fn value(&self) -> f64 {
        self.ln.exp()
    }
}

/// ψ(q) for the selected profile. Natural logarithms throughout.
pub fn psi_value(profile: &ApproxProfile, q: &BigInt) -> Result<PsiValue> {
    profile.validate()?;
    if !q.is_positive() {
        return Err(Error::Domain(format!("psi undefined at q = {q}")));
    }
    let ln_q = ln_bigint(q);
    let ln = match profile {
        ApproxProfile::Log { c } => {
            if q <= &BigInt::one() {
                return Err(Error::Domain(format!("log profile undefined at q = {q}")));
            }
            ln_ratio(c) - ln_q - ln_q.ln()
        }
        ApproxProfile::Power { c, tau } => ln_ratio(c) - (1.0 + ratio_to_f64(tau)) * ln_q,
    };
    Ok(PsiValue { ln })
}

/// Outcome of the ψ-inequality test `|ω − p/q| ≤ ψ(q)/q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiTest {
    pub holds: bool,
    /// ψ(q)/q − |ω − p/q|, rounded to f64 (may underflow for huge q).
    pub margin: f64,
    /// ln(ψ(q)/q) − ln|ω − p/q|, or +∞ when p/q = ω.
    pub log_margin: f64,
}

// Relative accuracy of the f64 logarithms used in the comparisons.
const LOG_SLACK: f64 = 1e-12;

fn certify_le(ln_lhs: (f64, f64), ln_rhs: f64) -> Option<bool> {
    let slack = LOG_SLACK * ln_rhs.abs().max(1.0);
    if ln_lhs.1 <= ln_rhs - slack {
        Some(true)
    } else if ln_lhs.0 > ln_rhs + slack {
        Some(false)
    } else {
        None
    }
}

fn ln_bounds(bounds: &(BigRational, BigRational)) -> (f64, f64) {
    let lo = if bounds.0.is_zero() {
        f64::NEG_INFINITY
    } else {
        ln_ratio(&bounds.0)
    };
    (lo, ln_ratio(&bounds.1))
}

/// Tests whether `(p, q)` satisfies the ψ-inequality, with a certified
/// decision.
pub fn is_psi_convergent(omega: &OmegaSpec, p: &BigInt, q: &BigInt, profile: &ApproxProfile) -> Result<PsiTest> {
    if q < &BigInt::from(2) {
        return Err(Error::Domain(format!("psi test needs q ≥ 2, got {q}")));
    }
    let psi = psi_value(profile, q)?;
    let ln_thr = psi.ln - ln_bigint(q);
    let (exact, bounds) = super::cf::error_bounds(omega, p, q);
    if exact.as_ref().is_some_and(num_traits::Zero::is_zero) || bounds.1.is_zero() {
        return Ok(PsiTest {
            holds: true,
            margin: ln_thr.exp(),
            log_margin: f64::INFINITY,
        });
    }
    let lb = ln_bounds(&bounds);
    let holds = certify_le(lb, ln_thr).ok_or_else(|| Error::PrecisionExhausted(format!("|ω − {p}/{q}| is not separated from ψ(q)/q")))?;
    let ln_err = 0.5 * (lb.0.max(lb.1 - 1.0) + lb.1);
    Ok(PsiTest {
        holds,
        margin: ln_thr.exp() - ln_err.exp(),
        log_margin: ln_thr - ln_err,
    })
}

/// The first convergent that is a ψ-convergent and satisfies `constraint`,
/// searching at most `max_depth` convergents.
pub fn select_convergent<F>(omega: &OmegaSpec, profile: &ApproxProfile, constraint: F, max_depth: usize) -> Result<Convergent>
where
    F: Fn(&BigInt, &PsiValue) -> bool,
{
    for conv in convergents(omega, max_depth)? {
        if conv.q < BigInt::from(2) {
            continue;
        }
        let psi = psi_value(profile, &conv.q)?;
        if !constraint(&conv.q, &psi) {
            continue;
        }
        if is_psi_convergent(omega, &conv.p, &conv.q, profile)?.holds {
            return Ok(conv);
        }
    }
    Err(Error::NotFoundWithinDepth { depth: max_depth })
}

/// Finite-depth evidence about `|ω − p/q| ≥ q^-(1 + ln q)` along convergents.
/// This is evidence up to `depth`, never a proof of non-approximability.
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleEvidence {
    pub holds: bool,
    pub depth: usize,
    pub witness: Option<Convergent>,
}

/// Smallest denominator inspected by [`liouville_guard`].
pub const LIOUVILLE_MIN_Q: u64 = 10;

pub fn liouville_guard(omega: &OmegaSpec, depth: usize) -> Result<LiouvilleEvidence> {
    liouville_guard_from(omega, depth, LIOUVILLE_MIN_Q)
}

/// [`liouville_guard`] with an explicit smallest denominator.
pub fn liouville_guard_from(omega: &OmegaSpec, depth: usize, min_q: u64) -> Result<LiouvilleEvidence> {
    if omega.is_rational() {
        return Err(Error::RationalOmega("the expansion terminates".into()));
    }
    if depth < 2 {
        return Err(Error::InvalidInput("liouville guard needs depth ≥ 2".into()));
    }
    for conv in convergents(omega, depth)? {
        if conv.q < BigInt::from(min_q.max(2)) {
            continue;
        }
        let ln_q = ln_bigint(&conv.q);
        let ln_thr = -(1.0 + ln_q) * ln_q;
        let lb = ln_bounds(&conv.abs_error_bounds);
        // violation iff |ω − p/q| < threshold
        let below = certify_le((lb.0, lb.1), ln_thr);
        match below {
            Some(true) => {
                return Ok(LiouvilleEvidence {
                    holds: false,
                    depth,
                    witness: Some(conv),
                })
            }
            Some(false) => {}
            None => {
                return Err(Error::PrecisionExhausted(format!(
                    "convergent {}/{} is too close to the Liouville threshold",
                    conv.p, conv.q
                )))
            }
        }
    }
    Ok(LiouvilleEvidence {
        holds: true,
        depth,
        witness: None,
    })
}
