use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::diophantine::ApproxProfile;
use crate::error::{Error, Result};
use crate::scalar::{ln_ratio, ratio_to_f64};

/// Parses `a/b`, an integer, or a plain decimal such as `0.1`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::InvalidInput(format!("not a rational number: {text:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d == BigInt::from(0) {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = t.strip_prefix('-').map_or((false, t), |b| (true, b));
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let num: BigInt = format!("{}{int}{frac}", if neg { "-" } else { "" }).parse().map_err(|_| bad())?;
    Ok(BigRational::new(num, BigInt::from(10).pow(frac.len() as u32)))
}

/// Constants the construction leaves unspecified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScaleConstants {
    /// Base of the radius bracket e^{αᴺ} ≤ R ≤ e^{2(1+η̃)αᴺ}.
    pub alpha: u32,
    /// Defaults to s, which gives 2γσ > s for σ ≥ 1.
    pub gamma: Option<f64>,
    pub k: f64,
    pub eta_tilde: f64,
}

impl Default for ScaleConstants {
    fn default() -> Self {
        ScaleConstants {
            alpha: 10,
            gamma: None,
            k: 1.0,
            eta_tilde: 0.1,
        }
    }
}

/// Log-form lower bound on q from qψ(q) ≤ e^{L}.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum QThreshold {
    /// ln q ≥ value.
    LnQ { value: f64 },
    /// ln ln q ≥ value.
    LnLnQ { value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PaperScaleReport {
    pub c: String,
    pub mu: f64,
    pub s: String,
    pub epsilon: f64,
    pub profile: ApproxProfile,
    pub constants: ScaleConstants,
    pub gamma: f64,
    pub n: u64,
    /// ln λ = 5ᴺ in decimal.
    pub ln_lambda: String,
    /// ln R bracket, αᴺ and 2(1+η̃)αᴺ.
    pub ln_r_lo: f64,
    pub ln_r_hi: f64,
    /// ln of the right side of qψ(q) ≤ N⁻⁷72⁻ᴺλ⁻²⁽¹⁺ᵋ⁾R⁻², for R at each end of its bracket.
    pub ln_rhs_r_lo: f64,
    pub ln_rhs_r_hi: f64,
    /// Threshold on q for the worst end of the R bracket.
    pub q_threshold: QThreshold,
    /// ln T = 2 ln λ + ln(𝕂γN²); the exact part 2·5ᴺ is given separately.
    pub ln_t_exact_part: String,
    pub ln_t_remainder: f64,
}

fn big_to_f64(n: &BigUint) -> f64 {
    n.to_f64().unwrap_or(f64::INFINITY)
}

/// Smallest N ≥ 6 with 2^{(s−1)(N−6)} ≥ C².
pub fn generation_count(c: &BigUint, s: &BigRational) -> Result<u64> {
    let one = BigRational::one();
    if *s <= one {
        return Err(Error::UnsupportedSRange(s.to_string()));
    }
    if c.is_zero() {
        return Err(Error::InvalidInput("C must be positive".into()));
    }
    let e = s - &one;
    // 2^{a m} ≥ C^{2b} with s − 1 = a/b
    let a = e.numer().to_biguint().expect("positive");
    let b = e.denom().to_biguint().expect("positive");
    let a = a.to_u64().ok_or_else(|| Error::InvalidInput("s numerator too large".into()))?;
    let b = b.to_u32().ok_or_else(|| Error::InvalidInput("s denominator too large".into()))?;
    let rhs = c.pow(2 * b);
    let ok = |m: u64| -> bool {
        match a.checked_mul(m) {
            Some(bits) => BigUint::one() << bits >= rhs,
            None => true,
        }
    };
    let guess = ((rhs.bits() as f64) / a as f64).floor() as u64;
    let mut m = guess.saturating_sub(2);
    while !ok(m) {
        m += 1;
    }
    while m > 0 && ok(m - 1) {
        m -= 1;
    }
    Ok(6 + m)
}

pub fn paper_scale_params(
    c: &BigUint,
    mu: f64,
    s: &BigRational,
    profile: &ApproxProfile,
    epsilon: f64,
    constants: &ScaleConstants,
) -> Result<PaperScaleReport> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidInput(format!("mu = {mu} outside (0, 1]")));
    }
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidInput(format!("epsilon = {epsilon} must be nonnegative")));
    }
    if constants.alpha < 2 || constants.k <= 0.0 || constants.eta_tilde <= 0.0 {
        return Err(Error::InvalidInput("alpha ≥ 2, K > 0 and η̃ > 0 are required".into()));
    }
    let n = generation_count(c, s)?;
    let s_f = ratio_to_f64(s);
    let gamma = constants.gamma.unwrap_or(s_f);
    if gamma <= 0.0 {
        return Err(Error::InvalidInput("gamma must be positive".into()));
    }
    let nu = u32::try_from(n).map_err(|_| Error::InvalidInput("N too large".into()))?;
    let ln_lambda = BigUint::from(5u32).pow(nu);
    let ln_lambda_f = big_to_f64(&ln_lambda);
    let alpha_n = big_to_f64(&BigUint::from(constants.alpha).pow(nu));
    let ln_r_lo = alpha_n;
    let ln_r_hi = 2.0 * (1.0 + constants.eta_tilde) * alpha_n;
    let nf = n as f64;
    let base = -7.0 * nf.ln() - nf * 72f64.ln() - 2.0 * (1.0 + epsilon) * ln_lambda_f;
    let ln_rhs_r_lo = base - 2.0 * ln_r_lo;
    let ln_rhs_r_hi = base - 2.0 * ln_r_hi;
    let q_threshold = match profile {
        // qψ(q) = c / ln q
        ApproxProfile::Log { c } => QThreshold::LnLnQ {
            value: ln_ratio(c) - ln_rhs_r_hi,
        },
        // qψ(q) = c / q^τ
        ApproxProfile::Power { c, tau } => QThreshold::LnQ {
            value: (ln_ratio(c) - ln_rhs_r_hi) / ratio_to_f64(tau),
        },
    };
    Ok(PaperScaleReport {
        c: c.to_string(),
        mu,
        s: s.to_string(),
        epsilon,
        profile: profile.clone(),
        constants: constants.clone(),
        gamma,
        n,
        ln_t_exact_part: (&ln_lambda * 2u32).to_string(),
        ln_lambda: ln_lambda.to_string(),
        ln_r_lo,
        ln_r_hi,
        ln_rhs_r_lo,
        ln_rhs_r_hi,
        q_threshold,
        ln_t_remainder: (constants.k * gamma * nf * nf).ln(),
    })
}
