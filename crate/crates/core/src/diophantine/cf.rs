use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::OmegaSpec;
use crate::error::{Error, Result};
use crate::scalar::QuadSurd;

/// Partial quotients `[a0; a1, a2, ...]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Expansion {
    pub quotients: Vec<BigInt>,
    /// The value is rational and the expansion is complete.
    pub terminated: bool,
}

/// A continued-fraction convergent `p/q` of ω.
#[derive(Debug, Clone, PartialEq)]
pub struct Convergent {
    pub p: BigInt,
    pub q: BigInt,
    pub index: usize,
    /// Rational interval `[lo, hi]` containing `|ω − p/q|`.
    pub abs_error_bounds: (BigRational, BigRational),
    /// `|ω − p/q|` exactly, for rational and quadratic-surd ω.
    pub abs_error_exact: Option<QuadSurd>,
}

impl Convergent {
    pub fn ratio(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }
}

/// √D > t for a non-square D.
fn sqrt_exceeds(big_d: &BigInt, t: &BigInt) -> bool {
    t.is_negative() || t * t < *big_d
}

/// floor((P + √D) / Q) computed exactly.
fn surd_floor(p: &BigInt, big_d: &BigInt, q: &BigInt) -> BigInt {
    // x ≥ m  ⇔  √D ≥ mQ − P (Q > 0)  or  √D ≤ mQ − P (Q < 0)
    let at_least = |m: &BigInt| -> bool {
        let t = m * q - p;
        let gt = sqrt_exceeds(big_d, &t);
        if q.is_positive() {
            gt
        } else {
            !gt
        }
    };
    let s = big_d.sqrt();
    let mut m = (p + &s).div_floor(q);
    while !at_least(&m) {
        m -= 1;
    }
    while at_least(&(&m + 1)) {
        m += 1;
    }
    m
}

fn expand_surd(a: &BigInt, b: &BigInt, d: u64, c: &BigInt, depth: usize) -> Vec<BigInt> {
    let (a, b, c) = if b.is_negative() {
        (-a, -b, -c)
    } else {
        (a.clone(), b.clone(), c.clone())
    };
    let big_d = &b * &b * BigInt::from(d) * &c * &c;
    let mut p = &a * c.abs();
    let mut q = &c * c.abs();
    let mut out = Vec::with_capacity(depth);
    for _ in 0..depth {
        let m = surd_floor(&p, &big_d, &q);
        let p_next = &m * &q - &p;
        let q_next = (&big_d - &p_next * &p_next) / &q;
        out.push(m);
        p = p_next;
        q = q_next;
    }
    out
}

fn expand_rational(mut x: BigRational, depth: usize) -> (Vec<BigInt>, bool) {
    let mut out = Vec::new();
    while out.len() < depth {
        let m = x.floor().to_integer();
        out.push(m.clone());
        let frac = x - BigRational::from_integer(m);
        if frac.is_zero() {
            return (out, true);
        }
        x = frac.recip();
    }
    (out, false)
}

fn expand_interval(mut lo: BigRational, mut hi: BigRational, depth: usize) -> Result<Vec<BigInt>> {
    let mut out = Vec::with_capacity(depth);
    for k in 0..depth {
        let m = lo.floor().to_integer();
        if hi.floor().to_integer() != m {
            return Err(Error::PrecisionExhausted(format!(
                "decimal digits certify only {k} partial quotients"
            )));
        }
        out.push(m.clone());
        if out.len() == depth {
            break;
        }
        let mq = BigRational::from_integer(m);
        let (flo, fhi) = (&lo - &mq, &hi - &mq);
        if !flo.is_positive() {
            return Err(Error::PrecisionExhausted(format!(
                "decimal digits certify only {} partial quotients",
                k + 1
            )));
        }
        lo = fhi.recip();
        hi = flo.recip();
    }
    Ok(out)
}

/// The first `depth` partial quotients of ω.
pub fn expand_continued_fraction(omega: &OmegaSpec, depth: usize) -> Result<Expansion> {
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    Ok(match omega {
        OmegaSpec::Rational(r) => {
            let (quotients, terminated) = expand_rational(r.clone(), depth);
            Expansion { quotients, terminated }
        }
        OmegaSpec::QuadraticSurd { a, b, d, c } => Expansion {
            quotients: expand_surd(a, b, *d, c, depth),
            terminated: false,
        },
        OmegaSpec::Decimal { .. } => {
            let (lo, hi) = omega.interval(0);
            Expansion {
                quotients: expand_interval(lo, hi, depth)?,
                terminated: false,
            }
        }
    })
}

/// Exact `|ω − p/q|` for exact ω.
fn exact_error(omega: &OmegaSpec, p: &BigInt, q: &BigInt) -> Option<QuadSurd> {
    let w = omega.exact()?;
    let diff = w - QuadSurd::rational(BigRational::new(p.clone(), q.clone()));
    Some(crate::scalar::Scalar::magnitude(&diff))
}

pub(crate) fn error_bounds(omega: &OmegaSpec, p: &BigInt, q: &BigInt) -> (Option<QuadSurd>, (BigRational, BigRational)) {
    if let Some(e) = exact_error(omega, p, q) {
        let bits = 64 + 4 * q.bits() as u32;
        let (lo, hi) = e.bracket(bits);
        let lo = if lo.is_negative() { BigRational::zero() } else { lo };
        return (Some(e), (lo, hi));
    }
    let (lo, hi) = omega.interval(0);
    let v = BigRational::new(p.clone(), q.clone());
    let bounds = if v < lo {
        (&lo - &v, &hi - &v)
    } else if v > hi {
        (&v - &hi, &v - &lo)
    } else {
        let a = &v - &lo;
        let b = &hi - &v;
        (BigRational::zero(), if a > b { a } else { b })
    };
    (None, bounds)
}

/// Convergents `p_n/q_n` for `n < depth` built from the recurrence
/// `p_n = a_n p_{n−1} + p_{n−2}`, `q_n = a_n q_{n−1} + q_{n−2}`.
pub fn convergents(omega: &OmegaSpec, depth: usize) -> Result<Vec<Convergent>> {
    let exp = expand_continued_fraction(omega, depth)?;
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut out = Vec::with_capacity(exp.quotients.len());
    for (index, a) in exp.quotients.iter().enumerate() {
        let p = a * &p1 + &p0;
        let q = a * &q1 + &q0;
        let (abs_error_exact, abs_error_bounds) = error_bounds(omega, &p, &q);
        out.push(Convergent {
            p: p.clone(),
            q: q.clone(),
            index,
            abs_error_bounds,
            abs_error_exact,
        });
        p0 = std::mem::replace(&mut p1, p);
        q0 = std::mem::replace(&mut q1, q);
    }
    Ok(out)
}

/// Checks `1/(q(q_next + q)) ≤ |ω − p/q| ≤ 1/(q·q_next)`.
///
/// Exact for rational and quadratic-surd ω; for decimals the interval must
/// decide the comparison, otherwise precision is exhausted.
pub fn verify_bracket(omega: &OmegaSpec, conv: &Convergent, q_next: &BigInt) -> Result<bool> {
    let q = &conv.q;
    let lower = BigRational::new(BigInt::one(), q * (q_next + q));
    let upper = BigRational::new(BigInt::one(), q * q_next);
    let exact = conv.abs_error_exact.clone().or_else(|| exact_error(omega, &conv.p, &conv.q));
    if let Some(e) = &exact {
        let lo = QuadSurd::rational(lower);
        let hi = QuadSurd::rational(upper);
        return Ok(*e >= lo && *e <= hi);
    }
    let (elo, ehi) = &conv.abs_error_bounds;
    if *elo >= lower && *ehi <= upper {
        Ok(true)
    } else if *ehi < lower || *elo > upper {
        Ok(false)
    } else {
        Err(Error::PrecisionExhausted("error interval straddles the convergent bracket".into()))
    }
}
