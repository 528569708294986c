//! Quartet arithmetic, resonance combinations Ω_r, the classes A(d) and the
//! extremal bounds 𝓛₁ and 𝓤₀.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diophantine::OmegaSpec;
use crate::error::{Error, Result};
use crate::lambda_set::LambdaSet;
use crate::scalar::{ratio_to_f64, QuadSurd, Scalar};

/// A lattice index n = (j, k).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct Mode {
    pub j: i64,
    pub k: i64,
}

impl From<[i64; 2]> for Mode {
    fn from([j, k]: [i64; 2]) -> Self {
        Mode { j, k }
    }
}

impl From<Mode> for [i64; 2] {
    fn from(m: Mode) -> Self {
        [m.j, m.k]
    }
}

impl fmt::Debug for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j, self.k)
    }
}

impl std::ops::Add for Mode {
    type Output = Mode;
    fn add(self, o: Mode) -> Mode {
        Mode::new(self.j + o.j, self.k + o.k)
    }
}

impl std::ops::Sub for Mode {
    type Output = Mode;
    fn sub(self, o: Mode) -> Mode {
        Mode::new(self.j - o.j, self.k - o.k)
    }
}

impl std::ops::Neg for Mode {
    type Output = Mode;
    fn neg(self) -> Mode {
        Mode::new(-self.j, -self.k)
    }
}

impl Mode {
    pub const fn new(j: i64, k: i64) -> Self {
        Mode { j, k }
    }

    pub fn norm_sq(&self) -> i128 {
        (self.j as i128).pow(2) + (self.k as i128).pow(2)
    }

    /// Euclidean length |n|.
    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    /// ⟨n⟩ = max(1, |n|).
    pub fn bracket(&self) -> f64 {
        self.norm().max(1.0)
    }

    pub fn dot(&self, o: &Mode) -> i128 {
        self.j as i128 * o.j as i128 + self.k as i128 * o.k as i128
    }

    /// Anisotropic scaling (j, k) ↦ (p·j, q·k).
    pub fn scaled(&self, p: i64, q: i64) -> Mode {
        Mode::new(p * self.j, q * self.k)
    }
}

/// Four modes in slot order; slots 1 and 3 carry `a`, slots 2 and 4 carry `ā`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Quartet(pub [Mode; 4]);

impl fmt::Debug for Quartet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = &self.0;
        write!(f, "[{a:?} {b:?} {c:?} {d:?}]")
    }
}

impl Quartet {
    pub fn new(n1: Mode, n2: Mode, n3: Mode, n4: Mode) -> Self {
        Quartet([n1, n2, n3, n4])
    }

    pub fn modes(&self) -> &[Mode; 4] {
        &self.0
    }

    /// n₁ − n₂ + n₃ − n₄.
    pub fn momentum_sum(&self) -> Mode {
        let [a, b, c, d] = self.0;
        a - b + c - d
    }

    pub fn is_momentum_closed(&self) -> bool {
        self.momentum_sum() == Mode::default()
    }

    /// Odd-slot pair and even-slot pair each sorted.
    pub fn canonical(&self) -> Self {
        let [a, b, c, d] = self.0;
        let (a, c) = if a <= c { (a, c) } else { (c, a) };
        let (b, d) = if b <= d { (b, d) } else { (d, b) };
        Quartet([a, b, c, d])
    }

    /// {n₁, n₃} = {n₂, n₄}: the monomial is a product of moduli.
    pub fn is_trivial(&self) -> bool {
        let [a, b, c, d] = self.0;
        (a == b && c == d) || (a == d && c == b)
    }

    /// The alternating sums Σ(−1)^{i+1} jᵢ² and Σ(−1)^{i+1} kᵢ².
    pub fn alternating_sums(&self) -> (i128, i128) {
        let mut sj = 0i128;
        let mut sk = 0i128;
        for (i, m) in self.0.iter().enumerate() {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            sj += sign * (m.j as i128).pow(2);
            sk += sign * (m.k as i128).pow(2);
        }
        (sj, sk)
    }

    pub fn scaled(&self, p: i64, q: i64) -> Self {
        Quartet(self.0.map(|m| m.scaled(p, q)))
    }
}

fn i128_scalar<S: Scalar>(v: i128) -> S {
    match i64::try_from(v) {
        Ok(v) => S::from_i64(v),
        Err(_) => {
            let hi = S::from_i64((v >> 62) as i64);
            let lo = S::from_i64((v & ((1 << 62) - 1)) as i64);
            hi * S::from_i64(1 << 62) + lo
        }
    }
}

/// Ω_r = Σ(−1)^{i+1} jᵢ² + r²·Σ(−1)^{i+1} kᵢ², in any scalar field.
pub fn omega_r<S: Scalar>(quartet: &Quartet, r2: &S) -> S {
    let (sj, sk) = quartet.alternating_sums();
    i128_scalar::<S>(sj) + r2.clone() * i128_scalar::<S>(sk)
}

/// The squared ratio r², exact or certified by a rational interval.
#[derive(Clone, Debug, PartialEq)]
pub enum RSquared {
    Exact(QuadSurd),
    Interval(BigRational, BigRational),
}

/// Bits of √d precision used when an exact surd must be bracketed.
const BRACKET_BITS: u32 = 96;

impl RSquared {
    pub fn rational(r: BigRational) -> Self {
        RSquared::Exact(QuadSurd::rational(r))
    }

    /// (p/q)².
    pub fn ratio(p: &BigInt, q: &BigInt) -> Self {
        let r = BigRational::new(p.clone(), q.clone());
        Self::rational(&r * &r)
    }

    /// ω² for a torus ratio; exact for rationals and surds, else an interval.
    pub fn from_omega(omega: &OmegaSpec) -> Self {
        match omega.omega_squared_exact() {
            Some(w2) => RSquared::Exact(w2),
            None => {
                let (lo, hi) = omega.squared_interval(BRACKET_BITS);
                RSquared::Interval(lo, hi)
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RSquared::Exact(v) => v.to_f64(),
            RSquared::Interval(lo, hi) => ratio_to_f64(&((lo + hi) / BigRational::from_integer(2.into()))),
        }
    }

    pub fn omega(&self, quartet: &Quartet) -> OmegaValue {
        match self {
            RSquared::Exact(r2) => OmegaValue::Exact(omega_r(quartet, r2)),
            RSquared::Interval(lo, hi) => {
                let (sj, sk) = quartet.alternating_sums();
                let sj = BigRational::from_integer(sj.into());
                let sk = BigRational::from_integer(sk.into());
                let a = &sj + &sk * lo;
                let b = &sj + &sk * hi;
                if a <= b {
                    OmegaValue::Interval(a, b)
                } else {
                    OmegaValue::Interval(b, a)
                }
            }
        }
    }
}

/// A value of Ω, exact in ℚ(√d) or enclosed in a rational interval.
#[derive(Clone, Debug, PartialEq)]
pub enum OmegaValue {
    Exact(QuadSurd),
    Interval(BigRational, BigRational),
}

impl OmegaValue {
    pub fn abs(&self) -> OmegaValue {
        match self {
            OmegaValue::Exact(v) => OmegaValue::Exact(v.magnitude()),
            OmegaValue::Interval(lo, hi) => {
                if !lo.is_negative() {
                    OmegaValue::Interval(lo.clone(), hi.clone())
                } else if !hi.is_positive() {
                    OmegaValue::Interval(hi.abs(), lo.abs())
                } else {
                    OmegaValue::Interval(BigRational::zero(), lo.abs().max(hi.abs()))
                }
            }
        }
    }

    /// Rational enclosure.
    pub fn bounds(&self) -> (BigRational, BigRational) {
        match self {
            OmegaValue::Exact(v) => v.bracket(BRACKET_BITS),
            OmegaValue::Interval(lo, hi) => (lo.clone(), hi.clone()),
        }
    }

    /// `Some(true)` if certainly zero, `Some(false)` if certainly nonzero.
    pub fn is_zero(&self) -> Option<bool> {
        match self {
            OmegaValue::Exact(v) => Some(v.is_zero()),
            OmegaValue::Interval(lo, hi) => {
                if lo.is_positive() || hi.is_negative() {
                    Some(false)
                } else if lo.is_zero() && hi.is_zero() {
                    Some(true)
                } else {
                    None
                }
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            OmegaValue::Exact(v) => v.to_f64(),
            OmegaValue::Interval(lo, hi) => ratio_to_f64(&((lo + hi) / BigRational::from_integer(2.into()))),
        }
    }

    fn key_hi(&self) -> BigRational {
        self.bounds().1
    }

    fn less_than(&self, other: &OmegaValue) -> bool {
        match (self, other) {
            (OmegaValue::Exact(a), OmegaValue::Exact(b)) => a < b,
            _ => self.key_hi() < other.key_hi(),
        }
    }
}

impl fmt::Display for OmegaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmegaValue::Exact(v) => write!(f, "{v}"),
            OmegaValue::Interval(lo, hi) => write!(f, "[{lo}, {hi}]"),
        }
    }
}

/// Number of modes of a momentum-closed quartet lying outside `set`.
pub fn classify_in(quartet: &Quartet, set: &HashSet<Mode>) -> Result<u8> {
    if !quartet.is_momentum_closed() {
        return Err(Error::NotMomentumClosed(*quartet));
    }
    Ok(quartet.0.iter().filter(|m| !set.contains(m)).count() as u8)
}

pub fn classify_quartet(quartet: &Quartet, lambda: &LambdaSet) -> Result<u8> {
    classify_in(quartet, &lambda.mode_set())
}

/// Canonical A(1) quartets of an arbitrary finite mode set.
///
/// The outsider sits either in an odd slot (`a + b − c` with `a, b` even-slot
/// members) or in an even slot (the mirror case).
pub fn enumerate_a1_in(modes: &[Mode]) -> Vec<Quartet> {
    let set: HashSet<Mode> = modes.iter().copied().collect();
    let mut sorted: Vec<Mode> = set.iter().copied().collect();
    sorted.sort();
    let n = sorted.len();
    let per_slot = |odd_outsider: bool| -> BTreeSet<Quartet> {
        (0..n)
            .into_par_iter()
            .map(|ia| {
                let mut found = BTreeSet::new();
                let a = sorted[ia];
                for &b in &sorted[ia..] {
                    for &c in &sorted {
                        let out = a + b - c;
                        if set.contains(&out) {
                            continue;
                        }
                        let q = if odd_outsider {
                            Quartet::new(out, a, c, b)
                        } else {
                            Quartet::new(a, out, b, c)
                        };
                        found.insert(q.canonical());
                    }
                }
                found
            })
            .reduce(BTreeSet::new, |mut x, y| {
                x.extend(y);
                x
            })
    };
    let mut all = per_slot(true);
    all.extend(per_slot(false));
    all.into_iter().collect()
}

pub fn enumerate_a1(lambda: &LambdaSet) -> Vec<Quartet> {
    enumerate_a1_in(&lambda.modes())
}

/// A bound together with the quartet realizing it.
#[derive(Clone, Debug, PartialEq)]
pub struct Extremum {
    pub value: OmegaValue,
    pub witness: Quartet,
}

/// 𝓛₁ = min over A(1) of |Ω|.
pub fn compute_l1(lambda: &LambdaSet, r2: &RSquared) -> Result<Extremum> {
    l1_of(&enumerate_a1(lambda), r2)
}

pub fn l1_of(a1: &[Quartet], r2: &RSquared) -> Result<Extremum> {
    let mut best: Option<Extremum> = None;
    for q in a1 {
        let v = r2.omega(q).abs();
        let better = match &best {
            None => true,
            Some(b) => v.less_than(&b.value),
        };
        if better {
            best = Some(Extremum { value: v, witness: *q });
        }
    }
    let best = best.ok_or(Error::EmptyA1)?;
    if let OmegaValue::Interval(..) = best.value {
        // the minimum of the lower ends encloses the true minimum from below
        let lo = a1.iter().map(|q| r2.omega(q).abs().bounds().0).min().expect("nonempty");
        let hi = best.value.bounds().1;
        return Ok(Extremum {
            value: OmegaValue::Interval(lo, hi),
            witness: best.witness,
        });
    }
    Ok(best)
}

/// Nontrivial momentum-closed quartets inside the set (the class A(0)),
/// in canonical form.
pub fn enumerate_a0_in(modes: &[Mode]) -> Vec<Quartet> {
    let set: HashSet<Mode> = modes.iter().copied().collect();
    let mut sorted: Vec<Mode> = set.iter().copied().collect();
    sorted.sort();
    let mut out = BTreeSet::new();
    for (ia, &a) in sorted.iter().enumerate() {
        for &c in &sorted[ia..] {
            for &b in &sorted {
                let d = a + c - b;
                if !set.contains(&d) {
                    continue;
                }
                let q = Quartet::new(a, b, c, d);
                if !q.is_trivial() {
                    out.insert(q.canonical());
                }
            }
        }
    }
    out.into_iter().collect()
}

/// 𝓤₀ = max over the (p,q)-families of Λ of |Ω|.
///
/// Every nontrivial A(0) quartet must have Ω_{p/q} = 0; a violation is
/// reported as [`Error::HypothesisViolated`].
pub fn compute_u0(lambda: &LambdaSet, r2: &RSquared) -> Result<Extremum> {
    let (p, q) = lambda.scaling();
    let pq2 = RSquared::ratio(&BigInt::from(p), &BigInt::from(q));
    let mut best: Option<Extremum> = None;
    for quartet in enumerate_a0_in(&lambda.modes()) {
        if pq2.omega(&quartet).is_zero() != Some(true) {
            return Err(Error::HypothesisViolated(format!(
                "A(0) quartet {quartet:?} is not a ({p},{q})-family"
            )));
        }
        let v = r2.omega(&quartet).abs();
        let better = match &best {
            None => true,
            Some(b) => b.value.less_than(&v),
        };
        if better {
            best = Some(Extremum {
                value: v,
                witness: quartet,
            });
        }
    }
    best.ok_or(Error::NoFamilies)
}

/// Writes `j1,k1,…,j4,k4,omega_value,class_d` rows.
pub fn write_quartet_csv<W: Write>(out: W, quartets: &[Quartet], r2: &RSquared, set: &HashSet<Mode>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    w.write_record(["j1", "k1", "j2", "k2", "j3", "k3", "j4", "k4", "omega_value", "class_d"])
        .map_err(io)?;
    for q in quartets {
        let mut rec: Vec<String> = q.0.iter().flat_map(|m| [m.j.to_string(), m.k.to_string()]).collect();
        rec.push(format!("{:.17e}", r2.omega(q).to_f64()));
        rec.push(classify_in(q, set)?.to_string());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(())
}
