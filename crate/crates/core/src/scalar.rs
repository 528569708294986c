//! Scalar abstractions.
//!
//! The resonance calculus and the normal-form algebra are written once over
//! [`Scalar`], which is implemented for machine floats, exact rationals and
//! exact elements of a real quadratic field ℚ(√d). The dynamical code
//! (integrators, toy model, NLS) is written over [`Real`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// A field element usable by the exact resonance and normal-form algebra.
pub trait Scalar: Num + Neg<Output = Self> + Clone + fmt::Debug + PartialOrd + Send + Sync + 'static {
    fn from_i64(v: i64) -> Self;
    fn magnitude(&self) -> Self;
    fn to_f64(&self) -> f64;
    /// True when arithmetic in this type is free of rounding.
    const EXACT: bool;
}

/// Floating-point types driving the numerical integrators.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + FromPrimitive
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Default
    + Send
    + Sync
    + std::iter::Sum
    + 'static
{
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_i64(v: i64) -> Self {
                v as $t
            }
            fn magnitude(&self) -> Self {
                self.abs()
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            const EXACT: bool = false;
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    const EXACT: bool = true;
}

/// Converts a big rational to the nearest-ish `f64` without overflowing on
/// huge numerators and denominators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() && (v != 0.0 || r.is_zero()) {
            return v;
        }
    }
    if r.is_zero() {
        return 0.0;
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    sign * ln_ratio(&r.abs()).exp()
}

/// Natural logarithm of a positive big integer.
pub fn ln_bigint(n: &BigInt) -> f64 {
    assert!(n.is_positive(), "logarithm of a non-positive integer");
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().expect("64-bit head").ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Natural logarithm of a positive big rational.
pub fn ln_ratio(r: &BigRational) -> f64 {
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

/// An element `x + y·√d` of the real quadratic field ℚ(√d).
///
/// Values with `y = 0` are plain rationals and combine with any radicand.
/// Mixing two irrational values with different radicands panics.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadSurd {
    x: BigRational,
    y: BigRational,
    d: u64,
}

impl QuadSurd {
    pub fn new(x: BigRational, y: BigRational, d: u64) -> Self {
        if y.is_zero() {
            Self::rational(x)
        } else {
            assert!(d > 1 && !is_square(d), "radicand {d} must be a non-square > 1");
            Self { x, y, d }
        }
    }

    pub fn rational(x: BigRational) -> Self {
        Self {
            x,
            y: BigRational::zero(),
            d: 0,
        }
    }

    /// √d as a field element.
    pub fn sqrt(d: u64) -> Self {
        Self::new(BigRational::zero(), BigRational::one(), d)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.x
    }

    pub fn surd_part(&self) -> &BigRational {
        &self.y
    }

    pub fn radicand(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.y.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.x)
    }

    fn common_d(&self, other: &Self) -> u64 {
        match (self.d, other.d) {
            (0, d) | (d, 0) => d,
            (a, b) if a == b => a,
            (a, b) => panic!("mixing radicands {a} and {b}"),
        }
    }

    fn conjugate(&self) -> Self {
        Self {
            x: self.x.clone(),
            y: -self.y.clone(),
            d: self.d,
        }
    }

    /// Field norm x² − d·y², a rational.
    pub fn norm(&self) -> BigRational {
        &self.x * &self.x - &self.y * &self.y * BigRational::from_integer(BigInt::from(self.d))
    }

    /// Exact sign: −1, 0 or 1.
    pub fn signum_exact(&self) -> i32 {
        let sx = sign_of(&self.x);
        let sy = sign_of(&self.y);
        if sy == 0 {
            return sx;
        }
        if sx == 0 || sx == sy {
            return sy;
        }
        // Opposite signs: compare x² with d·y².
        let x2 = &self.x * &self.x;
        let dy2 = &self.y * &self.y * BigRational::from_integer(BigInt::from(self.d));
        match x2.cmp(&dy2) {
            Ordering::Greater => sx,
            Ordering::Less => sy,
            Ordering::Equal => 0,
        }
    }

    /// Rational lower and upper bounds with width at most `2^-bits` times
    /// the surd coefficient.
    pub fn bracket(&self, bits: u32) -> (BigRational, BigRational) {
        if self.is_rational() {
            return (self.x.clone(), self.x.clone());
        }
        let (lo, hi) = sqrt_bracket(self.d, bits);
        let a = &self.x + &self.y * &lo;
        let b = &self.x + &self.y * &hi;
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }
}

fn sign_of(r: &BigRational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_negative() {
        -1
    } else {
        1
    }
}

pub fn is_square(d: u64) -> bool {
    let r = (d as f64).sqrt() as u64;
    (r.saturating_sub(1)..=r + 1).any(|c| c * c == d)
}

/// Rational bracket `lo ≤ √d ≤ hi` with `hi − lo = 2^-bits`.
pub fn sqrt_bracket(d: u64, bits: u32) -> (BigRational, BigRational) {
    let scaled = BigInt::from(d) << (2 * bits as usize);
    let root = scaled.sqrt();
    let den = BigInt::one() << bits as usize;
    let lo = BigRational::new(root.clone(), den.clone());
    let hi = BigRational::new(root + 1, den);
    (lo, hi)
}

impl fmt::Debug for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}", self.x)
        } else {
            write!(f, "{} + {}·√{}", self.x, self.y, self.d)
        }
    }
}

impl PartialOrd for QuadSurd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(match (self.clone() - other.clone()).signum_exact() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        })
    }
}

impl Add for QuadSurd {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let d = self.common_d(&rhs);
        Self::new(self.x + rhs.x, self.y + rhs.y, d)
    }
}

impl Sub for QuadSurd {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let d = self.common_d(&rhs);
        Self::new(self.x - rhs.x, self.y - rhs.y, d)
    }
}

impl Mul for QuadSurd {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let d = self.common_d(&rhs);
        let dq = BigRational::from_integer(BigInt::from(d));
        let x = &self.x * &rhs.x + &self.y * &rhs.y * dq;
        let y = &self.x * &rhs.y + &self.y * &rhs.x;
        Self::new(x, y, d)
    }
}

impl Div for QuadSurd {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let n = rhs.norm();
        assert!(!n.is_zero(), "division by zero in quadratic field");
        let num = self * rhs.conjugate();
        let d = num.d;
        Self::new(num.x / n.clone(), num.y / n, d)
    }
}

/// Division in a field leaves no remainder.
impl Rem for QuadSurd {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "remainder by zero");
        Self::zero()
    }
}

impl Neg for QuadSurd {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            x: -self.x,
            y: -self.y,
            d: self.d,
        }
    }
}

impl Zero for QuadSurd {
    fn zero() -> Self {
        Self::rational(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }
}

impl One for QuadSurd {
    fn one() -> Self {
        Self::rational(BigRational::one())
    }
}

impl Num for QuadSurd {
    type FromStrRadixErr = <BigRational as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        BigRational::from_str_radix(s, radix).map(Self::rational)
    }
}

impl Scalar for QuadSurd {
    fn from_i64(v: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(v)))
    }
    fn magnitude(&self) -> Self {
        if self.signum_exact() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn to_f64(&self) -> f64 {
        if self.is_rational() {
            return ratio_to_f64(&self.x);
        }
        // Cancellation-safe: bracket to 80 bits then take the midpoint.
        let (lo, hi) = self.bracket(80);
        ratio_to_f64(&((lo + hi) / BigRational::from_integer(BigInt::from(2))))
    }
    const EXACT: bool = true;
}

/// Builds a rational from two machine integers.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Greatest common divisor of two big integers (non-negative).
pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}
