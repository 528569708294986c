//! Weak Birkhoff normal form: the generating Hamiltonian F on A(1), the
//! homological identity {F, H⁽²⁾} + 𝓗⁽⁴,¹⁾ = 0 and the change of
//! coordinates Γ as the time-one flow of X_F.
//!
//! Brackets and flows use ρ̇ = i ∂H/∂ρ̄ and
//! {F, G} = i Σ (∂F/∂ρ̄ ∂G/∂ρ − ∂F/∂ρ ∂G/∂ρ̄), so a monomial with
//! frequency Ω satisfies {M, H⁽²⁾} = −iΩ·M.

use std::collections::HashSet;
use std::io::Write;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::diophantine::OmegaSpec;
use crate::error::{Error, Result};
use crate::lambda_set::LambdaSet;
use crate::nls_sim::{eigenvalue_f64, multiplicity, to_frame, Frame, SparseFourierState};
use crate::ode::{integrate_with, OdeConfig};
use crate::poly::{orderings, poisson_bracket, quadratic_part, quartic_sum, Monomial, Poly};
use crate::quartic::QuarticForm;
use crate::resonance::{enumerate_a1, omega_r, Mode, Quartet, RSquared};
use crate::scalar::{QuadSurd, Real, Scalar};

/// Weight of an ordered nontrivial quartet in 𝓗⁽⁴⁾.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// ½ per ordered quartet; reproduces the truncated NLS field.
    #[default]
    Field,
    /// ¼ per ordered quartet, F = 1/(4iΩ).
    Display,
}

impl Normalization {
    pub fn weight<S: Scalar>(&self) -> S {
        match self {
            Normalization::Field => S::one() / S::from_i64(2),
            Normalization::Display => S::one() / S::from_i64(4),
        }
    }
}

/// Scalars into which ω² can be converted.
pub trait OmegaScalar: Scalar {
    fn omega_squared(omega: &OmegaSpec) -> Result<Self>;
}

impl OmegaScalar for f64 {
    fn omega_squared(omega: &OmegaSpec) -> Result<Self> {
        Ok(RSquared::from_omega(omega).to_f64())
    }
}

impl OmegaScalar for f32 {
    fn omega_squared(omega: &OmegaSpec) -> Result<Self> {
        Ok(RSquared::from_omega(omega).to_f64() as f32)
    }
}

impl OmegaScalar for QuadSurd {
    fn omega_squared(omega: &OmegaSpec) -> Result<Self> {
        omega
            .omega_squared_exact()
            .ok_or_else(|| Error::PrecisionExhausted(format!("ω = {omega} has no exact square")))
    }
}

impl OmegaScalar for BigRational {
    fn omega_squared(omega: &OmegaSpec) -> Result<Self> {
        let w2 = QuadSurd::omega_squared(omega)?;
        w2.as_rational()
            .cloned()
            .ok_or_else(|| Error::InvalidInput(format!("ω² for ω = {omega} is irrational")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FTerm<S: Scalar> {
    /// Canonical A(1) quartet.
    pub quartet: Quartet,
    pub omega: S,
    /// Coefficient of each ordered quartet: weight/(iΩ).
    pub coefficient: Complex<S>,
    /// Number of ordered quartets sharing the monomial.
    pub multiplicity: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratingFunction<S: Scalar> {
    pub terms: Vec<FTerm<S>>,
    pub support: Vec<Mode>,
    pub normalization: Normalization,
}

/// Builds F for an explicit list of canonical A(1) quartets.
pub fn build_f_from<S: Scalar>(a1: &[Quartet], r2: &S, normalization: Normalization) -> Result<GeneratingFunction<S>> {
    let w: S = normalization.weight();
    let mut support = HashSet::new();
    let mut terms = Vec::with_capacity(a1.len());
    for q in a1 {
        let om = omega_r(q, r2);
        if om.is_zero() {
            return Err(Error::ResonantA1(*q));
        }
        // w/(iΩ) = −i·w/Ω
        let coefficient = Complex::new(S::zero(), -(w.clone() / om.clone()));
        terms.push(FTerm {
            quartet: *q,
            omega: om,
            coefficient,
            multiplicity: multiplicity(q),
        });
        support.extend(q.0.iter().copied());
    }
    let mut support: Vec<Mode> = support.into_iter().collect();
    support.sort();
    Ok(GeneratingFunction {
        terms,
        support,
        normalization,
    })
}

/// F on the A(1) quartets of `set`. Nonresonance is certified with exact
/// or interval arithmetic before any coefficient is formed.
pub fn build_f<S: OmegaScalar>(set: &LambdaSet, omega: &OmegaSpec, normalization: Normalization) -> Result<GeneratingFunction<S>> {
    let a1 = enumerate_a1(set);
    let r2 = RSquared::from_omega(omega);
    for q in &a1 {
        match r2.omega(q).is_zero() {
            Some(true) => return Err(Error::ResonantA1(*q)),
            Some(false) => {}
            None => return Err(Error::PrecisionExhausted(format!("cannot separate Ω{q:?} from 0"))),
        }
    }
    build_f_from(&a1, &S::omega_squared(omega)?, normalization)
}

impl<S: Scalar> GeneratingFunction<S> {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// F as a polynomial, summing every ordered quartet.
    pub fn to_poly(&self) -> Poly<S> {
        quartic_sum(
            self.terms
                .iter()
                .flat_map(|t| orderings(&t.quartet).into_iter().map(|q| (q, t.coefficient.clone()))),
        )
    }

    /// Largest |coefficient| over the terms.
    pub fn max_coefficient(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.im.to_f64().abs()).fold(0.0, f64::max)
    }

    /// F as a numerical quartic form over its support.
    pub fn quartic_form<T: Real>(&self) -> QuarticForm<T> {
        let mut form = QuarticForm::new(self.support.clone());
        for t in &self.terms {
            let c = Complex::new(T::lit(t.coefficient.re.to_f64()), T::lit(t.coefficient.im.to_f64())) * T::lit(t.multiplicity as f64);
            form.push(&t.quartet, c, T::lit(t.omega.to_f64()));
        }
        form
    }

    /// CSV rows: quartet coordinates, Ω, Re and Im of the coefficient.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
        w.write_record([
            "j1",
            "k1",
            "j2",
            "k2",
            "j3",
            "k3",
            "j4",
            "k4",
            "omega",
            "coef_re",
            "coef_im",
            "multiplicity",
        ])
        .map_err(io)?;
        for t in &self.terms {
            let mut rec: Vec<String> = t.quartet.0.iter().flat_map(|m| [m.j.to_string(), m.k.to_string()]).collect();
            rec.push(format!("{:.17e}", t.omega.to_f64()));
            rec.push(format!("{:.17e}", t.coefficient.re.to_f64()));
            rec.push(format!("{:.17e}", t.coefficient.im.to_f64()));
            rec.push(t.multiplicity.to_string());
            w.write_record(&rec).map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        Ok(())
    }
}

/// The part of 𝓗⁽⁴⁾ carried by the given canonical quartets, expanded
/// over all orderings.
pub fn quartic_hamiltonian<S: Scalar>(quartets: &[Quartet], normalization: Normalization) -> Poly<S> {
    let w: S = normalization.weight();
    let c = Complex::new(w, S::zero());
    quartic_sum(quartets.iter().flat_map(|q| orderings(q).into_iter().map(|o| (o, c.clone()))))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    /// max |coefficient| of {F, H⁽²⁾} + 𝓗⁽⁴,¹⁾.
    pub max_abs: f64,
    /// Number of monomials with a nonzero residual coefficient.
    pub nonzero: usize,
    pub exact: bool,
}

/// {F, H⁽²⁾} + 𝓗⁽⁴,¹⁾ with multiplicities from symbolic expansion.
pub fn homological_residual<S: OmegaScalar>(f: &GeneratingFunction<S>, set: &LambdaSet, omega: &OmegaSpec) -> Result<Residual> {
    let r2 = S::omega_squared(omega)?;
    let lam = |m: &Mode| S::from_i64(m.j * m.j) + r2.clone() * S::from_i64(m.k * m.k);
    let h2 = quadratic_part(&f.support, lam);
    let a1 = enumerate_a1(set);
    let h41 = quartic_hamiltonian::<S>(&a1, f.normalization);
    let res = poisson_bracket(&f.to_poly(), &h2).plus(&h41);
    Ok(Residual {
        max_abs: res.max_abs(),
        nonzero: res.len(),
        exact: S::EXACT,
    })
}

/// Direct check that every F coefficient solves its scalar equation
/// c·(−iΩ) + w = 0; the coefficientwise view of the homological identity.
pub fn coefficient_defects<S: Scalar>(f: &GeneratingFunction<S>) -> Vec<(Monomial, Complex<S>)> {
    let w: S = f.normalization.weight();
    f.terms
        .iter()
        .map(|t| {
            let lhs = t.coefficient.clone() * Complex::new(S::zero(), -t.omega.clone()) + Complex::new(w.clone(), S::zero());
            (Monomial::quartic(&t.quartet), lhs)
        })
        .collect()
}

/// Sufficient condition for |Ω_ω| ≥ p²/2 on A(1): |r|·D² ≤ ¼ with
/// r = q²ω²/p² − 1 and D the spread of the unscaled k-coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct L1Hypothesis {
    pub r: f64,
    pub spread: i64,
    /// |r|·D², as a float for display.
    pub value: f64,
    pub holds: bool,
}

pub fn check_l1_hypothesis(set: &LambdaSet, omega: &OmegaSpec) -> Result<L1Hypothesis> {
    let (p, q) = set.scaling();
    let w2 = omega
        .omega_squared_exact()
        .ok_or_else(|| Error::PrecisionExhausted(format!("ω = {omega} has no exact square")))?;
    let ratio = QuadSurd::rational(BigRational::new(
        BigInt::from(q) * BigInt::from(q),
        BigInt::from(p) * BigInt::from(p),
    ));
    let r = w2 * ratio - QuadSurd::rational(BigRational::from_integer(1.into()));
    let ks: Vec<i64> = set.base().generations().iter().flatten().map(|m| m.k).collect();
    let spread = ks.iter().max().copied().unwrap_or(0) - ks.iter().min().copied().unwrap_or(0);
    let d2 = QuadSurd::rational(BigRational::from_integer(BigInt::from(spread) * BigInt::from(spread)));
    let value = r.magnitude() * d2;
    let quarter = QuadSurd::rational(BigRational::new(1.into(), 4.into()));
    let holds = value <= quarter;
    Ok(L1Hypothesis {
        r: r.to_f64(),
        spread,
        value: value.to_f64(),
        holds,
    })
}

/// Errors with [`Error::HypothesisViolated`] unless the hypothesis holds.
pub fn require_l1_hypothesis(set: &LambdaSet, omega: &OmegaSpec) -> Result<L1Hypothesis> {
    let h = check_l1_hypothesis(set, omega)?;
    if !h.holds {
        return Err(Error::HypothesisViolated(format!("|r|·D² = {:.3e} exceeds 1/4", h.value)));
    }
    Ok(h)
}

/// Largest η with η²/𝓛₁ ≤ 10⁻².
pub fn default_eta(l1: f64) -> f64 {
    (1e-2 * l1).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Inverse,
}

/// Γ or Γ⁻¹ as the time-±1 flow of X_F.
#[derive(Clone, Debug)]
pub struct BirkhoffMap<T: Real = f64> {
    form: QuarticForm<T>,
    pub direction: Direction,
    pub config: OdeConfig,
    /// Inputs must lie in B(η); the flow must stay in B(2η).
    pub eta: f64,
}

impl<T: Real> BirkhoffMap<T> {
    pub fn new<S: Scalar>(f: &GeneratingFunction<S>, direction: Direction, config: OdeConfig, eta: f64) -> Self {
        BirkhoffMap {
            form: f.quartic_form(),
            direction,
            config,
            eta,
        }
    }

    pub fn inverse(&self) -> Self {
        let direction = match self.direction {
            Direction::Forward => Direction::Inverse,
            Direction::Inverse => Direction::Forward,
        };
        BirkhoffMap { direction, ..self.clone() }
    }

    pub fn support(&self) -> &[Mode] {
        self.form.modes()
    }

    /// F at a point of its support (gauged coordinates).
    pub fn f_value(&self, beta: &[Complex<T>]) -> T {
        self.form.value(beta, None).re
    }

    /// X_F = i ∂F/∂β̄.
    pub fn vector_field(&self, beta: &[Complex<T>], out: &mut [Complex<T>]) {
        for o in out.iter_mut() {
            *o = Complex::new(T::zero(), T::zero());
        }
        self.form.add_grad_conj(beta, None, out);
        let i = Complex::new(T::zero(), T::one());
        for o in out.iter_mut() {
            *o = i * *o;
        }
    }

    /// Flows a dense vector over the support (gauged coordinates).
    /// `outside` is the ℓ¹ mass of the state off the support.
    pub fn flow(&self, beta: &[Complex<T>], outside: f64) -> Result<Vec<Complex<T>>> {
        let l1 = |v: &[Complex<T>]| v.iter().map(|x| x.norm().to_f64().unwrap_or(f64::NAN)).sum::<f64>() + outside;
        let n0 = l1(beta);
        if n0 > self.eta {
            return Err(Error::BallEscape {
                norm: n0,
                radius: self.eta,
            });
        }
        if self.form.terms().is_empty() {
            return Ok(beta.to_vec());
        }
        let t1 = match self.direction {
            Direction::Forward => T::one(),
            Direction::Inverse => -T::one(),
        };
        let mut escaped: Option<f64> = None;
        let radius = 2.0 * self.eta;
        let (_, y, _) = integrate_with(
            |_, y: &[Complex<T>], d: &mut [Complex<T>]| self.vector_field(y, d),
            T::zero(),
            beta,
            t1,
            &self.config,
            |s| {
                let n = l1(s.y1);
                if n > radius {
                    escaped = Some(n);
                    return false;
                }
                true
            },
        )?;
        if let Some(norm) = escaped {
            return Err(Error::BallEscape { norm, radius });
        }
        Ok(y)
    }
}

/// Applies Γ^{±1} to a state. Modes off the support of F are unchanged.
/// Rotating-frame states are conjugated through the gauged frame at their
/// own time; physical states are rejected.
pub fn gamma_apply<T: Real>(map: &BirkhoffMap<T>, state: &SparseFourierState<T>) -> Result<SparseFourierState<T>> {
    let gauged = match state.frame {
        Frame::Gauged => state.clone(),
        Frame::Rotating => to_frame(state, Frame::Gauged)?,
        Frame::Physical => return Err(Error::InvalidInput("Γ acts on gauged or rotating coordinates".into())),
    };
    let support = map.support();
    let beta: Vec<Complex<T>> = support.iter().map(|m| gauged.get(m)).collect();
    let on: HashSet<&Mode> = support.iter().collect();
    let outside: f64 = gauged
        .amplitudes
        .iter()
        .filter(|(m, _)| !on.contains(m))
        .map(|(_, x)| x.norm().to_f64().unwrap_or(f64::NAN))
        .sum();
    let out = map.flow(&beta, outside)?;
    let mut result = gauged;
    for (m, x) in support.iter().zip(out) {
        if x.norm() > T::zero() || result.amplitudes.contains_key(m) {
            result.amplitudes.insert(*m, x);
        }
    }
    match state.frame {
        Frame::Rotating => to_frame(&result, Frame::Rotating),
        _ => Ok(result),
    }
}

/// Ω per A(1) term, as a float, for diagnostics.
pub fn term_frequencies<S: Scalar>(f: &GeneratingFunction<S>, omega2: f64) -> Vec<f64> {
    f.terms
        .iter()
        .map(|t| {
            let [a, b, c, d] = t.quartet.0;
            eigenvalue_f64(&a, omega2) - eigenvalue_f64(&b, omega2) + eigenvalue_f64(&c, omega2) - eigenvalue_f64(&d, omega2)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn display_coefficient_for_omega_minus_two() {
        let q = Quartet::new(Mode::new(0, 0), Mode::new(1, 1), Mode::new(2, 0), Mode::new(1, -1));
        let f = build_f_from::<BigRational>(&[q.canonical()], &rat(2, 1), Normalization::Display).unwrap();
        assert_eq!(f.terms[0].omega, rat(-2, 1));
        assert_eq!(f.terms[0].coefficient, Complex::new(rat(0, 1), rat(1, 8)));
    }

    #[test]
    fn resonant_quartet_is_rejected() {
        // Ω = −2 + 2r² vanishes at r² = 1
        let q = Quartet::new(Mode::new(0, 0), Mode::new(1, 1), Mode::new(2, 0), Mode::new(1, -1));
        assert!(matches!(
            build_f_from::<BigRational>(&[q], &rat(1, 1), Normalization::Field),
            Err(Error::ResonantA1(_))
        ));
    }
}
